//! Measures an approximate product against the exact one.
//!
//! Nothing in the pipeline asserts an accuracy guarantee; the numbers
//! collected here are the only judgement of how close `C'` is to `AB`.

mod baseline;
mod sweep;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use baseline::{baseline_sampling, SamplingMode};
pub use sweep::{sweep, ScalingRow, SweepReport, SweepSpec, REPORT_VERSION};

use crate::error::{Error, Result};
use crate::matrix::{matmul_exact, matvec, DenseMatrix};
use crate::norms::{frobenius_norm, inf_norm};
use crate::pipeline::{approx_multiply, flatten, ApproxConfig};
use crate::probe::gram_matvec;
use crate::solver::{closed_form_solve, min_norm_solution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub s: usize,
    pub fro_rel: f64,
}

/// Everything measured for one `(A, B)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub n: usize,
    pub seed: Option<u64>,
    /// `|C' - AB|_F`
    pub fro_abs: f64,
    /// `fro_abs / (|A|_F |B|_F)`, zero when both numerator and denominator vanish.
    pub fro_rel: f64,
    /// `|C' v - u|_2`
    pub probe_residual: f64,
    pub iterations: usize,
    pub delta_target: f64,
    pub delta_met: bool,
    /// Largest absolute row sum of the exact product.
    pub m_prime: f64,
    /// Norm of the returned solution.
    pub x_prime_norm: f64,
    /// Norm of the exact regularized solution.
    pub x_dprime_norm: f64,
    /// Norm of the minimum-norm solution of the unregularized system.
    pub x_tprime_norm: f64,
    pub time_build_s: f64,
    pub time_solve_s: f64,
    pub time_exact_s: f64,
    pub baseline: Vec<BaselineEntry>,

    /// `|(V^T V + eps I) c' - V^T u|_2`, the quantity the solver controls.
    #[serde(skip)]
    pub system_residual: f64,
    #[serde(skip)]
    pub rho: f64,
    #[serde(skip)]
    pub converged: bool,
    /// Time inside the solver's iteration loop; zero for the closed form.
    #[serde(skip)]
    pub time_iterating_s: f64,
}

impl ErrorReport {
    /// Iteration-loop time per step, or the whole solve time when no step ran.
    pub fn time_per_iteration_s(&self) -> f64 {
        if self.iterations == 0 {
            self.time_solve_s
        } else {
            self.time_iterating_s / self.iterations as f64
        }
    }
}

fn relative(num: f64, denom: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / denom
    }
}

/// Runs the pipeline on `(A, B)` and compares with the exact product.
pub fn evaluate(a: &DenseMatrix, b: &DenseMatrix, config: &ApproxConfig) -> Result<ErrorReport> {
    evaluate_with_baselines(a, b, config, &[], SamplingMode::WithReplacement, 0)
}

pub fn evaluate_with_baselines(
    a: &DenseMatrix,
    b: &DenseMatrix,
    config: &ApproxConfig,
    baselines: &[usize],
    mode: SamplingMode,
    seed: u64,
) -> Result<ErrorReport> {
    let result = approx_multiply(a, b, config)?;

    let start = Instant::now();
    let exact = matmul_exact(a, b)?;
    let time_exact = start.elapsed();

    let n = a.rows();
    let norm_ab = frobenius_norm(a) * frobenius_norm(b);
    let fro_abs = frobenius_norm(&result.c_prime.sub(&exact)?);

    let probe = result.probe();
    let system = &result.system;
    let probe_residual = matvec(&result.c_prime, probe.v())?.sub(&system.u)?.norm2();
    let c_flat = flatten(&result.c_prime);
    let system_residual = gram_matvec(&probe.gram(), &c_flat)?.sub(&system.y)?.norm2();

    let baseline = baselines
        .iter()
        .map(|&s| {
            let approx = baseline_sampling(a, b, s, seed, mode)?;
            let err = frobenius_norm(&approx.sub(&exact)?);
            Ok(BaselineEntry {
                s,
                fro_rel: relative(err, norm_ab),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ErrorReport {
        n,
        seed: None,
        fro_abs,
        fro_rel: relative(fro_abs, norm_ab),
        probe_residual,
        iterations: result.iterations(),
        delta_target: config.delta,
        delta_met: fro_abs <= config.delta,
        m_prime: inf_norm(&exact),
        x_prime_norm: c_flat.norm2(),
        x_dprime_norm: closed_form_solve(system).norm2(),
        x_tprime_norm: min_norm_solution(system).norm2(),
        time_build_s: result.wall_time_build.as_secs_f64(),
        time_solve_s: result.wall_time_solve.as_secs_f64(),
        time_exact_s: time_exact.as_secs_f64(),
        baseline,
        system_residual,
        rho: result.rho,
        converged: result.converged(),
        time_iterating_s: result
            .solver_report
            .as_ref()
            .map_or(0.0, |r| r.loop_time.as_secs_f64()),
    })
}

/// `{"version": 1, "runs": [...]}` for a single evaluation.
pub fn single_report_json(report: &ErrorReport) -> Result<String> {
    serde_json::to_string_pretty(&serde_json::json!({
        "version": REPORT_VERSION,
        "runs": [report],
    }))
    .map_err(|e| Error::invalid(format!("serializing report: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::SolverChoice;
    use crate::probe::ProbeSchedule;

    #[test]
    fn zero_inputs_meet_any_delta() {
        let z = DenseMatrix::zeros(2, 2);
        let r = evaluate(&z, &z, &ApproxConfig::new(1e-3)).unwrap();
        assert_eq!(r.fro_abs, 0.0);
        assert_eq!(r.fro_rel, 0.0);
        assert!(r.delta_met);
    }

    #[test]
    fn identity_under_paper_schedule_misses_delta() {
        // C' = 0.1 everywhere against C = I: (0.9^2 * 2 + 0.1^2 * 2) = 1.64.
        let i2 = DenseMatrix::identity(2);
        let config = ApproxConfig::new(0.01).with_solver(SolverChoice::ClosedForm);
        let r = evaluate(&i2, &i2, &config).unwrap();
        assert!((r.fro_abs - 1.64f64.sqrt()).abs() < 1e-12, "{}", r.fro_abs);
        assert!(!r.delta_met);
        assert_eq!(r.m_prime, 1.0);
        // |x''| = |u| |v| / (lambda + eps) = (sqrt(2)/8)(sqrt(2)/8) / (5/32) = 0.2
        assert!((r.x_dprime_norm - 0.2).abs() < 1e-15);
        // |x'''| = |u| / |v| = 1
        assert!((r.x_tprime_norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_coordinate_probe_recovers_first_column() {
        let i2 = DenseMatrix::identity(2);
        let config = ApproxConfig::new(0.5)
            .with_solver(SolverChoice::ClosedForm)
            .with_schedule(ProbeSchedule::Explicit {
                v: vec![1.0, 0.0],
                epsilon: 1e-12,
            });
        let r = evaluate(&i2, &i2, &config).unwrap();
        // C' ~ u v^T with u = (1, 0): only the (0, 0) entry survives.
        assert!((r.fro_abs - 1.0).abs() < 1e-9, "{}", r.fro_abs);
        assert!(!r.delta_met);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let a = crate::gen_matrix(&crate::GenSpec {
            n: 6,
            distribution: crate::Distribution::UniformSigned,
            max_mag: 1.0,
            seed: 3,
        })
        .unwrap();
        let config = ApproxConfig::new(1e-20);
        let strip = |mut r: ErrorReport| {
            r.time_build_s = 0.0;
            r.time_solve_s = 0.0;
            r.time_exact_s = 0.0;
            r.time_iterating_s = 0.0;
            r
        };
        let first = evaluate_with_baselines(&a, &a, &config, &[2, 6], SamplingMode::WithReplacement, 9).unwrap();
        let second = evaluate_with_baselines(&a, &a, &config, &[2, 6], SamplingMode::WithReplacement, 9).unwrap();
        assert_eq!(strip(first), strip(second));
    }

    #[test]
    fn json_uses_the_published_field_names() {
        let i2 = DenseMatrix::identity(2);
        let r = evaluate(&i2, &i2, &ApproxConfig::new(0.01)).unwrap();
        let value: serde_json::Value = serde_json::from_str(&single_report_json(&r).unwrap()).unwrap();
        assert_eq!(value["version"], 1);
        let run = value["runs"][0].as_object().unwrap();
        let mut keys: Vec<&str> = run.keys().map(String::as_str).collect();
        keys.sort_unstable();
        let mut expected = vec![
            "n", "seed", "fro_abs", "fro_rel", "probe_residual", "iterations", "delta_target",
            "delta_met", "m_prime", "x_prime_norm", "x_dprime_norm", "x_tprime_norm",
            "time_build_s", "time_solve_s", "time_exact_s", "baseline",
        ];
        expected.sort_unstable();
        assert_eq!(keys, expected);
    }
}
