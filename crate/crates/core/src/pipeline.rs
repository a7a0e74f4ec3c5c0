//! probe -> right-hand side -> regularized solve -> reshape.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Vector};
use crate::norms::max_norm;
use crate::probe::{build_probe, compute_rhs, condition_bound, ProbeSchedule, ProbeSystem, ProbeVector};
use crate::solver::{closed_form_solve, steepest_descent, SolverConfig, SolverReport, StepRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverChoice {
    Adaptive,
    Fixed,
    ClosedForm,
}

impl std::str::FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sd" => Ok(SolverChoice::Adaptive),
            "sd-fixed" => Ok(SolverChoice::Fixed),
            "closed" => Ok(SolverChoice::ClosedForm),
            other => Err(Error::invalid(format!(
                "unknown solver `{other}` (expected sd, sd-fixed or closed)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxConfig {
    /// Target Frobenius error.
    pub delta: f64,
    pub schedule: ProbeSchedule,
    pub solver: SolverChoice,
    /// The solver tolerance is `rho = delta / rho_divisor`.
    pub rho_divisor: f64,
    /// Overrides the default iteration cap derived from the condition bound.
    pub max_iters: Option<usize>,
    /// When set, inputs with any `|entry| > max_magnitude` are rejected.
    pub max_magnitude: Option<f64>,
}

impl ApproxConfig {
    pub fn new(delta: f64) -> Self {
        ApproxConfig {
            delta,
            schedule: ProbeSchedule::PAPER,
            solver: SolverChoice::Adaptive,
            rho_divisor: 1.001,
            max_iters: None,
            max_magnitude: None,
        }
    }

    pub fn with_schedule(mut self, schedule: ProbeSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_solver(mut self, solver: SolverChoice) -> Self {
        self.solver = solver;
        self
    }

    pub fn rho(&self) -> Result<f64> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid(format!(
                "delta must be positive and finite, got {}",
                self.delta
            )));
        }
        let rho = self.delta / self.rho_divisor;
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid(format!(
                "rho = delta / {} = {rho} is not positive",
                self.rho_divisor
            )));
        }
        Ok(rho)
    }
}

#[derive(Clone, Debug)]
pub struct ApproxResult {
    pub c_prime: DenseMatrix,
    /// `None` for the closed-form solver.
    pub solver_report: Option<SolverReport>,
    pub system: ProbeSystem,
    pub rho: f64,
    pub wall_time_build: Duration,
    pub wall_time_solve: Duration,
}

impl ApproxResult {
    pub fn probe(&self) -> &ProbeVector {
        &self.system.probe
    }

    pub fn iterations(&self) -> usize {
        self.solver_report.as_ref().map_or(0, |r| r.iterations)
    }

    pub fn converged(&self) -> bool {
        self.solver_report.as_ref().is_none_or(|r| r.converged())
    }
}

/// Row-major reshape of a length `n^2` vector: entries `n*i .. n*i + n` become row `i`.
pub fn reshape_solution(c: &Vector, n: usize) -> Result<DenseMatrix> {
    if c.dim() != n * n {
        return Err(Error::DimensionMismatch {
            op: "reshape_solution",
            expected: n * n,
            found: c.dim(),
        });
    }
    DenseMatrix::from_vec(n, n, c.as_slice().to_vec())
}

pub fn flatten(c: &DenseMatrix) -> Vector {
    Vector::from_finite(c.as_slice().to_vec())
}

/// Estimates `AB` without forming it.
pub fn approx_multiply(a: &DenseMatrix, b: &DenseMatrix, config: &ApproxConfig) -> Result<ApproxResult> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::invalid(format!(
            "inputs must be square and of equal size, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.rows();
    let rho = config.rho()?;
    if let Some(bound) = config.max_magnitude {
        for (name, m) in [("A", a), ("B", b)] {
            let largest = max_norm(m);
            if largest > bound {
                return Err(Error::invalid(format!(
                    "{name} has an entry of magnitude {largest}, above the bound {bound}"
                )));
            }
        }
    }

    let start = Instant::now();
    let probe = build_probe(n, &config.schedule)?;
    let system = compute_rhs(a, b, &probe)?;
    let wall_time_build = start.elapsed();

    let start = Instant::now();
    let (c, solver_report) = match config.solver {
        SolverChoice::ClosedForm => (closed_form_solve(&system).into_vec(), None),
        SolverChoice::Adaptive | SolverChoice::Fixed => {
            let step = match config.solver {
                SolverChoice::Fixed => StepRule::fixed_for(&probe),
                _ => StepRule::Adaptive,
            };
            let max_iters = config
                .max_iters
                .unwrap_or_else(|| SolverConfig::default_max_iters(condition_bound(&probe), rho));
            let solver_config = SolverConfig::new(rho, max_iters, step)?;
            let report = steepest_descent(&probe.gram(), &system.y, &solver_config)?;
            (report.solution.as_slice().to_vec(), Some(report))
        }
    };
    let c_prime = DenseMatrix::from_finite(n, n, c);
    let wall_time_solve = start.elapsed();

    Ok(ApproxResult {
        c_prime,
        solver_report,
        system,
        rho,
        wall_time_build,
        wall_time_solve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gen_matrix, Distribution, GenSpec};
    use crate::probe::gram_matvec;
    use proptest::prelude::*;

    fn random(n: usize, seed: u64) -> DenseMatrix {
        gen_matrix(&GenSpec {
            n,
            distribution: Distribution::UniformSigned,
            max_mag: 1.0,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn reshape_examples() {
        let c = Vector::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let m = reshape_solution(&c, 2).unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap());
        assert_eq!(reshape_solution(&Vector::zeros(9), 3).unwrap(), DenseMatrix::zeros(3, 3));
        assert!(reshape_solution(&c, 3).is_err());
    }

    #[test]
    fn zero_inputs_give_zero_for_every_solver() {
        let z = DenseMatrix::zeros(3, 3);
        for solver in [SolverChoice::Adaptive, SolverChoice::Fixed, SolverChoice::ClosedForm] {
            let out = approx_multiply(&z, &z, &ApproxConfig::new(1e-6).with_solver(solver)).unwrap();
            assert_eq!(out.c_prime, z);
            assert_eq!(out.iterations(), 0);
        }
    }

    #[test]
    fn identity_closed_form_is_constant_tenth() {
        let i2 = DenseMatrix::identity(2);
        let out = approx_multiply(&i2, &i2, &ApproxConfig::new(0.01).with_solver(SolverChoice::ClosedForm))
            .unwrap();
        // lambda + eps = 5/32, c_j = (1/8)/(5/32) * (1/8, 1/8) = (0.1, 0.1).
        for &x in out.c_prime.as_slice() {
            assert!((x - 0.1).abs() < 1e-15, "{x}");
        }
        assert!(out.solver_report.is_none());
    }

    #[test]
    fn identity_adaptive_matches_closed_form() {
        let i2 = DenseMatrix::identity(2);
        let mut config = ApproxConfig::new(1e-12);
        config.rho_divisor = 1.0;
        let sd = approx_multiply(&i2, &i2, &config).unwrap();
        assert!(sd.converged());
        for &x in sd.c_prime.as_slice() {
            assert!((x - 0.1).abs() < 1e-10, "{x}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = DenseMatrix::identity(2);
        let b = DenseMatrix::identity(3);
        assert!(approx_multiply(&a, &b, &ApproxConfig::new(0.1)).is_err());
        assert!(approx_multiply(&a, &a, &ApproxConfig::new(0.0)).is_err());
        let rect = DenseMatrix::zeros(2, 3);
        assert!(approx_multiply(&rect, &rect, &ApproxConfig::new(0.1)).is_err());

        let mut bounded = ApproxConfig::new(0.1);
        bounded.max_magnitude = Some(0.5);
        assert!(matches!(approx_multiply(&a, &a, &bounded), Err(Error::InvalidInput(_))));
        bounded.max_magnitude = Some(1.0);
        assert!(approx_multiply(&a, &a, &bounded).is_ok());
    }

    #[test]
    fn solver_names_parse() {
        assert_eq!("sd".parse::<SolverChoice>().unwrap(), SolverChoice::Adaptive);
        assert_eq!("sd-fixed".parse::<SolverChoice>().unwrap(), SolverChoice::Fixed);
        assert_eq!("closed".parse::<SolverChoice>().unwrap(), SolverChoice::ClosedForm);
        assert!("cg".parse::<SolverChoice>().is_err());
    }

    fn random_schedule(seed: u64) -> ProbeSchedule {
        ProbeSchedule::RandomUnit { seed, epsilon: Some(0.3) }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn flatten_inverts_reshape(n in 1usize..=8, seed in any::<u64>()) {
            let c = flatten(&random(n, seed));
            prop_assert_eq!(flatten(&reshape_solution(&c, n).unwrap()), c);
        }

        #[test]
        fn converged_runs_satisfy_the_regularized_system(
            n in 1usize..=12,
            seed in any::<u64>(),
            fixed in any::<bool>(),
        ) {
            let (a, b) = (random(n, seed), random(n, !seed));
            let solver = if fixed { SolverChoice::Fixed } else { SolverChoice::Adaptive };
            let config = ApproxConfig::new(1e-9).with_schedule(random_schedule(seed)).with_solver(solver);
            let out = approx_multiply(&a, &b, &config).unwrap();
            prop_assert!(out.converged());
            let report = out.solver_report.as_ref().unwrap();
            prop_assert!(report.operator_applications <= report.iterations + report.iterations / 50 + 1);
            let lhs = gram_matvec(&out.probe().gram(), &flatten(&out.c_prime)).unwrap();
            let resid = lhs.sub(&out.system.y).unwrap().norm2();
            prop_assert!(resid <= out.rho, "{} > {}", resid, out.rho);
        }

        #[test]
        fn closed_form_estimate_is_rank_one(n in 1usize..=10, seed in any::<u64>()) {
            let (a, b) = (random(n, seed), random(n, !seed));
            let config = ApproxConfig::new(1e-3)
                .with_schedule(random_schedule(seed))
                .with_solver(SolverChoice::ClosedForm);
            let out = approx_multiply(&a, &b, &config).unwrap();
            let (c, v) = (&out.c_prime, out.probe().v());
            let denom = out.probe().lambda() + out.probe().epsilon();
            let scale = crate::norms::max_norm(c).max(f64::MIN_POSITIVE);
            for i in 0..n {
                for j in 0..n {
                    let expected = out.system.u[i] * v[j] / denom;
                    prop_assert!((c.get(i, j) - expected).abs() <= 1e-12 * scale.max(1.0));
                    for k in 0..n {
                        let lhs = c.get(i, j) * v[k];
                        let rhs = c.get(i, k) * v[j];
                        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
                    }
                }
            }
        }

        #[test]
        fn estimate_scales_with_a(n in 1usize..=8, seed in any::<u64>(), alpha in -4.0f64..4.0) {
            let (a, b) = (random(n, seed), random(n, !seed));
            let config = ApproxConfig::new(1e-10).with_schedule(random_schedule(seed));
            let base = approx_multiply(&a, &b, &config).unwrap();
            let scaled = approx_multiply(&a.scale(alpha).unwrap(), &b, &config).unwrap();
            let expected = base.c_prime.scale(alpha).unwrap();
            let diff = crate::norms::frobenius_norm(&scaled.c_prime.sub(&expected).unwrap());
            // Both runs stop within rho of the same solution; |A^-1| = 1/eps.
            let slack = (1.0 + alpha.abs()) * base.rho / 0.3;
            prop_assert!(diff <= slack, "{} > {}", diff, slack);
        }
    }
}
