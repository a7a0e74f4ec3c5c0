//! Parameter sweeps over matrix size, with JSON and CSV reports.
//!
//! Trials run one after another so that per-iteration timings are not
//! disturbed by sibling work.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{evaluate_with_baselines, ErrorReport, SamplingMode};
use crate::error::{Error, Result};
use crate::matrix::{gen_matrix, Distribution, GenSpec};
use crate::pipeline::ApproxConfig;

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct SweepSpec {
    /// Ascending, nonempty.
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub distribution: Distribution,
    pub max_mag: f64,
    pub seed: u64,
    pub config: ApproxConfig,
    /// Sample counts for the sampling baseline; empty for none.
    pub baselines: Vec<usize>,
    pub baseline_mode: SamplingMode,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::invalid("sweep needs at least one size"));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sweep sizes must be strictly ascending"));
        }
        if self.sizes[0] == 0 {
            return Err(Error::invalid("sweep sizes must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("sweep needs at least one trial per size"));
        }
        if let Some(&s) = self.baselines.iter().find(|&&s| s == 0 || s > self.sizes[0]) {
            return Err(Error::invalid(format!(
                "baseline sample count {s} must lie in 1..={} (the smallest size)",
                self.sizes[0]
            )));
        }
        Ok(())
    }

    /// Seed of trial `trial` at size `n`. Matrix `A` uses it directly and `B`
    /// uses it with the top bit flipped.
    pub fn trial_seed(&self, n: usize, trial: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add((n as u64) << 20)
            .wrapping_add(trial as u64)
    }
}

/// Median per-iteration solve time for one size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub median_time_per_iter_s: f64,
    pub median_iterations: f64,
    /// This row's median time over the previous row's.
    pub ratio_to_previous: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: u32,
    pub runs: Vec<ErrorReport>,
    pub scaling: Vec<ScalingRow>,
    #[serde(skip)]
    pub trials: Vec<usize>,
    #[serde(skip)]
    pub baselines: Vec<usize>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

pub fn sweep(spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    let mut runs = Vec::new();
    let mut trials = Vec::new();
    let mut scaling: Vec<ScalingRow> = Vec::new();
    for &n in &spec.sizes {
        let mut per_iter = Vec::with_capacity(spec.trials);
        let mut iters = Vec::with_capacity(spec.trials);
        for trial in 0..spec.trials {
            let seed = spec.trial_seed(n, trial);
            let gen = |seed| {
                gen_matrix(&GenSpec {
                    n,
                    distribution: spec.distribution,
                    max_mag: spec.max_mag,
                    seed,
                })
            };
            let a = gen(seed)?;
            let b = gen(seed ^ (1 << 63))?;
            let mut report = evaluate_with_baselines(
                &a,
                &b,
                &spec.config,
                &spec.baselines,
                spec.baseline_mode,
                seed,
            )?;
            report.seed = Some(seed);
            per_iter.push(report.time_per_iteration_s());
            iters.push(report.iterations as f64);
            runs.push(report);
            trials.push(trial);
        }
        let median_time = median(per_iter);
        scaling.push(ScalingRow {
            n,
            median_time_per_iter_s: median_time,
            median_iterations: median(iters),
            ratio_to_previous: scaling
                .last()
                .map(|prev| median_time / prev.median_time_per_iter_s),
        });
    }
    Ok(SweepReport {
        version: REPORT_VERSION,
        runs,
        scaling,
        trials,
        baselines: spec.baselines.clone(),
    })
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

impl SweepReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid(format!("serializing sweep report: {e}")))
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut header: Vec<String> = [
            "n",
            "trial",
            "seed",
            "fro_abs",
            "fro_rel",
            "probe_residual",
            "iterations",
            "delta_target",
            "delta_met",
            "m_prime",
            "x_prime_norm",
            "x_dprime_norm",
            "x_tprime_norm",
            "time_build_s",
            "time_solve_s",
            "time_exact_s",
            "time_per_iter_s",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend(self.baselines.iter().map(|s| format!("baseline_s{s}_fro_rel")));
        header
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::invalid(format!("writing csv: {e}"));
        writer.write_record(self.csv_header()).map_err(csv_err)?;
        for (run, trial) in self.runs.iter().zip(&self.trials) {
            let mut record = vec![
                run.n.to_string(),
                trial.to_string(),
                run.seed.map(|s| s.to_string()).unwrap_or_default(),
                num(run.fro_abs),
                num(run.fro_rel),
                num(run.probe_residual),
                run.iterations.to_string(),
                num(run.delta_target),
                run.delta_met.to_string(),
                num(run.m_prime),
                num(run.x_prime_norm),
                num(run.x_dprime_norm),
                num(run.x_tprime_norm),
                num(run.time_build_s),
                num(run.time_solve_s),
                num(run.time_exact_s),
                num(run.time_per_iteration_s()),
            ];
            record.extend(run.baseline.iter().map(|b| num(b.fro_rel)));
            writer.write_record(&record).map_err(csv_err)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::invalid(format!("writing csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::invalid(format!("writing csv: {e}")))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_json()?)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_csv()?)
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
