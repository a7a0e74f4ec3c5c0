//! Steepest descent for symmetric positive definite systems over a
//! matrix-free operator, and the closed-form solution of the probe system.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix, Vector};
use crate::probe::{ProbeSystem, ProbeVector};

/// Number of incremental residual updates between full recomputations of
/// `b - A x`.
pub const RESIDUAL_REFRESH_PERIOD: usize = 50;

/// A square linear map applied without access to its entries.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// Writes `A x` into `out`. Both slices have length [`Self::dim`].
    fn apply(&self, x: &[f64], out: &mut [f64]);
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }
}

/// Adapts a closure `(x, out)` into a [`LinearOperator`] of the given dimension.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnOperator { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    /// Exact line search: `alpha = r.r / r.Ar`.
    Adaptive,
    /// `alpha = 2 / (lambda_max + lambda_min)` at every step.
    Fixed { lambda_max: f64, lambda_min: f64 },
}

impl StepRule {
    /// The fixed step matching the spectrum of a probe operator.
    pub fn fixed_for(probe: &ProbeVector) -> StepRule {
        StepRule::Fixed {
            lambda_max: probe.lambda() + probe.epsilon(),
            lambda_min: probe.epsilon(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stop once `|b - A x|_2 <= rho`.
    pub rho: f64,
    pub max_iters: usize,
    pub step: StepRule,
}

impl SolverConfig {
    pub fn new(rho: f64, max_iters: usize, step: StepRule) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid(format!(
                "target residual must be positive and finite, got {rho}"
            )));
        }
        if max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if let StepRule::Fixed {
            lambda_max,
            lambda_min,
        } = step
        {
            if !(lambda_min > 0.0 && lambda_max >= lambda_min && lambda_max.is_finite()) {
                return Err(Error::invalid(format!(
                    "fixed step needs 0 < lambda_min <= lambda_max, got ({lambda_min}, {lambda_max})"
                )));
            }
        }
        Ok(SolverConfig {
            rho,
            max_iters,
            step,
        })
    }

    /// Ten times the `kappa ln(1/rho)` iteration estimate, and never less than 10.
    pub fn default_max_iters(kappa: f64, rho: f64) -> usize {
        let estimate = (kappa * (1.0 / rho).ln() + 1.0).ceil().max(1.0);
        10 * estimate as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
}

#[derive(Clone, Debug)]
pub struct SolverReport {
    pub solution: Vector,
    pub iterations: usize,
    /// `|b - A x_i|_2` for `i = 0..=iterations`.
    pub residual_history: Vec<f64>,
    pub alpha_history: Vec<f64>,
    /// `(r_{i+1} . r_i) / (|r_{i+1}| |r_i|)` for each step, with `r_{i+1} = r_i - alpha_i A r_i`
    /// as produced by the step itself. Zero when either residual vanishes.
    pub residual_cosines: Vec<f64>,
    pub operator_applications: usize,
    pub terminated_by: Termination,
    /// Wall time spent inside the iteration loop, setup excluded.
    pub loop_time: Duration,
}

impl SolverReport {
    pub fn final_residual(&self) -> f64 {
        *self
            .residual_history
            .last()
            .expect("residual history always holds r_0")
    }

    pub fn converged(&self) -> bool {
        self.terminated_by == Termination::Converged
    }
}

/// Steepest descent from `x_0 = 0`.
///
/// Each step costs one operator application; the residual is carried
/// forward as `r - alpha A r` and recomputed from scratch every
/// [`RESIDUAL_REFRESH_PERIOD`] steps and once more before declaring
/// convergence, so the reported final residual is a true `|b - A x|`.
pub fn steepest_descent<O: LinearOperator + ?Sized>(
    op: &O,
    b: &Vector,
    config: &SolverConfig,
) -> Result<SolverReport> {
    let d = op.dim();
    if b.dim() != d {
        return Err(Error::DimensionMismatch {
            op: "steepest_descent",
            expected: d,
            found: b.dim(),
        });
    }
    let b = b.as_slice();
    // Filled rather than zero-allocated so every page is resident before the loop.
    let mut x = Vec::with_capacity(d);
    x.resize(d, 0.0);
    let mut r = b.to_vec();
    let mut ar = Vec::with_capacity(d);
    ar.resize(d, 0.0);
    let mut rr = dot(&r, &r);
    let mut residual_history = vec![rr.sqrt()];
    let mut alpha_history = Vec::new();
    let mut residual_cosines = Vec::new();
    let mut applications = 0;
    let mut iterations = 0;
    // x_0 = 0 makes r_0 = b exact.
    let mut residual_is_exact = true;

    let refresh = |x: &[f64], r: &mut [f64], ar: &mut [f64]| {
        op.apply(x, ar);
        for ((ri, bi), ai) in r.iter_mut().zip(b).zip(ar.iter()) {
            *ri = bi - ai;
        }
    };

    let start = Instant::now();
    let terminated_by = loop {
        if rr.sqrt() <= config.rho {
            if residual_is_exact {
                break Termination::Converged;
            }
            refresh(&x, &mut r, &mut ar);
            applications += 1;
            rr = dot(&r, &r);
            residual_is_exact = true;
            *residual_history.last_mut().unwrap() = rr.sqrt();
            continue;
        }
        if iterations == config.max_iters {
            break Termination::MaxIters;
        }

        op.apply(&r, &mut ar);
        applications += 1;
        let curvature = dot(&r, &ar);
        if !(curvature > 0.0) {
            return Err(Error::NotPositiveDefinite {
                iteration: iterations,
                curvature,
            });
        }
        let alpha = match config.step {
            StepRule::Adaptive => rr / curvature,
            StepRule::Fixed {
                lambda_max,
                lambda_min,
            } => 2.0 / (lambda_max + lambda_min),
        };

        let refresh_now = (iterations + 1) % RESIDUAL_REFRESH_PERIOD == 0;
        let mut cross = 0.0;
        let mut carried_rr = 0.0;
        let mut x_abs = 0.0;
        for ((xi, ri), ai) in x.iter_mut().zip(r.iter_mut()).zip(&ar) {
            *xi += alpha * *ri;
            let next = *ri - alpha * ai;
            cross += next * *ri;
            carried_rr += next * next;
            x_abs += xi.abs();
            *ri = next;
        }
        iterations += 1;
        residual_is_exact = false;

        // The cosine is measured on the step's own pair (r_i, r_i - alpha A r_i),
        // before any refresh replaces the carried residual.
        let mut new_rr = carried_rr;
        if refresh_now {
            refresh(&x, &mut r, &mut ar);
            applications += 1;
            residual_is_exact = true;
            new_rr = dot(&r, &r);
        }

        if !(new_rr.is_finite() && x_abs.is_finite()) {
            return Err(Error::Divergence {
                iteration: iterations,
            });
        }
        let denom = (carried_rr * rr).sqrt();
        residual_cosines.push(if denom > 0.0 { cross / denom } else { 0.0 });
        alpha_history.push(alpha);
        residual_history.push(new_rr.sqrt());
        rr = new_rr;
    };
    let loop_time = start.elapsed();

    Ok(SolverReport {
        solution: Vector::from_finite(x),
        iterations,
        residual_history,
        alpha_history,
        residual_cosines,
        operator_applications: applications,
        terminated_by,
        loop_time,
    })
}

/// Solves `(v v^T + eps I) z = rhs` for one length-`n` block by the
/// Sherman-Morrison formula:
/// `z = rhs/eps - v (v . rhs) / (eps (eps + lambda))`.
pub fn sherman_morrison_block_solve(probe: &ProbeVector, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = probe.n();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            op: "sherman_morrison_block_solve",
            expected: n,
            found: rhs.len(),
        });
    }
    let eps = probe.epsilon();
    let v = probe.v().as_slice();
    let coef = dot(v, rhs) / (eps * (eps + probe.lambda()));
    Ok(rhs.iter().zip(v).map(|(z, vi)| z / eps - coef * vi).collect())
}

/// Applies `(V^T V + eps I)^{-1}` to an arbitrary vector of length `n^2`, block by block.
pub fn apply_gram_inverse(probe: &ProbeVector, rhs: &Vector) -> Result<Vector> {
    let n = probe.n();
    if rhs.dim() != n * n {
        return Err(Error::DimensionMismatch {
            op: "apply_gram_inverse",
            expected: n * n,
            found: rhs.dim(),
        });
    }
    let mut out = Vec::with_capacity(n * n);
    for block in rhs.as_slice().chunks_exact(n) {
        out.extend(sherman_morrison_block_solve(probe, block)?);
    }
    Vector::new(out)
}

/// Exact solution of `(V^T V + eps I) c = V^T u`.
///
/// The right-hand side block `u_j v` is an eigenvector of `v v^T + eps I`
/// with eigenvalue `lambda + eps`, so the Sherman-Morrison inverse reduces
/// to `c_j = u_j v / (lambda + eps)`. That form is used here since it does
/// not cancel when `eps` is much smaller than `lambda`.
pub fn closed_form_solve(system: &ProbeSystem) -> Vector {
    scaled_outer(&system.probe, &system.u, system.probe.lambda() + system.probe.epsilon())
}

/// Minimum-norm solution of the unregularized consistent system `Vc = u`:
/// `c_j = u_j v / lambda`.
pub fn min_norm_solution(system: &ProbeSystem) -> Vector {
    scaled_outer(&system.probe, &system.u, system.probe.lambda())
}

fn scaled_outer(probe: &ProbeVector, u: &Vector, denom: f64) -> Vector {
    let v = probe.v().as_slice();
    let mut out = Vec::with_capacity(v.len() * u.dim());
    for &uj in u.as_slice() {
        let s = uj / denom;
        out.extend(v.iter().map(|vi| s * vi));
    }
    Vector::from_finite(out)
}
