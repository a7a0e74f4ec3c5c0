//! Vector and matrix norms, and power-iteration estimates of the spectral
//! radius for symmetric matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{dot, matmul_exact, DenseMatrix, Vector};

/// Entrywise tolerance used to decide whether a matrix is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

const START_SEED: u64 = 0x5eed_0f_90e1;

/// The `l_p` norm of `x`. Pass `f64::INFINITY` for the max norm.
pub fn vec_p_norm(x: &Vector, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("p-norm requires p >= 1, got {p}")));
    }
    let xs = x.as_slice();
    if p == f64::INFINITY {
        return Ok(xs.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    if p == 1.0 {
        return Ok(xs.iter().map(|v| v.abs()).sum());
    }
    if p == 2.0 {
        return Ok(x.norm2());
    }
    // Scale by the largest magnitude so that |x_i|^p cannot overflow.
    let scale = xs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = xs.iter().map(|v| (v.abs() / scale).powf(p)).sum();
    Ok(scale * sum.powf(1.0 / p))
}

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    dot(a.as_slice(), a.as_slice()).sqrt()
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &DenseMatrix) -> f64 {
    (0..a.rows())
        .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximum absolute entry.
pub fn max_norm(a: &DenseMatrix) -> f64 {
    a.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration for `max |lambda_i|` of a symmetric matrix.
///
/// The estimate at step `k` is `|A x_k|` for the unit iterate `x_k`, i.e. the
/// square root of the Rayleigh quotient of `A^2`. Unlike the Rayleigh
/// quotient of `A` it converges to the spectral radius even when `A` has a
/// pair of eigenvalues `+mu` and `-mu`, and it never overshoots. Iteration
/// stops once two successive estimates differ by at most `tol`.
pub fn spectral_radius_symmetric(
    a: &DenseMatrix,
    tol: f64,
    max_iters: usize,
) -> Result<SpectralEstimate> {
    if !a.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::invalid("spectral radius requires a symmetric matrix"));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(SpectralEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    normalize(&mut x);

    let mut prev = f64::NAN;
    let mut y = vec![0.0; n];
    for it in 1..=max_iters {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(a.row(i), &x);
        }
        let mu = dot(&y, &y).sqrt();
        if mu == 0.0 {
            return Ok(SpectralEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            });
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / mu;
        }
        if (mu - prev).abs() <= tol {
            return Ok(SpectralEstimate {
                value: mu,
                iterations: it,
                converged: true,
            });
        }
        prev = mu;
    }
    Ok(SpectralEstimate {
        value: prev,
        iterations: max_iters,
        converged: false,
    })
}

fn normalize(x: &mut [f64]) {
    let norm = dot(x, x).sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}

/// Operator 2-norm of a symmetric matrix, computed as `sqrt(rho(A^T A))`.
///
/// This goes through the Gram matrix rather than `A` itself, so it is an
/// independent route to the same number as [`spectral_radius_symmetric`].
pub fn operator_norm_2_symmetric(a: &DenseMatrix, tol: f64, max_iters: usize) -> Result<f64> {
    if !a.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::invalid("operator 2-norm requires a symmetric matrix"));
    }
    let gram = matmul_exact(&a.transpose(), a)?;
    // Symmetrize away rounding so the symmetry check cannot trip.
    let gram = gram.add(&gram.transpose())?.scale(0.5)?;
    Ok(spectral_radius_symmetric(&gram, tol, max_iters)?
        .value
        .sqrt())
}

/// Largest and smallest eigenvalue of a symmetric positive definite matrix.
///
/// The smallest comes from power iteration on the shifted matrix
/// `lambda_max I - A`, whose spectral radius is `lambda_max - lambda_min`.
pub fn extreme_eigenvalues_spd(
    a: &DenseMatrix,
    tol: f64,
    max_iters: usize,
) -> Result<(f64, f64)> {
    let top = spectral_radius_symmetric(a, tol, max_iters)?.value;
    let n = a.rows();
    let shifted = DenseMatrix::identity(n).scale(top)?.sub(a)?;
    let gap = spectral_radius_symmetric(&shifted, tol, max_iters)?.value;
    Ok((top, top - gap))
}
