//! Column/row sampling baseline.
//!
//! `s` column indices are drawn uniformly; `A'` keeps those columns of `A`,
//! `B'` the matching rows of `B`, both scaled by `1/sqrt(s p)` with
//! `p = 1/n`, and `A'B'` is returned.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{matmul_exact, DenseMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SamplingMode {
    #[default]
    WithReplacement,
    /// Distinct indices, taken in ascending order. With `s = n` this is the exact product.
    WithoutReplacement,
}

pub fn baseline_sampling(
    a: &DenseMatrix,
    b: &DenseMatrix,
    s: usize,
    seed: u64,
    mode: SamplingMode,
) -> Result<DenseMatrix> {
    let n = a.cols();
    if b.rows() != n {
        return Err(Error::DimensionMismatch {
            op: "baseline_sampling",
            expected: n,
            found: b.rows(),
        });
    }
    if s == 0 || s > n {
        return Err(Error::invalid(format!(
            "sample count must lie in 1..={n}, got {s}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<usize> = match mode {
        SamplingMode::WithReplacement => (0..s).map(|_| rng.random_range(0..n)).collect(),
        SamplingMode::WithoutReplacement => {
            let mut picks = index::sample(&mut rng, n, s).into_vec();
            picks.sort_unstable();
            picks
        }
    };
    let p = 1.0 / n as f64;
    let scale = 1.0 / (s as f64 * p).sqrt();

    let mut a_cols = Vec::with_capacity(a.rows() * s);
    for i in 0..a.rows() {
        a_cols.extend(picks.iter().map(|&k| scale * a.get(i, k)));
    }
    let mut b_rows = Vec::with_capacity(s * b.cols());
    for &k in &picks {
        b_rows.extend(b.row(k).iter().map(|x| scale * x));
    }
    let a_s = DenseMatrix::from_vec(a.rows(), s, a_cols)?;
    let b_s = DenseMatrix::from_vec(s, b.cols(), b_rows)?;
    matmul_exact(&a_s, &b_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gen_matrix, Distribution, GenSpec};
    use crate::norms::frobenius_norm;

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
    fn full_sample_without_replacement_is_exact() {
        for n in [1, 3, 8] {
            let (a, b) = (random(n, 1), random(n, 2));
            let approx = baseline_sampling(&a, &b, n, 77, SamplingMode::WithoutReplacement).unwrap();
            let exact = matmul_exact(&a, &b).unwrap();
            assert!(frobenius_norm(&approx.sub(&exact).unwrap()) <= 1e-12 * frobenius_norm(&exact));
        }
    }

    #[test]
    fn zero_inputs_stay_zero() {
        let z = DenseMatrix::zeros(5, 5);
        for s in 1..=5 {
            let out = baseline_sampling(&z, &z, s, s as u64, SamplingMode::WithReplacement).unwrap();
            assert_eq!(out, z);
        }
    }

    #[test]
    fn sample_count_is_checked() {
        let a = random(4, 0);
        assert!(baseline_sampling(&a, &a, 0, 0, SamplingMode::WithReplacement).is_err());
        assert!(baseline_sampling(&a, &a, 5, 0, SamplingMode::WithoutReplacement).is_err());
    }

    #[test]
    fn sampling_is_unbiased_on_average() {
        let (a, b) = (random(6, 10), random(6, 11));
        let exact = matmul_exact(&a, &b).unwrap();
        let trials = 4000;
        let mut mean = DenseMatrix::zeros(6, 6);
        for seed in 0..trials {
            let est = baseline_sampling(&a, &b, 3, seed, SamplingMode::WithReplacement).unwrap();
            mean = mean.add(&est).unwrap();
        }
        let mean = mean.scale(1.0 / trials as f64).unwrap();
        let err = frobenius_norm(&mean.sub(&exact).unwrap()) / frobenius_norm(&exact);
        assert!(err < 0.1, "relative bias {err}");
    }
}
