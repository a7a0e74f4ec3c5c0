//! Dense row-major matrices and vectors, the exact product oracle, and
//! seeded test-matrix generation.
//!
//! Every reduction in this module sums in ascending index order so that
//! results are bit-reproducible for identical inputs.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_finite(data: &[f64], what: &str) -> Result<()> {
    match data.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::invalid(format!("{what} entry {i} is not finite"))),
        None => Ok(()),
    }
}

/// Sum of `a[i] * b[i]` in ascending `i`.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// A dense vector of finite `f64` entries.
#[derive(Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        check_finite(&data, "vector")?;
        Ok(Vector { data })
    }

    pub fn zeros(dim: usize) -> Self {
        Vector {
            data: vec![0.0; dim],
        }
    }

    /// Builds a vector from data already known to be finite.
    pub(crate) fn from_finite(data: Vec<f64>) -> Self {
        debug_assert!(data.iter().all(|x| x.is_finite()));
        Vector { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                op: "dot",
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(dot(&self.data, &other.data))
    }

    /// Euclidean norm.
    pub fn norm2(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    /// `self - other`, entrywise.
    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                op: "sub",
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Vector::new(self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, alpha: f64) -> Result<Vector> {
        Vector::new(self.data.iter().map(|x| alpha * x).collect())
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.data).finish()
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// A dense matrix of finite `f64` entries stored in row-major order.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "DenseMatrix::from_vec",
                expected: rows * cols,
                found: data.len(),
            });
        }
        check_finite(&data, "matrix")?;
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        DenseMatrix::from_vec(rows.len(), cols, data)
    }

    pub(crate) fn from_finite(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        debug_assert!(data.iter().all(|x| x.is_finite()));
        DenseMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        DenseMatrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector::from_finite((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        DenseMatrix::from_finite(self.cols, self.rows, data)
    }

    pub fn scale(&self, alpha: f64) -> Result<DenseMatrix> {
        DenseMatrix::from_vec(
            self.rows,
            self.cols,
            self.data.iter().map(|x| alpha * x).collect(),
        )
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &DenseMatrix,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<DenseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                op,
                expected: self.data.len(),
                found: other.data.len(),
            });
        }
        DenseMatrix::from_vec(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// True when `|a_ij - a_ji| <= tol` for every pair.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.rows).map(|i| self.row(i)).collect();
        f.debug_struct("DenseMatrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("data", &rows)
            .finish()
    }
}

/// Exact product by the naive cubic schedule, summing over `k` ascending.
pub fn matmul_exact(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "matmul_exact",
            expected: a.cols,
            found: b.rows,
        });
    }
    let (n, m, p) = (a.rows, a.cols, b.cols);
    let mut out = vec![0.0; n * p];
    for i in 0..n {
        for j in 0..p {
            let mut acc = 0.0;
            for k in 0..m {
                acc += a.data[i * m + k] * b.data[k * p + j];
            }
            out[i * p + j] = acc;
        }
    }
    DenseMatrix::from_vec(n, p, out)
}

pub fn matvec(a: &DenseMatrix, x: &Vector) -> Result<Vector> {
    if a.cols != x.dim() {
        return Err(Error::DimensionMismatch {
            op: "matvec",
            expected: a.cols,
            found: x.dim(),
        });
    }
    let out = (0..a.rows).map(|i| dot(a.row(i), x.as_slice())).collect();
    Vector::new(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// Uniform on `[-M, M]`.
    UniformSigned,
    /// Uniform on `[0, M]`.
    UniformNonneg,
    /// Uniform over the integers in `[-floor(M), floor(M)]`.
    IntegerGrid,
    Identity,
    Zero,
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-signed" => Ok(Distribution::UniformSigned),
            "uniform-nonneg" => Ok(Distribution::UniformNonneg),
            "integer-grid" => Ok(Distribution::IntegerGrid),
            "identity" => Ok(Distribution::Identity),
            "zero" => Ok(Distribution::Zero),
            other => Err(Error::invalid(format!("unknown distribution `{other}`"))),
        }
    }
}

/// Recipe for a square test matrix with entries bounded by `max_mag`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub distribution: Distribution,
    pub max_mag: f64,
    pub seed: u64,
}

pub fn gen_matrix(spec: &GenSpec) -> Result<DenseMatrix> {
    let GenSpec {
        n,
        distribution,
        max_mag,
        seed,
    } = *spec;
    if n == 0 {
        return Err(Error::invalid("matrix size n must be at least 1"));
    }
    if !(max_mag >= 0.0 && max_mag.is_finite()) {
        return Err(Error::invalid(format!(
            "magnitude bound must be finite and nonnegative, got {max_mag}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = match distribution {
        Distribution::Zero => vec![0.0; n * n],
        Distribution::Identity => {
            if max_mag < 1.0 {
                return Err(Error::invalid(format!(
                    "identity entries exceed the magnitude bound {max_mag}"
                )));
            }
            return Ok(DenseMatrix::identity(n));
        }
        Distribution::UniformSigned => (0..n * n)
            .map(|_| rng.random_range(-max_mag..=max_mag))
            .collect(),
        Distribution::UniformNonneg => (0..n * n)
            .map(|_| rng.random_range(0.0..=max_mag))
            .collect(),
        Distribution::IntegerGrid => {
            let k = max_mag.floor() as i64;
            (0..n * n).map(|_| rng.random_range(-k..=k) as f64).collect()
        }
    };
    DenseMatrix::from_vec(n, n, data)
}
