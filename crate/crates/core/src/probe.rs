//! The probe system.
//!
//! Multiplying `AB = C` on the right by a probe vector `v` gives `n`
//! observable equations `Cv = u` in the `n^2` unknown entries of `C`.
//! Writing `c` for `C` flattened row by row, those equations read `Vc = u`
//! where row `i` of `V` holds `v` in columns `n*i .. n*i + n` and zeros
//! elsewhere. The normal equations `V^T V c = V^T u` are singular, so they are
//! regularized to `(V^T V + eps I) c = V^T u`.
//!
//! `V^T V` is block diagonal with `n` copies of the outer product `v v^T`, so
//! the regularized operator is applied blockwise in `O(n^2)` without ever
//! being stored. [`dense_gram`] materializes it for testing only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{dot, matvec, DenseMatrix, Vector};
use crate::solver::LinearOperator;

/// Largest `n` for which [`dense_gram`] will build the `n^2 x n^2` matrix.
pub const DENSE_GRAM_MAX_N: usize = 64;

/// How the probe vector `v` and the regularization `eps` are chosen.
///
/// Wherever `epsilon` is optional, `None` means `1/n^3`.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbeSchedule {
    /// `v_i = 1/n^3` for every `i`; with the default `eps` this is the
    /// `v_i = eps = 1/n^3` schedule ([`ProbeSchedule::PAPER`]).
    Paper { epsilon: Option<f64> },
    /// Every `v_i = value`.
    Constant { value: f64, epsilon: Option<f64> },
    Explicit { v: Vec<f64>, epsilon: f64 },
    /// A uniformly random direction scaled to unit length.
    RandomUnit { seed: u64, epsilon: Option<f64> },
    /// Independent random signs times `scale`.
    Rademacher {
        seed: u64,
        scale: f64,
        epsilon: Option<f64>,
    },
}

impl ProbeSchedule {
    pub const PAPER: ProbeSchedule = ProbeSchedule::Paper { epsilon: None };

    /// The `1/n^3` value used for `v_i` and the default `eps`.
    pub fn paper_value(n: usize) -> f64 {
        1.0 / (n as f64).powi(3)
    }
}

/// The probe vector `v` together with `eps` and `lambda = sum v_i^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeVector {
    v: Vector,
    epsilon: f64,
    lambda: f64,
}

impl ProbeVector {
    pub fn new(v: Vector, epsilon: f64) -> Result<Self> {
        if v.dim() == 0 {
            return Err(Error::invalid("probe vector must have dimension >= 1"));
        }
        if v.is_zero() {
            return Err(Error::invalid("probe vector must be nonzero"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "regularization must be positive and finite, got {epsilon}"
            )));
        }
        let lambda = dot(v.as_slice(), v.as_slice());
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::invalid(format!(
                "sum of squared probe entries {lambda} is not a positive finite number"
            )));
        }
        Ok(ProbeVector { v, epsilon, lambda })
    }

    pub fn n(&self) -> usize {
        self.v.dim()
    }

    pub fn v(&self) -> &Vector {
        &self.v
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `sum v_i^2`, the only nonzero eigenvalue of `v v^T`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The operator `V^T V + eps I` defined by this probe.
    pub fn gram(&self) -> ImplicitGram<'_> {
        ImplicitGram { probe: self }
    }
}

pub fn build_probe(n: usize, schedule: &ProbeSchedule) -> Result<ProbeVector> {
    if n == 0 {
        return Err(Error::invalid("matrix size n must be at least 1"));
    }
    let paper = ProbeSchedule::paper_value(n);
    let or_paper = |eps: &Option<f64>| eps.unwrap_or(paper);
    let (v, epsilon) = match schedule {
        ProbeSchedule::Paper { epsilon } => (vec![paper; n], or_paper(epsilon)),
        ProbeSchedule::Constant { value, epsilon } => (vec![*value; n], or_paper(epsilon)),
        ProbeSchedule::Explicit { v, epsilon } => {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    op: "build_probe",
                    expected: n,
                    found: v.len(),
                });
            }
            (v.clone(), *epsilon)
        }
        ProbeSchedule::RandomUnit { seed, epsilon } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = dot(&v, &v).sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            (v, or_paper(epsilon))
        }
        ProbeSchedule::Rademacher {
            seed,
            scale,
            epsilon,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let v = (0..n)
                .map(|_| if rng.random::<bool>() { *scale } else { -*scale })
                .collect();
            (v, or_paper(epsilon))
        }
    };
    ProbeVector::new(Vector::new(v)?, epsilon)
}

/// `V^T V + eps I` of shape `n^2 x n^2`, stored as nothing more than the probe.
#[derive(Clone, Copy, Debug)]
pub struct ImplicitGram<'a> {
    probe: &'a ProbeVector,
}

impl<'a> ImplicitGram<'a> {
    pub fn probe(&self) -> &'a ProbeVector {
        self.probe
    }

    /// Block `j` of the output is `v (v . x_j) + eps x_j`.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.probe.n();
        let v = self.probe.v.as_slice();
        let eps = self.probe.epsilon;
        debug_assert_eq!(x.len(), n * n);
        debug_assert_eq!(out.len(), n * n);
        for (xb, ob) in x.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
            let proj = dot(v, xb);
            for ((o, &vi), &xi) in ob.iter_mut().zip(v).zip(xb) {
                *o = vi * proj + eps * xi;
            }
        }
    }
}

impl LinearOperator for ImplicitGram<'_> {
    fn dim(&self) -> usize {
        let n = self.probe.n();
        n * n
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.apply_into(x, out);
    }
}

pub fn gram_matvec(op: &ImplicitGram<'_>, x: &Vector) -> Result<Vector> {
    let d = op.dim();
    if x.dim() != d {
        return Err(Error::DimensionMismatch {
            op: "gram_matvec",
            expected: d,
            found: x.dim(),
        });
    }
    let mut out = vec![0.0; d];
    op.apply_into(x.as_slice(), &mut out);
    Vector::new(out)
}

/// The explicit block-diagonal matrix with `n` copies of `v v^T + eps I`.
pub fn dense_gram(op: &ImplicitGram<'_>) -> Result<DenseMatrix> {
    let probe = op.probe;
    let n = probe.n();
    if n > DENSE_GRAM_MAX_N {
        return Err(Error::invalid(format!(
            "dense_gram is limited to n <= {DENSE_GRAM_MAX_N} (got n = {n})"
        )));
    }
    let d = n * n;
    let v = probe.v.as_slice();
    let mut data = vec![0.0; d * d];
    for block in 0..n {
        let base = block * n;
        for i in 0..n {
            for j in 0..n {
                let mut value = v[i] * v[j];
                if i == j {
                    value += probe.epsilon;
                }
                data[(base + i) * d + base + j] = value;
            }
        }
    }
    DenseMatrix::from_vec(d, d, data)
}

/// Upper bound `1 + lambda/eps` on the condition number of `V^T V + eps I`.
///
/// For `n >= 2` the eigenvalues are `lambda + eps` and `eps`, so the bound is
/// attained. At `n = 1` the operator is the scalar `lambda + eps`.
pub fn condition_bound(probe: &ProbeVector) -> f64 {
    1.0 + probe.lambda / probe.epsilon
}

/// Right-hand sides of the probe system: `u = ABv` and `y = V^T u`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSystem {
    pub probe: ProbeVector,
    pub u: Vector,
    pub y: Vector,
}

impl ProbeSystem {
    pub fn n(&self) -> usize {
        self.probe.n()
    }
}

/// `V^T u`: block `j` is `u[j] * v`.
pub fn scatter_rhs(probe: &ProbeVector, u: &Vector) -> Result<Vector> {
    let n = probe.n();
    if u.dim() != n {
        return Err(Error::DimensionMismatch {
            op: "scatter_rhs",
            expected: n,
            found: u.dim(),
        });
    }
    let v = probe.v.as_slice();
    let mut y = Vec::with_capacity(n * n);
    for &uj in u.as_slice() {
        y.extend(v.iter().map(|vi| uj * vi));
    }
    Vector::new(y)
}

/// Builds `u = A(Bv)` with two matrix-vector products. `AB` is never formed.
pub fn compute_rhs(a: &DenseMatrix, b: &DenseMatrix, probe: &ProbeVector) -> Result<ProbeSystem> {
    let n = probe.n();
    for (name, m) in [("A", a), ("B", b)] {
        if m.rows() != n || m.cols() != n {
            return Err(Error::invalid(format!(
                "{name} is {}x{}, probe expects {n}x{n}",
                m.rows(),
                m.cols()
            )));
        }
    }
    let bv = matvec(b, probe.v())?;
    let u = matvec(a, &bv)?;
    let y = scatter_rhs(probe, &u)?;
    Ok(ProbeSystem {
        probe: probe.clone(),
        u,
        y,
    })
}
