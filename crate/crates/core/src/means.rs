//! Two-variable geometric mean and the n-variable arithmetic, harmonic, power
//! and Cartan means.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_log, gram_power, singular_values, CMatrix, Hermitian, PdMatrix};
use crate::solver::{drive, Fallback, FixedPointMap, SolverConfig, SolverReport, StepRule};

/// Positive probability vector. Entries are renormalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("weight vector is empty".into()));
        }
        if let Some(bad) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::Domain(format!(
                "weights must be positive, found {bad}"
            )));
        }
        let total: f64 = weights.iter().sum();
        Ok(WeightVector(
            weights.into_iter().map(|w| w / total).collect(),
        ))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightVector::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Non-empty tuple of positive definite matrices of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PdTuple(Vec<PdMatrix>);

impl PdTuple {
    pub fn new(items: Vec<PdMatrix>) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::Domain("matrix tuple is empty".into()))?;
        let dim = first.dim();
        if let Some(bad) = items.iter().find(|a| a.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(PdTuple(items))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0[0].dim()
    }

    pub fn items(&self) -> &[PdMatrix] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PdMatrix> {
        self.0.iter()
    }

    pub fn into_items(self) -> Vec<PdMatrix> {
        self.0
    }

    pub fn map(&self, f: impl Fn(&PdMatrix) -> Result<PdMatrix>) -> Result<PdTuple> {
        Ok(PdTuple(self.0.iter().map(f).collect::<Result<_>>()?))
    }

    /// `(A_1^p, …, A_n^p)`.
    pub fn pow(&self, p: f64) -> Result<PdTuple> {
        self.map(|a| a.pow(p))
    }

    /// `(c A_1, …, c A_n)`.
    pub fn scale(&self, c: f64) -> Result<PdTuple> {
        self.map(|a| a.scale(c))
    }

    /// `(M A_1 M*, …, M A_n M*)`.
    pub fn congruence(&self, m: &CMatrix) -> Result<PdTuple> {
        self.map(|a| a.congruence(m))
    }

    /// Smallest eigenvalue over the tuple, the largest `a` with `a I ≤ A_j`.
    pub fn lower_bound(&self) -> f64 {
        self.0
            .iter()
            .map(PdMatrix::lambda_min)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest eigenvalue over the tuple, the smallest `b` with `A_j ≤ b I`.
    pub fn upper_bound(&self) -> f64 {
        self.0.iter().map(PdMatrix::lambda_max).fold(0.0, f64::max)
    }

    pub fn all_equal(&self) -> bool {
        self.0.windows(2).all(|w| w[0].matrix() == w[1].matrix())
    }
}

pub(crate) fn check_lengths(weights: &WeightVector, tuple: &PdTuple) -> Result<()> {
    if weights.len() != tuple.len() {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: tuple.len(),
            found: weights.len(),
        });
    }
    Ok(())
}

fn check_dims(a: &PdMatrix, b: &PdMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `Σ w_j H_j` over Hermitian terms.
pub(crate) fn weighted_sum<'a>(
    weights: &WeightVector,
    terms: impl IntoIterator<Item = &'a CMatrix>,
) -> CMatrix {
    let mut acc: Option<CMatrix> = None;
    for (w, term) in weights.iter().zip(terms) {
        let scaled = term.scale(*w);
        acc = Some(match acc {
            Some(sum) => sum + scaled,
            None => scaled,
        });
    }
    acc.expect("non-empty weights")
}

/// `A #_t B` for any `t > 0`, with the inner power taken from the Gram factor
/// `A^{-1/2} B^{1/2}`. Values of `t` above one extrapolate along the geodesic.
pub(crate) fn geodesic_point(a: &PdMatrix, b: &PdMatrix, t: f64) -> Result<PdMatrix> {
    let a_half = a.pow_matrix(0.5);
    let a_inv_half = a.pow_matrix(-0.5);
    let inner = gram_power(&(&a_inv_half * b.pow_matrix(0.5)), t)?;
    PdMatrix::new(Hermitian::symmetrized(&a_half * inner.matrix() * &a_half))
}

/// Weighted geometric mean `A #_t B = A^{1/2} (A^{-1/2} B A^{-1/2})^t A^{1/2}`.
pub fn geometric_mean_two(a: &PdMatrix, b: &PdMatrix, t: f64) -> Result<PdMatrix> {
    check_dims(a, b)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!(
            "geometric mean weight must lie in [0, 1], got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(a.clone());
    }
    if t == 1.0 {
        return Ok(b.clone());
    }
    geodesic_point(a, b, t)
}

pub fn arithmetic_mean(weights: &WeightVector, tuple: &PdTuple) -> Result<PdMatrix> {
    check_lengths(weights, tuple)?;
    if tuple.len() == 1 {
        return Ok(tuple.items()[0].clone());
    }
    let sum = weighted_sum(weights, tuple.iter().map(PdMatrix::matrix));
    PdMatrix::new(Hermitian::symmetrized(sum))
}

pub fn harmonic_mean(weights: &WeightVector, tuple: &PdTuple) -> Result<PdMatrix> {
    check_lengths(weights, tuple)?;
    arithmetic_mean(weights, &tuple.pow(-1.0)?)?.inverse()
}

struct PowerMeanMap<'a> {
    t: f64,
    weights: &'a WeightVector,
    halves: Vec<CMatrix>,
}

impl FixedPointMap for PowerMeanMap<'_> {
    type Eval = PdMatrix;

    fn evaluate(&self, x: &PdMatrix) -> Result<(f64, PdMatrix)> {
        let x_half = x.pow_matrix(0.5);
        let x_inv_half = x.pow_matrix(-0.5);
        let terms = self
            .halves
            .iter()
            .map(|b_half| {
                let inner = gram_power(&(&x_inv_half * b_half), self.t)?;
                Ok(&x_half * inner.matrix() * &x_half)
            })
            .collect::<Result<Vec<_>>>()?;
        let gx = PdMatrix::new(Hermitian::symmetrized(weighted_sum(self.weights, &terms)))?;
        let residual = (x.matrix() - gx.matrix()).norm() / x.matrix().norm();
        Ok((residual, gx))
    }

    fn step(&self, x: &PdMatrix, gx: &PdMatrix, theta: f64) -> Result<PdMatrix> {
        geodesic_point(x, gx, theta)
    }

    fn defect(&self, x: &PdMatrix, gx: &PdMatrix) -> Option<CMatrix> {
        Some(x.matrix() - gx.matrix())
    }
}

/// Matrix power mean `P_t(ω; 𝔸)` for `t ∈ [−1, 1] \ {0}`.
///
/// For `t > 0` this is the unique solution of `X = Σ w_j X #_t A_j`, found by
/// the geodesic fixed-point iteration started at the arithmetic mean. Negative
/// parameters use `P_t(ω; 𝔸) = P_{−t}(ω; 𝔸^{−1})^{−1}`.
pub fn power_mean(
    t: f64,
    weights: &WeightVector,
    tuple: &PdTuple,
    cfg: &SolverConfig,
) -> Result<(PdMatrix, SolverReport)> {
    check_lengths(weights, tuple)?;
    cfg.validate()?;
    if t == 0.0 || !(-1.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!(
            "power mean parameter must lie in [-1, 1] without 0, got {t}"
        )));
    }
    if t < 0.0 {
        let (inv_mean, report) = power_mean(-t, weights, &tuple.pow(-1.0)?, cfg)?;
        return Ok((inv_mean.inverse()?, report));
    }
    if tuple.len() == 1 {
        return Ok((tuple.items()[0].clone(), SolverReport::exact(0.0)));
    }
    let map = PowerMeanMap {
        t,
        weights,
        halves: tuple.iter().map(|a| a.pow_matrix(0.5)).collect(),
    };
    let x0 = arithmetic_mean(weights, tuple)?;
    drive(
        &map,
        x0,
        StepRule {
            theta_max: 1.0 / t,
            fallback: Fallback::Contraction(1.0),
        },
        cfg,
    )
}

struct KarcherMap<'a> {
    weights: &'a WeightVector,
    halves: Vec<CMatrix>,
}

impl FixedPointMap for KarcherMap<'_> {
    /// The Riemannian gradient direction `Σ w_j log(X^{-1/2} A_j X^{-1/2})`.
    type Eval = Hermitian;

    fn evaluate(&self, x: &PdMatrix) -> Result<(f64, Hermitian)> {
        let x_inv_half = x.pow_matrix(-0.5);
        let logs = self
            .halves
            .iter()
            .map(|a_half| gram_log(&(&x_inv_half * a_half)).map(Hermitian::into_matrix))
            .collect::<Result<Vec<_>>>()?;
        let scale = self
            .weights
            .iter()
            .zip(&logs)
            .map(|(w, l)| w * l.norm())
            .sum::<f64>()
            .max(1.0);
        let direction = Hermitian::symmetrized(weighted_sum(self.weights, &logs));
        Ok((direction.frobenius_norm() / scale, direction))
    }

    fn step(&self, x: &PdMatrix, direction: &Hermitian, theta: f64) -> Result<PdMatrix> {
        let x_half = x.pow_matrix(0.5);
        let moved = direction.scale(theta).exp()?;
        PdMatrix::new(Hermitian::symmetrized(&x_half * moved.matrix() * &x_half))
    }

    fn defect(&self, _x: &PdMatrix, direction: &Hermitian) -> Option<CMatrix> {
        Some(direction.matrix().clone())
    }
}

/// Weighted Cartan (Karcher) mean: the solution of `Σ w_j log(X^{-1/2} A_j X^{-1/2}) = 0`.
///
/// Damped Karcher iteration `X ← X^{1/2} exp(θ Σ w_j log(X^{-1/2} A_j X^{-1/2})) X^{1/2}`
/// started at the log-Euclidean mean, with Newton steps on the gradient sum
/// when the iteration slows down. The residual is the Frobenius norm of the
/// gradient sum divided by `max(1, Σ w_j ‖log(X^{-1/2} A_j X^{-1/2})‖_F)`.
pub fn cartan_mean(
    weights: &WeightVector,
    tuple: &PdTuple,
    cfg: &SolverConfig,
) -> Result<(PdMatrix, SolverReport)> {
    check_lengths(weights, tuple)?;
    cfg.validate()?;
    if tuple.len() == 1 {
        return Ok((tuple.items()[0].clone(), SolverReport::exact(0.0)));
    }
    let logs: Vec<CMatrix> = tuple.iter().map(|a| a.log().into_matrix()).collect();
    let x0 = Hermitian::symmetrized(weighted_sum(weights, &logs)).exp()?;
    let map = KarcherMap {
        weights,
        halves: tuple.iter().map(|a| a.pow_matrix(0.5)).collect(),
    };
    drive(
        &map,
        x0,
        StepRule {
            theta_max: 1.0,
            fallback: Fallback::Newton,
        },
        cfg,
    )
}

/// Logarithms of the eigenvalues of `A^{-1/2} B A^{-1/2}`.
fn relative_log_spectrum(a: &PdMatrix, b: &PdMatrix) -> Result<Vec<f64>> {
    check_dims(a, b)?;
    let sigma = singular_values(&(a.pow_matrix(-0.5) * b.pow_matrix(0.5)))?;
    Ok(sigma.iter().map(|s| 2.0 * s.ln()).collect())
}

/// Riemannian trace metric `‖log A^{-1/2} B A^{-1/2}‖_F`.
pub fn riemannian_distance(a: &PdMatrix, b: &PdMatrix) -> Result<f64> {
    Ok(relative_log_spectrum(a, b)?
        .iter()
        .map(|l| l * l)
        .sum::<f64>()
        .sqrt())
}

/// Thompson metric `‖log A^{-1/2} B A^{-1/2}‖` in operator norm.
pub fn thompson_distance(a: &PdMatrix, b: &PdMatrix) -> Result<f64> {
    Ok(relative_log_spectrum(a, b)?
        .iter()
        .map(|l| l.abs())
        .fold(0.0, f64::max))
}
