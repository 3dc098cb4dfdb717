//! The α-z weighted right mean `R_{α,z}(ω; 𝔸)`: the unique positive definite
//! solution of `X = Σ w_j (X^{α/2z} A_j^{(1−α)/z} X^{α/2z})^z`.

use crate::divergences::AlphaZ;
use crate::error::{Error, Result};
use crate::linalg::{gram_power, CMatrix, Hermitian, PdMatrix};
use crate::means::{
    arithmetic_mean, check_lengths, geodesic_point, geometric_mean_two, weighted_sum, PdTuple,
    WeightVector,
};
use crate::solver::{drive, Fallback, FixedPointMap, SolverConfig, SolverReport, StepRule};

/// Relative slack on the eigenvalue interval that contains the solution.
const BOUND_SLACK: f64 = 1e-9;

struct RightMeanMap<'a> {
    /// `α / 2z`, the exponent applied to the iterate on both sides.
    x_exp: f64,
    z: f64,
    weights: &'a WeightVector,
    /// `A_j^{(1−α)/2z}`.
    factors: Vec<CMatrix>,
    /// `min_j λ_min(A_j)` and `max_j λ_max(A_j)`, which bound the solution.
    bounds: (f64, f64),
}

impl<'a> RightMeanMap<'a> {
    fn new(p: &AlphaZ, weights: &'a WeightVector, tuple: &PdTuple) -> Self {
        let (alpha, z) = (p.alpha(), p.z());
        RightMeanMap {
            x_exp: alpha / (2.0 * z),
            z,
            weights,
            factors: tuple
                .iter()
                .map(|a| a.pow_matrix((1.0 - alpha) / (2.0 * z)))
                .collect(),
            bounds: (tuple.lower_bound(), tuple.upper_bound()),
        }
    }

    /// `G(X) = Σ w_j Q_{1−α,z}(X, A_j)`.
    fn image(&self, x: &PdMatrix) -> Result<PdMatrix> {
        let x_side = x.pow_matrix(self.x_exp);
        let terms = self
            .factors
            .iter()
            .map(|f| gram_power(&(&x_side * f), self.z).map(Hermitian::into_matrix))
            .collect::<Result<Vec<_>>>()?;
        PdMatrix::new(Hermitian::symmetrized(weighted_sum(self.weights, &terms)))
    }
}

impl FixedPointMap for RightMeanMap<'_> {
    type Eval = PdMatrix;

    fn evaluate(&self, x: &PdMatrix) -> Result<(f64, PdMatrix)> {
        let gx = self.image(x)?;
        let residual = (x.matrix() - gx.matrix()).norm() / x.matrix().norm();
        Ok((residual, gx))
    }

    fn step(&self, x: &PdMatrix, gx: &PdMatrix, theta: f64) -> Result<PdMatrix> {
        geodesic_point(x, gx, theta)
    }

    fn defect(&self, x: &PdMatrix, gx: &PdMatrix) -> Option<CMatrix> {
        Some(x.matrix() - gx.matrix())
    }

    /// `‖X^{-1/2} (X − G(X)) X^{-1/2}‖_F`, which bounds the residual and, unlike
    /// it, also sees errors in the small eigenvalues of the iterate.
    fn merit(&self, x: &PdMatrix, gx: &PdMatrix, _residual: f64) -> f64 {
        let inv_half = x.pow_matrix(-0.5);
        (&inv_half * (x.matrix() - gx.matrix()) * &inv_half).norm()
    }

    /// The solution lies in `[min λ_min(A_j), max λ_max(A_j)]`; the residual is
    /// insensitive to the small eigenvalues of ill-conditioned iterates, so
    /// steps leaving that interval are refused outright.
    fn admissible(&self, x: &PdMatrix) -> bool {
        let (lo, hi) = self.bounds;
        x.lambda_min() >= lo * (1.0 - BOUND_SLACK) && x.lambda_max() <= hi * (1.0 + BOUND_SLACK)
    }
}

fn check_inputs(p: &AlphaZ, weights: &WeightVector, tuple: &PdTuple) -> Result<()> {
    if !p.in_divergence_domain() {
        return Err(Error::Domain(format!(
            "right mean requires 0 < alpha <= z < 1, got ({}, {})",
            p.alpha(),
            p.z()
        )));
    }
    check_lengths(weights, tuple)
}

fn check_iterate(tuple: &PdTuple, x: &PdMatrix) -> Result<()> {
    if x.dim() != tuple.dim() {
        return Err(Error::DimensionMismatch {
            expected: tuple.dim(),
            found: x.dim(),
        });
    }
    Ok(())
}

/// Computes `R_{α,z}(ω; 𝔸)`.
///
/// The iteration starts at the arithmetic mean and moves along the geodesic
/// from `X` towards `G(X) = Σ w_j Q_{1−α,z}(X, A_j)` with step up to
/// `1/(1−α)`; that step is exact when the `A_j` commute. The returned matrix
/// has `residual < cfg.tol`; otherwise the solver report comes back inside
/// [`Error::Solver`].
pub fn right_mean(
    p: &AlphaZ,
    weights: &WeightVector,
    tuple: &PdTuple,
    cfg: &SolverConfig,
) -> Result<(PdMatrix, SolverReport)> {
    check_inputs(p, weights, tuple)?;
    cfg.validate()?;
    if tuple.len() == 1 {
        return Ok((tuple.items()[0].clone(), SolverReport::exact(0.0)));
    }
    let map = RightMeanMap::new(p, weights, tuple);
    let x0 = arithmetic_mean(weights, tuple)?;
    drive(
        &map,
        x0,
        StepRule {
            theta_max: 1.0 / (1.0 - p.alpha()),
            fallback: Fallback::Newton,
        },
        cfg,
    )
}

/// `‖X − Σ w_j Q_{1−α,z}(X, A_j)‖_F / ‖X‖_F`.
pub fn residual(p: &AlphaZ, weights: &WeightVector, tuple: &PdTuple, x: &PdMatrix) -> Result<f64> {
    check_inputs(p, weights, tuple)?;
    check_iterate(tuple, x)?;
    Ok(RightMeanMap::new(p, weights, tuple).evaluate(x)?.0)
}

/// Defect of the equivalent form `X^{1−α/z} = Σ w_j X^{−α/z} #_z A_j^{(1−α)/z}`,
/// relative to `‖X^{1−α/z}‖_F`.
pub fn residual_geomform(
    p: &AlphaZ,
    weights: &WeightVector,
    tuple: &PdTuple,
    x: &PdMatrix,
) -> Result<f64> {
    check_inputs(p, weights, tuple)?;
    check_iterate(tuple, x)?;
    let (alpha, z) = (p.alpha(), p.z());
    let lhs = x.pow_matrix(1.0 - alpha / z);
    let base = x.pow(-alpha / z)?;
    let terms = tuple
        .iter()
        .map(|a| {
            let target = a.pow((1.0 - alpha) / z)?;
            Ok(geometric_mean_two(&base, &target, z)?.matrix().clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let rhs = weighted_sum(weights, &terms);
    Ok((&lhs - rhs).norm() / lhs.norm())
}

/// `(Σ w_j A_j^{1−α})^{1/(1−α)}`, the value of the right mean on commuting tuples.
pub fn commuting_right_mean(
    alpha: f64,
    weights: &WeightVector,
    tuple: &PdTuple,
) -> Result<PdMatrix> {
    check_lengths(weights, tuple)?;
    let s = 1.0 - alpha;
    let powers: Vec<CMatrix> = tuple.iter().map(|a| a.pow_matrix(s)).collect();
    PdMatrix::new(Hermitian::symmetrized(weighted_sum(weights, &powers)))?.pow(1.0 / s)
}
