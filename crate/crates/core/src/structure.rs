//! Tensor and Hadamard products, the Ψ extraction map, weight products and
//! majorization comparisons.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Hermitian, PdMatrix};
use crate::means::{PdTuple, WeightVector};

/// Default relative slack for majorization comparisons in log space.
pub const MAJORIZATION_SLACK: f64 = 1e-10;

/// Kronecker product: the block matrix `[a_ij B]`.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Entrywise (Schur) product.
pub fn hadamard_product(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.shape() != b.shape() {
        return Err(Error::Domain(format!(
            "hadamard product needs equal shapes, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.component_mul(b))
}

pub fn tensor_pd(a: &PdMatrix, b: &PdMatrix) -> Result<PdMatrix> {
    PdMatrix::new(Hermitian::symmetrized(tensor_product(
        a.matrix(),
        b.matrix(),
    )))
}

pub fn hadamard_pd(a: &PdMatrix, b: &PdMatrix) -> Result<PdMatrix> {
    PdMatrix::new(Hermitian::symmetrized(hadamard_product(
        a.matrix(),
        b.matrix(),
    )?))
}

/// Ψ: the principal submatrix of an `m² × m²` matrix on the indices
/// `(i−1)m + i`, so that `Ψ(A ⊗ B) = A ∘ B`. It is unital and strictly positive.
pub fn psi_extract(t: &CMatrix) -> Result<CMatrix> {
    if !t.is_square() {
        return Err(Error::NotSquare {
            rows: t.nrows(),
            cols: t.ncols(),
        });
    }
    let n = t.nrows();
    let m = (n as f64).sqrt().round() as usize;
    if m * m != n || m == 0 {
        return Err(Error::Domain(format!(
            "dimension {n} is not a perfect square"
        )));
    }
    let idx = |i: usize| i * (m + 1);
    Ok(CMatrix::from_fn(m, m, |i, j| t[(idx(i), idx(j))]))
}

/// `ω ⊗ μ = (w_1 μ_1, …, w_1 μ_{n'}, w_2 μ_1, …)`.
pub fn weight_tensor(omega: &WeightVector, mu: &WeightVector) -> WeightVector {
    let products: Vec<f64> = omega
        .iter()
        .flat_map(|w| mu.iter().map(move |m| w * m))
        .collect();
    WeightVector::new(products).expect("products of positive weights are positive")
}

fn tuple_product(
    a: &PdTuple,
    b: &PdTuple,
    f: impl Fn(&PdMatrix, &PdMatrix) -> Result<PdMatrix>,
) -> Result<PdTuple> {
    let items = a
        .iter()
        .flat_map(|ai| b.iter().map(move |bj| (ai, bj)))
        .map(|(ai, bj)| f(ai, bj))
        .collect::<Result<Vec<_>>>()?;
    PdTuple::new(items)
}

/// All ordered tensor products; entry `(i, j)` sits at position `i·n' + j`.
pub fn tuple_tensor(a: &PdTuple, b: &PdTuple) -> Result<PdTuple> {
    tuple_product(a, b, tensor_pd)
}

/// All ordered Hadamard products in the same block order as [`tuple_tensor`].
pub fn tuple_hadamard(a: &PdTuple, b: &PdTuple) -> Result<PdTuple> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    tuple_product(a, b, hadamard_pd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MajorizationKind {
    WeakLog,
    Weak,
    Log,
}

impl fmt::Display for MajorizationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MajorizationKind::WeakLog => "weak-log",
            MajorizationKind::Weak => "weak",
            MajorizationKind::Log => "log",
        })
    }
}

/// Outcome of comparing descending prefix sums (or log prefix sums).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorizationVerdict {
    pub kind: MajorizationKind,
    pub holds: bool,
    /// Smallest prefix gap `Σ_{≤k} y − Σ_{≤k} x` (in logs for the log kinds).
    pub worst_margin: f64,
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn check_vectors(y: &[f64], x: &[f64], positive: bool) -> Result<()> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch {
            what: "majorization vectors",
            expected: y.len(),
            found: x.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::Domain("majorization vectors are empty".into()));
    }
    if positive {
        if let Some(bad) = y.iter().chain(x).find(|v| !(**v > 0.0)) {
            return Err(Error::Domain(format!(
                "entries must be positive, found {bad}"
            )));
        }
    }
    Ok(())
}

/// Compares prefix sums of the descending rearrangements of `y` and `x`.
/// With `total_equal`, the full sums must also agree within slack.
fn prefix_compare(
    kind: MajorizationKind,
    y: &[f64],
    x: &[f64],
    slack: f64,
    total_equal: bool,
) -> MajorizationVerdict {
    let (mut sy, mut sx) = (0.0, 0.0);
    let mut holds = true;
    let mut worst = f64::INFINITY;
    let last = y.len() - 1;
    for (k, (yk, xk)) in y.iter().zip(x).enumerate() {
        sy += yk;
        sx += xk;
        let margin = sy - sx;
        let tol = slack * (1.0 + sy.abs().max(sx.abs()));
        worst = worst.min(margin);
        if margin < -tol || (total_equal && k == last && margin > tol) {
            holds = false;
        }
    }
    MajorizationVerdict {
        kind,
        holds,
        worst_margin: worst,
    }
}

/// `x ≺_{wlog} y`: every descending prefix product of `x` is at most that of
/// `y`. Runs on logarithms with additive slack `slack · (1 + |prefix|)`.
pub fn weak_log_majorizes(y: &[f64], x: &[f64], slack: f64) -> Result<MajorizationVerdict> {
    check_vectors(y, x, true)?;
    let ly: Vec<f64> = sorted_desc(y).iter().map(|v| v.ln()).collect();
    let lx: Vec<f64> = sorted_desc(x).iter().map(|v| v.ln()).collect();
    Ok(prefix_compare(
        MajorizationKind::WeakLog,
        &ly,
        &lx,
        slack,
        false,
    ))
}

/// `x ≺_{log} y`: weak log-majorization with equal full products.
pub fn log_majorizes(y: &[f64], x: &[f64], slack: f64) -> Result<MajorizationVerdict> {
    check_vectors(y, x, true)?;
    let ly: Vec<f64> = sorted_desc(y).iter().map(|v| v.ln()).collect();
    let lx: Vec<f64> = sorted_desc(x).iter().map(|v| v.ln()).collect();
    Ok(prefix_compare(MajorizationKind::Log, &ly, &lx, slack, true))
}

/// `x ≺_w y`: every descending prefix sum of `x` is at most that of `y`.
pub fn weak_majorizes(y: &[f64], x: &[f64], slack: f64) -> Result<MajorizationVerdict> {
    check_vectors(y, x, false)?;
    Ok(prefix_compare(
        MajorizationKind::Weak,
        &sorted_desc(y),
        &sorted_desc(x),
        slack,
        false,
    ))
}
