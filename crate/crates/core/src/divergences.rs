//! The α-z Rényi kernel `Q_{α,z}`, the α-z Bures–Wasserstein divergence, the
//! Bures–Wasserstein metric and the log-determinant α-divergence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_power, singular_values, Hermitian, PdMatrix};

/// Width of the band of negative radicands that `d_W` rounds to zero.
pub const RADICAND_CLAMP: f64 = 1e-12;

/// Parameter pair `(α, z)`.
///
/// [`AlphaZ::new`] enforces the divergence domain `0 < α ≤ z < 1`;
/// [`AlphaZ::relaxed`] accepts `0 ≤ α ≤ 1, z > 0`, which is enough to evaluate
/// `Q_{α,z}` but not the divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaZ {
    alpha: f64,
    z: f64,
}

impl AlphaZ {
    pub fn new(alpha: f64, z: f64) -> Result<Self> {
        let p = AlphaZ { alpha, z };
        if !p.in_divergence_domain() {
            return Err(Error::Domain(format!(
                "(alpha, z) = ({alpha}, {z}) must satisfy 0 < alpha <= z < 1"
            )));
        }
        Ok(p)
    }

    pub fn relaxed(alpha: f64, z: f64) -> Result<Self> {
        if !((0.0..=1.0).contains(&alpha) && z > 0.0 && z.is_finite()) {
            return Err(Error::Domain(format!(
                "(alpha, z) = ({alpha}, {z}) must satisfy 0 <= alpha <= 1 and z > 0"
            )));
        }
        Ok(AlphaZ { alpha, z })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn in_divergence_domain(&self) -> bool {
        0.0 < self.alpha && self.alpha <= self.z && self.z < 1.0
    }
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

/// `A^{(1−α)/2z} B^{α/2z}`, whose Gram power of order `z` is `Q_{α,z}(A, B)`.
fn q_factor(p: &AlphaZ, a: &PdMatrix, b: &PdMatrix) -> nalgebra::DMatrix<num_complex::Complex64> {
    let s = 2.0 * p.z;
    a.pow_matrix((1.0 - p.alpha) / s) * b.pow_matrix(p.alpha / s)
}

/// `Q_{α,z}(A, B) = (A^{(1−α)/2z} B^{α/z} A^{(1−α)/2z})^z`.
pub fn q_alpha_z(p: &AlphaZ, a: &PdMatrix, b: &PdMatrix) -> Result<PdMatrix> {
    check_dims(a, b)?;
    PdMatrix::new(gram_power(&q_factor(p, a, b), p.z)?)
}

/// `tr Q_{α,z}(A, B)`, summed from singular values rather than a dense power.
pub fn trace_q_alpha_z(p: &AlphaZ, a: &PdMatrix, b: &PdMatrix) -> Result<f64> {
    check_dims(a, b)?;
    let sigma = singular_values(&q_factor(p, a, b))?;
    Ok(sigma.iter().map(|s| s.powf(2.0 * p.z)).sum())
}

/// `Φ_{α,z}(A, B) = tr((1−α)A + αB) − tr Q_{α,z}(A, B)`, for `0 < α ≤ z < 1`.
///
/// Bitwise-identical arguments return exactly zero instead of rounding noise.
pub fn phi_alpha_z(p: &AlphaZ, a: &PdMatrix, b: &PdMatrix) -> Result<f64> {
    if !p.in_divergence_domain() {
        return Err(Error::Domain(format!(
            "divergence requires 0 < alpha <= z < 1, got ({}, {})",
            p.alpha, p.z
        )));
    }
    if a.matrix() == b.matrix() {
        return Ok(0.0);
    }
    let linear = (1.0 - p.alpha) * a.trace() + p.alpha * b.trace();
    Ok(linear - trace_q_alpha_z(p, a, b)?)
}

/// Bures–Wasserstein metric `[tr((A+B)/2) − tr(A^{1/2} B A^{1/2})^{1/2}]^{1/2}`.
///
/// Radicands in `[−1e-12·scale, 0)` are rounded to zero; anything more
/// negative is reported as a numerical failure.
pub fn bures_wasserstein_distance(a: &PdMatrix, b: &PdMatrix) -> Result<f64> {
    check_dims(a, b)?;
    // Both factor orders have the same singular values; averaging them makes
    // the computed distance symmetric in its arguments bit for bit.
    let (ra, rb) = (a.pow_matrix(0.5), b.pow_matrix(0.5));
    let forward: f64 = singular_values(&(&ra * &rb))?.iter().sum();
    let backward: f64 = singular_values(&(&rb * &ra))?.iter().sum();
    let fidelity = 0.5 * (forward + backward);
    let half_trace = 0.5 * (a.trace() + b.trace());
    let radicand = half_trace - fidelity;
    if radicand >= 0.0 {
        Ok(radicand.sqrt())
    } else if radicand >= -RADICAND_CLAMP * half_trace.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NumericalFailure {
            dim: a.dim(),
            condition: a.condition().max(b.condition()),
        })
    }
}

/// Log-determinant α-divergence for `α ∈ (−1, 1)`:
/// `4/(1−α²) [log det(((1−α)/2) A + ((1+α)/2) B) − ((1−α)/2) log det A − ((1+α)/2) log det B]`.
pub fn log_det_alpha_divergence(alpha: f64, a: &PdMatrix, b: &PdMatrix) -> Result<f64> {
    check_dims(a, b)?;
    if !(alpha > -1.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "alpha must lie in (-1, 1), got {alpha}"
        )));
    }
    let wa = 0.5 * (1.0 - alpha);
    let wb = 0.5 * (1.0 + alpha);
    let mix = PdMatrix::new(Hermitian::symmetrized(
        a.matrix().scale(wa) + b.matrix().scale(wb),
    ))?;
    let gap = mix.log_det() - wa * a.log_det() - wb * b.log_det();
    Ok(4.0 / (1.0 - alpha * alpha) * gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{relative_max_error, PdRng};

    fn diag(d: &[f64]) -> PdMatrix {
        PdMatrix::from_diagonal(d).unwrap()
    }

    #[test]
    fn domain_checks() {
        assert!(AlphaZ::new(0.3, 0.5).is_ok());
        assert!(AlphaZ::new(0.5, 0.5).is_ok());
        assert!(AlphaZ::new(0.6, 0.5).is_err());
        assert!(AlphaZ::new(0.0, 0.5).is_err());
        assert!(AlphaZ::new(0.5, 1.0).is_err());
        assert!(AlphaZ::relaxed(1.0, 2.0).is_ok());
        assert!(AlphaZ::relaxed(0.5, 0.0).is_err());
        let relaxed = AlphaZ::relaxed(0.9, 0.5).unwrap();
        let a = PdMatrix::identity(2);
        assert!(matches!(
            phi_alpha_z(&relaxed, &a, &a),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn q_examples() {
        let mut rng = PdRng::new(11);
        let a = rng.pd(3, 100.0).unwrap();
        let b = rng.pd(3, 100.0).unwrap();
        for (alpha, z) in [(0.3, 0.5), (0.2, 0.9), (1.0, 2.0)] {
            let p = AlphaZ::relaxed(alpha, z).unwrap();
            assert!(
                relative_max_error(q_alpha_z(&p, &a, &a).unwrap().matrix(), a.matrix()) < 1e-10
            );
        }

        let half = AlphaZ::new(0.5, 0.5).unwrap();
        let q = q_alpha_z(&half, &diag(&[4.0, 9.0]), &diag(&[9.0, 4.0])).unwrap();
        assert!(relative_max_error(q.matrix(), diag(&[6.0, 6.0]).matrix()) < 1e-14);

        let p = AlphaZ::new(1.0 / 3.0, 0.5).unwrap();
        let q = q_alpha_z(&p, &PdMatrix::identity(3), &b).unwrap();
        assert!(relative_max_error(q.matrix(), b.pow(1.0 / 3.0).unwrap().matrix()) < 1e-12);

        assert!(q_alpha_z(&p, &PdMatrix::identity(2), &b).is_err());
    }

    #[test]
    fn q_matches_dense_definition() {
        let mut rng = PdRng::new(12);
        let a = rng.pd(4, 1e3).unwrap();
        let b = rng.pd(4, 1e3).unwrap();
        let p = AlphaZ::new(0.35, 0.6).unwrap();
        let side = a.pow_matrix((1.0 - 0.35) / 1.2);
        let inner = PdMatrix::new(Hermitian::symmetrized(
            &side * b.pow_matrix(0.35 / 0.6) * &side,
        ))
        .unwrap();
        let expected = inner.pow_matrix(0.6);
        let got = q_alpha_z(&p, &a, &b).unwrap();
        assert!(relative_max_error(got.matrix(), &expected) < 1e-10);
        let tr = trace_q_alpha_z(&p, &a, &b).unwrap();
        assert!((tr - got.trace()).abs() < 1e-12 * tr);
    }

    #[test]
    fn phi_examples() {
        let a = PdRng::new(13).pd(3, 10.0).unwrap();
        let p = AlphaZ::new(0.4, 0.7).unwrap();
        assert!(phi_alpha_z(&p, &a, &a).unwrap().abs() < 1e-12);

        let half = AlphaZ::new(0.5, 0.5).unwrap();
        let v = phi_alpha_z(&half, &diag(&[1.0]), &diag(&[4.0])).unwrap();
        assert!((v - 0.5).abs() < 1e-14);

        let b = PdRng::new(14).pd(3, 10.0).unwrap();
        let dw = bures_wasserstein_distance(&a, &b).unwrap();
        let phi = phi_alpha_z(&half, &a, &b).unwrap();
        assert!((phi - dw * dw).abs() <= 1e-10 * phi);
    }

    #[test]
    fn bures_wasserstein_examples() {
        let a = PdRng::new(15).pd(3, 100.0).unwrap();
        assert_eq!(bures_wasserstein_distance(&a, &a).unwrap(), 0.0);
        let v = bures_wasserstein_distance(&diag(&[1.0]), &diag(&[4.0])).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-14);
        let v = bures_wasserstein_distance(&PdMatrix::identity(2), &diag(&[4.0, 4.0])).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn log_det_examples() {
        let a = PdRng::new(16).pd(3, 100.0).unwrap();
        assert!(log_det_alpha_divergence(0.0, &a, &a).unwrap().abs() < 1e-12);
        let v = log_det_alpha_divergence(0.0, &diag(&[1.0]), &diag(&[4.0])).unwrap();
        assert!((v - 4.0 * (2.5f64.ln() - 2f64.ln())).abs() < 1e-14);
        let i3 = PdMatrix::identity(3);
        assert_eq!(log_det_alpha_divergence(0.5, &i3, &i3).unwrap(), 0.0);
        assert!(log_det_alpha_divergence(1.0, &i3, &i3).is_err());
    }
}
