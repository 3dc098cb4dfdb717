//! Dense Hermitian linear algebra kernel.
//!
//! Every fractional power, logarithm and exponential in the crate goes through a
//! full eigendecomposition ([`eigh`]) or, for powers of Gram products `F F*`, a
//! one-sided Jacobi orthogonalization of the factor ([`gram_power`]). The latter
//! keeps the small end of the spectrum accurate when `F` is a product of powers
//! with a wide dynamic range.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Relative asymmetry accepted by [`Hermitian::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// `λ_min > PD_TOL · max(1, λ_max)` is required of every [`PdMatrix`].
pub const PD_TOL: f64 = 1e-12;

fn require_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn require_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Crude condition estimate from the diagonal, used only in error messages.
fn diagonal_condition(m: &CMatrix) -> f64 {
    let diag = m.diagonal();
    let max = diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min = diag.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Projection onto the Hermitian part, `(M + M*) / 2`.
fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// A dense complex Hermitian matrix, stored exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    /// Checks that `m` is Hermitian within [`HERMITIAN_TOL`] (scaled by the
    /// largest entry when it exceeds one) and stores its Hermitian part.
    pub fn new(m: CMatrix) -> Result<Self> {
        require_square(&m)?;
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let asymmetry = (&m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if !asymmetry.is_finite() || asymmetry > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Hermitian(hermitian_part(&m)))
    }

    /// Hermitian part of a computed square matrix. Used for results of
    /// products that are Hermitian in exact arithmetic.
    pub fn symmetrized(m: CMatrix) -> Self {
        assert_eq!(
            m.nrows(),
            m.ncols(),
            "Hermitian::symmetrized needs a square matrix"
        );
        Hermitian(hermitian_part(&m))
    }

    pub fn identity(dim: usize) -> Self {
        Hermitian(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Hermitian(CMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Hermitian(CMatrix::from_diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn eigh(&self) -> Result<EigenDecomposition> {
        eigh(self)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> Result<f64> {
        let eig = self.eigh()?;
        Ok(eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max))
    }

    pub fn scale(&self, c: f64) -> Hermitian {
        Hermitian(self.0.scale(c))
    }

    pub fn add(&self, other: &Hermitian) -> Result<Hermitian> {
        require_same_dim(self.dim(), other.dim())?;
        Ok(Hermitian(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Hermitian) -> Result<Hermitian> {
        require_same_dim(self.dim(), other.dim())?;
        Ok(Hermitian(&self.0 - &other.0))
    }

    /// Matrix exponential; always positive definite in exact arithmetic.
    pub fn exp(&self) -> Result<PdMatrix> {
        let eig = self.eigh()?;
        PdMatrix::new(Hermitian::symmetrized(eig.apply(f64::exp)))
    }
}

/// `A = U diag(λ) U*` with `λ` sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub vectors: CMatrix,
    pub values: Vec<f64>,
}

impl EigenDecomposition {
    /// `U diag(f(λ)) U*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fj = f(lambda);
            scaled.column_mut(j).scale_mut(fj);
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|x| x)
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
pub fn eigh(a: &Hermitian) -> Result<EigenDecomposition> {
    let dim = a.dim();
    if dim == 0 {
        return Ok(EigenDecomposition {
            vectors: CMatrix::zeros(0, 0),
            values: Vec::new(),
        });
    }
    let failure = || Error::NumericalFailure {
        dim,
        condition: diagonal_condition(a.matrix()),
    };
    if a.matrix()
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(failure());
    }
    let raw = nalgebra::SymmetricEigen::try_new(a.matrix().clone(), f64::EPSILON, 10_000)
        .ok_or_else(failure)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| raw.eigenvalues[j].total_cmp(&raw.eigenvalues[i]));
    let values = order.iter().map(|&i| raw.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(dim, dim, |r, c| raw.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition { vectors, values })
}

/// `(F F*)^t` for a square factor `F` and `t > 0`, computed from an
/// orthogonalization of the columns of `F` so that the dynamic range of `F F*`
/// is never formed explicitly.
pub fn gram_power(factor: &CMatrix, t: f64) -> Result<Hermitian> {
    let cols = orthogonal_columns(factor)?;
    Ok(gram_function(&cols, |sigma| sigma.powf(2.0 * t)))
}

/// `log(F F*)` for a square invertible factor `F`.
pub fn gram_log(factor: &CMatrix) -> Result<Hermitian> {
    let cols = orthogonal_columns(factor)?;
    if cols.sigma.iter().any(|&s| s <= 0.0) {
        return Err(Error::NumericalFailure {
            dim: factor.nrows(),
            condition: f64::INFINITY,
        });
    }
    Ok(gram_function(&cols, |sigma| 2.0 * sigma.ln()))
}

/// Singular values of `F` in descending order, i.e. square roots of the
/// eigenvalues of `F F*`.
pub fn singular_values(factor: &CMatrix) -> Result<Vec<f64>> {
    let mut sigma = orthogonal_columns(factor)?.sigma;
    sigma.sort_by(|a, b| b.total_cmp(a));
    Ok(sigma)
}

/// `F V` for a unitary `V` chosen so that the columns are mutually orthogonal;
/// the column norms are the singular values of `F`.
struct OrthogonalColumns {
    w: CMatrix,
    sigma: Vec<f64>,
}

/// Sweeps of the one-sided Jacobi method before giving up.
const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi orthogonalization of the columns of `F`.
///
/// nalgebra's bidiagonal SVD occasionally returns singular vectors with
/// relative errors near 1e-5 on small complex inputs, which is far above what
/// the fixed-point solvers need; Jacobi rotations are accurate to a few ulps
/// and cheap at the sizes used here.
fn orthogonal_columns(factor: &CMatrix) -> Result<OrthogonalColumns> {
    let dim = require_square(factor)?;
    let failure = || Error::NumericalFailure {
        dim,
        condition: f64::NAN,
    };
    if factor
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(failure());
    }
    // Columns count as orthogonal once |⟨w_p, w_q⟩| ≤ m·ε·‖w_p‖‖w_q‖; a
    // tighter test can cycle on rounding noise.
    let threshold = dim as f64 * f64::EPSILON;
    let mut w = factor.clone();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..dim {
            for q in p + 1..dim {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g <= threshold * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // Rotate the phase of column q so that the inner product is real,
                // then apply the real Jacobi rotation that annihilates it.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..dim {
                    let a_p = w[(i, p)];
                    let a_q = w[(i, q)] * phase.conj();
                    w[(i, p)] = a_p * c - a_q * s;
                    w[(i, q)] = a_p * s + a_q * c;
                }
            }
        }
        if !rotated {
            let sigma = (0..dim).map(|j| w.column(j).norm()).collect();
            return Ok(OrthogonalColumns { w, sigma });
        }
    }
    Err(failure())
}

/// `Σ_j f(σ_j) u_j u_j*` with `u_j = w_j / σ_j`; columns with `σ_j = 0`
/// contribute nothing.
fn gram_function(cols: &OrthogonalColumns, f: impl Fn(f64) -> f64) -> Hermitian {
    let mut scaled = cols.w.clone();
    for (j, &sigma) in cols.sigma.iter().enumerate() {
        let weight = if sigma > 0.0 {
            f(sigma) / (sigma * sigma)
        } else {
            0.0
        };
        scaled.column_mut(j).scale_mut(weight);
    }
    Hermitian::symmetrized(&scaled * cols.w.adjoint())
}

/// A Hermitian positive definite matrix together with its eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PdMatrix {
    herm: Hermitian,
    eig: EigenDecomposition,
}

impl PdMatrix {
    /// Rejects matrices whose smallest eigenvalue is not above
    /// `PD_TOL · max(1, λ_max)`. Nothing is clamped.
    pub fn new(herm: Hermitian) -> Result<Self> {
        let eig = herm.eigh()?;
        Self::with_eigen(herm, eig)
    }

    fn with_eigen(herm: Hermitian, eig: EigenDecomposition) -> Result<Self> {
        if eig.values.is_empty() {
            return Err(Error::Domain("zero-dimensional matrix".into()));
        }
        let (min, max) = (eig.min(), eig.max());
        if !(min > PD_TOL * max.max(1.0)) || !max.is_finite() {
            return Err(Error::NotPositiveDefinite { min, max });
        }
        Ok(PdMatrix { herm, eig })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(Hermitian::new(m)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(Hermitian::from_real_diagonal(diag))
    }

    /// Builds `U diag(values) U*` directly from a known spectral decomposition.
    pub fn from_spectrum(vectors: CMatrix, values: &[f64]) -> Result<Self> {
        let dim = require_square(&vectors)?;
        require_same_dim(dim, values.len())?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
        let eig = EigenDecomposition {
            vectors: CMatrix::from_fn(dim, dim, |r, c| vectors[(r, order[c])]),
            values: order.iter().map(|&i| values[i]).collect(),
        };
        let herm = Hermitian::symmetrized(eig.reconstruct());
        Self::with_eigen(herm, eig)
    }

    pub fn identity(dim: usize) -> Self {
        PdMatrix {
            herm: Hermitian::identity(dim),
            eig: EigenDecomposition {
                vectors: CMatrix::identity(dim, dim),
                values: vec![1.0; dim],
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.herm.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.herm.matrix()
    }

    pub fn hermitian(&self) -> &Hermitian {
        &self.herm
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    pub fn lambda_min(&self) -> f64 {
        self.eig.min()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eig.max()
    }

    pub fn condition(&self) -> f64 {
        self.lambda_max() / self.lambda_min()
    }

    pub fn trace(&self) -> f64 {
        self.herm.trace()
    }

    /// Determinant as the product of eigenvalues.
    pub fn det(&self) -> f64 {
        self.eig.values.iter().product()
    }

    pub fn log_det(&self) -> f64 {
        self.eig.values.iter().map(|v| v.ln()).sum()
    }

    /// `U diag(λ^t) U*` without the positive definiteness check. Intended for
    /// intermediate factors whose spectrum may fall outside the PD threshold.
    pub fn pow_matrix(&self, t: f64) -> CMatrix {
        if t == 1.0 {
            return self.matrix().clone();
        }
        self.eig.apply(|x| x.powf(t))
    }

    /// Real matrix power, reusing the cached eigenvectors.
    pub fn pow(&self, t: f64) -> Result<PdMatrix> {
        if t == 1.0 {
            return Ok(self.clone());
        }
        if t == 0.0 {
            return Ok(PdMatrix::identity(self.dim()));
        }
        let values: Vec<f64> = self.eig.values.iter().map(|x| x.powf(t)).collect();
        PdMatrix::from_spectrum(self.eig.vectors.clone(), &values)
    }

    pub fn inverse(&self) -> Result<PdMatrix> {
        self.pow(-1.0)
    }

    pub fn sqrt(&self) -> Result<PdMatrix> {
        self.pow(0.5)
    }

    pub fn log(&self) -> Hermitian {
        Hermitian::symmetrized(self.eig.apply(f64::ln))
    }

    /// `c · A` for `c > 0`.
    pub fn scale(&self, c: f64) -> Result<PdMatrix> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        let eig = EigenDecomposition {
            vectors: self.eig.vectors.clone(),
            values: self.eig.values.iter().map(|v| v * c).collect(),
        };
        PdMatrix::with_eigen(self.herm.scale(c), eig)
    }

    /// Congruence `M A M*`.
    pub fn congruence(&self, m: &CMatrix) -> Result<PdMatrix> {
        PdMatrix::new(congruence(m, &self.herm)?)
    }
}

/// `M A M*`.
pub fn congruence(m: &CMatrix, a: &Hermitian) -> Result<Hermitian> {
    let dim = require_square(m)?;
    require_same_dim(a.dim(), dim)?;
    Ok(Hermitian::symmetrized(m * a.matrix() * m.adjoint()))
}

pub fn mpow(a: &PdMatrix, t: f64) -> Result<PdMatrix> {
    a.pow(t)
}

pub fn trace(a: &Hermitian) -> f64 {
    a.trace()
}

pub fn det_via_eigs(a: &PdMatrix) -> f64 {
    a.det()
}

/// Normalized Loewner margin `λ_min(B − A) / (1 + ‖B − A‖₂)`; nonnegative
/// exactly when `A ≤ B`.
pub fn loewner_margin(a: &Hermitian, b: &Hermitian) -> Result<f64> {
    let diff = b.sub(a)?;
    let eig = diff.eigh()?;
    let norm = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(eig.min() / (1.0 + norm))
}

/// `A ≤ B` in the Loewner order, accepting `λ_min(B − A) ≥ −slack·(1 + ‖B − A‖₂)`.
pub fn loewner_leq(a: &Hermitian, b: &Hermitian, slack: f64) -> Result<bool> {
    Ok(loewner_margin(a, b)? >= -slack)
}

/// Largest entrywise modulus of `A − B` relative to that of `B`.
pub fn relative_max_error(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Relative Frobenius distance `‖A − B‖_F / ‖B‖_F`.
pub fn relative_frobenius_error(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = b.norm();
    let err = (a - b).norm();
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Seeded generator for random test instances. The state is an explicit value;
/// two generators built from the same seed produce identical streams.
#[derive(Debug, Clone)]
pub struct PdRng {
    rng: ChaCha8Rng,
}

impl PdRng {
    pub fn new(seed: u64) -> Self {
        PdRng {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        self.rng.random_range(lo..hi)
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.rng.random_range(0..len)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }

    fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Haar-distributed unitary from the QR factorization of a complex
    /// Gaussian matrix, with the phases of `R`'s diagonal absorbed into `Q`.
    pub fn unitary(&mut self, dim: usize) -> CMatrix {
        let g = CMatrix::from_fn(dim, dim, |_, _| C64::new(self.gaussian(), self.gaussian()));
        let qr = g.qr();
        let (mut q, r) = qr.unpack();
        for j in 0..dim {
            let d = r[(j, j)];
            let norm = d.norm();
            if norm > 0.0 {
                let phase = d / norm;
                for i in 0..dim {
                    q[(i, j)] *= phase;
                }
            }
        }
        q
    }

    /// `Q diag(λ) Q*` with `Q` Haar unitary and `λ` log-uniform on `[1/cond, 1]`.
    pub fn pd(&mut self, dim: usize, cond: f64) -> Result<PdMatrix> {
        if !(cond >= 1.0) || !cond.is_finite() {
            return Err(Error::Domain(format!(
                "condition bound must be >= 1, got {cond}"
            )));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        let q = self.unitary(dim);
        let values = self.spectrum(dim, cond);
        PdMatrix::from_spectrum(q, &values)
    }

    /// `dim` values log-uniform on `[1/cond, 1]`.
    pub fn spectrum(&mut self, dim: usize, cond: f64) -> Vec<f64> {
        let log_cond = cond.ln();
        (0..dim)
            .map(|_| (-self.uniform(0.0, log_cond)).exp())
            .collect()
    }

    /// Positive probability vector (normalized exponential draws, bounded away from zero).
    pub fn probability(&mut self, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n)
            .map(|_| 0.05 - (-self.uniform(0.0, 1.0)).ln_1p())
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    }

    /// Uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.index(i + 1);
            p.swap(i, j);
        }
        p
    }
}

/// Deterministic random PD matrix for a given seed; see [`PdRng::pd`].
pub fn random_pd(seed: u64, dim: usize, cond: f64) -> Result<PdMatrix> {
    PdRng::new(seed).pd(dim, cond)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: &[&[f64]]) -> CMatrix {
        let n = rows.len();
        CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0))
    }

    #[test]
    fn eigh_identity_and_diagonal() {
        let eig = eigh(&Hermitian::identity(3)).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0, 1.0]);
        let eig = eigh(&Hermitian::from_real_diagonal(&[1.0, 4.0])).unwrap();
        assert_eq!(eig.values, vec![4.0, 1.0]);
        for c in 0..2 {
            let nonzero = eig
                .vectors
                .column(c)
                .iter()
                .filter(|z| z.norm() > 0.5)
                .count();
            assert_eq!(nonzero, 1);
        }
    }

    #[test]
    fn eigh_two_by_two() {
        // x^2 - 4x + 3 = 0
        let eig = eigh(&Hermitian::new(real(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap()).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_reconstructs_ill_conditioned() {
        let mut rng = PdRng::new(11);
        for dim in [2, 5, 16] {
            let a = rng.pd(dim, 1e8).unwrap();
            let eig = eigh(a.hermitian()).unwrap();
            assert!(relative_max_error(&eig.reconstruct(), a.matrix()) < 1e-10);
            let gram = eig.vectors.adjoint() * &eig.vectors;
            assert!(relative_max_error(&gram, &CMatrix::identity(dim, dim)) < 1e-10);
        }
    }

    #[test]
    fn mpow_examples() {
        let a = PdMatrix::from_diagonal(&[4.0, 9.0]).unwrap();
        let r = a.pow(0.5).unwrap();
        assert!(relative_max_error(r.matrix(), &real(&[&[2.0, 0.0], &[0.0, 3.0]])) < 1e-15);
        assert_eq!(a.pow(0.0).unwrap().matrix(), &CMatrix::identity(2, 2));

        let b = PdMatrix::from_matrix(real(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        let sq = b.pow(2.0).unwrap();
        let direct = b.matrix() * b.matrix();
        assert!(relative_max_error(sq.matrix(), &direct) < 1e-14);
        assert!(relative_max_error(sq.matrix(), &real(&[&[5.0, 4.0], &[4.0, 5.0]])) < 1e-14);
    }

    #[test]
    fn mpow_composes() {
        let a = random_pd(3, 4, 1e3).unwrap();
        let lhs = a.pow(0.7).unwrap().pow(-1.3).unwrap();
        let rhs = a.pow(-0.91).unwrap();
        assert!(relative_max_error(lhs.matrix(), rhs.matrix()) < 1e-10);
    }

    #[test]
    fn congruence_examples() {
        let a = random_pd(5, 3, 10.0).unwrap();
        let same = congruence(&CMatrix::identity(3, 3), a.hermitian()).unwrap();
        assert!(relative_max_error(same.matrix(), a.matrix()) < 1e-15);

        let d = real(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let r = congruence(&d, &Hermitian::identity(2)).unwrap();
        assert_eq!(r.matrix(), &real(&[&[4.0, 0.0], &[0.0, 1.0]]));

        let u = PdRng::new(9).unitary(3);
        let rotated = a.congruence(&u).unwrap();
        for (x, y) in rotated.eigenvalues().iter().zip(a.eigenvalues()) {
            assert!((x - y).abs() < 1e-12);
        }

        let err = congruence(&CMatrix::identity(2, 2), a.hermitian()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn loewner_examples() {
        let i = Hermitian::identity(2);
        let two = i.scale(2.0);
        assert!(loewner_leq(&i, &two, 0.0).unwrap());
        assert!(!loewner_leq(&two, &i, 0.0).unwrap());
        let a = Hermitian::from_real_diagonal(&[1.0, 3.0]);
        let b = Hermitian::from_real_diagonal(&[2.0, 2.0]);
        assert!(!loewner_leq(&a, &b, 0.0).unwrap());
        assert!(!loewner_leq(&b, &a, 0.0).unwrap());
    }

    #[test]
    fn random_pd_contract() {
        let a = random_pd(42, 3, 1.0).unwrap();
        assert!(relative_max_error(a.matrix(), &CMatrix::identity(3, 3)) < 1e-12);

        let x = random_pd(7, 4, 100.0).unwrap();
        let y = random_pd(7, 4, 100.0).unwrap();
        assert_eq!(x.matrix(), y.matrix());

        let z = random_pd(1, 4, 100.0).unwrap();
        let eig = eigh(z.hermitian()).unwrap();
        assert!(eig.max() / eig.min() <= 100.0 * (1.0 + 1e-8));
    }

    #[test]
    fn unitary_is_unitary() {
        let u = PdRng::new(3).unitary(5);
        let gram = u.adjoint() * &u;
        assert!(relative_max_error(&gram, &CMatrix::identity(5, 5)) < 1e-13);
    }

    #[test]
    fn trace_and_det() {
        assert_eq!(trace(&Hermitian::identity(3)), 3.0);
        assert!((det_via_eigs(&PdMatrix::from_diagonal(&[2.0, 3.0]).unwrap()) - 6.0).abs() < 1e-15);
        let b = PdMatrix::from_matrix(real(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!((det_via_eigs(&b) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn constructors_reject_bad_input() {
        let bad = CMatrix::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 0.0));
        assert!(matches!(
            Hermitian::new(bad),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            PdMatrix::from_diagonal(&[1.0, -1.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            PdMatrix::from_diagonal(&[1.0, 0.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(Hermitian::new(rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn gram_power_matches_direct_product() {
        let mut rng = PdRng::new(17);
        let a = rng.pd(4, 10.0).unwrap();
        let b = rng.pd(4, 10.0).unwrap();
        let f = a.matrix() * b.matrix();
        let direct = PdMatrix::new(Hermitian::symmetrized(&f * f.adjoint())).unwrap();
        let via_svd = gram_power(&f, 0.3).unwrap();
        assert!(relative_max_error(via_svd.matrix(), direct.pow(0.3).unwrap().matrix()) < 1e-12);
        let log = gram_log(&f).unwrap();
        assert!(relative_max_error(log.matrix(), direct.log().matrix()) < 1e-11);
    }
}
