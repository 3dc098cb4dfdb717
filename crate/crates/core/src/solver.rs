//! Fixed-point driver shared by the power-mean, Cartan and right-mean solvers.
//!
//! Each step moves from the current iterate `X` along the geodesic towards the
//! natural image `G(X)`: `X ← X #_θ G(X)`. The step length `θ` starts at
//! `damping · θ_max` and grows by 1.5 (capped at `θ_max`) after two
//! consecutive accepted steps. With `θ = 1` this is plain Picard iteration;
//! larger `θ_max` extrapolates along the geodesic, which for commuting inputs
//! lands on the fixed point in a single step.
//!
//! A candidate that fails to reduce the residual is rejected and the step is
//! halved. Depending on the map, a rejection is also followed by a fallback:
//! an unconditional step known to contract, or a Newton step on the defect
//! `X − G(X)` with a finite-difference Jacobian.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

use crate::linalg::{CMatrix, Hermitian, PdMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative residual threshold.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial step as a fraction of the solver's natural step, in `(0, 1]`.
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-12,
            max_iter: 500,
            damping: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn new(tol: f64, max_iter: usize, damping: f64) -> Result<Self> {
        let cfg = SolverConfig {
            tol,
            max_iter,
            damping,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Domain(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverStatus {
    Converged,
    MaxIterExceeded,
    Diverged,
}

impl fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverStatus::Converged => "converged",
            SolverStatus::MaxIterExceeded => "max-iter-exceeded",
            SolverStatus::Diverged => "diverged",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub final_residual: f64,
    /// Residual of the current iterate after each iteration.
    pub residuals: Vec<f64>,
    pub status: SolverStatus,
    /// Number of times the step length was halved.
    pub step_reductions: usize,
}

impl SolverReport {
    /// Report for a problem that needed no iteration.
    pub fn exact(residual: f64) -> Self {
        SolverReport {
            iterations: 0,
            final_residual: residual,
            residuals: Vec::new(),
            status: SolverStatus::Converged,
            step_reductions: 0,
        }
    }

    pub fn converged(&self) -> bool {
        self.status == SolverStatus::Converged
    }
}

/// Smallest step, relative to `θ_max`, before the driver gives up.
pub(crate) const MIN_STEP_FRACTION: f64 = 1.0 / (1u64 << 20) as f64;
/// Iterations without a new smallest residual after which the driver reports
/// a stall (typically a rounding floor above the requested tolerance).
pub(crate) const STALL_WINDOW: usize = 100;
/// Finite-difference step of the Newton fallback along the congruence-scaled
/// directions `X^{1/2} E_k X^{1/2}`, i.e. relative to the iterate.
const NEWTON_FD_STEP: f64 = 1e-5;
/// Backtracking halvings tried along a Newton direction.
const NEWTON_BACKTRACKS: usize = 40;
/// An accepted step that reduces the merit by less than this factor counts as
/// slow linear progress; maps with a defect then also try a Newton step.
const SLOW_PROGRESS_RATIO: f64 = 0.9;

/// A fixed-point problem `X = G(X)` on the positive definite cone.
pub(crate) trait FixedPointMap {
    /// Whatever must be remembered about an evaluated iterate to take a step.
    type Eval;

    /// Relative residual of `x` together with the data needed by [`Self::step`].
    fn evaluate(&self, x: &PdMatrix) -> Result<(f64, Self::Eval)>;

    /// Candidate iterate at step length `theta`.
    fn step(&self, x: &PdMatrix, eval: &Self::Eval, theta: f64) -> Result<PdMatrix>;

    /// The defect `X − G(X)`, for maps that support Newton steps: the
    /// [`Fallback::Newton`] fallback, and acceleration of slow progress.
    fn defect(&self, _x: &PdMatrix, _eval: &Self::Eval) -> Option<CMatrix> {
        None
    }

    /// Whether a candidate may be accepted at all, e.g. because it lies in a
    /// region known to contain the solution.
    fn admissible(&self, _x: &PdMatrix) -> bool {
        true
    }

    /// The quantity an accepted step must decrease; the residual by default.
    fn merit(&self, _x: &PdMatrix, _eval: &Self::Eval, residual: f64) -> f64 {
        residual
    }
}

/// An evaluated iterate.
struct Point<E> {
    x: PdMatrix,
    residual: f64,
    merit: f64,
    eval: E,
}

/// Evaluates a candidate; `None` if it is inadmissible, fails to evaluate or
/// yields non-finite values.
fn point<M: FixedPointMap>(map: &M, x: PdMatrix) -> Option<Point<M::Eval>> {
    if !map.admissible(&x) {
        return None;
    }
    let (residual, eval) = map.evaluate(&x).ok()?;
    let merit = map.merit(&x, &eval, residual);
    (residual.is_finite() && merit.is_finite()).then_some(Point {
        x,
        residual,
        merit,
        eval,
    })
}

/// What the driver does after rejecting a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Fallback {
    /// Take this step length unconditionally; it must be known to contract
    /// (in the Thompson metric) so that progress is guaranteed.
    Contraction(f64),
    /// Take a backtracked Newton step on the defect.
    Newton,
}

/// Step lengths for [`drive`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepRule {
    /// Longest step tried (1 is the plain Picard step `X ← G(X)`).
    pub theta_max: f64,
    pub fallback: Fallback,
}

/// Runs the adaptive geodesic iteration from `x0`. A candidate is accepted
/// when it lowers the merit; failed evaluations count as an increase.
pub(crate) fn drive<M: FixedPointMap>(
    map: &M,
    x0: PdMatrix,
    rule: StepRule,
    cfg: &SolverConfig,
) -> Result<(PdMatrix, SolverReport)> {
    cfg.validate()?;
    let (residual, eval) = map.evaluate(&x0)?;
    let merit = map.merit(&x0, &eval, residual);
    let mut report = SolverReport::exact(residual);
    if residual < cfg.tol {
        return Ok((x0, report));
    }
    let mut current = Point {
        x: x0,
        residual,
        merit,
        eval,
    };

    let theta_max = rule.theta_max;
    let theta_min = match rule.fallback {
        Fallback::Contraction(safe) => safe,
        Fallback::Newton => theta_max / 16.0,
    };
    let mut theta = cfg.damping * theta_max;
    let mut streak = 0usize;
    let mut best = current.merit;
    let mut since_best = 0usize;
    while report.iterations < cfg.max_iter {
        report.iterations += 1;
        let attempt = |from: &Point<M::Eval>, theta: f64| {
            map.step(&from.x, &from.eval, theta)
                .ok()
                .and_then(|c| point(map, c))
        };
        let candidate = attempt(&current, theta);
        let accepted = match candidate {
            Some(step) if step.merit < current.merit => {
                streak += 1;
                if streak >= 2 {
                    theta = (theta * 1.5).min(theta_max);
                    streak = 0;
                }
                if step.merit > SLOW_PROGRESS_RATIO * current.merit {
                    newton_step(map, &current, step.merit).or(Some(step))
                } else {
                    Some(step)
                }
            }
            candidate => {
                report.step_reductions += 1;
                streak = 0;
                let shortened = theta > theta_min;
                theta = (theta * 0.5).max(theta_min);
                match rule.fallback {
                    Fallback::Contraction(safe) if shortened => attempt(&current, safe),
                    Fallback::Contraction(_) => candidate,
                    Fallback::Newton => {
                        let step = newton_step(map, &current, current.merit);
                        if step.is_none() {
                            log::debug!(
                                "newton fallback failed at residual {:e}",
                                current.residual
                            );
                            report.status = SolverStatus::Diverged;
                            return Err(Error::Solver(Box::new(report)));
                        }
                        step
                    }
                }
            }
        };
        if let Some(next) = accepted {
            current = next;
        }
        report.residuals.push(current.residual);
        report.final_residual = current.residual;
        if current.residual < cfg.tol {
            report.status = SolverStatus::Converged;
            return Ok((current.x, report));
        }
        if current.merit < best {
            best = current.merit;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if theta < MIN_STEP_FRACTION * theta_max || since_best >= STALL_WINDOW {
            log::debug!(
                "fixed-point iteration stalled at residual {:e} after {} iterations",
                current.residual,
                report.iterations
            );
            report.status = SolverStatus::Diverged;
            return Err(Error::Solver(Box::new(report)));
        }
    }
    report.status = SolverStatus::MaxIterExceeded;
    Err(Error::Solver(Box::new(report)))
}

/// Orthonormal basis, under the trace inner product, of the real vector space
/// of `m × m` Hermitian matrices: the `m` diagonal units followed by a real and
/// an imaginary element for each pair `i < j`.
struct HermitianBasis {
    dim: usize,
}

impl HermitianBasis {
    fn len(&self) -> usize {
        self.dim * self.dim
    }

    fn element(&self, k: usize) -> CMatrix {
        let m = self.dim;
        let mut e = CMatrix::zeros(m, m);
        if k < m {
            e[(k, k)] = C64::new(1.0, 0.0);
            return e;
        }
        let (i, j) = self.pair(k - m);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        if (k - m).is_multiple_of(2) {
            e[(i, j)] = C64::new(s, 0.0);
            e[(j, i)] = C64::new(s, 0.0);
        } else {
            e[(i, j)] = C64::new(0.0, s);
            e[(j, i)] = C64::new(0.0, -s);
        }
        e
    }

    /// Index pair `(i, j)`, `i < j`, of off-diagonal slot `offset / 2` in row-major order.
    fn pair(&self, offset: usize) -> (usize, usize) {
        let mut rest = offset / 2;
        for i in 0..self.dim {
            let row = self.dim - i - 1;
            if rest < row {
                return (i, i + 1 + rest);
            }
            rest -= row;
        }
        unreachable!("basis index out of range")
    }

    fn coords(&self, h: &CMatrix) -> DVector<f64> {
        let m = self.dim;
        let s = std::f64::consts::SQRT_2;
        let mut v = Vec::with_capacity(self.len());
        v.extend((0..m).map(|i| h[(i, i)].re));
        for i in 0..m {
            for j in i + 1..m {
                // Coordinates of the Hermitian part of `h`.
                let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
                v.push(s * z.re);
                v.push(s * z.im);
            }
        }
        DVector::from_vec(v)
    }
}

/// Defect at `x`, congruence-normalized by `inv_half = X₀^{-1/2}` of the base point.
fn defect_at<M: FixedPointMap>(map: &M, x: CMatrix, inv_half: &CMatrix) -> Option<CMatrix> {
    let x = PdMatrix::new(Hermitian::symmetrized(x)).ok()?;
    let (_, eval) = map.evaluate(&x).ok()?;
    Some(inv_half * map.defect(&x, &eval)? * inv_half)
}

/// One Newton step on the defect, backtracked until the merit drops below `merit`. The
/// system is posed in the congruence-normalized frame `X^{-1/2} (·) X^{-1/2}`:
/// the Jacobian is taken by central differences along `X^{1/2} E_k X^{1/2}` and
/// the defect is normalized the same way, so that badly conditioned iterates
/// do not make the linear system badly scaled.
fn newton_step<M: FixedPointMap>(
    map: &M,
    from: &Point<M::Eval>,
    merit: f64,
) -> Option<Point<M::Eval>> {
    let (x, eval) = (&from.x, &from.eval);
    let basis = HermitianBasis { dim: x.dim() };
    let h = NEWTON_FD_STEP;
    let half = x.pow_matrix(0.5);
    let inv_half = x.pow_matrix(-0.5);
    let f0 = basis.coords(&(&inv_half * map.defect(x, eval)? * &inv_half));
    let elements: Vec<CMatrix> = (0..basis.len())
        .map(|k| &half * basis.element(k) * &half)
        .collect();
    let mut jac = DMatrix::<f64>::zeros(basis.len(), basis.len());
    for (k, e) in elements.iter().enumerate() {
        let step = e * C64::new(h, 0.0);
        let plus = defect_at(map, x.matrix() + &step, &inv_half)?;
        let minus = defect_at(map, x.matrix() - &step, &inv_half)?;
        jac.set_column(
            k,
            &((basis.coords(&plus) - basis.coords(&minus)) / (2.0 * h)),
        );
    }
    let delta = jac.lu().solve(&(-f0))?;
    let direction = elements
        .iter()
        .zip(delta.iter())
        .fold(CMatrix::zeros(x.dim(), x.dim()), |acc, (e, d)| {
            acc + e * C64::new(*d, 0.0)
        });
    let mut t = 1.0;
    for _ in 0..NEWTON_BACKTRACKS {
        let candidate = PdMatrix::new(Hermitian::symmetrized(
            x.matrix() + &direction * C64::new(t, 0.0),
        ))
        .ok()
        .and_then(|c| point(map, c));
        if let Some(found) = candidate.filter(|p| p.merit < merit) {
            return Some(found);
        }
        t *= 0.5;
    }
    None
}
