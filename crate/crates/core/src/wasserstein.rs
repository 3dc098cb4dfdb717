//! Wasserstein mean `Ω(ω; 𝔸)` by iteration of the K-map, and the trace
//! inequality comparing it with right means of powered tuples.

use serde::{Deserialize, Serialize};

use crate::divergences::AlphaZ;
use crate::error::{Error, Result};
use crate::linalg::{gram_power, CMatrix, Hermitian, PdMatrix};
use crate::means::{arithmetic_mean, check_lengths, weighted_sum, PdTuple, WeightVector};
use crate::rightmean::right_mean;
use crate::solver::{SolverConfig, SolverReport, SolverStatus};

/// Absolute slack allowed per step when checking that `tr S_r` is nondecreasing.
pub const TRACE_MONOTONICITY_SLACK: f64 = 1e-10;

/// `K(S) = S^{-1/2} [Σ w_j (S^{1/2} A_j S^{1/2})^{1/2}]² S^{-1/2}`.
pub fn k_map(weights: &WeightVector, tuple: &PdTuple, s: &PdMatrix) -> Result<PdMatrix> {
    check_lengths(weights, tuple)?;
    if s.dim() != tuple.dim() {
        return Err(Error::DimensionMismatch {
            expected: tuple.dim(),
            found: s.dim(),
        });
    }
    let halves: Vec<CMatrix> = tuple.iter().map(|a| a.pow_matrix(0.5)).collect();
    k_map_with(weights, &halves, s)
}

fn k_map_with(weights: &WeightVector, halves: &[CMatrix], s: &PdMatrix) -> Result<PdMatrix> {
    let s_half = s.pow_matrix(0.5);
    let roots = halves
        .iter()
        .map(|a_half| gram_power(&(&s_half * a_half), 0.5).map(Hermitian::into_matrix))
        .collect::<Result<Vec<_>>>()?;
    let middle = Hermitian::symmetrized(weighted_sum(weights, &roots));
    let f = s.pow_matrix(-0.5) * middle.matrix();
    PdMatrix::new(Hermitian::symmetrized(&f * f.adjoint()))
}

/// Outcome of a K-map iteration.
#[derive(Debug, Clone)]
pub struct WassersteinRun {
    pub mean: PdMatrix,
    pub report: SolverReport,
    /// `tr S_1, tr S_2, …` for the iterates `S_{r+1} = K(S_r)`.
    pub traces: Vec<f64>,
}

impl WassersteinRun {
    /// Largest decrease between consecutive recorded traces (zero if monotone).
    pub fn worst_trace_drop(&self) -> f64 {
        self.traces
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }

    pub fn traces_nondecreasing(&self) -> bool {
        self.worst_trace_drop() <= TRACE_MONOTONICITY_SLACK
    }
}

/// Iterates `S_{r+1} = K(S_r)` from `start` (the arithmetic mean when `None`)
/// until `‖S − K(S)‖_F / ‖S‖_F < cfg.tol`, recording `tr S_r` for `r ≥ 1`.
///
/// The first step is excluded from the trace record: `K(cS) = K(S)`, so
/// `tr S_0` carries no information about the sequence.
pub fn wasserstein_iterate(
    weights: &WeightVector,
    tuple: &PdTuple,
    start: Option<PdMatrix>,
    cfg: &SolverConfig,
) -> Result<WassersteinRun> {
    check_lengths(weights, tuple)?;
    cfg.validate()?;
    let mut s = match start {
        Some(s0) if s0.dim() != tuple.dim() => {
            return Err(Error::DimensionMismatch {
                expected: tuple.dim(),
                found: s0.dim(),
            })
        }
        Some(s0) => s0,
        None => arithmetic_mean(weights, tuple)?,
    };
    let halves: Vec<CMatrix> = tuple.iter().map(|a| a.pow_matrix(0.5)).collect();
    let mut report = SolverReport::exact(f64::INFINITY);
    let mut traces = Vec::new();
    while report.iterations < cfg.max_iter {
        let next = k_map_with(weights, &halves, &s)?;
        let residual = (s.matrix() - next.matrix()).norm() / s.matrix().norm();
        if residual < cfg.tol {
            report.final_residual = residual;
            report.status = SolverStatus::Converged;
            return Ok(WassersteinRun {
                mean: s,
                report,
                traces,
            });
        }
        report.iterations += 1;
        report.residuals.push(residual);
        report.final_residual = residual;
        traces.push(next.trace());
        s = next;
    }
    report.status = SolverStatus::MaxIterExceeded;
    Err(Error::Solver(Box::new(report)))
}

/// `Ω(ω; 𝔸)` by K-map iteration from the arithmetic mean.
pub fn wasserstein_mean(
    weights: &WeightVector,
    tuple: &PdTuple,
    cfg: &SolverConfig,
) -> Result<(PdMatrix, SolverReport)> {
    check_lengths(weights, tuple)?;
    if tuple.len() == 1 {
        return Ok((tuple.items()[0].clone(), SolverReport::exact(0.0)));
    }
    let run = wasserstein_iterate(weights, tuple, None, cfg)?;
    Ok((run.mean, run.report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Relative slack used by the trace-inequality verdict.
pub const TRACE_INEQUALITY_SLACK: f64 = 1e-8;

/// Compares `tr R_{1−p/2, 1/2}(ω; 𝔸)^p` with `tr Ω(ω; 𝔸^p)` for `1 ≤ p < 2`.
pub fn trace_inequality_check(
    p_exp: f64,
    weights: &WeightVector,
    tuple: &PdTuple,
    cfg: &SolverConfig,
) -> Result<TraceInequality> {
    if !(1.0..2.0).contains(&p_exp) {
        return Err(Error::Domain(format!(
            "exponent must lie in [1, 2), got {p_exp}"
        )));
    }
    trace_inequality_check_k(1, p_exp, weights, tuple, cfg)
}

/// Iterated form: `tr R_{1−p/2^k, 1/2}(ω; 𝔸^{2^{k−1}})^{p/2^{k−1}}` against
/// `tr Ω(ω; 𝔸^p)` for `2^{k−1} ≤ p < 2^k`.
pub fn trace_inequality_check_k(
    k: u32,
    p_exp: f64,
    weights: &WeightVector,
    tuple: &PdTuple,
    cfg: &SolverConfig,
) -> Result<TraceInequality> {
    if !(1..=16).contains(&k) {
        return Err(Error::Domain(format!("k must lie in 1..=16, got {k}")));
    }
    let outer = 2f64.powi(k as i32);
    let inner = outer / 2.0;
    if !(inner..outer).contains(&p_exp) {
        return Err(Error::Domain(format!(
            "exponent must lie in [{inner}, {outer}) for k = {k}, got {p_exp}"
        )));
    }
    let params = AlphaZ::new(1.0 - p_exp / outer, 0.5)?;
    let base = if k == 1 {
        tuple.clone()
    } else {
        tuple.pow(inner)?
    };
    let (r, _) = right_mean(&params, weights, &base, cfg)?;
    let lhs: f64 = r.eigenvalues().iter().map(|l| l.powf(p_exp / inner)).sum();
    let (omega, _) = wasserstein_mean(weights, &tuple.pow(p_exp)?, cfg)?;
    let rhs = omega.trace();
    Ok(TraceInequality {
        lhs,
        rhs,
        holds: lhs <= rhs + TRACE_INEQUALITY_SLACK * (1.0 + rhs.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{relative_max_error, PdRng};

    fn diag(d: &[f64]) -> PdMatrix {
        PdMatrix::from_diagonal(d).unwrap()
    }

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    fn tuple(items: Vec<PdMatrix>) -> PdTuple {
        PdTuple::new(items).unwrap()
    }

    #[test]
    fn k_map_examples() {
        let a = PdRng::new(31).pd(3, 100.0).unwrap();
        let rep = tuple(vec![a.clone(), a.clone()]);
        let k = k_map(&w(&[0.3, 0.7]), &rep, &a).unwrap();
        assert!(relative_max_error(k.matrix(), a.matrix()) < 1e-12);

        let scalars = tuple(vec![diag(&[4.0]), diag(&[9.0])]);
        let k = k_map(&w(&[0.5, 0.5]), &scalars, &diag(&[1.0])).unwrap();
        assert!((k.matrix()[(0, 0)].re - 6.25).abs() < 1e-13);

        assert!(k_map(&w(&[0.5, 0.5]), &scalars, &PdMatrix::identity(2)).is_err());
    }

    #[test]
    fn wasserstein_examples() {
        let cfg = SolverConfig::default();
        let a = PdRng::new(32).pd(3, 100.0).unwrap();
        let (m, _) =
            wasserstein_mean(&w(&[0.5, 0.5]), &tuple(vec![a.clone(), a.clone()]), &cfg).unwrap();
        assert!(relative_max_error(m.matrix(), a.matrix()) < 1e-13);

        let (m, _) = wasserstein_mean(
            &w(&[0.5, 0.5]),
            &tuple(vec![diag(&[1.0]), diag(&[4.0])]),
            &cfg,
        )
        .unwrap();
        assert!((m.matrix()[(0, 0)].re - 2.25).abs() < 1e-12);

        let (m, _) = wasserstein_mean(
            &w(&[0.5, 0.5]),
            &tuple(vec![diag(&[1.0, 4.0]), diag(&[4.0, 1.0])]),
            &cfg,
        )
        .unwrap();
        assert!(relative_max_error(m.matrix(), diag(&[2.25, 2.25]).matrix()) < 1e-12);
    }

    #[test]
    fn converged_mean_is_a_fixed_point_with_monotone_traces() {
        let cfg = SolverConfig::default();
        let mut rng = PdRng::new(33);
        let tup = tuple((0..3).map(|_| rng.pd(3, 1e3).unwrap()).collect());
        let weights = WeightVector::new(rng.probability(3)).unwrap();
        for start in [
            None,
            Some(PdMatrix::identity(3)),
            Some(rng.pd(3, 50.0).unwrap()),
        ] {
            let run = wasserstein_iterate(&weights, &tup, start, &cfg).unwrap();
            let k = k_map(&weights, &tup, &run.mean).unwrap();
            assert!(relative_max_error(k.matrix(), run.mean.matrix()) < 1e-9);
            assert!(
                run.traces_nondecreasing(),
                "drop {}",
                run.worst_trace_drop()
            );
            let omega_trace = run.mean.trace();
            assert!(run.traces.iter().all(|t| *t <= omega_trace + 1e-10));
        }
    }

    #[test]
    fn trace_inequality_examples() {
        let cfg = SolverConfig::default();
        let a = PdRng::new(34).pd(3, 10.0).unwrap();
        let rep = tuple(vec![a.clone(), a.clone()]);
        let v = trace_inequality_check(1.0, &w(&[0.5, 0.5]), &rep, &cfg).unwrap();
        assert!((v.lhs - a.trace()).abs() < 1e-12 && (v.rhs - a.trace()).abs() < 1e-12);
        assert!(v.holds);

        let scalars = tuple(vec![diag(&[4.0]), diag(&[9.0])]);
        let v = trace_inequality_check(1.0, &w(&[0.5, 0.5]), &scalars, &cfg).unwrap();
        assert!((v.lhs - 6.25).abs() < 1e-12 && (v.rhs - 6.25).abs() < 1e-12);
        assert!(v.holds);

        let mut rng = PdRng::new(35);
        let pair = tuple(vec![rng.pd(3, 30.0).unwrap(), rng.pd(3, 30.0).unwrap()]);
        let v = trace_inequality_check(1.5, &w(&[0.5, 0.5]), &pair, &cfg).unwrap();
        assert!(v.holds, "{v:?}");

        assert!(trace_inequality_check(2.0, &w(&[0.5, 0.5]), &pair, &cfg).is_err());
        let v = trace_inequality_check_k(2, 3.0, &w(&[0.5, 0.5]), &pair, &cfg).unwrap();
        assert!(v.holds, "{v:?}");
    }
}
