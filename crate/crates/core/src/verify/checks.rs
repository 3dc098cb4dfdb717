//! Registry of theorem checks. Each check evaluates one statement on one
//! random instance and reports a normalized margin per sub-statement.
//!
//! Margins are nonnegative when a statement holds exactly. Order relations use
//! the Loewner margin `λ_min(B − A) / (1 + ‖B − A‖₂)`; scalar inequalities use
//! `(rhs − lhs) / (1 + |rhs|)`; identities report minus their relative error.

use crate::divergences::{bures_wasserstein_distance, phi_alpha_z, AlphaZ};
use crate::error::{Error, Result};
use crate::linalg::{loewner_margin, relative_max_error, CMatrix, Hermitian, PdMatrix, PdRng};
use crate::means::{
    arithmetic_mean, cartan_mean, harmonic_mean, power_mean, thompson_distance, PdTuple,
    WeightVector,
};
use crate::rightmean::{residual, residual_geomform, right_mean};
use crate::solver::SolverConfig;
use crate::structure::{
    hadamard_pd, tensor_pd, tuple_hadamard, tuple_tensor, weak_log_majorizes, weight_tensor,
};
use crate::verify::region::RegionConstraint;
use crate::wasserstein::{wasserstein_iterate, wasserstein_mean, TRACE_MONOTONICITY_SLACK};

/// Largest condition number allowed after raising inputs to the largest power
/// a check applies. Inputs are drawn with `cond.min(CONDITION_BUDGET^{1/e})`.
pub const CONDITION_BUDGET: f64 = 1e9;
/// Relative tolerance for the identities of the right mean.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Relative tolerance of the commuting closed-form comparison.
pub const COMMUTING_TOL: f64 = 1e-9;
/// Fixed-point certificate threshold for converged right means.
pub const CERTIFICATE_TOL: f64 = 1e-9;
/// Tolerance for the determinant equality on constant tuples.
pub const DET_EQUALITY_TOL: f64 = 1e-9;
/// Agreement between the right mean at `α = z = 1/2` and the K-map solver.
pub const OMEGA_IDENTITY_TOL: f64 = 1e-7;
/// Slack on the upper bound `tr S_r ≤ tr Ω`.
pub const TRACE_BOUND_SLACK: f64 = 1e-8;
/// Slack for `Φ ≥ 0`.
pub const DIVERGENCE_SIGN_SLACK: f64 = 1e-10;
/// Bound on `|Φ(A, A)|`.
pub const DIVERGENCE_ZERO_TOL: f64 = 1e-12;
/// Relative tolerance for unitary and tensor invariance of `Φ`.
pub const DIVERGENCE_INVARIANCE_TOL: f64 = 1e-9;
/// Relative tolerance for `Φ_{1/2,1/2} = d_W²`.
pub const BURES_IDENTITY_TOL: f64 = 1e-10;
/// Exponents used by the trace-inequality check.
pub const WASSERSTEIN_EXPONENTS: [f64; 4] = [1.0, 1.25, 1.5, 1.9];
/// Power-mean parameters in the interpolation chain.
pub const CHAIN_PARAMETERS: [f64; 3] = [0.25, 0.5, 1.0];
/// Parameters along which `d_T(P_t, Λ)` should shrink.
pub const THOMPSON_PARAMETERS: [f64; 4] = [0.5, 0.25, 0.1, 0.05];

/// Result of one sub-statement on one trial.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    pub margin: f64,
    pub holds: bool,
    /// Informational outcomes are reported but never count as violations.
    pub informational: bool,
}

impl Outcome {
    fn new(name: &'static str, margin: f64, holds: bool) -> Self {
        Outcome {
            name,
            margin,
            holds,
            informational: false,
        }
    }

    fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    /// `A ≤ B` with the Loewner margin.
    fn loewner(name: &'static str, a: &Hermitian, b: &Hermitian, slack: f64) -> Result<Self> {
        let margin = loewner_margin(a, b)?;
        Ok(Outcome::new(name, margin, margin >= -slack))
    }

    /// `got = want` within a relative entrywise tolerance.
    fn identity(name: &'static str, got: &CMatrix, want: &CMatrix, tol: f64) -> Self {
        let err = relative_max_error(got, want);
        Outcome::new(name, -err, err <= tol)
    }

    fn scalar_leq(name: &'static str, lhs: f64, rhs: f64, slack: f64) -> Self {
        let margin = (rhs - lhs) / (1.0 + rhs.abs());
        Outcome::new(name, margin, margin >= -slack)
    }
}

/// A right-mean solve performed during a trial, kept for solver statistics.
#[derive(Debug, Clone, Copy)]
pub struct SolveRecord {
    pub params: AlphaZ,
    pub iterations: usize,
    pub step_reductions: usize,
    pub converged: bool,
}

/// State of one trial: its generator, the sampled shape and parameters.
pub struct Trial<'a> {
    pub rng: PdRng,
    pub params: Option<AlphaZ>,
    pub dim: usize,
    pub n: usize,
    pub cond: f64,
    pub solver: &'a SolverConfig,
    pub slack: f64,
    pub solves: Vec<SolveRecord>,
}

impl Trial<'_> {
    fn params(&self) -> Result<AlphaZ> {
        self.params
            .ok_or_else(|| Error::Precondition("check needs (alpha, z) parameters".into()))
    }

    /// Condition bound for inputs that will be raised to powers up to `exponent`.
    fn budget(&self, exponent: f64) -> f64 {
        self.cond
            .min(CONDITION_BUDGET.powf(1.0 / exponent.max(1.0)))
    }

    fn weights(&mut self, n: usize) -> WeightVector {
        WeightVector::new(self.rng.probability(n)).expect("positive probabilities")
    }

    fn tuple(&mut self, n: usize, dim: usize, exponent: f64) -> Result<PdTuple> {
        let cond = self.budget(exponent);
        PdTuple::new(
            (0..n)
                .map(|_| self.rng.pd(dim, cond))
                .collect::<Result<_>>()?,
        )
    }

    fn right_mean(&mut self, p: &AlphaZ, w: &WeightVector, tuple: &PdTuple) -> Result<PdMatrix> {
        match right_mean(p, w, tuple, self.solver) {
            Ok((x, report)) => {
                self.solves.push(SolveRecord {
                    params: *p,
                    iterations: report.iterations,
                    step_reductions: report.step_reductions,
                    converged: true,
                });
                Ok(x)
            }
            Err(Error::Solver(report)) => {
                self.solves.push(SolveRecord {
                    params: *p,
                    iterations: report.iterations,
                    step_reductions: report.step_reductions,
                    converged: false,
                });
                Err(Error::Solver(report))
            }
            Err(e) => Err(e),
        }
    }

    fn power_mean(&self, t: f64, w: &WeightVector, tuple: &PdTuple) -> Result<PdMatrix> {
        Ok(power_mean(t, w, tuple, self.solver)?.0)
    }
}

/// `(1 − α)/z`, the power the right mean applies to its inputs.
fn input_exponent(p: &AlphaZ) -> f64 {
    (1.0 - p.alpha()) / p.z()
}

fn herm(m: CMatrix) -> Hermitian {
    Hermitian::symmetrized(m)
}

fn scaled_identity(dim: usize, c: f64) -> Hermitian {
    Hermitian::identity(dim).scale(c)
}

type CheckFn = fn(&mut Trial) -> Result<Vec<Outcome>>;

/// A registered statement.
pub struct TheoremSpec {
    pub id: &'static str,
    pub aliases: &'static [&'static str],
    pub statement: &'static str,
    pub constraint: RegionConstraint,
    pub(crate) run: CheckFn,
}

/// All registered checks, in report order.
pub static REGISTRY: &[TheoremSpec] = &[
    TheoremSpec {
        id: "properties-1",
        aliases: &["properties-1-commuting"],
        statement: "commuting inputs: R = (Σ w_j A_j^{1−α})^{1/(1−α)}",
        constraint: RegionConstraint::Any,
        run: properties_commuting,
    },
    TheoremSpec {
        id: "properties-2",
        aliases: &["properties-2-homogeneity"],
        statement: "R(ω; c𝔸) = c R(ω; 𝔸)",
        constraint: RegionConstraint::Any,
        run: properties_homogeneity,
    },
    TheoremSpec {
        id: "properties-3",
        aliases: &["properties-3-permutation"],
        statement: "R(ω_σ; 𝔸_σ) = R(ω; 𝔸)",
        constraint: RegionConstraint::Any,
        run: properties_permutation,
    },
    TheoremSpec {
        id: "properties-4",
        aliases: &["properties-4-repetition"],
        statement: "R(ω^(k); 𝔸^(k)) = R(ω; 𝔸) for k = 2, 3",
        constraint: RegionConstraint::Any,
        run: properties_repetition,
    },
    TheoremSpec {
        id: "properties-5",
        aliases: &["properties-5-unitary"],
        statement: "R(ω; U𝔸U*) = U R(ω; 𝔸) U*",
        constraint: RegionConstraint::Any,
        run: properties_unitary,
    },
    TheoremSpec {
        id: "properties-6",
        aliases: &["properties-6-determinant"],
        statement: "det R ≥ Π (det A_j)^{w_j}, equality on constant tuples",
        constraint: RegionConstraint::Any,
        run: properties_determinant,
    },
    TheoremSpec {
        id: "properties-7",
        aliases: &["properties-7-self-consistency"],
        statement: "Y = R(ω̂; A_1..A_{n−1}) solves the n-ary equation with Y appended",
        constraint: RegionConstraint::Any,
        run: properties_self_consistency,
    },
    TheoremSpec {
        id: "properties-8",
        aliases: &["properties-8-merge"],
        statement: "equal leading inputs merge into one with summed weight",
        constraint: RegionConstraint::Any,
        run: properties_merge,
    },
    TheoremSpec {
        id: "L:boundedness",
        aliases: &["boundedness"],
        statement: "a I ≤ A_j ≤ b I implies a I ≤ R ≤ b I",
        constraint: RegionConstraint::Any,
        run: boundedness,
    },
    TheoremSpec {
        id: "L:equation",
        aliases: &["equation", "certificate"],
        statement: "converged R solves X = Σ w_j Q_{1−α,z}(X, A_j) and X^{1−α/z} = Σ w_j X^{−α/z} #_z A_j^{(1−α)/z}",
        constraint: RegionConstraint::Any,
        run: equation_certificate,
    },
    TheoremSpec {
        id: "T:A-R",
        aliases: &["T:A-R-ineq"],
        statement: "z ≥ 1/2: R^{(1−α)/z} ≤ A(ω; 𝔸^{(1−α)/z})",
        constraint: RegionConstraint::AUnionB,
        run: arithmetic_right,
    },
    TheoremSpec {
        id: "T:inequalities-2",
        aliases: &[],
        statement: "R ≤ I ⇒ R^{1−α/z} ≥ A(ω; 𝔸^{1−α}); R ≥ I ⇒ reverse",
        constraint: RegionConstraint::Any,
        run: inequalities_two,
    },
    TheoremSpec {
        id: "T:Renyi-power",
        aliases: &[],
        statement: "R ≥ I ⇒ R^{1−α/z} ≤ P_z(ω; 𝔸^{(1−α)/z}); R ≤ I ⇒ reverse",
        constraint: RegionConstraint::Any,
        run: renyi_power,
    },
    TheoremSpec {
        id: "C:log-majorization",
        aliases: &[],
        statement: "λ(A(ω; 𝔸^{1−α})), λ(P_z(ω; 𝔸^{(1−α)/z})), λ(Λ(ω; 𝔸^{(1−α)/z})) ≺_wlog λ(R), checked after scaling so that R ≤ I",
        constraint: RegionConstraint::Any,
        run: log_majorization,
    },
    TheoremSpec {
        id: "R:scaled-bounds",
        aliases: &[],
        statement: "two-sided bounds of R^{1−α/z} by A, P_z, H of powered inputs with constants from a I ≤ A_j ≤ b I",
        constraint: RegionConstraint::Any,
        run: scaled_bounds,
    },
    TheoremSpec {
        id: "T:iteration",
        aliases: &["K-map"],
        statement: "S_{r+1} = K(S_r): tr S_r ≤ tr S_{r+1} ≤ tr Ω",
        constraint: RegionConstraint::None,
        run: k_iteration,
    },
    TheoremSpec {
        id: "T:Wass-Renyi",
        aliases: &[],
        statement: "1 ≤ p < 2: tr R_{1−p/2,1/2}(ω; 𝔸)^p ≤ tr Ω(ω; 𝔸^p)",
        constraint: RegionConstraint::BIntersectC,
        run: wasserstein_renyi,
    },
    TheoremSpec {
        id: "R:Wass-Renyi-k2",
        aliases: &[],
        statement: "2 ≤ p < 4: tr R_{1−p/4,1/2}(ω; 𝔸²)^{p/2} ≤ tr Ω(ω; 𝔸^p)",
        constraint: RegionConstraint::BIntersectC,
        run: wasserstein_renyi_k2,
    },
    TheoremSpec {
        id: "T:Tensor",
        aliases: &[],
        statement: "R(ω; 𝔸) ⊗ R(μ; 𝔹) = R(ω ⊗ μ; 𝔸 ⊗ 𝔹)",
        constraint: RegionConstraint::Any,
        run: tensor_identity,
    },
    TheoremSpec {
        id: "T:Hada1",
        aliases: &[],
        statement: "z ≥ 1/2: R(ω;𝔸)^{(1−α)/z} ∘ R(μ;𝔹)^{(1−α)/z} ≤ A(ω⊗μ; 𝔸^{(1−α)/z} ∘ 𝔹^{(1−α)/z})",
        constraint: RegionConstraint::AUnionB,
        run: hadamard_arithmetic,
    },
    TheoremSpec {
        id: "T:Hada2",
        aliases: &[],
        statement: "R(ω;𝔸), R(μ;𝔹) ≥ I ⇒ R^{1−α/z} ∘ R^{1−α/z} ≤ P_z(ω⊗μ; 𝔸^{(1−α)/z} ∘ 𝔹^{(1−α)/z}) ≤ A(…)",
        constraint: RegionConstraint::Any,
        run: hadamard_power,
    },
    TheoremSpec {
        id: "C:Hada-scaled",
        aliases: &["corollary-hadamard"],
        statement: "A_j ≥ a I, B_j ≥ b I ⇒ R^{1−α/z} ∘ R^{1−α/z} ≤ (ab)^{1−1/z} P_z(ω⊗μ; 𝔸^{(1−α)/z} ∘ 𝔹^{(1−α)/z})",
        constraint: RegionConstraint::Any,
        run: hadamard_scaled,
    },
    TheoremSpec {
        id: "E:para-monotonicity",
        aliases: &["power-mean-chain"],
        statement: "H ≤ P_{−t} ≤ P_{−s} ≤ Λ ≤ P_s ≤ P_t ≤ A for 0 < s ≤ t ≤ 1; d_T(P_t, Λ) shrinks as t → 0",
        constraint: RegionConstraint::None,
        run: power_chain,
    },
    TheoremSpec {
        id: "divergence-axioms",
        aliases: &[],
        statement: "Φ ≥ 0, Φ(A, A) = 0, unitary and tensor invariance, Φ_{1/2,1/2} = d_W²",
        constraint: RegionConstraint::Any,
        run: divergence_axioms,
    },
    TheoremSpec {
        id: "Omega-identity",
        aliases: &["wasserstein-right-mean"],
        statement: "Ω(ω; 𝔸) = R_{1/2,1/2}(ω; 𝔸)",
        constraint: RegionConstraint::None,
        run: omega_identity,
    },
];

/// Looks up a check by id or alias.
pub fn find(id: &str) -> Option<&'static TheoremSpec> {
    REGISTRY
        .iter()
        .find(|s| s.id == id || s.aliases.contains(&id))
}

pub fn known_ids() -> Vec<String> {
    REGISTRY.iter().map(|s| s.id.to_string()).collect()
}

fn properties_commuting(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let cond = t.budget(input_exponent(&p));
    let (n, dim) = (t.n, t.dim);
    let diagonals: Vec<Vec<f64>> = (0..n).map(|_| t.rng.spectrum(dim, cond)).collect();
    let w = t.weights(n);
    let tuple = PdTuple::new(
        diagonals
            .iter()
            .map(|d| PdMatrix::from_diagonal(d))
            .collect::<Result<_>>()?,
    )?;
    let x = t.right_mean(&p, &w, &tuple)?;
    let s = 1.0 - p.alpha();
    let oracle: Vec<f64> = (0..dim)
        .map(|i| {
            diagonals
                .iter()
                .zip(w.iter())
                .map(|(d, wj)| wj * d[i].powf(s))
                .sum::<f64>()
                .powf(1.0 / s)
        })
        .collect();
    let oracle = PdMatrix::from_diagonal(&oracle)?;
    Ok(vec![Outcome::identity(
        "closed-form",
        x.matrix(),
        oracle.matrix(),
        COMMUTING_TOL,
    )])
}

fn properties_homogeneity(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let tuple = t.tuple(t.n, t.dim, input_exponent(&p))?;
    let w = t.weights(t.n);
    let x = t.right_mean(&p, &w, &tuple)?;
    let mut out = Vec::new();
    for (name, c) in [("scale-0.1", 0.1), ("scale-3", 3.0)] {
        let xc = t.right_mean(&p, &w, &tuple.scale(c)?)?;
        out.push(Outcome::identity(
            name,
            xc.matrix(),
            &x.matrix().scale(c),
            IDENTITY_TOL,
        ));
    }
    Ok(out)
}

fn properties_permutation(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let tuple = t.tuple(t.n, t.dim, input_exponent(&p))?;
    let w = t.weights(t.n);
    let sigma = t.rng.permutation(t.n);
    let w_sigma = WeightVector::new(sigma.iter().map(|&i| w.as_slice()[i]).collect())?;
    let t_sigma = PdTuple::new(sigma.iter().map(|&i| tuple.items()[i].clone()).collect())?;
    let x = t.right_mean(&p, &w, &tuple)?;
    let y = t.right_mean(&p, &w_sigma, &t_sigma)?;
    Ok(vec![Outcome::identity(
        "permuted",
        y.matrix(),
        x.matrix(),
        IDENTITY_TOL,
    )])
}

fn properties_repetition(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let tuple = t.tuple(t.n, t.dim, input_exponent(&p))?;
    let w = t.weights(t.n);
    let x = t.right_mean(&p, &w, &tuple)?;
    let mut out = Vec::new();
    for (name, k) in [("repeat-2", 2), ("repeat-3", 3)] {
        let wk = WeightVector::new(w.as_slice().repeat(k))?;
        let tk = PdTuple::new(
            tuple
                .items()
                .iter()
                .cycle()
                .take(k * tuple.len())
                .cloned()
                .collect(),
        )?;
        let xk = t.right_mean(&p, &wk, &tk)?;
        out.push(Outcome::identity(
            name,
            xk.matrix(),
            x.matrix(),
            IDENTITY_TOL,
        ));
    }
    Ok(out)
}

fn properties_unitary(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let tuple = t.tuple(t.n, t.dim, input_exponent(&p))?;
    let w = t.weights(t.n);
    let u = t.rng.unitary(t.dim);
    let x = t.right_mean(&p, &w, &tuple)?;
    let y = t.right_mean(&p, &w, &tuple.congruence(&u)?)?;
    let expected = &u * x.matrix() * u.adjoint();
    Ok(vec![Outcome::identity(
        "conjugated",
        y.matrix(),
        &expected,
        IDENTITY_TOL,
    )])
}

fn properties_determinant(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let tuple = t.tuple(t.n, t.dim, input_exponent(&p))?;
    let w = t.weights(t.n);
    let x = t.right_mean(&p, &w, &tuple)?;
    let bound: f64 = w
        .iter()
        .zip(tuple.iter())
        .map(|(wj, a)| wj * a.log_det())
        .sum();
    let margin = (x.log_det() - bound) / (1.0 + bound.abs());
    let mut out = vec![Outcome::new("log-det-bound", margin, margin >= -t.slack)];

    let a = tuple.items()[0].clone();
    let constant = PdTuple::new(vec![a.clone(); t.n])?;
    let y = t.right_mean(&p, &w, &constant)?;
    let gap = (y.log_det() - a.log_det()).abs() / (1.0 + a.log_det().abs());
    out.push(Outcome::new(
        "equality-on-constant",
        -gap,
        gap <= DET_EQUALITY_TOL,
    ));
    Ok(out)
}

fn properties_self_consistency(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let n = t.n.max(2);
    let tuple = t.tuple(n - 1, t.dim, input_exponent(&p))?;
    let w = t.weights(n);
    let w_hat = WeightVector::new(w.as_slice()[..n - 1].to_vec())?;
    let y = t.right_mean(&p, &w_hat, &tuple)?;
    let mut extended = tuple.into_items();
    extended.push(y.clone());
    let res = residual(&p, &w, &PdTuple::new(extended)?, &y)?;
    Ok(vec![Outcome::new(
        "appended-fixed-point",
        -res,
        res <= IDENTITY_TOL,
    )])
}

fn properties_merge(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let n = t.n.max(3);
    let k = 2 + t.rng.index(n - 2);
    let distinct = t.tuple(n - k + 1, t.dim, input_exponent(&p))?;
    let w = t.weights(n);
    let mut items = vec![distinct.items()[0].clone(); k];
    items.extend(distinct.items()[1..].iter().cloned());
    let full = PdTuple::new(items)?;
    let lead: f64 = w.as_slice()[..k].iter().sum();
    let mut merged_w = vec![lead];
    merged_w.extend_from_slice(&w.as_slice()[k..]);
    let merged_w = WeightVector::new(merged_w)?;
    let x = t.right_mean(&p, &w, &full)?;
    let y = t.right_mean(&p, &merged_w, &distinct)?;
    Ok(vec![Outcome::identity(
        "merged",
        y.matrix(),
        x.matrix(),
        IDENTITY_TOL,
    )])
}

fn boundedness(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let tuple = t.tuple(t.n, t.dim, input_exponent(&p))?;
    let w = t.weights(t.n);
    let x = t.right_mean(&p, &w, &tuple)?;
    let lo = scaled_identity(t.dim, tuple.lower_bound());
    let hi = scaled_identity(t.dim, tuple.upper_bound());
    Ok(vec![
        Outcome::loewner("lower", &lo, x.hermitian(), t.slack)?,
        Outcome::loewner("upper", x.hermitian(), &hi, t.slack)?,
    ])
}

fn equation_certificate(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let tuple = t.tuple(t.n, t.dim, input_exponent(&p))?;
    let w = t.weights(t.n);
    let x = t.right_mean(&p, &w, &tuple)?;
    let r1 = residual(&p, &w, &tuple, &x)?;
    let r2 = residual_geomform(&p, &w, &tuple, &x)?;
    Ok(vec![
        Outcome::new("defining-equation", -r1, r1 < CERTIFICATE_TOL),
        Outcome::new("geometric-form", -r2, r2 < CERTIFICATE_TOL),
    ])
}

fn arithmetic_right(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let e = input_exponent(&p);
    let tuple = t.tuple(t.n, t.dim, e)?;
    let w = t.weights(t.n);
    let x = t.right_mean(&p, &w, &tuple)?;
    let am = arithmetic_mean(&w, &tuple.pow(e)?)?;
    Ok(vec![Outcome::loewner(
        "power-below-arithmetic",
        x.pow(e)?.hermitian(),
        am.hermitian(),
        t.slack,
    )?])
}

/// The tuple scaled by `1/b` (so that `R ≤ I`) and by `1/a` (so that `R ≥ I`),
/// together with their right means.
struct Branches {
    below: PdTuple,
    r_below: PdMatrix,
    above: PdTuple,
    r_above: PdMatrix,
}

fn branches(t: &mut Trial, p: &AlphaZ, w: &WeightVector, tuple: &PdTuple) -> Result<Branches> {
    let below = tuple.scale(1.0 / tuple.upper_bound())?;
    let above = tuple.scale(1.0 / tuple.lower_bound())?;
    let r_below = t.right_mean(p, w, &below)?;
    let r_above = t.right_mean(p, w, &above)?;
    Ok(Branches {
        below,
        r_below,
        above,
        r_above,
    })
}

fn inequalities_two(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let tuple = t.tuple(t.n, t.dim, input_exponent(&p))?;
    let w = t.weights(t.n);
    let b = branches(t, &p, &w, &tuple)?;
    let s = 1.0 - p.alpha() / p.z();
    let am_below = arithmetic_mean(&w, &b.below.pow(1.0 - p.alpha())?)?;
    let am_above = arithmetic_mean(&w, &b.above.pow(1.0 - p.alpha())?)?;
    Ok(vec![
        Outcome::loewner(
            "R<=I",
            am_below.hermitian(),
            b.r_below.pow(s)?.hermitian(),
            t.slack,
        )?,
        Outcome::loewner(
            "R>=I",
            b.r_above.pow(s)?.hermitian(),
            am_above.hermitian(),
            t.slack,
        )?,
    ])
}

fn renyi_power(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let e = input_exponent(&p);
    let tuple = t.tuple(t.n, t.dim, e)?;
    let w = t.weights(t.n);
    let b = branches(t, &p, &w, &tuple)?;
    let s = 1.0 - p.alpha() / p.z();
    let pz_below = t.power_mean(p.z(), &w, &b.below.pow(e)?)?;
    let pz_above = t.power_mean(p.z(), &w, &b.above.pow(e)?)?;
    Ok(vec![
        Outcome::loewner(
            "R>=I",
            b.r_above.pow(s)?.hermitian(),
            pz_above.hermitian(),
            t.slack,
        )?,
        Outcome::loewner(
            "R<=I",
            pz_below.hermitian(),
            b.r_below.pow(s)?.hermitian(),
            t.slack,
        )?,
    ])
}

fn log_majorization(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let e = input_exponent(&p);
    let tuple = t.tuple(t.n, t.dim, e)?;
    let w = t.weights(t.n);
    // Scale by 1/b so that R ≤ I.
    let scaled = tuple.scale(1.0 / tuple.upper_bound())?;
    let r = t.right_mean(&p, &w, &scaled)?;
    let am = arithmetic_mean(&w, &scaled.pow(1.0 - p.alpha())?)?;
    let powered = scaled.pow(e)?;
    let pz = t.power_mean(p.z(), &w, &powered)?;
    let lambda = cartan_mean(&w, &powered, t.solver)?.0;

    let y = r.eigenvalues();
    let mut out = Vec::new();
    for (name, m) in [
        ("arithmetic", &am),
        ("power-mean", &pz),
        ("cartan", &lambda),
    ] {
        let v = weak_log_majorizes(y, m.eigenvalues(), t.slack)?;
        out.push(Outcome::new(name, v.worst_margin, v.holds));
    }

    // Leading eigenvalues after normalizing λ_max(R) = 1; by homogeneity the
    // means of the renormalized tuple are rescaled copies of those above.
    let c = 1.0 / r.lambda_max();
    let leading = [
        am.lambda_max() * c.powf(1.0 - p.alpha()),
        pz.lambda_max() * c.powf(e),
        lambda.lambda_max() * c.powf(e),
    ];
    let worst = leading
        .iter()
        .map(|l| -l.ln())
        .fold(f64::INFINITY, f64::min);
    out.push(Outcome::new("leading-eigenvalue", worst, worst >= -t.slack).informational());
    Ok(out)
}

fn scaled_bounds(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let e = input_exponent(&p);
    let tuple = t.tuple(t.n, t.dim, e)?;
    let w = t.weights(t.n);
    let (a, b) = (tuple.lower_bound(), tuple.upper_bound());
    let (alpha, z) = (p.alpha(), p.z());
    let x = t.right_mean(&p, &w, &tuple)?;
    let y = x.pow(1.0 - alpha / z)?;
    let y = y.hermitian();
    let am1 = arithmetic_mean(&w, &tuple.pow(1.0 - alpha)?)?;
    let powered = tuple.pow(e)?;
    let pz = t.power_mean(z, &w, &powered)?;
    let hm = harmonic_mean(&w, &powered)?;
    let am2 = arithmetic_mean(&w, &powered)?;
    let k = 1.0 - 1.0 / z;
    let slack = t.slack;
    Ok(vec![
        Outcome::loewner(
            "arithmetic-lower",
            &am1.hermitian().scale(b.powf(alpha * k)),
            y,
            slack,
        )?,
        Outcome::loewner(
            "arithmetic-upper",
            y,
            &am1.hermitian().scale(a.powf(alpha * k)),
            slack,
        )?,
        Outcome::loewner("power-lower", &pz.hermitian().scale(b.powf(k)), y, slack)?,
        Outcome::loewner("power-upper", y, &pz.hermitian().scale(a.powf(k)), slack)?,
        Outcome::loewner("harmonic-lower", &hm.hermitian().scale(b.powf(k)), y, slack)?,
        Outcome::loewner(
            "arithmetic-powered-upper",
            y,
            &am2.hermitian().scale(a.powf(k)),
            slack,
        )?,
    ])
}

fn k_iteration(t: &mut Trial) -> Result<Vec<Outcome>> {
    let tuple = t.tuple(t.n, t.dim, 1.0)?;
    let w = t.weights(t.n);
    let cond = t.budget(1.0);
    let random_start = t.rng.pd(t.dim, cond)?;
    let from_mean = wasserstein_iterate(&w, &tuple, None, t.solver)?;
    let omega_trace = from_mean.mean.trace();
    let mut worst_drop: f64 = from_mean.worst_trace_drop();
    let mut highest = from_mean
        .traces
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    for start in [PdMatrix::identity(t.dim), random_start] {
        let run = wasserstein_iterate(&w, &tuple, Some(start), t.solver)?;
        worst_drop = worst_drop.max(run.worst_trace_drop());
        highest = run.traces.iter().copied().fold(highest, f64::max);
    }
    let bound_margin = if highest.is_finite() {
        omega_trace - highest
    } else {
        0.0
    };
    Ok(vec![
        Outcome::new(
            "trace-nondecreasing",
            -worst_drop,
            worst_drop <= TRACE_MONOTONICITY_SLACK,
        ),
        Outcome::new(
            "trace-below-omega",
            bound_margin,
            bound_margin >= -TRACE_BOUND_SLACK,
        ),
    ])
}

/// Exponents of the trace inequality: all of [`WASSERSTEIN_EXPONENTS`], or the
/// single `p = 2^k(1 − α)` implied by fixed parameters.
fn trace_exponents(t: &Trial, k: i32, defaults: Vec<f64>) -> Vec<f64> {
    match t.params {
        Some(p) => vec![2f64.powi(k) * (1.0 - p.alpha())],
        None => defaults,
    }
}

fn trace_inequality(
    t: &mut Trial,
    name: &'static str,
    k: i32,
    p_exp: f64,
    w: &WeightVector,
    tuple: &PdTuple,
) -> Result<Outcome> {
    let outer = 2f64.powi(k);
    let inner = outer / 2.0;
    let params = AlphaZ::new(1.0 - p_exp / outer, 0.5)?;
    let base = if k == 1 {
        tuple.clone()
    } else {
        tuple.pow(inner)?
    };
    let r = t.right_mean(&params, w, &base)?;
    let lhs: f64 = r.eigenvalues().iter().map(|l| l.powf(p_exp / inner)).sum();
    let (omega, _) = wasserstein_mean(w, &tuple.pow(p_exp)?, t.solver)?;
    Ok(Outcome::scalar_leq(name, lhs, omega.trace(), t.slack))
}

fn wasserstein_renyi(t: &mut Trial) -> Result<Vec<Outcome>> {
    let exponents = trace_exponents(t, 1, WASSERSTEIN_EXPONENTS.to_vec());
    let top = exponents.iter().copied().fold(1.0, f64::max);
    let tuple = t.tuple(t.n, t.dim, top)?;
    let w = t.weights(t.n);
    const NAMES: [&str; 4] = ["p=1", "p=1.25", "p=1.5", "p=1.9"];
    exponents
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let name = if t.params.is_some() { "p" } else { NAMES[i] };
            trace_inequality(t, name, 1, p, &w, &tuple)
        })
        .collect()
}

fn wasserstein_renyi_k2(t: &mut Trial) -> Result<Vec<Outcome>> {
    let sampled = t.rng.uniform(2.0, 4.0);
    let p = trace_exponents(t, 2, vec![sampled])[0];
    let tuple = t.tuple(t.n, t.dim, p)?;
    let w = t.weights(t.n);
    Ok(vec![trace_inequality(t, "k=2", 2, p, &w, &tuple)?])
}

/// Tensor and Hadamard checks stay at `m ≤ 3` so products are at most 9×9.
fn small_dim(t: &Trial) -> usize {
    t.dim.min(3)
}

struct Pair {
    a: PdTuple,
    b: PdTuple,
    w: WeightVector,
    mu: WeightVector,
}

/// Two tuples drawn so that products of inputs stay inside the conditioning budget.
fn pair(t: &mut Trial, exponent: f64) -> Result<Pair> {
    let dim = small_dim(t);
    let a = t.tuple(t.n, dim, 2.0 * exponent)?;
    let b = t.tuple(t.n, dim, 2.0 * exponent)?;
    let w = t.weights(t.n);
    let mu = t.weights(t.n);
    Ok(Pair { a, b, w, mu })
}

fn tensor_identity(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let pr = pair(t, input_exponent(&p))?;
    let ra = t.right_mean(&p, &pr.w, &pr.a)?;
    let rb = t.right_mean(&p, &pr.mu, &pr.b)?;
    let joint = t.right_mean(
        &p,
        &weight_tensor(&pr.w, &pr.mu),
        &tuple_tensor(&pr.a, &pr.b)?,
    )?;
    let product = tensor_pd(&ra, &rb)?;
    Ok(vec![Outcome::identity(
        "tensor-of-means",
        product.matrix(),
        joint.matrix(),
        IDENTITY_TOL,
    )])
}

fn hadamard_arithmetic(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let e = input_exponent(&p);
    let pr = pair(t, e)?;
    let ra = t.right_mean(&p, &pr.w, &pr.a)?;
    let rb = t.right_mean(&p, &pr.mu, &pr.b)?;
    let lhs = hadamard_pd(&ra.pow(e)?, &rb.pow(e)?)?;
    let rhs = arithmetic_mean(
        &weight_tensor(&pr.w, &pr.mu),
        &tuple_hadamard(&pr.a.pow(e)?, &pr.b.pow(e)?)?,
    )?;
    Ok(vec![Outcome::loewner(
        "hadamard-below-arithmetic",
        lhs.hermitian(),
        rhs.hermitian(),
        t.slack,
    )?])
}

fn hadamard_power(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let e = input_exponent(&p);
    let pr = pair(t, e)?;
    // Scale by 1/a so that both right means are ≥ I.
    let a = pr.a.scale(1.0 / pr.a.lower_bound())?;
    let b = pr.b.scale(1.0 / pr.b.lower_bound())?;
    let s = 1.0 - p.alpha() / p.z();
    let ra = t.right_mean(&p, &pr.w, &a)?;
    let rb = t.right_mean(&p, &pr.mu, &b)?;
    let lhs = hadamard_pd(&ra.pow(s)?, &rb.pow(s)?)?;
    let joint_w = weight_tensor(&pr.w, &pr.mu);
    let joint = tuple_hadamard(&a.pow(e)?, &b.pow(e)?)?;
    let pz = t.power_mean(p.z(), &joint_w, &joint)?;
    let am = arithmetic_mean(&joint_w, &joint)?;
    Ok(vec![
        Outcome::loewner(
            "hadamard-below-power-mean",
            lhs.hermitian(),
            pz.hermitian(),
            t.slack,
        )?,
        Outcome::loewner(
            "power-mean-below-arithmetic",
            pz.hermitian(),
            am.hermitian(),
            t.slack,
        )?,
    ])
}

fn hadamard_scaled(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let e = input_exponent(&p);
    let pr = pair(t, e)?;
    let (a, b) = (pr.a.lower_bound(), pr.b.lower_bound());
    let s = 1.0 - p.alpha() / p.z();
    let ra = t.right_mean(&p, &pr.w, &pr.a)?;
    let rb = t.right_mean(&p, &pr.mu, &pr.b)?;
    let lhs = hadamard_pd(&ra.pow(s)?, &rb.pow(s)?)?;
    let joint = tuple_hadamard(&pr.a.pow(e)?, &pr.b.pow(e)?)?;
    let pz = t.power_mean(p.z(), &weight_tensor(&pr.w, &pr.mu), &joint)?;
    let rhs = pz.hermitian().scale((a * b).powf(1.0 - 1.0 / p.z()));
    Ok(vec![Outcome::loewner(
        "scaled-power-mean-bound",
        lhs.hermitian(),
        &rhs,
        t.slack,
    )?])
}

fn power_chain(t: &mut Trial) -> Result<Vec<Outcome>> {
    let tuple = t.tuple(t.n, t.dim, 1.0)?;
    let w = t.weights(t.n);
    let lambda = cartan_mean(&w, &tuple, t.solver)?.0;
    // H = P_{-1} ≤ P_{-1/2} ≤ P_{-1/4} ≤ Λ ≤ P_{1/4} ≤ P_{1/2} ≤ P_1 = A.
    let mut chain = Vec::new();
    for &s in CHAIN_PARAMETERS.iter().rev() {
        chain.push(t.power_mean(-s, &w, &tuple)?);
    }
    chain.push(lambda.clone());
    for &s in CHAIN_PARAMETERS.iter() {
        chain.push(t.power_mean(s, &w, &tuple)?);
    }
    let mut worst = f64::INFINITY;
    for i in 0..chain.len() {
        for j in i + 1..chain.len() {
            worst = worst.min(loewner_margin(chain[i].hermitian(), chain[j].hermitian())?);
        }
    }
    let mut out = vec![Outcome::new("loewner-chain", worst, worst >= -t.slack)];

    let distances = THOMPSON_PARAMETERS
        .iter()
        .map(|&s| thompson_distance(&t.power_mean(s, &w, &tuple)?, &lambda))
        .collect::<Result<Vec<_>>>()?;
    let worst_rise = distances
        .windows(2)
        .map(|d| d[1] - d[0])
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(Outcome::new("thompson-shrinks", -worst_rise, worst_rise <= t.slack).informational());
    Ok(out)
}

fn divergence_axioms(t: &mut Trial) -> Result<Vec<Outcome>> {
    let p = t.params()?;
    let exponent = input_exponent(&p).max(p.alpha() / p.z());
    let cond = t.budget(exponent);
    let dim = t.dim;
    let a = t.rng.pd(dim, cond)?;
    let b = t.rng.pd(dim, cond)?;
    let u = t.rng.unitary(dim);
    let scale = a.trace() + b.trace();
    let relative = |x: f64, y: f64| (x - y).abs() / x.abs().max(1e-12 * scale);

    let phi = phi_alpha_z(&p, &a, &b)?;
    let sign_margin = phi / (1.0 + scale);
    let phi_same = phi_alpha_z(&p, &a, &a)?;

    // Rank-one bump of A by 1% of its largest eigenvalue.
    let v = u.column(0).into_owned();
    let bump = &v * v.adjoint() * num_complex::Complex64::new(0.01 * a.lambda_max(), 0.0);
    let a_bumped = PdMatrix::new(herm(a.matrix() + bump))?;
    let phi_bumped = phi_alpha_z(&p, &a, &a_bumped)?;

    let phi_rotated = phi_alpha_z(&p, &a.congruence(&u)?, &b.congruence(&u)?)?;
    let rotation_err = relative(phi, phi_rotated);

    let half = AlphaZ::new(0.5, 0.5)?;
    let phi_half = phi_alpha_z(&half, &a, &b)?;
    let dw = bures_wasserstein_distance(&a, &b)?;
    let bures_err = relative(phi_half, dw * dw);

    let rho = t.rng.pd(2, 10.0)?;
    let rho = rho.scale(1.0 / rho.trace())?;
    let phi_tensor = phi_alpha_z(&p, &tensor_pd(&a, &rho)?, &tensor_pd(&b, &rho)?)?;
    let tensor_err = relative(phi, phi_tensor);

    Ok(vec![
        Outcome::new(
            "nonnegative",
            sign_margin,
            sign_margin >= -DIVERGENCE_SIGN_SLACK,
        ),
        Outcome::new(
            "zero-on-diagonal",
            -phi_same.abs(),
            phi_same.abs() < DIVERGENCE_ZERO_TOL,
        ),
        Outcome::new("positive-off-diagonal", phi_bumped, phi_bumped > 0.0),
        Outcome::new(
            "unitary-invariance",
            -rotation_err,
            rotation_err <= DIVERGENCE_INVARIANCE_TOL,
        ),
        Outcome::new(
            "bures-wasserstein",
            -bures_err,
            bures_err <= BURES_IDENTITY_TOL,
        ),
        Outcome::new(
            "tensor-invariance",
            -tensor_err,
            tensor_err <= DIVERGENCE_INVARIANCE_TOL,
        ),
    ])
}

fn omega_identity(t: &mut Trial) -> Result<Vec<Outcome>> {
    let tuple = t.tuple(t.n, t.dim, 1.0)?;
    let w = t.weights(t.n);
    let half = AlphaZ::new(0.5, 0.5)?;
    let r = t.right_mean(&half, &w, &tuple)?;
    let (omega, _) = wasserstein_mean(&w, &tuple, t.solver)?;
    Ok(vec![Outcome::identity(
        "right-mean-equals-omega",
        r.matrix(),
        omega.matrix(),
        OMEGA_IDENTITY_TOL,
    )])
}
