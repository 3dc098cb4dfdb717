//! Running checks over seeded trials and aggregating the results.
//!
//! Every trial derives its own seed from the suite seed, the theorem id and
//! the trial index, and draws its shape and parameters from that seed alone,
//! so a failing seed can be replayed in isolation. Trials may run in parallel;
//! results are merged in trial-index order, so reports do not depend on
//! scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergences::AlphaZ;
use crate::error::{Error, Result};
use crate::linalg::PdRng;
use crate::solver::SolverConfig;
use crate::verify::checks::{find, known_ids, Outcome, SolveRecord, TheoremSpec, Trial, REGISTRY};
use crate::verify::region::{Region, RegionConstraint};

/// Slack applied to every order relation and scalar inequality.
pub const DEFAULT_SLACK: f64 = 1e-8;
/// Fixed-point tolerance used for harness solves: two orders of magnitude
/// below the certificate thresholds, leaving room for the congruence in the
/// geometric form of the equation to amplify the defect.
pub const HARNESS_TOL: f64 = 1e-11;
pub const HARNESS_MAX_ITER: usize = 2000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Checks to run; `None` runs the whole registry.
    pub theorems: Option<Vec<String>>,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub ns: Vec<usize>,
    pub conds: Vec<f64>,
    /// Fixed `(α, z)` instead of sampling.
    pub params: Option<(f64, f64)>,
    /// Sample outside narrower region constraints; such checks become informational.
    pub explore: bool,
    pub solver: SolverConfig,
    pub slack: f64,
    /// Worker threads; `1` runs trials on the calling thread.
    pub jobs: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            theorems: None,
            trials: 200,
            dims: vec![2, 3, 4],
            ns: vec![2, 3, 5],
            conds: vec![10.0, 1e3],
            params: None,
            explore: false,
            solver: SolverConfig::new(HARNESS_TOL, HARNESS_MAX_ITER, 1.0)
                .expect("valid harness tolerances"),
            slack: DEFAULT_SLACK,
            jobs: 1,
        }
    }
}

impl SuiteConfig {
    fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Domain(
                "dims must be a nonempty list of positive sizes".into(),
            ));
        }
        if self.ns.is_empty() || self.ns.contains(&0) {
            return Err(Error::Domain(
                "tuple sizes must be a nonempty list of positive counts".into(),
            ));
        }
        if self.conds.is_empty() || self.conds.iter().any(|c| !(c.is_finite() && *c >= 1.0)) {
            return Err(Error::Domain(
                "condition numbers must be finite and at least 1".into(),
            ));
        }
        if !(self.slack.is_finite() && self.slack >= 0.0) {
            return Err(Error::Domain(format!(
                "slack must be nonnegative, got {}",
                self.slack
            )));
        }
        if self.jobs == 0 {
            return Err(Error::Domain("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Aggregate of one sub-statement over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub violations: usize,
    pub worst_margin: Option<f64>,
    pub informational: bool,
}

/// Right-mean solver statistics over the solves whose `(α, z)` lie in one region.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub solves: usize,
    pub converged: usize,
    pub failures: usize,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub step_reductions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub theorem_id: String,
    pub statement: String,
    pub region_constraint: Vec<Region>,
    /// Set when the check ran outside its stated region.
    pub informational: bool,
    pub trials: usize,
    pub violations: usize,
    pub solver_failures: usize,
    /// Smallest margin over all non-informational outcomes (`None` if no trial completed).
    pub worst_margin: Option<f64>,
    pub failing_seeds: Vec<u64>,
    pub failure_seeds: Vec<u64>,
    pub sub_checks: Vec<SubCheck>,
    pub solver_stats: BTreeMap<Region, RegionStats>,
}

impl TheoremCheck {
    /// True if the check counts against the suite: a non-informational check
    /// with violations or solver failures.
    pub fn is_failure(&self) -> bool {
        !self.informational && (self.violations > 0 || self.solver_failures > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite_seed: u64,
    pub checks: Vec<TheoremCheck>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| !c.is_failure())
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>10} {:>8} {:>12}  status",
            "theorem", "trials", "violations", "failures", "worst margin"
        );
        for c in &self.checks {
            let margin = c
                .worst_margin
                .map_or_else(|| "-".to_string(), |m| format!("{m:.3e}"));
            let status = match (c.informational, c.is_failure()) {
                (true, _) => "info",
                (false, true) => "FAIL",
                (false, false) => "ok",
            };
            let _ = writeln!(
                out,
                "{:<24} {:>6} {:>10} {:>8} {:>12}  {}",
                c.theorem_id, c.trials, c.violations, c.solver_failures, margin, status
            );
        }
        out
    }
}

/// Everything a single trial produced.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub seed: u64,
    pub dim: usize,
    pub n: usize,
    pub cond: f64,
    pub params: Option<AlphaZ>,
    pub outcome: std::result::Result<Vec<Outcome>, String>,
    pub solves: Vec<SolveRecord>,
}

impl TrialRecord {
    /// True if some non-informational outcome failed.
    pub fn violated(&self) -> bool {
        matches!(&self.outcome, Ok(o) if o.iter().any(|x| !x.informational && !x.holds))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed of trial `index` of check `id` in a suite seeded with `suite_seed`.
pub fn trial_seed(suite_seed: u64, id: &str, index: usize) -> u64 {
    splitmix64(splitmix64(suite_seed ^ fnv1a(id)) ^ index as u64)
}

/// How a check samples its parameters under a given configuration.
#[derive(Debug, Clone, Copy)]
struct Plan {
    fixed: Option<AlphaZ>,
    sampling: RegionConstraint,
    informational: bool,
}

fn plan(spec: &TheoremSpec, config: &SuiteConfig) -> Result<Plan> {
    let constraint = spec.constraint;
    if constraint == RegionConstraint::None {
        return Ok(Plan {
            fixed: None,
            sampling: constraint,
            informational: false,
        });
    }
    if let Some((alpha, z)) = config.params {
        let p = AlphaZ::new(alpha, z)?;
        let inside = constraint.admits(&p);
        if !inside && !config.explore {
            return Err(Error::Precondition(format!(
                "{} requires (alpha, z) in {:?}, got ({alpha}, {z})",
                spec.id,
                constraint.regions()
            )));
        }
        return Ok(Plan {
            fixed: Some(p),
            sampling: constraint,
            informational: !inside,
        });
    }
    // Exploration widens z ≥ 1/2 to the whole domain; checks pinned to z = 1/2
    // have no meaningful extension and keep their constraint.
    let widen = config.explore && constraint == RegionConstraint::AUnionB;
    Ok(Plan {
        fixed: None,
        sampling: if widen {
            RegionConstraint::Any
        } else {
            constraint
        },
        informational: widen,
    })
}

fn run_trial(spec: &TheoremSpec, plan: &Plan, config: &SuiteConfig, seed: u64) -> TrialRecord {
    let mut rng = PdRng::new(seed);
    let dim = config.dims[rng.index(config.dims.len())];
    let n = config.ns[rng.index(config.ns.len())];
    let cond = config.conds[rng.index(config.conds.len())];
    let params = match (plan.fixed, plan.sampling) {
        (Some(p), _) => Some(p),
        (None, RegionConstraint::None) => None,
        (None, c) => Some(c.sample(&mut rng)),
    };
    let mut trial = Trial {
        rng,
        params,
        dim,
        n,
        cond,
        solver: &config.solver,
        slack: config.slack,
        solves: Vec::new(),
    };
    let outcome = (spec.run)(&mut trial).map_err(|e| e.to_string());
    if let Err(message) = &outcome {
        log::debug!("{} trial seed {seed}: {message}", spec.id);
    }
    TrialRecord {
        seed,
        dim,
        n,
        cond,
        params,
        outcome,
        solves: trial.solves,
    }
}

/// Re-runs a single trial from its seed.
pub fn replay(id: &str, seed: u64, config: &SuiteConfig) -> Result<TrialRecord> {
    config.validate()?;
    let spec = lookup(id)?;
    let plan = plan(spec, config)?;
    Ok(run_trial(spec, &plan, config, seed))
}

fn lookup(id: &str) -> Result<&'static TheoremSpec> {
    find(id).ok_or_else(|| Error::UnknownTheorem {
        id: id.to_string(),
        known: known_ids(),
    })
}

fn aggregate(spec: &TheoremSpec, plan: &Plan, records: &[TrialRecord]) -> TheoremCheck {
    let mut check = TheoremCheck {
        theorem_id: spec.id.to_string(),
        statement: spec.statement.to_string(),
        region_constraint: spec.constraint.regions(),
        informational: plan.informational,
        trials: records.len(),
        violations: 0,
        solver_failures: 0,
        worst_margin: None,
        failing_seeds: Vec::new(),
        failure_seeds: Vec::new(),
        sub_checks: Vec::new(),
        solver_stats: BTreeMap::new(),
    };
    let min_opt = |a: Option<f64>, b: f64| Some(a.map_or(b, |a| a.min(b)));
    let mut iterations: BTreeMap<Region, usize> = BTreeMap::new();
    for record in records {
        match &record.outcome {
            Err(_) => {
                check.solver_failures += 1;
                check.failure_seeds.push(record.seed);
            }
            Ok(outcomes) => {
                if record.violated() {
                    check.violations += 1;
                    check.failing_seeds.push(record.seed);
                }
                for o in outcomes {
                    if !o.informational {
                        check.worst_margin = min_opt(check.worst_margin, o.margin);
                    }
                    let sub = match check.sub_checks.iter_mut().find(|s| s.name == o.name) {
                        Some(sub) => sub,
                        None => {
                            check.sub_checks.push(SubCheck {
                                name: o.name.to_string(),
                                violations: 0,
                                worst_margin: None,
                                informational: o.informational,
                            });
                            check.sub_checks.last_mut().expect("just pushed")
                        }
                    };
                    sub.worst_margin = min_opt(sub.worst_margin, o.margin);
                    if !o.holds {
                        sub.violations += 1;
                    }
                }
            }
        }
        // A solve on a shared boundary counts toward every region containing it.
        for solve in &record.solves {
            for region in Region::ALL
                .into_iter()
                .filter(|r| r.contains(&solve.params))
            {
                let stats = check.solver_stats.entry(region).or_default();
                stats.solves += 1;
                if solve.converged {
                    stats.converged += 1;
                } else {
                    stats.failures += 1;
                }
                stats.max_iterations = stats.max_iterations.max(solve.iterations);
                stats.step_reductions += solve.step_reductions;
                *iterations.entry(region).or_default() += solve.iterations;
            }
        }
    }
    for (region, stats) in check.solver_stats.iter_mut() {
        stats.mean_iterations = iterations[region] as f64 / stats.solves as f64;
    }
    check
}

fn run_spec(spec: &TheoremSpec, config: &SuiteConfig) -> Result<TheoremCheck> {
    let plan = plan(spec, config)?;
    let seeds: Vec<u64> = (0..config.trials)
        .map(|i| trial_seed(config.seed, spec.id, i))
        .collect();
    let records: Vec<TrialRecord> = if config.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            seeds
                .par_iter()
                .map(|&s| run_trial(spec, &plan, config, s))
                .collect()
        })
    } else {
        seeds
            .iter()
            .map(|&s| run_trial(spec, &plan, config, s))
            .collect()
    };
    let check = aggregate(spec, &plan, &records);
    log::info!(
        "{}: {} trials, {} violations, {} solver failures",
        check.theorem_id,
        check.trials,
        check.violations,
        check.solver_failures
    );
    Ok(check)
}

/// Runs one check (by id or alias) under `config`, ignoring `config.theorems`.
pub fn check_theorem(id: &str, config: &SuiteConfig) -> Result<TheoremCheck> {
    config.validate()?;
    run_spec(lookup(id)?, config)
}

/// Runs the configured checks in the order given (registry order by default).
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let specs: Vec<&TheoremSpec> = match &config.theorems {
        None => REGISTRY.iter().collect(),
        Some(ids) => ids.iter().map(|id| lookup(id)).collect::<Result<_>>()?,
    };
    let checks = specs
        .into_iter()
        .map(|spec| run_spec(spec, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        suite_seed: config.seed,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(trials: usize) -> SuiteConfig {
        SuiteConfig {
            trials,
            seed: 11,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn empty_list_gives_empty_report() {
        let cfg = SuiteConfig {
            theorems: Some(Vec::new()),
            ..config(5)
        };
        let report = run_suite(&cfg).unwrap();
        assert!(report.checks.is_empty());
        assert!(report.passed());
    }

    #[test]
    fn unknown_id_lists_known_ids() {
        match check_theorem("T:nonexistent", &config(1)) {
            Err(Error::UnknownTheorem { known, .. }) => {
                assert!(known.contains(&"T:A-R".to_string()))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn region_constraint_is_enforced() {
        let cfg = SuiteConfig {
            params: Some((0.2, 0.4)),
            ..config(2)
        };
        assert!(matches!(
            check_theorem("T:A-R", &cfg),
            Err(Error::Precondition(_))
        ));
        let explore = SuiteConfig {
            explore: true,
            ..cfg
        };
        assert!(check_theorem("T:A-R", &explore).unwrap().informational);
    }

    #[test]
    fn homogeneity_passes_and_is_deterministic() {
        let a = check_theorem("properties-2-homogeneity", &config(20)).unwrap();
        assert_eq!(a.violations, 0, "{a:?}");
        assert_eq!(a.solver_failures, 0, "{a:?}");
        let parallel = SuiteConfig {
            jobs: 3,
            ..config(20)
        };
        assert_eq!(check_theorem("properties-2", &parallel).unwrap(), a);
    }

    #[test]
    fn failing_seeds_replay() {
        let cfg = config(3);
        let check = check_theorem("boundedness", &cfg).unwrap();
        let seed = trial_seed(cfg.seed, "L:boundedness", 1);
        let record = replay("L:boundedness", seed, &cfg).unwrap();
        assert!(record.outcome.is_ok());
        assert_eq!(record.violated(), check.failing_seeds.contains(&seed));
    }
}
