//! Randomized verification of the statements about right means, power means,
//! the Wasserstein mean and the divergence.

pub mod checks;
pub mod region;
pub mod suite;

pub use checks::{find, known_ids, Outcome, TheoremSpec, REGISTRY};
pub use region::{region_classify, Region, RegionConstraint};
pub use suite::{
    check_theorem, replay, run_suite, trial_seed, RegionStats, SubCheck, SuiteConfig, SuiteReport,
    TheoremCheck, TrialRecord,
};
