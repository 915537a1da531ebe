//! Turning replicate simulations into pass/fail evidence: exponent fits, the
//! marginal law at `t = 1`, the LIL band, remainder decay and `V_n` moments.

mod checks;
mod config;
mod replicate;

pub use checks::{
    compare_limit_distribution, delta_draws, delta_laws, fit_scaling_exponent, lil_track, refined,
    refinement_check, remainder_decay_check, remainder_exponent, theorem1_exponent,
    theorem2_constant, vn_moment_check, Band, LilBand, LimitComparison, RefinementCheck,
    RemainderDecay, ScalingFit, Statistic, VnMoments, MIN_BOOTSTRAP, MIN_FIT_REPLICATES,
    MIN_LIL_REPLICATES, MIN_LIMIT_SAMPLES, MIN_REMAINDER_REPLICATES, MIN_VN_REPLICATES,
};
pub use config::{geometric_grid, Discretization, ExperimentConfig};
pub use replicate::{
    lil_normalizer, replicate_seeds, simulate_replicate, simulate_replicates, GridRecord, LilSpec,
    LilTrack, ReplicateResult, ReplicateSeeds,
};
