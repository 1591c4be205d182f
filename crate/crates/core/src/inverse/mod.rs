//! Ideal-coding targets, genetic search over genomes and design validation.

mod ga;
mod target;
mod validate;

pub use ga::{ga_run, median, GaConfig, GaResult, GenerationStats};
pub use target::{build_target, fitness, target_mae, Anchor, PointKind, TargetPoint, TargetSpec};
pub use validate::{
    contiguous_runs, validate_design, DesignReport, BAND_MAX_LOSS_DB, BAND_PHASE_TOL_DEG,
    DISAGREEMENT_THRESHOLD,
};
