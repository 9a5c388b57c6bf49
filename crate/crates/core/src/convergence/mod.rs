//! Bounded models, the nearest-neighbor bridge process, bad events, and the
//! Monte Carlo experiments comparing the six-vertex model with the ASEP.

pub mod badevents;
pub mod bounded;
pub mod experiment;
pub mod report;
pub mod stats;
pub mod tildeq;

pub use badevents::{
    bad_event_bounds, bad_event_survey, coupled_outcome, detect_bad_events, BadEventFlags, BadEventSurvey, CoupledOutcome,
};
pub use bounded::{bounded_agreement_check, BoundedConfig, BoundedModel, BoundedRow};
pub use experiment::{
    run_convergence_experiment, sample_asep, sample_offset, steps_for, tail_bound_check, ConvergenceConfig, ModelSamples,
    OffsetEngine, TailRow,
};
pub use report::{CheckResult, ConvergenceReport, ReportRow};
pub use stats::{ks_distance, ks_to_law};
pub use tildeq::{evolve_tilde_q, TildeQState};
