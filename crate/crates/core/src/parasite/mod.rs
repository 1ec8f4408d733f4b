//! Parasite burden of a host of age T under a time-varying ingestion
//! rate: exposure functionals, the negative binomial approximation bound,
//! exact sampling of the burden and empirical validation.
//!
//! Random ingestion rates are not modelled; for those, `|A_T|` and `A_T*`
//! in the bound should be replaced by their expectations.

mod appendix;
mod bound;
mod exposure;
mod sampling;
mod scenario;

pub use appendix::{
    abs_derivative_integral, appendix_check, appendix_rhs, appendix_rhs_relaxed, f_j, f_j_prime, per_j_bound,
    AppendixReport, K1_ABSORBED, K1_SEPARATE, K2,
};
pub use bound::{aggregate_bound, theorem31_bound, BoundReport, AGGREGATE_CONSTANT, THEOREM31_CONSTANT};
pub use exposure::{compute_exposure, exposure_path, ExposureSummary, EXPOSURE_GRID};
pub use sampling::{
    bootstrap_halfwidth, sample_w, sample_w_replicates, validate_scenario, ValidationReport,
    BOOTSTRAP_RESAMPLES, MIN_VALIDATION_SAMPLES,
};
pub use scenario::{battery_v1, Battery, BatteryEntry, IngestionRate, ScenarioParams};
