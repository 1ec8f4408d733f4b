//! Negative binomial, Poisson and the modified geometric law of a
//! single-ancestor birth–death population, with samplers and the maximal
//! pmf bounds.

mod modgeom;
mod negbin;
mod pmf;
mod poisson;
mod sampling;

pub use modgeom::{lambda_theta, stationary_theta, LambdaTheta, ModGeomParams};
pub use negbin::{k_r, poisson_max_bound, NegBinParams, PmfMax, PmfMaxBound};
pub use pmf::Pmf;
pub use poisson::Poisson;
pub use sampling::{sample_gamma, sample_poisson};

/// Truncation index `ceil(mean + 12·sd) + 64` used to materialize laws.
pub fn truncation_index(mean: f64, sd: f64) -> u64 {
    (mean + 12.0 * sd).ceil().max(0.0) as u64 + 64
}
