//! Numerical foundations: special functions, quadrature, root finding and
//! random streams.

mod quadrature;
mod rng;
mod root;
mod special;

pub use quadrature::{integrate, integrate_piecewise, Integral, QuadratureSpec};
pub use rng::{rng_stream, RngStream};
pub use root::find_root;
pub use special::log_gamma;

pub(crate) use special::{ln_factorial, ln_gamma_unchecked};
