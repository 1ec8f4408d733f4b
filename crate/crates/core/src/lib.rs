//! Negative binomial approximation by Stein's method in the Wasserstein
//! metric.
//!
//! The crate solves the negative binomial Stein equation, measures and
//! certifies its Stein factors, simulates immigration–birth–death processes
//! exactly to check the laws the factor bounds rest on, and evaluates the
//! parasite-burden approximation bound together with its empirical
//! validation.

pub mod distributions;
pub mod error;
pub mod ibd;
pub mod metrics;
pub mod numerics;
pub mod parasite;
pub mod stein;

pub use error::{Error, Result};
