//! The negative binomial Stein equation, its solution for 1-Lipschitz test
//! functions, and the Stein factors G1 and G2.

mod factors;
mod lipschitz;
mod solver;

pub use factors::{
    compute_r0, default_i_max, default_n, gamma_ratio, measure_factors, measure_factors_default, r0,
    theorem1_bound, SteinFactorReport, Theorem1Bound, FACTOR_TOL, GRID_P, GRID_R,
};
pub use lipschitz::{extremal_f, LipschitzFn};
pub use solver::{
    nb_expectation_lipschitz, solve_stein, stein_residual, SteinSolution, SteinSolver, RESIDUAL_TOL,
};
