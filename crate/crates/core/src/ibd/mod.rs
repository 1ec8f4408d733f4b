//! Immigration–birth–death processes with unit death rate: exact
//! simulation and checks of their endpoint laws.

mod checks;
mod sim;

pub use checks::{
    check_law, check_two_sample, coupling_check, verify_integral_identities, IntegralIdentities,
    LawCheckReport, MIN_LAW_SAMPLES,
};
pub use sim::{
    run_replicates, simulate_ibd, simulate_replicates, IBDParams, Immigration, RateFn, POPULATION_CAP,
};
