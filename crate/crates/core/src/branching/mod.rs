//! Geometric-offspring branching with immigration: exact simulation, the
//! negative-binomial conditional tail and small-horizon tail oracles.

mod oracle;
mod process;
mod tails;

pub use oracle::{
    burn_in, conditional_log_tail, exact_tail_z1, exact_tail_z2, exact_tail_z2_series, stationary_sample, Bounded,
};
pub use process::{
    negbinom, simulate, simulate_coupled, simulate_in_env, step, Mode, Population, Trajectory, POPULATION_CEILING,
};
pub use tails::{geometric_tail, negbinom_pmf, negbinom_tail};
