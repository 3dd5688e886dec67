//! Quadrature and compensated summation.

pub mod quadrature;
pub mod sum;

pub use quadrature::{Integral, Quadrature};
pub use sum::{compensated_sum, log_sum_exp, two_sum, NeumaierSum};
