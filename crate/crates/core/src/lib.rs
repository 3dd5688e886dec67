//! Branching processes with geometric offspring in a heavy-tailed random
//! environment with immigration.
//!
//! The analytic layer (laws, quadrature, environment paths, predictions) is
//! generic over [`scalar::Real`]; simulation and estimation run in `f64`.

pub mod asymptotics;
pub mod branching;
pub mod environment;
pub mod error;
pub mod harness;
pub mod heavytail;
pub mod numeric;
pub mod rng;
pub mod rwre;
pub mod scalar;

pub use error::{Error, Result};

pub type TailLawF32 = heavytail::TailLaw<f32>;
pub type TailLawF64 = heavytail::TailLaw<f64>;
pub type EnvPathF32 = environment::EnvPath<f32>;
pub type EnvPathF64 = environment::EnvPath<f64>;
