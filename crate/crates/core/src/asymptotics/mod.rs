//! Asymptotic tail predictions, rare-event estimators and the single
//! atypical environment detector.

mod estimators;
mod jump;
mod predictions;
pub mod replicate;

pub use estimators::{
    estimate_perpetuity_tail, estimate_perpetuity_tail_crude, estimate_stationary_tail, estimate_tail_crude,
    estimate_tail_importance, psae_conditional_prob, Horizon, Method, MixtureSampler, PredictionKind, Proposal,
    RatioEstimate, TailEstimate,
};
pub use jump::detect_single_big_jump;
pub use predictions::{finite_horizon_prediction, stationary_prediction, thm1_prediction};
pub use replicate::McConfig;
