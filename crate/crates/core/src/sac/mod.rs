//! Soft actor-critic with a tanh-squashed Gaussian policy. The same agent
//! plays either side of the game; the role only flips the sign of the value
//! term in the actor objective.

mod agent;
mod policy;

pub use agent::{
    soft_bellman_target, ActorGradientTerms, Batch, Critic, OnlineCritics, QFunction, Role, SacAgent, SacConfig,
};
pub use policy::{squashed_log_density, ActorSnapshot, PolicySample, LOG_STD_MAX, LOG_STD_MIN, TANH_EPSILON};
