//! Alternating adversarial soft actor-critic for continuous control under
//! action disturbances.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod config;
pub mod env;
pub mod envs;
pub mod error;
pub mod eval;
pub mod nn;
pub mod replay;
pub mod rollout;
pub mod sac;
pub mod seeding;
pub mod trainer;

pub use error::{Error, Result};
