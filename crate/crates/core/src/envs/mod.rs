//! Concrete environments and the string registry used by configs and the CLI.

pub mod bilinear;
pub mod picklite;
pub mod pointgoal;
pub mod turnlite;

use crate::env::{EnvSpec, Environment};
use crate::error::{Error, Result};

pub use bilinear::Bilinear;
pub use picklite::{PickLite2D, PickLiteState};
pub use pointgoal::{PointGoal, PointGoalState};
pub use turnlite::{TurnLite, TurnLiteState};

/// Registered environment identifiers.
pub const ENV_IDS: [&str; 4] = [turnlite::ID, picklite::ID, pointgoal::ID, bilinear::ID];

/// Builds a fresh environment from its identifier.
pub fn make_env(id: &str) -> Result<Box<dyn Environment>> {
    match id {
        turnlite::ID => Ok(Box::new(TurnLite::new())),
        picklite::ID => Ok(Box::new(PickLite2D::new())),
        pointgoal::ID => Ok(Box::new(PointGoal::new())),
        bilinear::ID => Ok(Box::new(Bilinear::new())),
        other => Err(Error::Config(format!("unknown environment {other:?}; expected one of {}", ENV_IDS.join(", ")))),
    }
}

pub fn env_spec(id: &str) -> Result<EnvSpec> {
    make_env(id).map(|e| e.spec().clone())
}

pub type ScriptedPolicy = fn(&[f64]) -> Vec<f64>;

/// A hand-written protagonist over the policy input, for inspection runs.
pub fn scripted_policy(id: &str) -> Result<ScriptedPolicy> {
    match id {
        turnlite::ID => Ok(|_| vec![1.0; turnlite::JOINTS]),
        picklite::ID => Ok(|o| picklite::scripted_pick_action(&o[..9], &o[9..])),
        pointgoal::ID => Ok(pointgoal::straight_line_action),
        // The pure minimax strategy of the bilinear game.
        bilinear::ID => Ok(|_| vec![0.0]),
        other => make_env(other).map(|_| unreachable!("registry and scripted policies disagree")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_resolves_every_id() {
        for id in ENV_IDS {
            let env = make_env(id).unwrap();
            assert_eq!(env.spec().id, id);
            env.spec().validate().unwrap();
        }
        assert!(matches!(make_env("cartpole"), Err(Error::Config(_))));
    }

    #[test]
    fn scripted_policies_fit_every_environment() {
        for id in ENV_IDS {
            let mut env = make_env(id).unwrap();
            let policy = scripted_policy(id).unwrap();
            let a = policy(&env.reset(3).policy_input());
            assert_eq!(a.len(), env.spec().protagonist_action_dim);
        }
        assert!(scripted_policy("cartpole").is_err());
    }

    #[test]
    fn identical_seeds_give_identical_resets() {
        for id in ENV_IDS {
            let mut a = make_env(id).unwrap();
            let mut b = make_env(id).unwrap();
            for seed in [0, 1, 99] {
                assert_eq!(a.reset(seed), b.reset(seed));
            }
        }
    }
}
