//! One-step zero-sum game with reward `â · ā`. Its saddle point is
//! `â = ā = 0` with value 0, which makes it a check on alternating
//! max/min training.

use crate::env::{
    DisturbanceMode, EnvSpec, Environment, EpisodeClock, JointAction, Observation, RewardKind, StepOutcome,
};
use crate::error::Result;

pub const ID: &str = "bilinear";

pub fn spec() -> EnvSpec {
    EnvSpec {
        id: ID.into(),
        state_dim: 1,
        protagonist_action_dim: 1,
        adversary_action_dim: 1,
        horizon: 1,
        gamma: 0.98,
        goal_conditioned: false,
        goal_dim: 0,
        reward_kind: RewardKind::Dense,
        native_mode: DisturbanceMode::External,
    }
}

pub fn payoff(protagonist: f64, adversary: f64) -> f64 {
    protagonist * adversary
}

/// `max_â min_ā â·ā` over an evenly spaced grid on [-1, 1].
pub fn grid_minimax(points: usize) -> f64 {
    let grid: Vec<f64> = (0..points).map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64).collect();
    grid.iter()
        .map(|&p| grid.iter().map(|&a| payoff(p, a)).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone)]
pub struct Bilinear {
    spec: EnvSpec,
    clock: EpisodeClock,
}

impl Default for Bilinear {
    fn default() -> Self {
        Self::new()
    }
}

impl Bilinear {
    pub fn new() -> Self {
        Bilinear { spec: spec(), clock: EpisodeClock::default() }
    }
}

impl Environment for Bilinear {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _seed: u64) -> Observation {
        self.clock.reset();
        Observation { state: vec![1.0], goal: None }
    }

    fn step(&mut self, joint: &JointAction) -> Result<StepOutcome> {
        self.clock.begin_step(&self.spec, joint)?;
        let e = joint.executed();
        let adversary = e.get(1).copied().unwrap_or(0.0);
        let reward = payoff(e[0], adversary);
        let (done, success) = self.clock.finish_step(&self.spec, false, true);
        Ok(StepOutcome { next_state: vec![1.0], reward, done, success })
    }
}
