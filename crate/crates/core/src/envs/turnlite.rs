//! Three-joint object turning under joint-space disturbance.
//!
//! An object starts at angle −π and must be turned past 0 within 40 steps.
//! Each joint `i` contributes `κ · executed_i · (1 − q_i²)` of rotation, so a
//! joint pushed to its limit stops turning the object: positioning matters
//! and an adversary in the same joint space can hurt through the state, not
//! only by cancelling actions.

use std::f64::consts::PI;

use crate::env::{
    DisturbanceMode, EnvSpec, Environment, EpisodeClock, JointAction, Observation, RewardKind, StepOutcome,
};
use crate::error::Result;

pub const ID: &str = "turnlite";
pub const HORIZON: usize = 40;
pub const JOINTS: usize = 3;
/// Rotation gain κ.
pub const TURN_GAIN: f64 = 0.35;
/// Joint displacement per unit action.
pub const JOINT_RATE: f64 = 0.2;
pub const SUCCESS_BONUS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurnLiteState {
    pub theta: f64,
    pub joints: [f64; JOINTS],
}

impl TurnLiteState {
    pub fn initial() -> Self {
        TurnLiteState { theta: -PI, joints: [0.0; JOINTS] }
    }

    pub fn succeeded(&self) -> bool {
        self.theta >= 0.0
    }
}

/// One step of the joint/object kinematics. Rotation uses the joint
/// positions before the move.
pub fn turnlite_dynamics(state: &TurnLiteState, executed: &[f64; JOINTS]) -> TurnLiteState {
    let mut turn = 0.0;
    let mut joints = state.joints;
    for i in 0..JOINTS {
        let q = state.joints[i];
        turn += executed[i] * (1.0 - q * q);
        joints[i] = (q + JOINT_RATE * executed[i]).clamp(-1.0, 1.0);
    }
    TurnLiteState { theta: (state.theta + TURN_GAIN * turn).clamp(-PI, PI), joints }
}

/// Progress in angle, plus the bonus on the first step that reaches θ ≥ 0.
pub fn turnlite_reward(prev: &TurnLiteState, next: &TurnLiteState, already_succeeded: bool) -> f64 {
    let bonus = if !already_succeeded && next.succeeded() { SUCCESS_BONUS } else { 0.0 };
    (next.theta - prev.theta) + bonus
}

pub fn spec() -> EnvSpec {
    EnvSpec {
        id: ID.into(),
        state_dim: 2 + JOINTS,
        protagonist_action_dim: JOINTS,
        adversary_action_dim: JOINTS,
        horizon: HORIZON,
        gamma: 0.98,
        goal_conditioned: false,
        goal_dim: 0,
        reward_kind: RewardKind::Dense,
        native_mode: DisturbanceMode::Internal,
    }
}

#[derive(Debug, Clone)]
pub struct TurnLite {
    spec: EnvSpec,
    state: TurnLiteState,
    clock: EpisodeClock,
}

impl Default for TurnLite {
    fn default() -> Self {
        Self::new()
    }
}

impl TurnLite {
    pub fn new() -> Self {
        TurnLite { spec: spec(), state: TurnLiteState::initial(), clock: EpisodeClock::default() }
    }

    pub fn state(&self) -> &TurnLiteState {
        &self.state
    }

    /// Observation layout: `[θ/π, q0, q1, q2, t/T]`.
    fn observe(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.spec.state_dim);
        v.push(self.state.theta / PI);
        v.extend_from_slice(&self.state.joints);
        v.push(self.clock.time_feature(&self.spec));
        v
    }

    /// Recovers the object angle from an observation vector.
    pub fn theta_of(observation: &[f64]) -> f64 {
        observation[0] * PI
    }
}

impl Environment for TurnLite {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _seed: u64) -> Observation {
        self.state = TurnLiteState::initial();
        self.clock.reset();
        Observation { state: self.observe(), goal: None }
    }

    fn step(&mut self, joint: &JointAction) -> Result<StepOutcome> {
        self.clock.begin_step(&self.spec, joint)?;
        let e = joint.executed();
        let next = turnlite_dynamics(&self.state, &[e[0], e[1], e[2]]);
        let reward = turnlite_reward(&self.state, &next, self.clock.success);
        self.state = next;
        let (done, success) = self.clock.finish_step(&self.spec, next.succeeded(), false);
        Ok(StepOutcome { next_state: self.observe(), reward, done, success })
    }
}
