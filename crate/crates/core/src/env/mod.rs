//! The two-player episodic MDP abstraction.
//!
//! A protagonist and an adversary both observe the same state. Their actions
//! are combined into the single `executed` action the environment receives:
//!
//! * internal disturbance: `clamp(protagonist + amplitude * adversary, -1, 1)`
//!   in the protagonist's own joint space;
//! * external disturbance: `protagonist ‖ adversary`, the adversary driving a
//!   separate embodiment;
//! * none: the protagonist acts alone.
//!
//! Environments are deterministic given their reset seed. Rewards depend only
//! on the resulting state trajectory.

mod episode;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use episode::{discounted_return, read_episode_csv, write_episode_csv, EpisodeRecord, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    Dense,
    Sparse,
}

/// How the adversary's action reaches the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceMode {
    Internal,
    External,
    None,
}

impl DisturbanceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DisturbanceMode::Internal => "internal",
            DisturbanceMode::External => "external",
            DisturbanceMode::None => "none",
        }
    }
}

/// Static description of an environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub id: String,
    pub state_dim: usize,
    pub protagonist_action_dim: usize,
    pub adversary_action_dim: usize,
    /// Episode length `T`.
    pub horizon: usize,
    pub gamma: f64,
    pub goal_conditioned: bool,
    /// Zero unless `goal_conditioned`.
    pub goal_dim: usize,
    pub reward_kind: RewardKind,
    /// The disturbance mode this environment is built for.
    pub native_mode: DisturbanceMode,
}

impl EnvSpec {
    pub fn validate(&self) -> Result<()> {
        if self.state_dim == 0 || self.protagonist_action_dim == 0 || self.adversary_action_dim == 0 {
            return Err(Error::Domain(format!("{}: all dimensions must be >= 1", self.id)));
        }
        if self.horizon == 0 {
            return Err(Error::Domain(format!("{}: horizon must be >= 1", self.id)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Domain(format!("{}: gamma {} not in (0, 1)", self.id, self.gamma)));
        }
        if self.reward_kind == RewardKind::Sparse && !self.goal_conditioned {
            return Err(Error::Domain(format!("{}: sparse rewards require a goal-conditioned environment", self.id)));
        }
        if self.goal_conditioned != (self.goal_dim > 0) {
            return Err(Error::Domain(format!("{}: goal_dim must be positive exactly when goal-conditioned", self.id)));
        }
        if self.native_mode == DisturbanceMode::Internal && self.protagonist_action_dim != self.adversary_action_dim {
            return Err(Error::Dimension(format!("{}: internal disturbance needs equal action dimensions", self.id)));
        }
        Ok(())
    }

    /// Width of the action vector `step` expects under `mode`.
    pub fn executed_dim(&self, mode: DisturbanceMode) -> usize {
        match mode {
            DisturbanceMode::External => self.protagonist_action_dim + self.adversary_action_dim,
            DisturbanceMode::Internal | DisturbanceMode::None => self.protagonist_action_dim,
        }
    }

    /// Input width of a policy: state followed by goal.
    pub fn observation_dim(&self) -> usize {
        self.state_dim + self.goal_dim
    }
}

fn check_unit_box(name: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !(-1.0..=1.0).contains(x)) {
        Some(i) => Err(Error::Domain(format!("{name}[{i}] = {} outside [-1, 1]", v[i]))),
        None => Ok(()),
    }
}

/// Internal disturbance: `clamp(protagonist + amplitude * adversary, -1, 1)`.
pub fn compose_internal(protagonist: &[f64], adversary: &[f64], amplitude: f64) -> Result<Vec<f64>> {
    if protagonist.len() != adversary.len() {
        return Err(Error::Dimension(format!(
            "protagonist has {} components, adversary {}",
            protagonist.len(),
            adversary.len()
        )));
    }
    check_unit_box("protagonist", protagonist)?;
    check_unit_box("adversary", adversary)?;
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::Domain(format!("amplitude {amplitude} must be >= 0")));
    }
    Ok(protagonist.iter().zip(adversary).map(|(p, a)| (p + amplitude * a).clamp(-1.0, 1.0)).collect())
}

/// External disturbance: protagonist first, then adversary.
pub fn compose_external(protagonist: &[f64], adversary: &[f64]) -> Result<Vec<f64>> {
    check_unit_box("protagonist", protagonist)?;
    check_unit_box("adversary", adversary)?;
    let mut out = Vec::with_capacity(protagonist.len() + adversary.len());
    out.extend_from_slice(protagonist);
    out.extend_from_slice(adversary);
    Ok(out)
}

/// Both players' actions and what the environment actually executes.
///
/// Only constructible through the mode-specific constructors, so `executed`
/// always satisfies its mode's invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAction {
    protagonist: Vec<f64>,
    adversary: Vec<f64>,
    amplitude: f64,
    mode: DisturbanceMode,
    executed: Vec<f64>,
}

impl JointAction {
    pub fn internal(protagonist: Vec<f64>, adversary: Vec<f64>, amplitude: f64) -> Result<Self> {
        let executed = compose_internal(&protagonist, &adversary, amplitude)?;
        Ok(JointAction { protagonist, adversary, amplitude, mode: DisturbanceMode::Internal, executed })
    }

    pub fn external(protagonist: Vec<f64>, adversary: Vec<f64>) -> Result<Self> {
        let executed = compose_external(&protagonist, &adversary)?;
        Ok(JointAction { protagonist, adversary, amplitude: 0.0, mode: DisturbanceMode::External, executed })
    }

    pub fn solo(protagonist: Vec<f64>) -> Result<Self> {
        check_unit_box("protagonist", &protagonist)?;
        Ok(JointAction {
            executed: protagonist.clone(),
            protagonist,
            adversary: Vec::new(),
            amplitude: 0.0,
            mode: DisturbanceMode::None,
        })
    }

    /// Composes according to `mode`; `amplitude` is ignored outside internal mode.
    pub fn compose(mode: DisturbanceMode, protagonist: Vec<f64>, adversary: Vec<f64>, amplitude: f64) -> Result<Self> {
        match mode {
            DisturbanceMode::Internal => Self::internal(protagonist, adversary, amplitude),
            DisturbanceMode::External => Self::external(protagonist, adversary),
            DisturbanceMode::None => Self::solo(protagonist),
        }
    }

    pub fn protagonist(&self) -> &[f64] {
        &self.protagonist
    }

    pub fn adversary(&self) -> &[f64] {
        &self.adversary
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn mode(&self) -> DisturbanceMode {
        self.mode
    }

    pub fn executed(&self) -> &[f64] {
        &self.executed
    }
}

/// What both players see: the state and, for goal-conditioned tasks, the goal.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub state: Vec<f64>,
    pub goal: Option<Vec<f64>>,
}

impl Observation {
    /// State followed by goal, the input layout of every policy and critic.
    pub fn policy_input(&self) -> Vec<f64> {
        let mut v = self.state.clone();
        if let Some(g) = &self.goal {
            v.extend_from_slice(g);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    /// Latched: stays true for the rest of the episode once reached.
    pub success: bool,
}

/// A deterministic episodic environment driven by a [`JointAction`].
pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode. Initial-state sampling draws only from `seed`.
    fn reset(&mut self, seed: u64) -> Observation;

    /// Advances one step. Stepping a finished episode is a protocol error.
    fn step(&mut self, joint: &JointAction) -> Result<StepOutcome>;

    /// The goal a state achieves, for hindsight relabeling.
    fn achieved_goal(&self, _state: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Reward for reaching `state` when pursuing `goal`.
    fn goal_reward(&self, _state: &[f64], _goal: &[f64]) -> Option<f64> {
        None
    }
}

/// Shared step bookkeeping: horizon, terminal latch and success latch.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeClock {
    pub t: usize,
    pub done: bool,
    pub success: bool,
    started: bool,
}

impl EpisodeClock {
    pub fn reset(&mut self) {
        *self = EpisodeClock { started: true, ..Default::default() };
    }

    /// Validates a step request against the episode state and the spec.
    pub fn begin_step(&self, spec: &EnvSpec, joint: &JointAction) -> Result<()> {
        if !self.started {
            return Err(Error::Protocol(format!("{}: step before reset", spec.id)));
        }
        if self.done {
            return Err(Error::Protocol(format!("{}: step after the episode finished", spec.id)));
        }
        match (joint.mode(), spec.native_mode) {
            (DisturbanceMode::None, _) => {}
            (m, native) if m == native => {}
            (m, native) => {
                return Err(Error::Config(format!(
                    "{} expects {} disturbances, got {}",
                    spec.id,
                    native.as_str(),
                    m.as_str()
                )))
            }
        }
        let want = spec.executed_dim(joint.mode());
        if joint.executed().len() != want {
            return Err(Error::Dimension(format!(
                "{}: executed action has {} components, expected {want}",
                spec.id,
                joint.executed().len()
            )));
        }
        if joint.mode() != DisturbanceMode::None && joint.adversary().len() != spec.adversary_action_dim {
            return Err(Error::Dimension(format!(
                "{}: adversary action has {} components, expected {}",
                spec.id,
                joint.adversary().len(),
                spec.adversary_action_dim
            )));
        }
        Ok(())
    }

    /// Records the step; returns `(done, success)`.
    pub fn finish_step(&mut self, spec: &EnvSpec, success_now: bool, terminal: bool) -> (bool, bool) {
        self.t += 1;
        self.success |= success_now;
        self.done = terminal || self.t >= spec.horizon;
        (self.done, self.success)
    }

    /// Fraction of the horizon elapsed, exposed to policies as a state feature.
    pub fn time_feature(&self, spec: &EnvSpec) -> f64 {
        self.t as f64 / spec.horizon as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn internal_examples() {
        assert_eq!(compose_internal(&[0.5], &[-1.0], 0.6).unwrap()[0], 0.5 - 0.6);
        assert!((compose_internal(&[0.5], &[-1.0], 0.6).unwrap()[0] + 0.1).abs() < 1e-15);
        assert_eq!(compose_internal(&[1.0, -1.0], &[0.3, 0.7], 0.0).unwrap(), vec![1.0, -1.0]);
        assert_eq!(compose_internal(&[1.0, -1.0], &[1.0, 1.0], 1.0).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn internal_errors() {
        assert!(matches!(compose_internal(&[0.0, 0.0], &[0.0], 1.0), Err(Error::Dimension(_))));
        assert!(matches!(compose_internal(&[1.5], &[0.0], 1.0), Err(Error::Domain(_))));
        assert!(matches!(compose_internal(&[0.0], &[-1.01], 1.0), Err(Error::Domain(_))));
        assert!(matches!(compose_internal(&[0.0], &[0.0], -0.1), Err(Error::Domain(_))));
        assert!(matches!(compose_internal(&[0.0], &[0.0], f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn external_examples() {
        assert_eq!(compose_external(&[0.1, 0.2], &[-0.3]).unwrap(), vec![0.1, 0.2, -0.3]);
        assert_eq!(compose_external(&[], &[0.5]).unwrap(), vec![0.5]);
        assert_eq!(compose_external(&[1.0], &[1.0]).unwrap(), vec![1.0, 1.0]);
        assert!(matches!(compose_external(&[1.0], &[2.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn joint_action_modes() {
        let j = JointAction::solo(vec![0.3, -0.2]).unwrap();
        assert_eq!(j.executed(), &[0.3, -0.2]);
        assert_eq!(j.mode(), DisturbanceMode::None);
        let j = JointAction::external(vec![0.3], vec![0.1, 0.2]).unwrap();
        assert_eq!(j.executed(), &[0.3, 0.1, 0.2]);
        let j = JointAction::compose(DisturbanceMode::Internal, vec![0.9], vec![1.0], 0.5).unwrap();
        assert_eq!(j.executed(), &[1.0]);
        assert_eq!(j.amplitude(), 0.5);
    }

    #[test]
    fn spec_validation() {
        let mut spec = EnvSpec {
            id: "t".into(),
            state_dim: 2,
            protagonist_action_dim: 1,
            adversary_action_dim: 1,
            horizon: 5,
            gamma: 0.9,
            goal_conditioned: false,
            goal_dim: 0,
            reward_kind: RewardKind::Dense,
            native_mode: DisturbanceMode::Internal,
        };
        spec.validate().unwrap();
        spec.reward_kind = RewardKind::Sparse;
        assert!(spec.validate().is_err());
        spec.reward_kind = RewardKind::Dense;
        spec.gamma = 1.0;
        assert!(spec.validate().is_err());
        spec.gamma = 0.9;
        spec.horizon = 0;
        assert!(spec.validate().is_err());
    }

    fn unit_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..=1.0, n)
    }

    proptest! {
        #[test]
        fn zero_amplitude_is_identity((p, a) in (1usize..8).prop_flat_map(|n| (unit_vec(n), unit_vec(n)))) {
            prop_assert_eq!(compose_internal(&p, &a, 0.0).unwrap(), p);
        }

        #[test]
        fn internal_stays_in_box(
            (p, a) in (1usize..8).prop_flat_map(|n| (unit_vec(n), unit_vec(n))),
            amp in 0.0f64..=1.4,
        ) {
            let out = compose_internal(&p, &a, amp).unwrap();
            prop_assert!(out.iter().all(|x| (-1.0..=1.0).contains(x)));
        }

        #[test]
        fn external_prefix_is_protagonist(p in unit_vec(4), a in unit_vec(3)) {
            let out = compose_external(&p, &a).unwrap();
            prop_assert_eq!(&out[..4], &p[..]);
            prop_assert_eq!(&out[4..], &a[..]);
        }
    }
}
