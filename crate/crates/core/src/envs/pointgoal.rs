//! A point mass steered toward a random goal; dense reward `−‖p − goal‖`.
//! Used to check that the learner learns at all.

use rand::Rng;

use crate::env::{
    DisturbanceMode, EnvSpec, Environment, EpisodeClock, JointAction, Observation, RewardKind, StepOutcome,
};
use crate::error::Result;
use crate::seeding::{stream, stream_rng};

pub const ID: &str = "pointgoal";
pub const HORIZON: usize = 30;
pub const STEP_SCALE: f64 = 0.1;
/// Distance under which an episode counts as successful.
pub const SUCCESS_RADIUS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGoalState {
    pub position: [f64; 2],
    pub goal: [f64; 2],
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Moves the point and returns the new state with its reward.
pub fn pointgoal_dynamics_and_reward(state: &PointGoalState, executed: [f64; 2]) -> (PointGoalState, f64) {
    let position = [
        (state.position[0] + STEP_SCALE * executed[0]).clamp(-1.0, 1.0),
        (state.position[1] + STEP_SCALE * executed[1]).clamp(-1.0, 1.0),
    ];
    let next = PointGoalState { position, goal: state.goal };
    (next, -distance(position, state.goal))
}

pub fn spec() -> EnvSpec {
    EnvSpec {
        id: ID.into(),
        state_dim: 5,
        protagonist_action_dim: 2,
        adversary_action_dim: 2,
        horizon: HORIZON,
        gamma: 0.98,
        goal_conditioned: false,
        goal_dim: 0,
        reward_kind: RewardKind::Dense,
        native_mode: DisturbanceMode::Internal,
    }
}

#[derive(Debug, Clone)]
pub struct PointGoal {
    spec: EnvSpec,
    state: PointGoalState,
    clock: EpisodeClock,
}

impl Default for PointGoal {
    fn default() -> Self {
        Self::new()
    }
}

impl PointGoal {
    pub fn new() -> Self {
        PointGoal {
            spec: spec(),
            state: PointGoalState { position: [0.0; 2], goal: [0.0; 2] },
            clock: EpisodeClock::default(),
        }
    }

    pub fn state(&self) -> &PointGoalState {
        &self.state
    }

    /// Resets to a chosen configuration instead of a sampled one.
    pub fn reset_to(&mut self, state: PointGoalState) -> Observation {
        self.state = state;
        self.clock.reset();
        self.observation()
    }

    /// Observation layout: `[px, py, gx, gy, t/T]`.
    fn observation(&self) -> Observation {
        let s = &self.state;
        Observation {
            state: vec![s.position[0], s.position[1], s.goal[0], s.goal[1], self.clock.time_feature(&self.spec)],
            goal: None,
        }
    }
}

impl Environment for PointGoal {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Observation {
        let mut rng = stream_rng(seed, stream::ENV_RESET);
        let mut draw = || [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
        let position = draw();
        let goal = draw();
        self.reset_to(PointGoalState { position, goal })
    }

    fn step(&mut self, joint: &JointAction) -> Result<StepOutcome> {
        self.clock.begin_step(&self.spec, joint)?;
        let e = joint.executed();
        let (next, reward) = pointgoal_dynamics_and_reward(&self.state, [e[0], e[1]]);
        self.state = next;
        let reached = distance(next.position, next.goal) < SUCCESS_RADIUS;
        let (done, success) = self.clock.finish_step(&self.spec, reached, false);
        Ok(StepOutcome { next_state: self.observation().state, reward, done, success })
    }
}

/// The straight-line controller: unit-length steps toward the goal, shortened
/// on the final approach. Reads the `[px, py, gx, gy, ..]` observation.
pub fn straight_line_action(observation: &[f64]) -> Vec<f64> {
    let dx = observation[2] - observation[0];
    let dy = observation[3] - observation[1];
    let d = dx.hypot(dy);
    if d < 1e-12 {
        return vec![0.0, 0.0];
    }
    let scale = (d / STEP_SCALE).min(1.0) / d;
    vec![dx * scale, dy * scale]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dynamics_examples() {
        let s = PointGoalState { position: [0.3, -0.2], goal: [0.3, -0.2] };
        let (n, r) = pointgoal_dynamics_and_reward(&s, [0.0, 0.0]);
        assert_eq!(r, 0.0);
        assert_eq!(n, s);

        let s = PointGoalState { position: [0.0, 0.0], goal: [1.0, 0.0] };
        let (n, r) = pointgoal_dynamics_and_reward(&s, [1.0, 0.0]);
        assert_eq!(n.position, [0.1, 0.0]);
        assert!((r + 0.9).abs() < 1e-15);
    }

    #[test]
    fn straight_line_return_matches_closed_form() {
        // −Σ_{k=1..10} (1 − 0.1k) over the approach, then zero for 20 steps.
        let oracle: f64 = -(1..=10).map(|k| 1.0 - 0.1 * k as f64).sum::<f64>();
        assert!((oracle + 4.5).abs() < 1e-12);

        let mut env = PointGoal::new();
        let mut obs = env.reset_to(PointGoalState { position: [0.0, 0.0], goal: [1.0, 0.0] });
        let mut total = 0.0;
        for _ in 0..HORIZON {
            let a = straight_line_action(&obs.state);
            let out = env.step(&JointAction::solo(a).unwrap()).unwrap();
            total += out.reward;
            obs.state = out.next_state;
        }
        assert!((total - oracle).abs() < 1e-9);
    }

    #[test]
    fn reset_is_seed_deterministic() {
        let mut a = PointGoal::new();
        let mut b = PointGoal::new();
        assert_eq!(a.reset(5), b.reset(5));
        assert_ne!(a.reset(5), b.reset(6));
    }
}
