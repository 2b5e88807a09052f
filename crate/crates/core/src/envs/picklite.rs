//! Two grippers on a unit table, one block, one goal; sparse reward.
//!
//! The protagonist (starting on the right) must bring the block within
//! [`SUCCESS_RADIUS`] of the goal. The adversary (starting on the left) moves
//! a second gripper with the same capabilities: it can grasp the block, push
//! it, park itself in the protagonist's way, or push the block off the table,
//! after which the block is frozen for the rest of the episode.
//!
//! Each step is integrated in [`SUBSTEPS`] sub-steps so contacts cannot be
//! tunnelled through. Within a sub-step both grippers move (protagonist
//! first), then the protagonist interacts with the block, then the adversary.
//! That ordering is the simultaneous-grasp tie-break.

use rand::Rng;

use crate::env::{
    DisturbanceMode, EnvSpec, Environment, EpisodeClock, JointAction, Observation, RewardKind, StepOutcome,
};
use crate::error::Result;
use crate::seeding::{stream, stream_rng};

pub const ID: &str = "picklite2d";
pub const HORIZON: usize = 50;
pub const STEP_SCALE: f64 = 0.1;
/// Contact distance: gripper-gripper separation and gripper-block reach.
pub const CONTACT_RADIUS: f64 = 0.05;
pub const SUCCESS_RADIUS: f64 = 0.05;
pub const SUBSTEPS: usize = 10;
pub const PROTAGONIST_START: [f64; 2] = [0.95, 0.5];
pub const ADVERSARY_START: [f64; 2] = [0.05, 0.5];
const REACH_SLACK: f64 = 1e-9;

type P2 = [f64; 2];

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn add(a: P2, b: P2) -> P2 {
    [a[0] + b[0], a[1] + b[1]]
}

fn scale(a: P2, k: f64) -> P2 {
    [a[0] * k, a[1] * k]
}

fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: P2) -> f64 {
    a[0].hypot(a[1])
}

fn on_table(p: P2) -> bool {
    (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Protagonist,
    Adversary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PickLiteState {
    pub protagonist: P2,
    pub adversary: P2,
    pub block: P2,
    pub grasp_protagonist: bool,
    pub grasp_adversary: bool,
    /// Set once the block has left the table; it never moves again.
    pub frozen: bool,
    pub goal: P2,
}

impl PickLiteState {
    pub fn block_off_table(&self) -> bool {
        self.frozen
    }

    fn gripper(&self, side: Side) -> P2 {
        match side {
            Side::Protagonist => self.protagonist,
            Side::Adversary => self.adversary,
        }
    }

    fn gripper_mut(&mut self, side: Side) -> &mut P2 {
        match side {
            Side::Protagonist => &mut self.protagonist,
            Side::Adversary => &mut self.adversary,
        }
    }

    fn holds(&self, side: Side) -> bool {
        match side {
            Side::Protagonist => self.grasp_protagonist,
            Side::Adversary => self.grasp_adversary,
        }
    }

    fn set_grasp(&mut self, side: Side, v: bool) {
        match side {
            Side::Protagonist => self.grasp_protagonist = v,
            Side::Adversary => self.grasp_adversary = v,
        }
    }
}

/// Largest fraction of `motion` that keeps the mover at least `radius` away
/// from a point at offset `-rel` (i.e. `rel = mover − other`).
fn contact_fraction(rel: P2, motion: P2, radius: f64) -> f64 {
    let dd = dot(motion, motion);
    if dd == 0.0 {
        return 1.0;
    }
    let cd = dot(rel, motion);
    let cc = dot(rel, rel) - radius * radius;
    if cc <= 0.0 {
        // Already touching: only separating motion is allowed.
        return if cd >= 0.0 { 1.0 } else { 0.0 };
    }
    let disc = cd * cd - dd * cc;
    if cd >= 0.0 || disc < 0.0 {
        return 1.0;
    }
    let t = (-cd - disc.sqrt()) / dd;
    t.clamp(0.0, 1.0)
}

fn move_gripper(state: &mut PickLiteState, side: Side, delta: P2) {
    let me = state.gripper(side);
    let other = match side {
        Side::Protagonist => state.adversary,
        Side::Adversary => state.protagonist,
    };
    let target = [(me[0] + delta[0]).clamp(0.0, 1.0), (me[1] + delta[1]).clamp(0.0, 1.0)];
    let motion = sub(target, me);
    let t = contact_fraction(sub(me, other), motion, CONTACT_RADIUS);
    let moved = scale(motion, t);
    *state.gripper_mut(side) = add(me, moved);
    if state.holds(side) {
        state.block = add(state.block, moved);
    }
}

fn interact(state: &mut PickLiteState, side: Side, grip: f64, motion: P2) {
    if state.frozen || state.grasp_protagonist || state.grasp_adversary {
        return;
    }
    let g = state.gripper(side);
    let offset = sub(state.block, g);
    let dist = norm(offset);
    if grip > 0.0 && dist <= CONTACT_RADIUS + REACH_SLACK {
        state.set_grasp(side, true);
    } else if dist < CONTACT_RADIUS {
        let dir = if dist > 1e-12 {
            scale(offset, 1.0 / dist)
        } else if norm(motion) > 0.0 {
            scale(motion, 1.0 / norm(motion))
        } else {
            [1.0, 0.0]
        };
        state.block = add(g, scale(dir, CONTACT_RADIUS));
    }
}

fn settle_block(state: &mut PickLiteState) {
    if !state.frozen && !on_table(state.block) {
        state.frozen = true;
        state.grasp_protagonist = false;
        state.grasp_adversary = false;
    }
}

/// One step. `executed = [dx_p, dy_p, grip_p, dx_a, dy_a, grip_a]`.
pub fn picklite_dynamics(state: &PickLiteState, executed: &[f64; 6]) -> PickLiteState {
    let mut s = *state;
    let grip_p = executed[2];
    let grip_a = executed[5];
    if grip_p <= 0.0 {
        s.grasp_protagonist = false;
    }
    if grip_a <= 0.0 {
        s.grasp_adversary = false;
    }
    let k = STEP_SCALE / SUBSTEPS as f64;
    let dp = [executed[0] * k, executed[1] * k];
    let da = [executed[3] * k, executed[4] * k];

    // Contact at rest counts too (a gripper already touching may grasp).
    interact(&mut s, Side::Protagonist, grip_p, [0.0, 0.0]);
    interact(&mut s, Side::Adversary, grip_a, [0.0, 0.0]);
    for _ in 0..SUBSTEPS {
        if s.frozen {
            move_gripper(&mut s, Side::Protagonist, dp);
            move_gripper(&mut s, Side::Adversary, da);
            continue;
        }
        move_gripper(&mut s, Side::Protagonist, dp);
        settle_block(&mut s);
        move_gripper(&mut s, Side::Adversary, da);
        settle_block(&mut s);
        interact(&mut s, Side::Protagonist, grip_p, dp);
        settle_block(&mut s);
        interact(&mut s, Side::Adversary, grip_a, da);
        settle_block(&mut s);
    }
    s
}

/// Sparse reward: 0 when the block is within reach of the goal, −1 otherwise.
pub fn picklite_reward(block: P2, goal: P2) -> f64 {
    if norm(sub(block, goal)) < SUCCESS_RADIUS {
        0.0
    } else {
        -1.0
    }
}

pub fn spec() -> EnvSpec {
    EnvSpec {
        id: ID.into(),
        state_dim: 9,
        protagonist_action_dim: 3,
        adversary_action_dim: 3,
        horizon: HORIZON,
        gamma: 0.98,
        goal_conditioned: true,
        goal_dim: 2,
        reward_kind: RewardKind::Sparse,
        native_mode: DisturbanceMode::External,
    }
}

#[derive(Debug, Clone)]
pub struct PickLite2D {
    spec: EnvSpec,
    state: PickLiteState,
    clock: EpisodeClock,
}

impl Default for PickLite2D {
    fn default() -> Self {
        Self::new()
    }
}

impl PickLite2D {
    pub fn new() -> Self {
        PickLite2D {
            spec: spec(),
            state: PickLiteState {
                protagonist: PROTAGONIST_START,
                adversary: ADVERSARY_START,
                block: [0.5, 0.5],
                grasp_protagonist: false,
                grasp_adversary: false,
                frozen: false,
                goal: [0.5, 0.5],
            },
            clock: EpisodeClock::default(),
        }
    }

    pub fn state(&self) -> &PickLiteState {
        &self.state
    }

    pub fn reset_to(&mut self, state: PickLiteState) -> Observation {
        self.state = state;
        self.clock.reset();
        self.observation()
    }

    /// State layout: `[px, py, ax, ay, bx, by, grasp_p, grasp_a, t/T]`.
    fn observation(&self) -> Observation {
        let s = &self.state;
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        Observation {
            state: vec![
                s.protagonist[0],
                s.protagonist[1],
                s.adversary[0],
                s.adversary[1],
                s.block[0],
                s.block[1],
                flag(s.grasp_protagonist),
                flag(s.grasp_adversary),
                self.clock.time_feature(&self.spec),
            ],
            goal: Some(s.goal.to_vec()),
        }
    }

    /// Block position from a state vector.
    pub fn block_of(state: &[f64]) -> [f64; 2] {
        [state[4], state[5]]
    }

    /// Whether a state vector shows the block off the table.
    pub fn off_table(state: &[f64]) -> bool {
        !on_table(Self::block_of(state))
    }
}

impl Environment for PickLite2D {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Observation {
        let mut rng = stream_rng(seed, stream::ENV_RESET);
        let block = [rng.random_range(0.2..=0.8), rng.random_range(0.2..=0.8)];
        let goal = [rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0)];
        self.reset_to(PickLiteState {
            protagonist: PROTAGONIST_START,
            adversary: ADVERSARY_START,
            block,
            grasp_protagonist: false,
            grasp_adversary: false,
            frozen: false,
            goal,
        })
    }

    fn step(&mut self, joint: &JointAction) -> Result<StepOutcome> {
        self.clock.begin_step(&self.spec, joint)?;
        let e = joint.executed();
        let mut full = [0.0; 6];
        full[..e.len()].copy_from_slice(e);
        self.state = picklite_dynamics(&self.state, &full);
        let reward = picklite_reward(self.state.block, self.state.goal);
        let (done, success) = self.clock.finish_step(&self.spec, reward == 0.0, false);
        Ok(StepOutcome { next_state: self.observation().state, reward, done, success })
    }

    fn achieved_goal(&self, state: &[f64]) -> Option<Vec<f64>> {
        Some(Self::block_of(state).to_vec())
    }

    fn goal_reward(&self, state: &[f64], goal: &[f64]) -> Option<f64> {
        Some(picklite_reward(Self::block_of(state), [goal[0], goal[1]]))
    }
}

/// A hand-written protagonist: reach the block, grasp, carry it to the goal.
pub fn scripted_pick_action(state: &[f64], goal: &[f64]) -> Vec<f64> {
    let p = [state[0], state[1]];
    let b = [state[4], state[5]];
    let holding = state[6] > 0.5;
    let target = if holding { [goal[0] + p[0] - b[0], goal[1] + p[1] - b[1]] } else { b };
    let d = sub(target, p);
    let m = d[0].abs().max(d[1].abs()) / STEP_SCALE;
    let dir = if m > 1.0 { scale(d, 1.0 / (m * STEP_SCALE)) } else { scale(d, 1.0 / STEP_SCALE) };
    vec![dir[0].clamp(-1.0, 1.0), dir[1].clamp(-1.0, 1.0), 1.0]
}
