//! Ring-buffer experience replay and hindsight goal relabeling.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{EnvSpec, Environment, EpisodeRecord, Transition};
use crate::error::{Error, Result};
use crate::sac::Batch;

pub const DEFAULT_CAPACITY: usize = 1_000_000;

/// Fixed-capacity FIFO store of one agent's transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    state_dim: usize,
    action_dim: usize,
    goal_dim: usize,
    storage: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    /// `goal_dim` 0 means transitions carry no goal.
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize, goal_dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay capacity must be positive".into()));
        }
        Ok(ReplayBuffer { capacity, state_dim, action_dim, goal_dim, storage: Vec::new(), cursor: 0 })
    }

    /// A buffer shaped for one side of `spec`, storing actions of `action_dim`.
    pub fn for_env(capacity: usize, spec: &EnvSpec, action_dim: usize) -> Result<Self> {
        let goal_dim = if spec.goal_conditioned { spec.goal_dim } else { 0 };
        Self::new(capacity, spec.state_dim, action_dim, goal_dim)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn observation_dim(&self) -> usize {
        self.state_dim + self.goal_dim
    }

    /// Stored transitions in slot order (not insertion order once wrapped).
    pub fn transitions(&self) -> &[Transition] {
        &self.storage
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        let goal_ok = match &t.goal {
            None => self.goal_dim == 0,
            Some(g) => g.len() == self.goal_dim && self.goal_dim > 0,
        };
        if t.state.len() != self.state_dim
            || t.next_state.len() != self.state_dim
            || t.action.len() != self.action_dim
            || !goal_ok
        {
            return Err(Error::Dimension(format!(
                "transition (state {}, action {}, goal {:?}) does not fit buffer (state {}, action {}, goal {})",
                t.state.len(),
                t.action.len(),
                t.goal.as_ref().map(Vec::len),
                self.state_dim,
                self.action_dim,
                self.goal_dim
            )));
        }
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    pub fn extend(&mut self, ts: impl IntoIterator<Item = Transition>) -> Result<()> {
        for t in ts {
            self.push(t)?;
        }
        Ok(())
    }

    /// Indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.storage.is_empty() {
            return Err(Error::Protocol("sampling from an empty replay buffer".into()));
        }
        if n == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        Ok((0..n).map(|_| rng.random_range(0..self.storage.len())).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Batch> {
        let idx = self.sample_indices(n, rng)?;
        let od = self.observation_dim();
        let mut observations = Array2::zeros((n, od));
        let mut next_observations = Array2::zeros((n, od));
        let mut actions = Array2::zeros((n, self.action_dim));
        let mut rewards = Array1::zeros(n);
        let mut dones = Vec::with_capacity(n);
        for (r, &i) in idx.iter().enumerate() {
            let t = &self.storage[i];
            observations.row_mut(r).assign(&Array1::from(t.observation()));
            next_observations.row_mut(r).assign(&Array1::from(t.next_observation()));
            actions.row_mut(r).assign(&Array1::from(t.action.clone()));
            rewards[r] = t.reward;
            dones.push(t.done);
        }
        Ok(Batch { observations, actions, rewards, next_observations, dones })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RelabelStrategy {
    /// Every transition relabeled with the episode's final achieved goal.
    #[default]
    Final,
    /// Each transition relabeled with `k` goals achieved later in the episode.
    Future { k: usize },
}

impl RelabelStrategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            RelabelStrategy::Future { k: 0 } => Err(Error::Config("future relabeling needs k ≥ 1".into())),
            _ => Ok(()),
        }
    }
}

/// Originals followed by relabeled copies, rewards recomputed by the
/// environment's own goal reward. Success on a relabeled copy means its
/// reward reached the sparse maximum of 0, latched along the copy sequence.
pub fn relabel_episode<R: Rng + ?Sized>(
    episode: &EpisodeRecord,
    strategy: RelabelStrategy,
    env: &dyn Environment,
    rng: &mut R,
) -> Result<Vec<Transition>> {
    strategy.validate()?;
    if !env.spec().goal_conditioned || episode.transitions.iter().any(|t| t.goal.is_none()) {
        return Err(Error::Protocol("hindsight relabeling needs a goal-conditioned episode".into()));
    }
    let achieved = |t: &Transition| {
        env.achieved_goal(&t.next_state).ok_or_else(|| Error::Protocol("environment exposes no achieved goal".into()))
    };
    let relabel = |t: &Transition, goal: &[f64], latched: &mut bool| -> Result<Transition> {
        let reward = env
            .goal_reward(&t.next_state, goal)
            .ok_or_else(|| Error::Protocol("environment exposes no goal reward".into()))?;
        *latched |= reward == 0.0;
        Ok(Transition { reward, success: *latched, goal: Some(goal.to_vec()), ..t.clone() })
    };

    let ts = &episode.transitions;
    let mut out = ts.clone();
    match strategy {
        RelabelStrategy::Final => {
            let Some(last) = ts.last() else { return Ok(out) };
            let goal = achieved(last)?;
            let mut latched = false;
            for t in ts {
                out.push(relabel(t, &goal, &mut latched)?);
            }
        }
        RelabelStrategy::Future { k } => {
            let goals: Vec<Vec<f64>> = ts.iter().map(achieved).collect::<Result<_>>()?;
            for (i, t) in ts.iter().enumerate() {
                for _ in 0..k {
                    let j = rng.random_range(i..ts.len());
                    let mut latched = false;
                    out.push(relabel(t, &goals[j], &mut latched)?);
                }
            }
        }
    }
    Ok(out)
}
