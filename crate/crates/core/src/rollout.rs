//! Two-seat episode loop shared by training and evaluation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::env::{DisturbanceMode, Environment, EpisodeRecord, JointAction, Transition};
use crate::error::{Error, Result};
use crate::sac::ActorSnapshot;

/// Something that picks an action for one seat and may learn from its
/// own view of each step.
pub trait Controller {
    fn act(&mut self, observation: &[f64]) -> Result<Vec<f64>>;

    /// Called after every step with this seat's transition.
    fn observe(&mut self, _own: &Transition) -> Result<()> {
        Ok(())
    }
}

/// Always the zero action: a locked opponent.
#[derive(Debug, Clone)]
pub struct ZeroController(pub usize);

impl Controller for ZeroController {
    fn act(&mut self, _observation: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.0; self.0])
    }
}

/// I.i.d. uniform components on [−1, 1].
#[derive(Debug, Clone)]
pub struct UniformController {
    pub dim: usize,
    pub rng: ChaCha8Rng,
}

impl Controller for UniformController {
    fn act(&mut self, _observation: &[f64]) -> Result<Vec<f64>> {
        Ok((0..self.dim).map(|_| self.rng.random_range(-1.0..=1.0)).collect())
    }
}

/// A frozen actor, sampled stochastically or through `tanh(mean)`.
#[derive(Debug, Clone)]
pub struct PolicyController {
    pub snapshot: ActorSnapshot,
    pub deterministic: bool,
    pub rng: ChaCha8Rng,
}

impl Controller for PolicyController {
    fn act(&mut self, observation: &[f64]) -> Result<Vec<f64>> {
        Ok(self.snapshot.sample(observation, self.deterministic, &mut self.rng)?.action)
    }
}

/// Wraps a closure over the policy input.
pub struct FnController<F>(pub F);

impl<F: FnMut(&[f64]) -> Vec<f64>> Controller for FnController<F> {
    fn act(&mut self, observation: &[f64]) -> Result<Vec<f64>> {
        Ok((self.0)(observation))
    }
}

/// One episode seen from both seats. Rewards are the shared environment
/// reward; each record holds that seat's own actions.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEpisode {
    pub protagonist: EpisodeRecord,
    /// Absent when the episode ran without a second seat.
    pub adversary: Option<EpisodeRecord>,
}

/// Runs one episode to completion.
///
/// `mode` selects how the seats combine: `Internal` adds `amplitude ×`
/// the adversary action in the protagonist's action space, `External`
/// concatenates the two, `None` lets the protagonist act alone and never
/// queries the adversary.
pub fn rollout(
    env: &mut dyn Environment,
    protagonist: &mut dyn Controller,
    adversary: &mut dyn Controller,
    mode: DisturbanceMode,
    amplitude: f64,
    reset_seed: u64,
) -> Result<JointEpisode> {
    let gamma = env.spec().gamma;
    let mut obs = env.reset(reset_seed);
    let mut p_steps = Vec::with_capacity(env.spec().horizon);
    let mut a_steps = Vec::with_capacity(env.spec().horizon);
    loop {
        let input = obs.policy_input();
        let p = protagonist.act(&input)?;
        let a = match mode {
            DisturbanceMode::None => None,
            _ => Some(adversary.act(&input)?),
        };
        let joint = JointAction::compose(mode, p.clone(), a.clone().unwrap_or_default(), amplitude)?;
        let out = env.step(&joint)?;
        let step_index = p_steps.len();
        let seat = |action: Vec<f64>| Transition {
            state: obs.state.clone(),
            action,
            reward: out.reward,
            next_state: out.next_state.clone(),
            done: out.done,
            success: out.success,
            goal: obs.goal.clone(),
            step_index,
        };
        let pt = seat(p);
        protagonist.observe(&pt)?;
        p_steps.push(pt);
        if let Some(a) = a {
            let at = seat(a);
            adversary.observe(&at)?;
            a_steps.push(at);
        }
        if out.done {
            break;
        }
        obs.state = out.next_state;
        if p_steps.len() > 100 * env.spec().horizon {
            return Err(Error::Protocol("environment never signalled done".into()));
        }
    }
    Ok(JointEpisode {
        protagonist: EpisodeRecord::new(p_steps, gamma, reset_seed)?,
        adversary: if a_steps.is_empty() { None } else { Some(EpisodeRecord::new(a_steps, gamma, reset_seed)?) },
    })
}
