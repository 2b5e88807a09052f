use ndarray::{concatenate, s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::policy::{standard_normal, ActorSnapshot, PolicySample, SquashedBatch, TANH_EPSILON};
use crate::error::{Error, Result};
use crate::nn::{Activation, Adam, Gradients, Mlp};

/// Which way the agent pushes the shared return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Maximizer,
    Minimizer,
}

impl Role {
    /// +1 for the maximizer, −1 for the minimizer.
    pub fn sign(self) -> f64 {
        match self {
            Role::Maximizer => 1.0,
            Role::Minimizer => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SacConfig {
    pub gamma: f64,
    /// Entropy temperature.
    pub temperature: f64,
    /// Polyak rate for target critics.
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch_size: usize,
    /// Two critics with a min-backup instead of one.
    pub twin_q: bool,
    pub role: Role,
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
}

impl Default for SacConfig {
    fn default() -> Self {
        SacConfig {
            gamma: 0.98,
            temperature: 0.2,
            tau: 0.005,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            batch_size: 256,
            twin_q: false,
            role: Role::Maximizer,
            hidden_sizes: vec![256, 256],
            activation: Activation::Relu,
        }
    }
}

impl SacConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("sac: {what}")));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return bad("temperature must be a finite non-negative number");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if !(self.actor_lr > 0.0) || !(self.critic_lr > 0.0) {
            return bad("learning rates must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.hidden_sizes.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        Ok(())
    }
}

/// `y = r + γ(1 − done)(Q'(s', ã) − temperature · log π(ã|s'))`.
pub fn soft_bellman_target(
    reward: f64,
    done: bool,
    gamma: f64,
    temperature: f64,
    next_q: f64,
    next_log_prob: f64,
) -> f64 {
    let cont = if done { 0.0 } else { 1.0 };
    reward + gamma * cont * (next_q - temperature * next_log_prob)
}

/// A minibatch of transitions in policy-input form.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub observations: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_observations: Array2<f64>,
    pub dones: Vec<bool>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// A differentiable action-value, queried by the actor update.
pub trait QFunction {
    /// Values `Q(s, a)` per row and `∂Q/∂a`.
    fn q_and_action_grad(
        &self,
        observations: ArrayView2<f64>,
        actions: ArrayView2<f64>,
    ) -> Result<(Array1<f64>, Array2<f64>)>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Critic {
    pub net: Mlp,
    pub target: Mlp,
    pub optimizer: Adam,
}

fn critic_input(observations: ArrayView2<f64>, actions: ArrayView2<f64>) -> Result<Array2<f64>> {
    concatenate(Axis(1), &[observations, actions]).map_err(|e| Error::Dimension(format!("critic input: {e}")))
}

/// Elementwise minimum over critic outputs, with the index of the winner.
fn min_over(values: &[Array2<f64>]) -> (Array1<f64>, Vec<usize>) {
    let n = values[0].nrows();
    let mut best = values[0].column(0).to_owned();
    let mut which = vec![0; n];
    for (k, v) in values.iter().enumerate().skip(1) {
        for r in 0..n {
            if v[[r, 0]] < best[r] {
                best[r] = v[[r, 0]];
                which[r] = k;
            }
        }
    }
    (best, which)
}

/// The online critics of an agent, seen as a `QFunction`.
pub struct OnlineCritics<'a>(pub &'a [Critic]);

impl QFunction for OnlineCritics<'_> {
    fn q_and_action_grad(
        &self,
        observations: ArrayView2<f64>,
        actions: ArrayView2<f64>,
    ) -> Result<(Array1<f64>, Array2<f64>)> {
        let input = critic_input(observations, actions)?;
        let mut outs = Vec::with_capacity(self.0.len());
        let mut tapes = Vec::with_capacity(self.0.len());
        for c in self.0 {
            let (o, t) = c.net.forward_tape(input.view())?;
            outs.push(o);
            tapes.push(t);
        }
        let (q, which) = min_over(&outs);
        let obs_dim = observations.ncols();
        let mut grad = Array2::zeros(actions.raw_dim());
        for (k, c) in self.0.iter().enumerate() {
            let mask = Array2::from_shape_fn((q.len(), 1), |(r, _)| if which[r] == k { 1.0 } else { 0.0 });
            if mask.sum() == 0.0 {
                continue;
            }
            let (_, input_grad) = c.net.backward(&tapes[k], mask.view())?;
            grad += &input_grad.slice(s![.., obs_dim..]);
        }
        Ok((q, grad))
    }
}

/// The actor gradient split into its value and entropy parts.
#[derive(Debug, Clone)]
pub struct ActorGradientTerms {
    /// Gradient of `−sign · E[Q]`.
    pub q_term: Gradients,
    /// Gradient of `temperature · E[log π]`.
    pub entropy_term: Gradients,
    /// `E[sign · Q − temperature · log π]`, the quantity being ascended.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SacAgent {
    config: SacConfig,
    observation_dim: usize,
    action_dim: usize,
    actor: Mlp,
    actor_optimizer: Adam,
    critics: Vec<Critic>,
}

impl SacAgent {
    pub fn new<R: Rng + ?Sized>(
        config: SacConfig,
        observation_dim: usize,
        action_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        if observation_dim == 0 || action_dim == 0 {
            return Err(Error::Dimension("agent needs non-empty observations and actions".into()));
        }
        let sizes = |inp: usize, out: usize| {
            let mut v = vec![inp];
            v.extend_from_slice(&config.hidden_sizes);
            v.push(out);
            v
        };
        let actor = Mlp::new(&sizes(observation_dim, 2 * action_dim), config.activation, rng)?;
        let actor_optimizer = Adam::new(&actor, config.actor_lr);
        let n_critics = if config.twin_q { 2 } else { 1 };
        let mut critics = Vec::with_capacity(n_critics);
        for _ in 0..n_critics {
            let net = Mlp::new(&sizes(observation_dim + action_dim, 1), config.activation, rng)?;
            critics.push(Critic { target: net.clone(), optimizer: Adam::new(&net, config.critic_lr), net });
        }
        Ok(SacAgent { config, observation_dim, action_dim, actor, actor_optimizer, critics })
    }

    /// Reassembles an agent from stored parts, checking shapes agree.
    pub fn from_parts(config: SacConfig, actor: Mlp, actor_optimizer: Adam, critics: Vec<Critic>) -> Result<Self> {
        config.validate()?;
        let action_dim = actor.output_dim() / 2;
        let observation_dim = actor.input_dim();
        if !actor.output_dim().is_multiple_of(2) || action_dim == 0 {
            return Err(Error::Dimension("actor output must be 2 × action_dim".into()));
        }
        let expected = if config.twin_q { 2 } else { 1 };
        if critics.len() != expected {
            return Err(Error::Dimension(format!("expected {expected} critics, got {}", critics.len())));
        }
        for c in &critics {
            if c.net.input_dim() != observation_dim + action_dim
                || c.net.output_dim() != 1
                || c.net.layer_sizes() != c.target.layer_sizes()
            {
                return Err(Error::Dimension("critic shape does not match actor".into()));
            }
        }
        Ok(SacAgent { config, observation_dim, action_dim, actor, actor_optimizer, critics })
    }

    pub fn config(&self) -> &SacConfig {
        &self.config
    }

    pub fn observation_dim(&self) -> usize {
        self.observation_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn actor_mut(&mut self) -> &mut Mlp {
        &mut self.actor
    }

    pub fn actor_optimizer(&self) -> &Adam {
        &self.actor_optimizer
    }

    pub fn critics(&self) -> &[Critic] {
        &self.critics
    }

    pub fn critics_mut(&mut self) -> &mut [Critic] {
        &mut self.critics
    }

    pub fn snapshot(&self) -> ActorSnapshot {
        ActorSnapshot::new(self.actor.clone()).expect("actor output width checked at construction")
    }

    pub fn sample_action<R: Rng + ?Sized>(
        &self,
        observation: &[f64],
        deterministic: bool,
        rng: &mut R,
    ) -> Result<PolicySample> {
        if observation.len() != self.observation_dim {
            return Err(Error::Dimension(format!(
                "observation has {} entries, agent expects {}",
                observation.len(),
                self.observation_dim
            )));
        }
        let out = self.actor.forward(observation)?;
        let d = self.action_dim;
        if deterministic {
            return Ok(PolicySample { action: out[..d].iter().map(|m| m.tanh()).collect(), log_prob: None });
        }
        let outputs = Array2::from_shape_vec((1, 2 * d), out).expect("actor output width");
        let sq = SquashedBatch::new(&outputs, standard_normal(rng, 1, d));
        Ok(PolicySample { action: sq.actions.row(0).to_vec(), log_prob: Some(sq.log_probs[0]) })
    }

    /// Q(s, a) from the online critics (minimum if twin).
    pub fn q_value(&self, observation: &[f64], action: &[f64]) -> Result<f64> {
        let mut input = observation.to_vec();
        input.extend_from_slice(action);
        let mut best = f64::INFINITY;
        for c in &self.critics {
            best = best.min(c.net.forward(&input)?[0]);
        }
        Ok(best)
    }

    fn check_batch(&self, batch: &Batch) -> Result<()> {
        let n = batch.len();
        let ok = n > 0
            && batch.observations.dim() == (n, self.observation_dim)
            && batch.next_observations.dim() == (n, self.observation_dim)
            && batch.actions.dim() == (n, self.action_dim)
            && batch.dones.len() == n;
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension("batch shapes do not match the agent".into()))
        }
    }

    /// Soft Bellman targets for a batch, sampling `ã ~ π(·|s')`.
    pub fn critic_targets<R: Rng + ?Sized>(&self, batch: &Batch, rng: &mut R) -> Result<Array1<f64>> {
        self.check_batch(batch)?;
        let out = self.actor.forward_batch(batch.next_observations.view())?;
        let next = SquashedBatch::new(&out, standard_normal(rng, batch.len(), self.action_dim));
        let input = critic_input(batch.next_observations.view(), next.actions.view())?;
        let mut outs = Vec::with_capacity(self.critics.len());
        for c in &self.critics {
            outs.push(c.target.forward_batch(input.view())?);
        }
        let (next_q, _) = min_over(&outs);
        Ok(Array1::from_shape_fn(batch.len(), |i| {
            soft_bellman_target(
                batch.rewards[i],
                batch.dones[i],
                self.config.gamma,
                self.config.temperature,
                next_q[i],
                next.log_probs[i],
            )
        }))
    }

    /// Target for a single transition.
    pub fn critic_target<R: Rng + ?Sized>(
        &self,
        reward: f64,
        next_observation: &[f64],
        done: bool,
        rng: &mut R,
    ) -> Result<f64> {
        let batch = Batch {
            observations: Array2::zeros((1, self.observation_dim)),
            actions: Array2::zeros((1, self.action_dim)),
            rewards: Array1::from_elem(1, reward),
            next_observations: Array2::from_shape_vec((1, next_observation.len()), next_observation.to_vec())
                .expect("row vector"),
            dones: vec![done],
        };
        Ok(self.critic_targets(&batch, rng)?[0])
    }

    /// One Adam step on each critic towards fixed targets. Returns the mean
    /// squared error before the step, averaged over critics.
    pub fn update_critic_towards(&mut self, batch: &Batch, targets: ArrayView1<f64>) -> Result<f64> {
        self.check_batch(batch)?;
        if targets.len() != batch.len() {
            return Err(Error::Dimension("one target per transition".into()));
        }
        let input = critic_input(batch.observations.view(), batch.actions.view())?;
        let n = batch.len() as f64;
        let mut total = 0.0;
        for c in &mut self.critics {
            let (q, tape) = c.net.forward_tape(input.view())?;
            let diff = &q.column(0) - &targets;
            total += diff.mapv(|d| d * d).sum() / n;
            let grad_out = diff.mapv(|d| 2.0 * d / n).insert_axis(Axis(1));
            let (grads, _) = c.net.backward(&tape, grad_out.view())?;
            c.optimizer.step(&mut c.net, &grads)?;
        }
        Ok(total / self.critics.len() as f64)
    }

    pub fn update_critic<R: Rng + ?Sized>(&mut self, batch: &Batch, rng: &mut R) -> Result<f64> {
        let targets = self.critic_targets(batch, rng)?;
        self.update_critic_towards(batch, targets.view())
    }

    /// Gradients of the actor loss `temperature · log π − sign · Q` for a fixed
    /// noise draw, keeping the value and entropy contributions apart.
    pub fn actor_gradient_terms(
        &self,
        observations: ArrayView2<f64>,
        q: &dyn QFunction,
        noise: Array2<f64>,
    ) -> Result<ActorGradientTerms> {
        let n = observations.nrows();
        let d = self.action_dim;
        if n == 0 || observations.ncols() != self.observation_dim || noise.dim() != (n, d) {
            return Err(Error::Dimension("actor batch shapes do not match the agent".into()));
        }
        let (out, tape) = self.actor.forward_tape(observations)?;
        let sq = SquashedBatch::new(&out, noise);
        let (qv, dq_da) = q.q_and_action_grad(observations, sq.actions.view())?;
        if qv.len() != n || dq_da.dim() != (n, d) {
            return Err(Error::Dimension("q function returned the wrong shape".into()));
        }
        let sign = self.config.role.sign();
        let temp = self.config.temperature;
        let inv_n = 1.0 / n as f64;
        let mut g_q = Array2::zeros((n, 2 * d));
        let mut g_e = Array2::zeros((n, 2 * d));
        for r in 0..n {
            for i in 0..d {
                let a = sq.actions[[r, i]];
                let one_minus = 1.0 - a * a;
                let sigma_eps = sq.std[[r, i]] * sq.noise[[r, i]];
                let free = if sq.log_std_free[[r, i]] { 1.0 } else { 0.0 };
                let dq_du = dq_da[[r, i]] * one_minus;
                g_q[[r, i]] = -sign * dq_du * inv_n;
                g_q[[r, d + i]] = -sign * dq_du * sigma_eps * free * inv_n;
                let dlogp_du = 2.0 * a * one_minus / (one_minus + TANH_EPSILON);
                g_e[[r, i]] = temp * dlogp_du * inv_n;
                g_e[[r, d + i]] = temp * (-1.0 + dlogp_du * sigma_eps) * free * inv_n;
            }
        }
        let (q_term, _) = self.actor.backward(&tape, g_q.view())?;
        let (entropy_term, _) = self.actor.backward(&tape, g_e.view())?;
        let objective = (sign * qv.sum() - temp * sq.log_probs.sum()) * inv_n;
        Ok(ActorGradientTerms { q_term, entropy_term, objective })
    }

    /// One reparameterised actor step against `q`. Returns the objective
    /// before the step.
    pub fn update_actor_with<R: Rng + ?Sized>(
        &mut self,
        observations: ArrayView2<f64>,
        q: &dyn QFunction,
        rng: &mut R,
    ) -> Result<f64> {
        let noise = standard_normal(rng, observations.nrows(), self.action_dim);
        let terms = self.actor_gradient_terms(observations, q, noise)?;
        let mut grads = terms.q_term;
        grads.accumulate(&terms.entropy_term)?;
        self.actor_optimizer.step(&mut self.actor, &grads)?;
        Ok(terms.objective)
    }

    /// Actor step against the agent's own online critics.
    pub fn update_actor<R: Rng + ?Sized>(&mut self, observations: ArrayView2<f64>, rng: &mut R) -> Result<f64> {
        let noise = standard_normal(rng, observations.nrows(), self.action_dim);
        let terms = self.actor_gradient_terms(observations, &OnlineCritics(&self.critics), noise)?;
        let mut grads = terms.q_term;
        grads.accumulate(&terms.entropy_term)?;
        self.actor_optimizer.step(&mut self.actor, &grads)?;
        Ok(terms.objective)
    }

    /// `θ' ← τθ + (1 − τ)θ'` for every target critic.
    pub fn soft_update_targets(&mut self) -> Result<()> {
        let tau = self.config.tau;
        for c in &mut self.critics {
            c.target.blend_from(&c.net, tau)?;
        }
        Ok(())
    }

    /// Critic step, actor step, target update. Returns `(critic_loss, actor_objective)`.
    pub fn update<R: Rng + ?Sized>(&mut self, batch: &Batch, rng: &mut R) -> Result<(f64, f64)> {
        let critic_loss = self.update_critic(batch, rng)?;
        let objective = self.update_actor(batch.observations.view(), rng)?;
        self.soft_update_targets()?;
        Ok((critic_loss, objective))
    }
}
