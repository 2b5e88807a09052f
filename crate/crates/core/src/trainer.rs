//! Alternating max/min training: each iteration trains the protagonist for
//! `M` episodes against a frozen adversary, then the adversary for `N`
//! episodes against a frozen protagonist.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checkpoint::save_agent;
use crate::env::{DisturbanceMode, EnvSpec, Environment, Transition};
use crate::envs::make_env;
use crate::error::{Error, Result};
use crate::replay::{relabel_episode, RelabelStrategy, ReplayBuffer, DEFAULT_CAPACITY};
use crate::rollout::{rollout, Controller, JointEpisode, PolicyController, ZeroController};
use crate::sac::{Role, SacAgent, SacConfig};
use crate::seeding::{derive_seed, stream, stream_rng};

/// Internal-mode training amplitude used when none is configured.
pub const DEFAULT_TRAIN_AMPLITUDE: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Protagonist,
    Adversary,
}

impl Phase {
    fn tag(self) -> u64 {
        match self {
            Phase::Protagonist => 1,
            Phase::Adversary => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerConfig {
    pub env_id: String,
    pub n_iter: usize,
    /// Protagonist episodes per iteration (M).
    pub m_protagonist_episodes: usize,
    /// Adversary episodes per iteration (N).
    pub n_adversary_episodes: usize,
    /// Defaults to the environment's native mode.
    pub mode: Option<DisturbanceMode>,
    /// Internal mode only; defaults to 0.6 there and must be absent or 0 otherwise.
    pub amplitude: Option<f64>,
    pub updates_per_step: usize,
    /// Steps of uniform-random acting, per learner, before updates begin.
    pub warmup_steps: u64,
    pub seed: u64,
    pub buffer_capacity: usize,
    /// Hindsight relabeling for goal-conditioned environments.
    pub her: Option<RelabelStrategy>,
    /// Write a checkpoint pair every this many iterations (0: final only).
    pub checkpoint_every: usize,
    pub protagonist: SacConfig,
    pub adversary: SacConfig,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            env_id: "turnlite".into(),
            n_iter: 20,
            m_protagonist_episodes: 50,
            n_adversary_episodes: 50,
            mode: None,
            amplitude: None,
            updates_per_step: 1,
            warmup_steps: 1000,
            seed: 0,
            buffer_capacity: DEFAULT_CAPACITY,
            her: Some(RelabelStrategy::Final),
            checkpoint_every: 1,
            protagonist: SacConfig::default(),
            adversary: SacConfig { role: Role::Minimizer, ..SacConfig::default() },
        }
    }
}

/// Mode and amplitude after defaults and checks against the environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    pub mode: DisturbanceMode,
    pub amplitude: f64,
}

impl TrainerConfig {
    pub fn resolve(&self, spec: &EnvSpec) -> Result<Disturbance> {
        let mode = self.mode.unwrap_or(spec.native_mode);
        if mode != spec.native_mode {
            return Err(Error::Config(format!(
                "{} supports {} disturbances, not {}",
                spec.id,
                spec.native_mode.as_str(),
                mode.as_str()
            )));
        }
        let amplitude = match (mode, self.amplitude) {
            (DisturbanceMode::Internal, a) => a.unwrap_or(DEFAULT_TRAIN_AMPLITUDE),
            (_, None) | (_, Some(0.0)) => 0.0,
            (m, Some(a)) => return Err(Error::Config(format!("amplitude {a} has no meaning in {} mode", m.as_str()))),
        };
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::Config(format!("amplitude must be a finite non-negative number, got {amplitude}")));
        }
        Ok(Disturbance { mode, amplitude })
    }

    pub fn validate(&self) -> Result<(EnvSpec, Disturbance)> {
        let spec = crate::envs::env_spec(&self.env_id)?;
        let d = self.resolve(&spec)?;
        if self.n_iter == 0 {
            return Err(Error::Config("n_iter must be positive".into()));
        }
        if self.updates_per_step == 0 {
            return Err(Error::Config("updates_per_step must be positive".into()));
        }
        if self.buffer_capacity == 0 {
            return Err(Error::Config("buffer_capacity must be positive".into()));
        }
        if let Some(h) = &self.her {
            h.validate()?;
        }
        self.protagonist.validate()?;
        self.adversary.validate()?;
        Ok((spec, d))
    }

    /// The configuration with every default filled in, as written beside outputs.
    pub fn effective(&self) -> Result<TrainerConfig> {
        let (spec, d) = self.validate()?;
        let mut cfg = self.clone();
        cfg.mode = Some(d.mode);
        cfg.amplitude = (d.mode == DisturbanceMode::Internal).then_some(d.amplitude);
        cfg.protagonist.role = Role::Maximizer;
        cfg.adversary.role = Role::Minimizer;
        if !spec.goal_conditioned {
            cfg.her = None;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default)]
struct UpdateStats {
    critic_loss: f64,
    actor_objective: f64,
    count: usize,
}

/// One trainable seat: agent, its own replay buffer and its own generator.
#[derive(Debug, Clone)]
pub struct Learner {
    pub agent: SacAgent,
    pub buffer: ReplayBuffer,
    rng: ChaCha8Rng,
    env_steps: u64,
    warmup_steps: u64,
    updates_per_step: usize,
    /// Goal-conditioned episodes are pushed after relabeling, not per step.
    defer_push: bool,
    stats: UpdateStats,
}

impl Learner {
    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }
}

impl Controller for Learner {
    fn act(&mut self, observation: &[f64]) -> Result<Vec<f64>> {
        if self.env_steps < self.warmup_steps {
            let d = self.agent.action_dim();
            return Ok((0..d).map(|_| self.rng.random_range(-1.0..=1.0)).collect());
        }
        Ok(self.agent.sample_action(observation, false, &mut self.rng)?.action)
    }

    fn observe(&mut self, own: &Transition) -> Result<()> {
        self.env_steps += 1;
        if !self.defer_push {
            self.buffer.push(own.clone())?;
        }
        if self.env_steps < self.warmup_steps || self.buffer.is_empty() {
            return Ok(());
        }
        let bs = self.agent.config().batch_size;
        for _ in 0..self.updates_per_step {
            let batch = self.buffer.sample(bs, &mut self.rng)?;
            let (c, a) = self.agent.update(&batch, &mut self.rng)?;
            self.stats.critic_loss += c;
            self.stats.actor_objective += a;
            self.stats.count += 1;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AgentPair {
    pub protagonist: Learner,
    pub adversary: Learner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRow {
    pub iteration: usize,
    pub phase: Phase,
    pub episode: usize,
    pub episode_return: f64,
    pub success: bool,
    /// Means over this episode's updates; empty while warming up.
    pub critic_loss: Option<f64>,
    pub actor_objective: Option<f64>,
    /// Wall-clock seconds; kept out of the main CSV so it stays reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub rows: Vec<TrainLogRow>,
}

impl TrainLog {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
        }
        if self.rows.is_empty() {
            w.write_record([
                "iteration",
                "phase",
                "episode",
                "episode_return",
                "success",
                "critic_loss",
                "actor_objective",
            ])
            .map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<TrainLog> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<TrainLogRow>, _>>()
            .map_err(|e| Error::Parse(format!("train log: {e}")))?;
        Ok(TrainLog { rows })
    }

    pub fn write_timing_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["iteration", "phase", "episode", "wall_time_s"]).map_err(err)?;
        for r in &self.rows {
            let phase = match r.phase {
                Phase::Protagonist => "protagonist",
                Phase::Adversary => "adversary",
            };
            w.write_record([
                r.iteration.to_string(),
                phase.into(),
                r.episode.to_string(),
                format!("{:?}", r.wall_time),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Files written by a training run.
#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub protagonist: PathBuf,
    pub adversary: Option<PathBuf>,
    pub log: PathBuf,
}

pub struct Trainer {
    cfg: TrainerConfig,
    disturbance: Disturbance,
    env: Box<dyn Environment>,
    pair: AgentPair,
    her: Option<RelabelStrategy>,
    her_rng: ChaCha8Rng,
    log: TrainLog,
    iterations_done: usize,
    started: Instant,
}

impl Trainer {
    pub fn new(cfg: &TrainerConfig) -> Result<Self> {
        let cfg = cfg.effective()?;
        let (spec, disturbance) = cfg.validate()?;
        let env = make_env(&cfg.env_id)?;
        let obs_dim = spec.observation_dim();
        let p_dim = spec.protagonist_action_dim;
        let a_dim = match disturbance.mode {
            DisturbanceMode::Internal => p_dim,
            _ => spec.adversary_action_dim,
        };
        let her = cfg.her.filter(|_| spec.goal_conditioned);
        let learner = |sac: &SacConfig, dim: usize, init: u64, run: u64| -> Result<Learner> {
            let mut init_rng = stream_rng(cfg.seed, init);
            Ok(Learner {
                agent: SacAgent::new(sac.clone(), obs_dim, dim, &mut init_rng)?,
                buffer: ReplayBuffer::for_env(cfg.buffer_capacity, &spec, dim)?,
                rng: stream_rng(cfg.seed, run),
                env_steps: 0,
                warmup_steps: cfg.warmup_steps,
                updates_per_step: cfg.updates_per_step,
                defer_push: her.is_some(),
                stats: UpdateStats::default(),
            })
        };
        let pair = AgentPair {
            protagonist: learner(&cfg.protagonist, p_dim, stream::PROTAGONIST_INIT, stream::PROTAGONIST)?,
            adversary: learner(&cfg.adversary, a_dim, stream::ADVERSARY_INIT, stream::ADVERSARY)?,
        };
        Ok(Trainer {
            her_rng: stream_rng(cfg.seed, stream::HER),
            cfg,
            disturbance,
            env,
            pair,
            her,
            log: TrainLog::default(),
            iterations_done: 0,
            started: Instant::now(),
        })
    }

    pub fn config(&self) -> &TrainerConfig {
        &self.cfg
    }

    pub fn disturbance(&self) -> Disturbance {
        self.disturbance
    }

    pub fn pair(&self) -> &AgentPair {
        &self.pair
    }

    pub fn pair_mut(&mut self) -> &mut AgentPair {
        &mut self.pair
    }

    pub fn log(&self) -> &TrainLog {
        &self.log
    }

    pub fn env_spec(&self) -> &EnvSpec {
        self.env.spec()
    }

    pub fn iterations_done(&self) -> usize {
        self.iterations_done
    }

    fn episode_seed(&self, phase: Phase, iteration: usize, episode: usize) -> u64 {
        derive_seed(self.cfg.seed, &[phase.tag(), iteration as u64, episode as u64])
    }

    /// One episode with `phase`'s agent learning. `frozen` is the opponent;
    /// `None` locks the opponent to zero actions (the baseline).
    pub fn run_episode(
        &mut self,
        phase: Phase,
        iteration: usize,
        episode: usize,
        frozen: Option<crate::sac::ActorSnapshot>,
    ) -> Result<JointEpisode> {
        let seed = self.episode_seed(phase, iteration, episode);
        let Disturbance { mode, amplitude } = self.disturbance;
        let (learner, opponent_dim) = match phase {
            Phase::Protagonist => (&mut self.pair.protagonist, self.pair.adversary.agent.action_dim()),
            Phase::Adversary => (&mut self.pair.adversary, self.pair.protagonist.agent.action_dim()),
        };
        let mut opponent: Box<dyn Controller> = match frozen {
            Some(snapshot) => {
                Box::new(PolicyController { snapshot, deterministic: false, rng: stream_rng(seed, stream::OPPONENT) })
            }
            None => Box::new(ZeroController(opponent_dim)),
        };
        learner.stats = UpdateStats::default();
        let t0 = Instant::now();
        let ep = match phase {
            Phase::Protagonist => rollout(&mut *self.env, learner, &mut *opponent, mode, amplitude, seed)?,
            Phase::Adversary => rollout(&mut *self.env, &mut *opponent, learner, mode, amplitude, seed)?,
        };
        let own = match phase {
            Phase::Protagonist => &ep.protagonist,
            Phase::Adversary => ep.adversary.as_ref().expect("two-seat rollout"),
        };
        if let Some(strategy) = self.her {
            let ts = relabel_episode(own, strategy, &*self.env, &mut self.her_rng)?;
            learner.buffer.extend(ts)?;
        }
        let s = &learner.stats;
        let mean = |v: f64| (s.count > 0).then(|| v / s.count as f64);
        self.log.rows.push(TrainLogRow {
            iteration,
            phase,
            episode,
            episode_return: own.undiscounted_return,
            success: own.success,
            critic_loss: mean(s.critic_loss),
            actor_objective: mean(s.actor_objective),
            wall_time: t0.elapsed().as_secs_f64(),
        });
        Ok(ep)
    }

    /// Protagonist phase then adversary phase. Returns this iteration's log rows.
    pub fn train_iteration(&mut self) -> Result<&[TrainLogRow]> {
        let start = self.log.rows.len();
        let it = self.iterations_done;
        for ep in 0..self.cfg.m_protagonist_episodes {
            let frozen = self.pair.adversary.agent.snapshot();
            self.run_episode(Phase::Protagonist, it, ep, Some(frozen))?;
        }
        for ep in 0..self.cfg.n_adversary_episodes {
            let frozen = self.pair.protagonist.agent.snapshot();
            self.run_episode(Phase::Adversary, it, ep, Some(frozen))?;
        }
        self.iterations_done += 1;
        Ok(&self.log.rows[start..])
    }

    /// Protagonist phase only, opponent locked to zero.
    pub fn train_baseline_iteration(&mut self) -> Result<&[TrainLogRow]> {
        let start = self.log.rows.len();
        let it = self.iterations_done;
        for ep in 0..self.cfg.m_protagonist_episodes {
            self.run_episode(Phase::Protagonist, it, ep, None)?;
        }
        self.iterations_done += 1;
        Ok(&self.log.rows[start..])
    }

    fn save_pair(&self, dir: &Path, baseline: bool) -> Result<(PathBuf, Option<PathBuf>)> {
        let p = dir.join("protagonist.json");
        save_agent(&p, &self.pair.protagonist.agent, &self.cfg.env_id, self.cfg.seed)?;
        if baseline {
            return Ok((p, None));
        }
        let a = dir.join("adversary.json");
        save_agent(&a, &self.pair.adversary.agent, &self.cfg.env_id, self.cfg.seed)?;
        Ok((p, Some(a)))
    }

    /// Runs every remaining iteration, writing checkpoints and logs under
    /// `out_dir` when given.
    pub fn run(&mut self, out_dir: Option<&Path>, baseline: bool) -> Result<Option<TrainArtifacts>> {
        if let Some(dir) = out_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        self.started = Instant::now();
        while self.iterations_done < self.cfg.n_iter {
            if baseline {
                self.train_baseline_iteration()?;
            } else {
                self.train_iteration()?;
            }
            let k = self.cfg.checkpoint_every;
            if let (Some(dir), true) = (out_dir, k > 0 && self.iterations_done.is_multiple_of(k)) {
                let sub = dir.join("checkpoints").join(format!("iter_{:04}", self.iterations_done));
                self.save_pair(&sub, baseline)?;
            }
        }
        let Some(dir) = out_dir else { return Ok(None) };
        let (protagonist, adversary) = self.save_pair(dir, baseline)?;
        let log = dir.join("train_log.csv");
        write_file(&log, |w| self.log.write_csv(w))?;
        write_file(&dir.join("train_timing.csv"), |w| self.log.write_timing_csv(w))?;
        Ok(Some(TrainArtifacts { protagonist, adversary, log }))
    }

    pub fn elapsed_secs(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    body(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Adversarial training; returns the trainer (holding both agents and the log).
pub fn train(cfg: &TrainerConfig, out_dir: Option<&Path>) -> Result<(Trainer, Option<TrainArtifacts>)> {
    let mut t = Trainer::new(cfg)?;
    let artifacts = t.run(out_dir, false)?;
    Ok((t, artifacts))
}

/// Plain SAC: the adversary emits zeros throughout and is never trained.
/// Runs `n_iter × M` protagonist episodes, the same protagonist budget as
/// [`train`].
pub fn train_baseline(cfg: &TrainerConfig, out_dir: Option<&Path>) -> Result<(Trainer, Option<TrainArtifacts>)> {
    let mut t = Trainer::new(cfg)?;
    let artifacts = t.run(out_dir, true)?;
    Ok((t, artifacts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checkpoint::load_agent;

    fn tiny(env_id: &str) -> TrainerConfig {
        let sac = SacConfig { hidden_sizes: vec![16], batch_size: 16, ..SacConfig::default() };
        TrainerConfig {
            env_id: env_id.into(),
            n_iter: 1,
            m_protagonist_episodes: 1,
            n_adversary_episodes: 1,
            warmup_steps: 10,
            buffer_capacity: 10_000,
            protagonist: sac.clone(),
            adversary: sac,
            ..TrainerConfig::default()
        }
    }

    #[test]
    fn resolves_mode_and_amplitude() {
        let t = crate::envs::env_spec("turnlite").unwrap();
        let p = crate::envs::env_spec("picklite2d").unwrap();
        let cfg = TrainerConfig::default();
        assert_eq!(cfg.resolve(&t).unwrap().amplitude, 0.6);
        assert_eq!(cfg.resolve(&p).unwrap().mode, DisturbanceMode::External);
        let bad = TrainerConfig { amplitude: Some(0.4), ..TrainerConfig::default() };
        assert!(bad.resolve(&p).is_err());
        let bad = TrainerConfig { mode: Some(DisturbanceMode::Internal), ..TrainerConfig::default() };
        assert!(bad.resolve(&p).is_err());
        let bad = TrainerConfig { env_id: "nope".into(), ..TrainerConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn zero_episode_iteration_changes_nothing() {
        let cfg = TrainerConfig { m_protagonist_episodes: 0, n_adversary_episodes: 0, ..tiny("pointgoal") };
        let mut t = Trainer::new(&cfg).unwrap();
        let before = (t.pair().protagonist.agent.clone(), t.pair().adversary.agent.clone());
        assert!(t.train_iteration().unwrap().is_empty());
        assert_eq!(t.pair().protagonist.agent, before.0);
        assert_eq!(t.pair().adversary.agent, before.1);
    }

    #[test]
    fn frozen_agent_is_untouched_by_the_other_phase() {
        let cfg = TrainerConfig { m_protagonist_episodes: 2, n_adversary_episodes: 2, ..tiny("turnlite") };
        let mut t = Trainer::new(&cfg).unwrap();
        let adv = t.pair().adversary.agent.clone();
        for ep in 0..2 {
            let snap = t.pair().adversary.agent.snapshot();
            t.run_episode(Phase::Protagonist, 0, ep, Some(snap)).unwrap();
        }
        assert_eq!(t.pair().adversary.agent, adv);
        assert_ne!(t.pair().protagonist.agent.actor(), Trainer::new(&cfg).unwrap().pair().protagonist.agent.actor());

        let pro = t.pair().protagonist.agent.clone();
        for ep in 0..2 {
            let snap = t.pair().protagonist.agent.snapshot();
            t.run_episode(Phase::Adversary, 0, ep, Some(snap)).unwrap();
        }
        assert_eq!(t.pair().protagonist.agent, pro);
    }

    #[test]
    fn adversary_buffer_holds_adversary_actions_and_shared_rewards() {
        let mut t = Trainer::new(&tiny("picklite2d")).unwrap();
        let snap = t.pair().protagonist.agent.snapshot();
        let ep = t.run_episode(Phase::Adversary, 0, 0, Some(snap)).unwrap();
        let adv = ep.adversary.unwrap();
        for (p, a) in ep.protagonist.transitions.iter().zip(&adv.transitions) {
            assert_eq!(p.reward, a.reward);
        }
        let buf = &t.pair().adversary.buffer;
        assert_eq!(buf.len(), 2 * picklite_horizon());
        assert!(buf.transitions()[..adv.len()].iter().zip(&adv.transitions).all(|(b, a)| b == a));
        assert!(t.pair().protagonist.buffer.is_empty());
    }

    fn picklite_horizon() -> usize {
        crate::envs::picklite::HORIZON
    }

    #[test]
    fn baseline_with_zero_amplitude_matches_training() {
        let cfg = TrainerConfig {
            amplitude: Some(0.0),
            n_iter: 2,
            m_protagonist_episodes: 2,
            n_adversary_episodes: 1,
            ..tiny("turnlite")
        };
        let (a, _) = train(&cfg, None).unwrap();
        let (b, _) = train_baseline(&cfg, None).unwrap();
        assert_eq!(a.pair().protagonist.agent, b.pair().protagonist.agent);
        let pa: Vec<_> =
            a.log().rows.iter().filter(|r| r.phase == Phase::Protagonist).map(|r| r.episode_return).collect();
        let pb: Vec<_> = b.log().rows.iter().map(|r| r.episode_return).collect();
        assert_eq!(pa, pb);
    }

    #[test]
    fn log_counts_and_round_trip() {
        let cfg = TrainerConfig { n_iter: 2, m_protagonist_episodes: 2, n_adversary_episodes: 3, ..tiny("bilinear") };
        let (t, _) = train(&cfg, None).unwrap();
        assert_eq!(t.log().rows.len(), 2 * (2 + 3));
        let mut a = Vec::new();
        t.log().write_csv(&mut a).unwrap();
        let back = TrainLog::read_csv(&a[..]).unwrap();
        let mut b = Vec::new();
        back.write_csv(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn smoke_run_writes_loadable_artifacts_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let run = |sub: &str| {
            let out = dir.path().join(sub);
            train(&tiny("pointgoal"), Some(&out)).unwrap().1.unwrap()
        };
        let a = run("a");
        let b = run("b");
        let (agent, ckpt) = load_agent(&a.protagonist).unwrap();
        assert_eq!(ckpt.env_id, "pointgoal");
        assert_eq!(agent.config().role, Role::Maximizer);
        assert_eq!(load_agent(a.adversary.as_ref().unwrap()).unwrap().0.config().role, Role::Minimizer);
        assert!(dir.path().join("a/checkpoints/iter_0001/adversary.json").exists());
        for f in ["train_log.csv", "protagonist.json", "adversary.json"] {
            assert_eq!(
                std::fs::read(dir.path().join("a").join(f)).unwrap(),
                std::fs::read(dir.path().join("b").join(f)).unwrap(),
                "{f}"
            );
        }
        let _ = b;
    }

    #[test]
    fn baseline_writes_no_adversary() {
        let dir = tempfile::tempdir().unwrap();
        let art = train_baseline(&tiny("picklite2d"), Some(dir.path())).unwrap().1.unwrap();
        assert!(art.adversary.is_none());
        assert!(!dir.path().join("adversary.json").exists());
    }

    #[test]
    fn baseline_adversary_gripper_never_moves() {
        let mut t = Trainer::new(&tiny("picklite2d")).unwrap();
        let ep = t.run_episode(Phase::Protagonist, 0, 0, None).unwrap();
        let adv = ep.adversary.unwrap();
        for tr in &adv.transitions {
            assert!(tr.action.iter().all(|&x| x == 0.0));
            assert_eq!(&tr.next_state[2..4], &crate::envs::picklite::ADVERSARY_START);
        }
    }
}
