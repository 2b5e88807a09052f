//! Robustness evaluation of frozen policies under no attack, uniform noise,
//! or a learned adversary, across a grid of disturbance amplitudes.

use std::io::{Read, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::load_agent;
use crate::env::{DisturbanceMode, EnvSpec};
use crate::envs::{env_spec, make_env};
use crate::error::{Error, Result};
use crate::rollout::{rollout, Controller, JointEpisode, PolicyController, UniformController, ZeroController};
use crate::sac::ActorSnapshot;
use crate::seeding::{derive_seed, stream, stream_rng};

pub const DEFAULT_AMPLITUDES: [f64; 8] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4];
pub const DEFAULT_EPISODES_PER_CELL: usize = 50;
/// The single "attack on" cell used for external disturbances.
pub const EXTERNAL_CELL_AMPLITUDE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    None,
    RandomUniform,
    AdversaryPolicy,
}

impl AttackKind {
    pub const ALL: [AttackKind; 3] = [AttackKind::None, AttackKind::RandomUniform, AttackKind::AdversaryPolicy];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::RandomUniform => "random_uniform",
            AttackKind::AdversaryPolicy => "adversary_policy",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(AttackKind::None),
            "random_uniform" | "random" => Ok(AttackKind::RandomUniform),
            "adversary_policy" | "adversary" => Ok(AttackKind::AdversaryPolicy),
            other => Err(Error::Config(format!("unknown attack kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub kind: AttackKind,
    #[serde(default)]
    pub adversary_checkpoint: Option<PathBuf>,
}

impl AttackSpec {
    pub fn validate(&self) -> Result<()> {
        match (self.kind, &self.adversary_checkpoint) {
            (AttackKind::AdversaryPolicy, None) => {
                Err(Error::Config("adversary_policy attack needs an adversary checkpoint".into()))
            }
            (AttackKind::AdversaryPolicy, Some(_)) | (_, None) => Ok(()),
            (k, Some(_)) => Err(Error::Config(format!("{} attack takes no adversary checkpoint", k.as_str()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub env_id: String,
    pub policy_checkpoint: PathBuf,
    pub attack: AttackSpec,
    #[serde(default = "default_amplitudes")]
    pub amplitudes: Vec<f64>,
    #[serde(default = "default_episodes")]
    pub episodes_per_cell: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub deterministic_policy: bool,
}

fn default_amplitudes() -> Vec<f64> {
    DEFAULT_AMPLITUDES.to_vec()
}

fn default_episodes() -> usize {
    DEFAULT_EPISODES_PER_CELL
}

fn yes() -> bool {
    true
}

/// An attack with its adversary already loaded.
#[derive(Debug, Clone)]
pub enum Attack {
    None,
    RandomUniform,
    /// The learned adversary, acting through `tanh(mean)`.
    Adversary(ActorSnapshot),
}

impl Attack {
    /// The second seat for one episode.
    pub fn controller(&self, spec: &EnvSpec, attack_seed: u64) -> Box<dyn Controller> {
        let dim = match spec.native_mode {
            DisturbanceMode::Internal => spec.protagonist_action_dim,
            _ => spec.adversary_action_dim,
        };
        match self {
            Attack::None => Box::new(ZeroController(dim)),
            Attack::RandomUniform => {
                Box::new(UniformController { dim, rng: stream_rng(attack_seed, stream::EVAL_ATTACK) })
            }
            Attack::Adversary(snap) => Box::new(PolicyController {
                snapshot: snap.clone(),
                deterministic: true,
                rng: stream_rng(attack_seed, stream::EVAL_ATTACK),
            }),
        }
    }

    pub fn kind(&self) -> AttackKind {
        match self {
            Attack::None => AttackKind::None,
            Attack::RandomUniform => AttackKind::RandomUniform,
            Attack::Adversary(_) => AttackKind::AdversaryPolicy,
        }
    }
}

/// Per-episode seeds of an evaluation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeSeeds {
    pub reset: u64,
    pub policy: u64,
    pub attack: u64,
}

impl EpisodeSeeds {
    pub fn new(root: u64, amplitude: f64, e: usize) -> Self {
        EpisodeSeeds {
            reset: derive_seed(root, &[stream::EVAL_RESET, e as u64]),
            policy: derive_seed(root, &[e as u64]),
            attack: derive_seed(root, &[amplitude.to_bits(), e as u64]),
        }
    }
}

/// Everything needed to run evaluation episodes, independent of disk.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub env_id: String,
    pub protagonist: ActorSnapshot,
    pub attack: Attack,
    pub episodes_per_cell: usize,
    pub seed: u64,
    pub deterministic_policy: bool,
    /// Worker threads; 1 runs inline. Output does not depend on it.
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub episodes: usize,
    pub mean_return: f64,
    /// Population standard deviation of the episode returns.
    pub std_return: f64,
    pub success_rate: f64,
}

impl CellStats {
    pub fn from_episodes(returns: &[f64], successes: &[bool]) -> Result<Self> {
        if returns.is_empty() || returns.len() != successes.len() {
            return Err(Error::Protocol("cell statistics need at least one episode".into()));
        }
        let n = returns.len() as f64;
        let mean = returns.iter().sum::<f64>() / n;
        let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
        Ok(CellStats {
            episodes: returns.len(),
            mean_return: mean,
            std_return: var.sqrt(),
            success_rate: successes.iter().filter(|&&s| s).count() as f64 / n,
        })
    }
}

fn check_dims(spec: &EnvSpec, protagonist: &ActorSnapshot, attack: &Attack) -> Result<()> {
    if protagonist.observation_dim() != spec.observation_dim()
        || protagonist.action_dim() != spec.protagonist_action_dim
    {
        return Err(Error::Dimension(format!(
            "policy ({} → {}) does not fit {} ({} → {})",
            protagonist.observation_dim(),
            protagonist.action_dim(),
            spec.id,
            spec.observation_dim(),
            spec.protagonist_action_dim
        )));
    }
    if let Attack::Adversary(a) = attack {
        let want = match spec.native_mode {
            DisturbanceMode::Internal => spec.protagonist_action_dim,
            _ => spec.adversary_action_dim,
        };
        if a.observation_dim() != spec.observation_dim() || a.action_dim() != want {
            return Err(Error::Dimension(format!("adversary policy does not fit {}", spec.id)));
        }
    }
    Ok(())
}

impl Evaluation {
    pub fn spec(&self) -> Result<EnvSpec> {
        let spec = env_spec(&self.env_id)?;
        check_dims(&spec, &self.protagonist, &self.attack)?;
        if self.episodes_per_cell == 0 {
            return Err(Error::Config("episodes_per_cell must be positive".into()));
        }
        Ok(spec)
    }

    /// Episode `e` of the cell at `amplitude`. Reset and policy draws depend
    /// only on `(seed, e)`, attack draws also on the amplitude.
    pub fn run_episode(&self, spec: &EnvSpec, amplitude: f64, e: usize) -> Result<JointEpisode> {
        let mut env = make_env(&self.env_id)?;
        let seeds = EpisodeSeeds::new(self.seed, amplitude, e);
        let mut protagonist = PolicyController {
            snapshot: self.protagonist.clone(),
            deterministic: self.deterministic_policy,
            rng: stream_rng(seeds.policy, stream::EVAL_POLICY),
        };
        let mut adversary = self.attack.controller(spec, seeds.attack);
        rollout(&mut *env, &mut protagonist, &mut *adversary, spec.native_mode, amplitude, seeds.reset)
    }

    pub fn evaluate_cell(&self, amplitude: f64) -> Result<CellStats> {
        let spec = self.spec()?;
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::Config(format!("amplitude must be non-negative, got {amplitude}")));
        }
        let run = |e: usize| {
            self.run_episode(&spec, amplitude, e).map(|ep| (ep.protagonist.undiscounted_return, ep.protagonist.success))
        };
        let results: Vec<(f64, bool)> = if self.jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.jobs)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| (0..self.episodes_per_cell).into_par_iter().map(run).collect::<Result<_>>())?
        } else {
            (0..self.episodes_per_cell).map(run).collect::<Result<_>>()?
        };
        let returns: Vec<f64> = results.iter().map(|r| r.0).collect();
        let successes: Vec<bool> = results.iter().map(|r| r.1).collect();
        CellStats::from_episodes(&returns, &successes)
    }

    /// Every cell of the grid in the given order. External environments
    /// have one cell, reported at amplitude 1.
    pub fn sweep(&self, amplitudes: &[f64]) -> Result<SweepResult> {
        let spec = self.spec()?;
        let grid: Vec<f64> = match spec.native_mode {
            DisturbanceMode::Internal => {
                if amplitudes.is_empty() || amplitudes.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::Config("amplitudes must be non-empty and strictly ascending".into()));
                }
                amplitudes.to_vec()
            }
            _ => vec![EXTERNAL_CELL_AMPLITUDE],
        };
        let mut rows = Vec::with_capacity(grid.len());
        for amplitude in grid {
            let s = self.evaluate_cell(amplitude)?;
            rows.push(SweepRow {
                env_id: self.env_id.clone(),
                attack: self.attack.kind(),
                amplitude,
                episodes: s.episodes,
                mean_return: s.mean_return,
                std_return: s.std_return,
                success_rate: s.success_rate,
                seed: self.seed,
            });
        }
        Ok(SweepResult { rows })
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.attack.validate()?;
        if self.episodes_per_cell == 0 {
            return Err(Error::Config("episodes_per_cell must be positive".into()));
        }
        if self.amplitudes.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::Config("amplitudes must be non-negative".into()));
        }
        Ok(())
    }

    /// Loads the checkpoints. Pure reads; nothing on disk changes.
    pub fn load(&self, jobs: usize) -> Result<Evaluation> {
        self.validate()?;
        let (protagonist, _) = load_agent(&self.policy_checkpoint)?;
        let attack = match self.attack.kind {
            AttackKind::None => Attack::None,
            AttackKind::RandomUniform => Attack::RandomUniform,
            AttackKind::AdversaryPolicy => {
                let path = self.attack.adversary_checkpoint.as_ref().expect("validated");
                Attack::Adversary(load_agent(path)?.0.snapshot())
            }
        };
        let eval = Evaluation {
            env_id: self.env_id.clone(),
            protagonist: protagonist.snapshot(),
            attack,
            episodes_per_cell: self.episodes_per_cell,
            seed: self.seed,
            deterministic_policy: self.deterministic_policy,
            jobs: jobs.max(1),
        };
        eval.spec()?;
        Ok(eval)
    }
}

pub fn evaluate_cell(spec: &SweepSpec, amplitude: f64) -> Result<CellStats> {
    spec.load(1)?.evaluate_cell(amplitude)
}

pub fn sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepResult> {
    spec.load(jobs)?.sweep(&spec.amplitudes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub env_id: String,
    pub attack: AttackKind,
    pub amplitude: f64,
    pub episodes: usize,
    pub mean_return: f64,
    pub std_return: f64,
    pub success_rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn amplitudes(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.amplitude).collect()
    }

    pub fn mean_returns(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean_return).collect()
    }

    pub fn row_at(&self, amplitude: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.amplitude == amplitude)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Parse(e.to_string());
        if self.rows.is_empty() {
            w.write_record([
                "env_id",
                "attack",
                "amplitude",
                "episodes",
                "mean_return",
                "std_return",
                "success_rate",
                "seed",
            ])
            .map_err(err)?;
        }
        for r in &self.rows {
            w.serialize(r).map_err(err)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<SweepRow>, _>>()
            .map_err(|e| Error::Parse(format!("sweep csv: {e}")))?;
        Ok(SweepResult { rows })
    }
}

/// Spearman rank correlation with average ranks for ties. A constant
/// series has no ordering and yields 0.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

/// Cell-by-cell comparison of two sweeps over the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub amplitudes: Vec<f64>,
    /// `a − b` in mean return per cell.
    pub return_deltas: Vec<f64>,
    /// `a − b` in success rate per cell.
    pub success_deltas: Vec<f64>,
    /// `a ≥ b` in mean return on strictly more than half the cells.
    pub a_ge_b_on_majority: bool,
    pub spearman_a: f64,
    pub spearman_b: f64,
    /// Both series trend down (or stay flat) with amplitude.
    pub both_non_increasing: bool,
}

impl OrderingReport {
    pub fn delta_at(&self, amplitude: f64) -> Option<f64> {
        self.amplitudes.iter().position(|&a| a == amplitude).map(|i| self.return_deltas[i])
    }
}

/// Compares sweep `a` against sweep `b`.
///
/// With `a` the adversarially trained protagonist and `b` the baseline,
/// both under adversary attack, `a_ge_b_on_majority` is the robustness
/// ordering. With `a` the baseline under uniform noise and `b` the baseline
/// under adversary attack it says the adversary hurts at least as much.
pub fn compare_policies(a: &SweepResult, b: &SweepResult) -> Result<OrderingReport> {
    if a.rows.is_empty() || a.amplitudes() != b.amplitudes() || a.rows[0].env_id != b.rows[0].env_id {
        return Err(Error::Config("sweeps cover different grids or environments".into()));
    }
    let amps = a.amplitudes();
    let (ra, rb) = (a.mean_returns(), b.mean_returns());
    let return_deltas: Vec<f64> = ra.iter().zip(&rb).map(|(x, y)| x - y).collect();
    let success_deltas = a.rows.iter().zip(&b.rows).map(|(x, y)| x.success_rate - y.success_rate).collect();
    let wins = return_deltas.iter().filter(|d| **d >= 0.0).count();
    let spearman_a = spearman(&amps, &ra);
    let spearman_b = spearman(&amps, &rb);
    Ok(OrderingReport {
        amplitudes: amps,
        return_deltas,
        success_deltas,
        a_ge_b_on_majority: 2 * wins > ra.len(),
        spearman_a,
        spearman_b,
        both_non_increasing: spearman_a <= 0.0 && spearman_b <= 0.0,
    })
}

/// Long-format rows for one comparison panel: which series, which cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub panel: String,
    pub series: String,
    pub amplitude: f64,
    pub mean_return: f64,
    pub std_return: f64,
    pub success_rate: f64,
}

/// Writes a plot-ready panel from labelled sweeps.
pub fn write_panel_csv<W: Write>(panel: &str, series: &[(&str, &SweepResult)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Parse(e.to_string());
    for (name, result) in series {
        for r in &result.rows {
            w.serialize(PanelRow {
                panel: panel.into(),
                series: (*name).into(),
                amplitude: r.amplitude,
                mean_return: r.mean_return,
                std_return: r.std_return,
                success_rate: r.success_rate,
            })
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}
