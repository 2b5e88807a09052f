use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use advsac::checkpoint::{load_agent, write_json};
use advsac::config::{RunConfig, OUT_DIR_ENV};
use advsac::env::{write_episode_csv, DisturbanceMode};
use advsac::envs::{env_spec, make_env, scripted_policy, PickLite2D};
use advsac::eval::{write_panel_csv, Attack, EpisodeSeeds, Evaluation, SweepResult, EXTERNAL_CELL_AMPLITUDE};
use advsac::nn::gradcheck;
use advsac::rollout::{rollout, Controller, FnController, PolicyController};
use advsac::seeding::{stream, stream_rng};
use advsac::trainer::{train, train_baseline, DEFAULT_TRAIN_AMPLITUDE};
use advsac::{Error, Result};

#[derive(Parser)]
#[command(name = "advsac", version, about = "Adversarial soft actor-critic: training, robustness sweeps, diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Alternating adversarial training, or plain SAC with --baseline.
    Train(TrainArgs),
    /// Evaluate a protagonist across disturbance amplitudes.
    Sweep(SweepArgs),
    /// Check network gradients against central finite differences.
    Gradcheck(GradcheckArgs),
    /// Record per-step episode CSVs for inspection.
    Rollout(RolloutArgs),
}

#[derive(Args)]
struct Common {
    /// JSON run config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides ADVSAC_OUT_DIR and the config).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg =
            RunConfig::load_or_default(self.config.as_deref())?.with_out_dir_override(std::env::var(OUT_DIR_ENV).ok());
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.train.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    env: Option<String>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    amplitude: Option<f64>,
    /// Train the protagonist alone with the adversary locked at zero.
    #[arg(long)]
    baseline: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AttackArg {
    None,
    Random,
    Adversary,
    All,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Protagonist checkpoint to evaluate.
    #[arg(long)]
    policy: PathBuf,
    /// A second protagonist (usually the baseline) for the comparison panels.
    #[arg(long)]
    baseline_policy: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none")]
    attack: AttackArg,
    #[arg(long, required_if_eq_any([("attack", "adversary"), ("attack", "all")]))]
    adversary_ckpt: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    amplitudes: Option<Vec<f64>>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RolloutArgs {
    #[command(flatten)]
    common: Common,
    /// Protagonist checkpoint.
    #[arg(long, required_unless_present = "scripted", conflicts_with = "scripted")]
    policy: Option<PathBuf>,
    /// Use the environment's hand-written controller instead of a checkpoint.
    #[arg(long, requires = "env")]
    scripted: bool,
    #[arg(long)]
    env: Option<String>,
    #[arg(long, value_enum, default_value = "none")]
    attack: AttackArg,
    #[arg(long, required_if_eq("attack", "adversary"))]
    adversary_ckpt: Option<PathBuf>,
    /// Defaults to the training amplitude for internal disturbances.
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    episodes: u64,
    /// Sample the protagonist instead of acting through its mean.
    #[arg(long)]
    stochastic: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::Rollout(a) => cmd_rollout(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

fn cmd_train(a: TrainArgs) -> Result<ExitCode> {
    let mut cfg = a.common.resolve()?;
    if let Some(env) = a.env {
        cfg.train.env_id = env;
    }
    if let Some(n) = a.n_iter {
        cfg.train.n_iter = n;
    }
    if a.amplitude.is_some() {
        cfg.train.amplitude = a.amplitude;
    }
    cfg.validate()?;
    let out = cfg.out_dir.clone();
    let (trainer, artifacts) =
        if a.baseline { train_baseline(&cfg.train, Some(&out))? } else { train(&cfg.train, Some(&out))? };
    cfg.write_effective(&out)?;
    let artifacts = artifacts.expect("output directory was given");
    println!("protagonist: {}", artifacts.protagonist.display());
    if let Some(adv) = &artifacts.adversary {
        println!("adversary:   {}", adv.display());
    }
    println!("log:         {}", artifacts.log.display());
    println!("episodes:    {} in {:.1}s", trainer.log().rows.len(), trainer.elapsed_secs());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SweepInvocation<'a> {
    env_id: &'a str,
    policy: &'a Path,
    baseline_policy: Option<&'a Path>,
    adversary_checkpoint: Option<&'a Path>,
    attacks: Vec<&'static str>,
    amplitudes: &'a [f64],
    episodes_per_cell: usize,
    seed: u64,
    deterministic_policy: bool,
}

fn cmd_sweep(a: SweepArgs) -> Result<ExitCode> {
    let mut cfg = a.common.resolve()?;
    if let Some(amps) = a.amplitudes {
        cfg.sweep.amplitudes = amps;
    }
    if let Some(n) = a.episodes {
        cfg.sweep.episodes_per_cell = n;
    }
    if let Some(j) = a.jobs {
        cfg.sweep.jobs = j;
    }
    let (policy, ckpt) = load_agent(&a.policy)?;
    cfg.train.env_id = ckpt.env_id.clone();
    cfg.validate()?;
    let baseline = a.baseline_policy.as_deref().map(load_agent).transpose()?;
    if let Some((_, b)) = &baseline {
        if b.env_id != ckpt.env_id {
            return Err(Error::Config(format!("baseline policy is for {}, not {}", b.env_id, ckpt.env_id)));
        }
    }
    let adversary = a.adversary_ckpt.as_deref().map(load_agent).transpose()?.map(|(agent, _)| agent.snapshot());
    let attacks: Vec<Attack> = match a.attack {
        AttackArg::None => vec![Attack::None],
        AttackArg::Random => vec![Attack::RandomUniform],
        AttackArg::Adversary => vec![Attack::Adversary(adversary.clone().expect("required by clap"))],
        AttackArg::All => {
            vec![Attack::None, Attack::RandomUniform, Attack::Adversary(adversary.clone().expect("required by clap"))]
        }
    };
    let out = cfg.out_dir.clone();
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let run = |snapshot: advsac::sac::ActorSnapshot, attack: &Attack| -> Result<SweepResult> {
        Evaluation {
            env_id: ckpt.env_id.clone(),
            protagonist: snapshot,
            attack: attack.clone(),
            episodes_per_cell: cfg.sweep.episodes_per_cell,
            seed: cfg.train.seed,
            deterministic_policy: cfg.sweep.deterministic_policy,
            jobs: cfg.sweep.jobs,
        }
        .sweep(&cfg.sweep.amplitudes)
    };
    let mut policy_results = Vec::new();
    let mut baseline_results = Vec::new();
    for attack in &attacks {
        let r = run(policy.snapshot(), attack)?;
        write_csv(&out.join(format!("sweep_{}.csv", attack.kind().as_str())), |w| r.write_csv(w))?;
        print_sweep("policy", attack, &r);
        policy_results.push(r);
        if let Some((b, _)) = &baseline {
            let r = run(b.snapshot(), attack)?;
            write_csv(&out.join(format!("sweep_{}_baseline.csv", attack.kind().as_str())), |w| r.write_csv(w))?;
            print_sweep("baseline", attack, &r);
            baseline_results.push(r);
        }
    }
    if a.attack == AttackArg::All && baseline.is_some() {
        let [_, p_rand, p_adv] = &policy_results[..] else { unreachable!() };
        let [_, b_rand, b_adv] = &baseline_results[..] else { unreachable!() };
        write_csv(&out.join("panel_a.csv"), |w| {
            write_panel_csv("a", &[("adversarial", p_adv), ("baseline", b_adv)], w)
        })?;
        write_csv(&out.join("panel_b.csv"), |w| {
            write_panel_csv("b", &[("adversarial", p_rand), ("baseline", b_rand)], w)
        })?;
        write_csv(&out.join("panel_c.csv"), |w| {
            write_panel_csv("c", &[("adversary_attack", b_adv), ("random_attack", b_rand)], w)
        })?;
    }
    cfg.write_effective(&out)?;
    write_json(
        &out.join("invocation.json"),
        &SweepInvocation {
            env_id: &ckpt.env_id,
            policy: &a.policy,
            baseline_policy: a.baseline_policy.as_deref(),
            adversary_checkpoint: a.adversary_ckpt.as_deref(),
            attacks: attacks.iter().map(|x| x.kind().as_str()).collect(),
            amplitudes: &cfg.sweep.amplitudes,
            episodes_per_cell: cfg.sweep.episodes_per_cell,
            seed: cfg.train.seed,
            deterministic_policy: cfg.sweep.deterministic_policy,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn print_sweep(label: &str, attack: &Attack, r: &SweepResult) {
    for row in &r.rows {
        println!(
            "{label:8} {:16} amplitude {:.2}: return {:9.3} ± {:7.3}  success {:.2}",
            attack.kind().as_str(),
            row.amplitude,
            row.mean_return,
            row.std_return,
            row.success_rate
        );
    }
}

fn cmd_gradcheck(a: GradcheckArgs) -> Result<ExitCode> {
    let report = gradcheck::gradcheck(a.trials as usize, a.tolerance, a.seed)?;
    println!(
        "gradcheck: {} trials, max relative error {:.3e} (tolerance {:.1e}): {}",
        report.trials.len(),
        report.max_rel_error,
        report.tolerance,
        if report.passed { "pass" } else { "FAIL" }
    );
    if report.passed {
        return Ok(ExitCode::SUCCESS);
    }
    for t in &report.trials {
        eprintln!("  layers {:?} {:?} batch {}: {:.3e}", t.layer_sizes, t.activation, t.batch, t.max_rel_error);
    }
    Ok(ExitCode::from(1))
}

#[derive(Serialize)]
struct RolloutInvocation<'a> {
    env_id: &'a str,
    policy: Option<&'a Path>,
    scripted: bool,
    attack: &'static str,
    adversary_checkpoint: Option<&'a Path>,
    amplitude: f64,
    episodes: u64,
    seed: u64,
    deterministic_policy: bool,
}

fn cmd_rollout(a: RolloutArgs) -> Result<ExitCode> {
    let cfg = a.common.resolve()?;
    let loaded = a.policy.as_deref().map(load_agent).transpose()?;
    let env_id = match (&a.env, &loaded) {
        (Some(e), Some((_, c))) if *e != c.env_id => {
            return Err(Error::Config(format!("policy was trained on {}, not {e}", c.env_id)))
        }
        (Some(e), _) => e.clone(),
        (None, Some((_, c))) => c.env_id.clone(),
        (None, None) => unreachable!("clap requires --env with --scripted"),
    };
    let spec = env_spec(&env_id)?;
    let attack = match a.attack {
        AttackArg::None => Attack::None,
        AttackArg::Random => Attack::RandomUniform,
        AttackArg::Adversary => {
            let path = a.adversary_ckpt.as_deref().expect("required by clap");
            Attack::Adversary(load_agent(path)?.0.snapshot())
        }
        AttackArg::All => return Err(Error::Config("rollout takes a single attack".into())),
    };
    let amplitude = a.amplitude.unwrap_or(match spec.native_mode {
        DisturbanceMode::Internal => DEFAULT_TRAIN_AMPLITUDE,
        _ => EXTERNAL_CELL_AMPLITUDE,
    });
    if amplitude < 0.0 || !amplitude.is_finite() {
        return Err(Error::Config(format!("amplitude must be non-negative, got {amplitude}")));
    }
    let out = cfg.out_dir.clone();
    let seed = cfg.train.seed;
    let mut env = make_env(&env_id)?;
    let mut off_table = 0;
    for e in 0..a.episodes as usize {
        let seeds = EpisodeSeeds::new(seed, amplitude, e);
        let mut protagonist: Box<dyn Controller> = match &loaded {
            Some((agent, _)) => Box::new(PolicyController {
                snapshot: agent.snapshot(),
                deterministic: !a.stochastic,
                rng: stream_rng(seeds.policy, stream::EVAL_POLICY),
            }),
            None => Box::new(FnController(scripted_policy(&env_id)?)),
        };
        let mut adversary = attack.controller(&spec, seeds.attack);
        let ep = rollout(&mut *env, &mut *protagonist, &mut *adversary, spec.native_mode, amplitude, seeds.reset)?;
        let record = &ep.protagonist;
        let path = out.join(format!("episode_{e:04}.csv"));
        write_csv(&path, |w| write_episode_csv(record, spec.gamma, w))?;
        let mut line = format!(
            "episode {e}: return {:.3} success {} steps {}",
            record.undiscounted_return,
            record.success,
            record.len()
        );
        if env_id == advsac::envs::picklite::ID {
            let off = record.final_state().is_some_and(PickLite2D::off_table);
            off_table += off as usize;
            line.push_str(&format!(" block_off_table {off}"));
        }
        println!("{line}");
    }
    if env_id == advsac::envs::picklite::ID {
        println!("block off table in {off_table}/{} episodes", a.episodes);
    }
    let mut effective = cfg.clone();
    effective.train.env_id = env_id.clone();
    effective.write_effective(&out)?;
    write_json(
        &out.join("invocation.json"),
        &RolloutInvocation {
            env_id: &env_id,
            policy: a.policy.as_deref(),
            scripted: a.scripted,
            attack: attack.kind().as_str(),
            adversary_checkpoint: a.adversary_ckpt.as_deref(),
            amplitude,
            episodes: a.episodes,
            seed,
            deterministic_policy: !a.stochastic,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn write_csv(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    body(&mut w)?;
    std::io::Write::flush(&mut w).map_err(|e| Error::io(path, e))
}
