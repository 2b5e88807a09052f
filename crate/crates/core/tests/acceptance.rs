//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.
//!
//! `cargo test --test acceptance -- 1 2 4` runs a subset.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use advsac::checkpoint::{load_agent, load_network, save_agent, save_network, NetCheckpoint};
use advsac::config::RunConfig;
use advsac::env::{
    compose_external, compose_internal, read_episode_csv, write_episode_csv, DisturbanceMode, Environment, JointAction,
};
use advsac::envs::bilinear::{self, grid_minimax, payoff};
use advsac::envs::picklite::{self, PickLite2D};
use advsac::envs::pointgoal::{self, PointGoal};
use advsac::eval::{compare_policies, Attack, EpisodeSeeds, Evaluation, SweepResult, DEFAULT_AMPLITUDES};
use advsac::nn::{Activation, Adam, Mlp};
use advsac::replay::{relabel_episode, RelabelStrategy};
use advsac::rollout::{rollout, FnController, UniformController, ZeroController};
use advsac::sac::SacConfig;
use advsac::seeding::{stream, stream_rng};
use advsac::trainer::{train, train_baseline, TrainLog, Trainer, TrainerConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sac(hidden: &[usize], batch: usize, lr: f64, temperature: f64) -> SacConfig {
    SacConfig {
        hidden_sizes: hidden.to_vec(),
        batch_size: batch,
        actor_lr: lr,
        critic_lr: lr,
        temperature,
        ..SacConfig::default()
    }
}

fn scratch_dir() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| tempfile::tempdir().expect("temp dir")).path()
}

fn advsac(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_advsac"))
        .args(args)
        .env_remove(advsac::config::OUT_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn c1_gradcheck() -> Outcome {
    let out = advsac(&["gradcheck"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    outcome(out.status.success(), stdout.trim().to_string())
}

fn c2_composition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let amplitudes: Vec<f64> = (0..=14).map(|i| i as f64 / 10.0).collect();
    let mut failures = 0usize;
    let mut checks = 0usize;
    for _ in 0..10_000 {
        let d = rng.random_range(1..=8);
        let p: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let extra = rng.random_range(0.0..=1.4);
        let zero = compose_internal(&p, &a, 0.0).unwrap();
        failures += (zero != p) as usize;
        for &alpha in amplitudes.iter().chain([&extra]) {
            let e = compose_internal(&p, &a, alpha).unwrap();
            let joint = JointAction::internal(p.clone(), a.clone(), alpha).unwrap();
            let ok = e.iter().all(|x| (-1.0..=1.0).contains(x))
                && e.iter().zip(p.iter().zip(&a)).all(|(x, (pi, ai))| *x == (pi + alpha * ai).clamp(-1.0, 1.0))
                && joint.executed() == e.as_slice();
            failures += !ok as usize;
            checks += 1;
        }
        let a2: Vec<f64> = (0..rng.random_range(1..=8)).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let ext = compose_external(&p, &a2).unwrap();
        failures += (ext.len() != p.len() + a2.len() || ext[..p.len()] != p[..] || ext[p.len()..] != a2[..]) as usize;
        checks += 2;
    }
    outcome(failures == 0, format!("{checks} checks on 10000 random vector pairs, {failures} violations"))
}

fn c3_pointgoal() -> Outcome {
    let cfg = TrainerConfig {
        env_id: pointgoal::ID.into(),
        n_iter: 20,
        m_protagonist_episodes: 50,
        updates_per_step: 2,
        warmup_steps: 1000,
        checkpoint_every: 0,
        protagonist: sac(&[64, 64], 128, 1e-3, 0.05),
        adversary: sac(&[64, 64], 128, 1e-3, 0.05),
        ..TrainerConfig::default()
    };
    let (t, _) = train_baseline(&cfg, None).unwrap();
    let steps = t.pair().protagonist.env_steps();
    let eval = Evaluation {
        env_id: pointgoal::ID.into(),
        protagonist: t.pair().protagonist.agent.snapshot(),
        attack: Attack::None,
        episodes_per_cell: 50,
        seed: 12345,
        deterministic_policy: true,
        jobs: 1,
    };
    let learned = eval.evaluate_cell(0.0).unwrap().mean_return;
    // Oracles on the same 50 resets.
    let mut env = PointGoal::new();
    let (mut oracle, mut random) = (0.0, 0.0);
    for e in 0..50 {
        let reset = EpisodeSeeds::new(12345, 0.0, e).reset;
        let mut line = FnController(pointgoal::straight_line_action);
        let mut unif = UniformController { dim: 2, rng: stream_rng(e as u64, stream::EVAL_ATTACK) };
        let mode = DisturbanceMode::Internal;
        oracle += rollout(&mut env, &mut line, &mut ZeroController(2), mode, 0.0, reset)
            .unwrap()
            .protagonist
            .undiscounted_return
            / 50.0;
        random += rollout(&mut env, &mut unif, &mut ZeroController(2), mode, 0.0, reset)
            .unwrap()
            .protagonist
            .undiscounted_return
            / 50.0;
    }
    let pass = learned >= -7.0 && steps <= 30_000 && random <= -20.0 && oracle > -7.0;
    outcome(
        pass,
        format!("learned {learned:.3} >= -7.0 after {steps} env steps (straight-line oracle {oracle:.3}, uniform random {random:.3})"),
    )
}

fn c4_her() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let env = PickLite2D::new();
    let mut rng = stream_rng(4, stream::HER);
    let mut notes = Vec::new();
    let mut pass = true;
    for i in 0..3 {
        let text = fs::read_to_string(dir.join(format!("picklite_failed_{i}.csv"))).unwrap();
        let (ep, _) = read_episode_csv(text.as_bytes()).unwrap();
        let n = ep.len();
        let out = relabel_episode(&ep, RelabelStrategy::Final, &env, &mut rng).unwrap();
        let achieved = env.achieved_goal(ep.final_state().unwrap()).unwrap();
        let ok = !ep.success
            && out.len() == 2 * n
            && out[..n] == ep.transitions[..]
            && out[2 * n - 1].reward == 0.0
            && out[n..].iter().all(|t| t.goal.as_deref() == Some(&achieved[..]));
        pass &= ok;
        notes.push(format!("{n}->{}", out.len()));
    }
    outcome(pass, format!("fixtures {}: originals verbatim, final relabeled reward 0", notes.join(", ")))
}

fn c5_bilinear() -> Outcome {
    let s = sac(&[16], 64, 1e-3, 0.2);
    let cfg = TrainerConfig {
        env_id: bilinear::ID.into(),
        n_iter: 40,
        m_protagonist_episodes: 50,
        n_adversary_episodes: 50,
        warmup_steps: 100,
        checkpoint_every: 0,
        protagonist: s.clone(),
        adversary: s,
        ..TrainerConfig::default()
    };
    let (t, _) = train(&cfg, None).unwrap();
    let obs = bilinear::Bilinear::new().reset(0).policy_input();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = t.pair().protagonist.agent.sample_action(&obs, true, &mut rng).unwrap().action[0];
    let a = t.pair().adversary.agent.sample_action(&obs, true, &mut rng).unwrap().action[0];
    let value = payoff(p, a);
    let minimax = grid_minimax(41);
    outcome(
        (value - minimax).abs() <= 0.1,
        format!("protagonist {p:+.3}, adversary {a:+.3}: value {value:+.4} vs grid minimax {minimax:+.4}"),
    )
}

fn c6_turnlite() -> Outcome {
    let s = sac(&[64, 64], 128, 1e-3, 0.05);
    let cfg = TrainerConfig {
        env_id: "turnlite".into(),
        n_iter: 20,
        m_protagonist_episodes: 50,
        n_adversary_episodes: 50,
        amplitude: Some(0.6),
        warmup_steps: 1000,
        checkpoint_every: 0,
        protagonist: s.clone(),
        adversary: s,
        ..TrainerConfig::default()
    };
    let (adv, _) = train(&cfg, None).unwrap();
    let (base, _) = train_baseline(&cfg, None).unwrap();
    let episodes = adv.log().rows.len();
    let run = |t: &Trainer, attack: Attack| {
        Evaluation {
            env_id: "turnlite".into(),
            protagonist: t.pair().protagonist.agent.snapshot(),
            attack,
            episodes_per_cell: 50,
            seed: 777,
            deterministic_policy: true,
            jobs: 1,
        }
        .sweep(&DEFAULT_AMPLITUDES)
        .unwrap()
    };
    let adversary = Attack::Adversary(adv.pair().adversary.agent.snapshot());
    let adv_vs_adv = run(&adv, adversary.clone());
    let base_vs_adv = run(&base, adversary);
    let base_vs_rand = run(&base, Attack::RandomUniform);
    let i = compare_policies(&adv_vs_adv, &base_vs_adv).unwrap();
    let ii = compare_policies(&base_vs_rand, &base_vs_adv).unwrap();
    let strict = i.delta_at(0.6).is_some_and(|d| d > 0.0);
    let pass_i = i.a_ge_b_on_majority && strict;
    let pass_ii = ii.a_ge_b_on_majority;
    let pass_iii = ii.both_non_increasing;
    let wins = |r: &advsac::eval::OrderingReport| r.return_deltas.iter().filter(|d| **d >= 0.0).count();
    outcome(
        pass_i && pass_ii && pass_iii && episodes <= 2000,
        format!(
            "{episodes} training episodes; (i) {} adv>=base on {}/8 cells, delta@0.6 {:+.2}; (ii) {} adversary<=random on {}/8; (iii) {} spearman adversary {:+.3}, random {:+.3}",
            pass_i,
            wins(&i),
            i.delta_at(0.6).unwrap_or(f64::NAN),
            pass_ii,
            wins(&ii),
            pass_iii,
            ii.spearman_b,
            ii.spearman_a,
        ),
    )
}

struct PickArtifacts {
    dir: PathBuf,
    episodes: usize,
}

fn picklite_artifacts() -> &'static PickArtifacts {
    static ART: OnceLock<PickArtifacts> = OnceLock::new();
    ART.get_or_init(|| {
        let s = sac(&[64, 64], 128, 1e-3, 0.05);
        let cfg = TrainerConfig {
            env_id: picklite::ID.into(),
            n_iter: 50,
            m_protagonist_episodes: 100,
            n_adversary_episodes: 100,
            warmup_steps: 2000,
            checkpoint_every: 0,
            protagonist: s.clone(),
            adversary: s,
            ..TrainerConfig::default()
        };
        let dir = scratch_dir().join("picklite");
        let (adv, _) = train(&cfg, Some(&dir.join("adversarial"))).unwrap();
        let episodes = adv.log().rows.len();
        drop(adv);
        train_baseline(&cfg, Some(&dir.join("baseline"))).unwrap();
        PickArtifacts { dir, episodes }
    })
}

fn c7_picklite() -> Outcome {
    let art = picklite_artifacts();
    let adversary = load_agent(&art.dir.join("adversarial/adversary.json")).unwrap().0.snapshot();
    let success = |who: &str| {
        let (agent, _) = load_agent(&art.dir.join(who).join("protagonist.json")).unwrap();
        Evaluation {
            env_id: picklite::ID.into(),
            protagonist: agent.snapshot(),
            attack: Attack::Adversary(adversary.clone()),
            episodes_per_cell: 50,
            seed: 777,
            deterministic_policy: true,
            jobs: 1,
        }
        .sweep(&[1.0])
        .unwrap()
        .rows[0]
            .success_rate
    };
    let adv = success("adversarial");
    let base = success("baseline");
    let gap = adv - base;
    outcome(
        gap >= 0.05 - 1e-12 && art.episodes <= 10_000,
        format!(
            "{} training episodes; success under trained adversary: adversarial {adv:.2}, baseline {base:.2} (gap {:+.0} pp)",
            art.episodes,
            gap * 100.0
        ),
    )
}

fn c8_stealing(started: &mut Instant) -> Outcome {
    let art = picklite_artifacts();
    *started = Instant::now();
    let out_dir = scratch_dir().join("steal");
    let s = |p: PathBuf| p.to_str().unwrap().to_string();
    let out = advsac(&[
        "rollout",
        "--policy",
        &s(art.dir.join("baseline/protagonist.json")),
        "--attack",
        "adversary",
        "--adversary-ckpt",
        &s(art.dir.join("adversarial/adversary.json")),
        "--episodes",
        "20",
        "--out",
        &s(out_dir.clone()),
    ]);
    if !out.status.success() {
        return outcome(false, String::from_utf8_lossy(&out.stderr).trim().to_string());
    }
    // Count from the written episodes rather than the summary line.
    let mut off = 0;
    for e in 0..20 {
        let text = fs::read_to_string(out_dir.join(format!("episode_{e:04}.csv"))).unwrap();
        let (ep, _) = read_episode_csv(text.as_bytes()).unwrap();
        off += PickLite2D::off_table(ep.final_state().unwrap()) as usize;
    }
    outcome(off >= 1, format!("block off the table in {off}/20 baseline-vs-adversary episodes"))
}

fn files_equal(a: &Path, b: &Path, names: &[&str]) -> Vec<String> {
    names
        .iter()
        .filter(|n| fs::read(a.join(n)).ok() != fs::read(b.join(n)).ok() || !a.join(n).exists())
        .map(|n| n.to_string())
        .collect()
}

fn small_config(env_id: &str, path: &Path) -> String {
    let text = format!(
        r#"{{"schema_version": 1, "train": {{"env_id": "{env_id}", "n_iter": 2, "m_protagonist_episodes": 6, "n_adversary_episodes": 6, "warmup_steps": 100, "seed": 9,
  "protagonist": {{"hidden_sizes": [32, 32], "batch_size": 32}}, "adversary": {{"hidden_sizes": [32, 32], "batch_size": 32}}}},
  "sweep": {{"episodes_per_cell": 5}}}}"#
    );
    fs::write(path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn c9_determinism() -> Outcome {
    let root = scratch_dir().join("determinism");
    fs::create_dir_all(&root).unwrap();
    let mut diffs = Vec::new();
    let mut runs = 0;
    for env_id in ["pointgoal", "turnlite"] {
        let cfg = small_config(env_id, &root.join(format!("{env_id}.json")));
        let dirs = ["a", "b"].map(|k| root.join(format!("{env_id}_{k}")));
        for d in &dirs {
            let st = |p: &Path| p.to_str().unwrap().to_string();
            let o = advsac(&["train", "--config", &cfg, "--out", &st(d)]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            let o = advsac(&[
                "sweep",
                "--config",
                &cfg,
                "--policy",
                &st(&d.join("protagonist.json")),
                "--attack",
                "all",
                "--adversary-ckpt",
                &st(&d.join("adversary.json")),
                "--out",
                &st(&d.join("sweep")),
            ]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            runs += 2;
        }
        let names = [
            "protagonist.json",
            "adversary.json",
            "train_log.csv",
            "checkpoints/iter_0001/protagonist.json",
            "checkpoints/iter_0002/adversary.json",
            "sweep/sweep_none.csv",
            "sweep/sweep_random_uniform.csv",
            "sweep/sweep_adversary_policy.csv",
        ];
        diffs.extend(files_equal(&dirs[0], &dirs[1], &names).into_iter().map(|n| format!("{env_id}/{n}")));
    }
    outcome(
        diffs.is_empty(),
        if diffs.is_empty() {
            format!("{runs} repeated train/sweep commands produced byte-identical checkpoints and CSVs")
        } else {
            format!("differing files: {}", diffs.join(", "))
        },
    )
}

fn c10_serialization() -> Outcome {
    let root = scratch_dir().join("serialization");
    fs::create_dir_all(&root).unwrap();
    let mut bad = Vec::new();
    let mut same = |name: &str, a: Vec<u8>, b: Vec<u8>| {
        if a != b {
            bad.push(name.to_string());
        }
    };

    let cfg = TrainerConfig {
        env_id: picklite::ID.into(),
        n_iter: 1,
        m_protagonist_episodes: 3,
        n_adversary_episodes: 3,
        warmup_steps: 50,
        checkpoint_every: 0,
        protagonist: SacConfig { twin_q: true, ..sac(&[16, 16], 16, 3e-4, 0.2) },
        adversary: sac(&[16], 16, 3e-4, 0.2),
        ..TrainerConfig::default()
    };
    let (t, _) = train(&cfg, Some(&root.join("run"))).unwrap();
    for who in ["protagonist", "adversary"] {
        let p = root.join("run").join(format!("{who}.json"));
        let (agent, ckpt) = load_agent(&p).unwrap();
        let q = root.join(format!("{who}_again.json"));
        save_agent(&q, &agent, &ckpt.env_id, ckpt.seed).unwrap();
        same(who, fs::read(&p).unwrap(), fs::read(&q).unwrap());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let net = Mlp::new(&[5, 7, 3], Activation::Tanh, &mut rng).unwrap();
    let opt = Adam::new(&net, 1e-3);
    let n1 = root.join("net.json");
    let n2 = root.join("net_again.json");
    save_network(&n1, &NetCheckpoint::new(net, Some(opt), 10)).unwrap();
    save_network(&n2, &load_network(&n1).unwrap()).unwrap();
    same("network", fs::read(&n1).unwrap(), fs::read(&n2).unwrap());

    let log_bytes = fs::read(root.join("run/train_log.csv")).unwrap();
    let mut again = Vec::new();
    TrainLog::read_csv(&log_bytes[..]).unwrap().write_csv(&mut again).unwrap();
    same("train log", log_bytes, again);

    let sweep = Evaluation {
        env_id: picklite::ID.into(),
        protagonist: t.pair().protagonist.agent.snapshot(),
        attack: Attack::RandomUniform,
        episodes_per_cell: 4,
        seed: 3,
        deterministic_policy: false,
        jobs: 1,
    }
    .sweep(&[1.0])
    .unwrap();
    let mut first = Vec::new();
    sweep.write_csv(&mut first).unwrap();
    let mut second = Vec::new();
    SweepResult::read_csv(&first[..]).unwrap().write_csv(&mut second).unwrap();
    same("sweep", first, second);

    let fixture = fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/picklite_failed_0.csv")).unwrap();
    let (ep, gamma) = read_episode_csv(&fixture[..]).unwrap();
    let mut again = Vec::new();
    write_episode_csv(&ep, gamma, &mut again).unwrap();
    same("episode", fixture, again);

    let cfg_path = root.join("cfg");
    RunConfig::default().write_effective(&cfg_path).unwrap();
    let text = fs::read(cfg_path.join("effective_config.json")).unwrap();
    RunConfig::read_effective(&cfg_path).unwrap().write_effective(&root.join("cfg2")).unwrap();
    same("run config", text, fs::read(root.join("cfg2/effective_config.json")).unwrap());

    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "agent, network, train log, sweep, episode and config files rewrite to identical bytes".into()
        } else {
            format!("not byte-exact: {}", bad.join(", "))
        },
    )
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
}

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |id: u32| selected.is_empty() || selected.contains(&id);
    let criteria = [
        Criterion { id: 1, name: "gradient correctness", budget: Duration::from_secs(10) },
        Criterion { id: 2, name: "composition operators", budget: Duration::from_secs(5) },
        Criterion { id: 3, name: "SAC sanity on PointGoal", budget: Duration::from_secs(30 * 60) },
        Criterion { id: 4, name: "HER final relabeling", budget: Duration::from_secs(1) },
        Criterion { id: 5, name: "minimax saddle on bilinear game", budget: Duration::from_secs(120) },
        Criterion { id: 6, name: "robustness ordering, TurnLite", budget: Duration::from_secs(3600) },
        Criterion { id: 7, name: "robustness ordering, PickLite2D", budget: Duration::from_secs(7200) },
        Criterion { id: 8, name: "adversary pushes block off table", budget: Duration::from_secs(60) },
        Criterion { id: 9, name: "determinism", budget: Duration::from_secs(30 * 60) },
        Criterion { id: 10, name: "serialization round trips", budget: Duration::from_secs(5) },
    ];
    let mut failed = 0;
    for c in criteria.iter().filter(|c| want(c.id)) {
        let mut started = Instant::now();
        let result = match c.id {
            1 => c1_gradcheck(),
            2 => c2_composition(),
            3 => c3_pointgoal(),
            4 => c4_her(),
            5 => c5_bilinear(),
            6 => c6_turnlite(),
            7 => c7_picklite(),
            8 => c8_stealing(&mut started),
            9 => c9_determinism(),
            10 => c10_serialization(),
            _ => unreachable!(),
        };
        let elapsed = started.elapsed();
        let in_time = elapsed <= c.budget;
        let pass = result.pass && in_time;
        failed += !pass as usize;
        println!(
            "{} {:>2} {}: {} [{:.1}s, budget {}s{}]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            result.detail,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
