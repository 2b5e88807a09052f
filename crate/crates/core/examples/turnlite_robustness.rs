//! Adversarial training on TurnLite at amplitude 0.6 against a plain SAC
//! baseline, swept over the amplitude grid under the learned adversary and
//! under uniform noise. Writes checkpoints, sweeps and panel CSVs.
//!
//! cargo run --release --example turnlite_robustness -- [out_dir] [n_iter]

use std::fs::File;
use std::path::PathBuf;

use advsac::eval::{compare_policies, write_panel_csv, Attack, Evaluation, SweepResult, DEFAULT_AMPLITUDES};
use advsac::sac::SacConfig;
use advsac::trainer::{train, train_baseline, Trainer, TrainerConfig};
use advsac::Error;

fn main() -> advsac::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "runs/turnlite".into()));
    let n_iter = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let sac = SacConfig {
        hidden_sizes: vec![64, 64],
        batch_size: 128,
        actor_lr: 1e-3,
        critic_lr: 1e-3,
        temperature: 0.05,
        ..SacConfig::default()
    };
    let cfg = TrainerConfig {
        env_id: "turnlite".into(),
        n_iter,
        amplitude: Some(0.6),
        checkpoint_every: 0,
        protagonist: sac.clone(),
        adversary: sac,
        ..TrainerConfig::default()
    };
    let (adv, _) = train(&cfg, Some(&out.join("adversarial")))?;
    let (base, _) = train_baseline(&cfg, Some(&out.join("baseline")))?;

    let sweep = |t: &Trainer, attack: Attack| {
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
    };
    let adversary = Attack::Adversary(adv.pair().adversary.agent.snapshot());
    let adv_adv = sweep(&adv, adversary.clone())?;
    let adv_rand = sweep(&adv, Attack::RandomUniform)?;
    let base_adv = sweep(&base, adversary)?;
    let base_rand = sweep(&base, Attack::RandomUniform)?;

    println!("amplitude  adv/adversary  base/adversary  adv/random  base/random");
    for (i, amplitude) in DEFAULT_AMPLITUDES.iter().enumerate() {
        let r = |s: &SweepResult| s.rows[i].mean_return;
        println!(
            "{:9.1}  {:13.2}  {:14.2}  {:10.2}  {:11.2}",
            amplitude,
            r(&adv_adv),
            r(&base_adv),
            r(&adv_rand),
            r(&base_rand)
        );
    }
    let robust = compare_policies(&adv_adv, &base_adv)?;
    let attacks = compare_policies(&base_rand, &base_adv)?;
    println!("adversarial >= baseline under the adversary on most cells: {}", robust.a_ge_b_on_majority);
    println!("adversary hurts the baseline at least as much as noise on most cells: {}", attacks.a_ge_b_on_majority);
    println!("baseline spearman: adversary {:+.3}, random {:+.3}", attacks.spearman_b, attacks.spearman_a);

    let panels: [(&str, [(&str, &SweepResult); 2]); 3] = [
        ("a", [("adversarial", &adv_adv), ("baseline", &base_adv)]),
        ("b", [("adversarial", &adv_rand), ("baseline", &base_rand)]),
        ("c", [("adversary_attack", &base_adv), ("random_attack", &base_rand)]),
    ];
    for (name, series) in panels {
        let path = out.join(format!("panel_{name}.csv"));
        let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_panel_csv(name, &series, f)?;
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
