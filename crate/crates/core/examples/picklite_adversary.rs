//! PickLite2D with a second gripper as adversary. Trains both agents plus a
//! plain SAC baseline, compares success under the learned adversary and
//! counts episodes where the adversary pushes the block off the table.
//!
//! The full budget (50 iterations of 100 + 100 episodes) takes about 25
//! minutes on one core.
//!
//! cargo run --release --example picklite_adversary -- [out_dir] [n_iter]

use std::path::PathBuf;

use advsac::env::DisturbanceMode;
use advsac::envs::{picklite, PickLite2D};
use advsac::eval::{Attack, EpisodeSeeds, Evaluation};
use advsac::rollout::{rollout, PolicyController};
use advsac::sac::SacConfig;
use advsac::seeding::{stream, stream_rng};
use advsac::trainer::{train, train_baseline, Trainer, TrainerConfig};

fn main() -> advsac::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "runs/picklite".into()));
    let n_iter = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);
    let sac = SacConfig {
        hidden_sizes: vec![64, 64],
        batch_size: 128,
        actor_lr: 1e-3,
        critic_lr: 1e-3,
        temperature: 0.05,
        ..SacConfig::default()
    };
    let cfg = TrainerConfig {
        env_id: picklite::ID.into(),
        n_iter,
        m_protagonist_episodes: 100,
        n_adversary_episodes: 100,
        warmup_steps: 2000,
        checkpoint_every: 0,
        protagonist: sac.clone(),
        adversary: sac,
        ..TrainerConfig::default()
    };
    let (adv, _) = train(&cfg, Some(&out.join("adversarial")))?;
    let (base, _) = train_baseline(&cfg, Some(&out.join("baseline")))?;
    let adversary = adv.pair().adversary.agent.snapshot();

    let success = |t: &Trainer, attack: Attack| -> advsac::Result<f64> {
        let r = Evaluation {
            env_id: picklite::ID.into(),
            protagonist: t.pair().protagonist.agent.snapshot(),
            attack,
            episodes_per_cell: 50,
            seed: 777,
            deterministic_policy: true,
            jobs: 1,
        }
        .sweep(&[1.0])?;
        Ok(r.rows[0].success_rate)
    };
    for (name, t) in [("adversarial", &adv), ("baseline", &base)] {
        println!(
            "{name:11}: success alone {:.2}, vs random gripper {:.2}, vs learned adversary {:.2}",
            success(t, Attack::None)?,
            success(t, Attack::RandomUniform)?,
            success(t, Attack::Adversary(adversary.clone()))?
        );
    }

    let mut env = PickLite2D::new();
    let mut stolen = 0;
    for e in 0..20 {
        let seeds = EpisodeSeeds::new(0, 1.0, e);
        let mut p = PolicyController {
            snapshot: base.pair().protagonist.agent.snapshot(),
            deterministic: true,
            rng: stream_rng(seeds.policy, stream::EVAL_POLICY),
        };
        let mut a = PolicyController {
            snapshot: adversary.clone(),
            deterministic: true,
            rng: stream_rng(seeds.attack, stream::EVAL_ATTACK),
        };
        let ep = rollout(&mut env, &mut p, &mut a, DisturbanceMode::External, 1.0, seeds.reset)?;
        stolen += ep.protagonist.final_state().is_some_and(PickLite2D::off_table) as usize;
    }
    println!("block pushed off the table in {stolen}/20 baseline episodes");
    Ok(())
}
