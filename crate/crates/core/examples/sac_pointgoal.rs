//! Plain SAC on PointGoal: 30,000 environment steps, then a deterministic
//! evaluation next to the straight-line controller.

use advsac::env::DisturbanceMode;
use advsac::envs::{pointgoal, PointGoal};
use advsac::eval::{Attack, EpisodeSeeds, Evaluation};
use advsac::rollout::{rollout, FnController, ZeroController};
use advsac::sac::SacConfig;
use advsac::trainer::{train_baseline, TrainerConfig};

fn main() -> advsac::Result<()> {
    let episodes: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let sac = SacConfig {
        hidden_sizes: vec![64, 64],
        batch_size: 128,
        actor_lr: 1e-3,
        critic_lr: 1e-3,
        temperature: 0.05,
        ..SacConfig::default()
    };
    let cfg = TrainerConfig {
        env_id: pointgoal::ID.into(),
        n_iter: (episodes / 50).max(1),
        m_protagonist_episodes: 50,
        updates_per_step: 2,
        checkpoint_every: 0,
        protagonist: sac.clone(),
        adversary: sac,
        ..TrainerConfig::default()
    };
    let (trainer, _) = train_baseline(&cfg, None)?;
    for (i, chunk) in trainer.log().rows.chunks(100).enumerate() {
        let mean = chunk.iter().map(|r| r.episode_return).sum::<f64>() / chunk.len() as f64;
        println!("episodes {:4}-{:4}: mean return {mean:8.3}", i * 100, i * 100 + chunk.len() - 1);
    }

    let eval = Evaluation {
        env_id: pointgoal::ID.into(),
        protagonist: trainer.pair().protagonist.agent.snapshot(),
        attack: Attack::None,
        episodes_per_cell: 50,
        seed: 12345,
        deterministic_policy: true,
        jobs: 1,
    };
    let learned = eval.evaluate_cell(0.0)?;
    let mut env = PointGoal::new();
    let mut oracle = 0.0;
    for e in 0..50 {
        let mut line = FnController(pointgoal::straight_line_action);
        let reset = EpisodeSeeds::new(12345, 0.0, e).reset;
        oracle += rollout(&mut env, &mut line, &mut ZeroController(2), DisturbanceMode::Internal, 0.0, reset)?
            .protagonist
            .undiscounted_return;
    }
    println!(
        "learned {:.3} (success {:.2}) vs straight line {:.3} after {} env steps",
        learned.mean_return,
        learned.success_rate,
        oracle / 50.0,
        trainer.pair().protagonist.env_steps()
    );
    Ok(())
}
