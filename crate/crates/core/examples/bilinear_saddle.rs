// Alternating max/min training on the one-step game r = â·ā, whose
// saddle point is (0, 0).

use advsac::env::Environment;
use advsac::envs::bilinear::{self, grid_minimax, payoff, Bilinear};
use advsac::sac::SacConfig;
use advsac::trainer::{Trainer, TrainerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(n_iter: usize) -> advsac::Result<f64> {
    let sac =
        SacConfig { hidden_sizes: vec![16], batch_size: 64, actor_lr: 1e-3, critic_lr: 1e-3, ..SacConfig::default() };
    let cfg = TrainerConfig {
        env_id: bilinear::ID.into(),
        n_iter,
        warmup_steps: 100,
        checkpoint_every: 0,
        protagonist: sac.clone(),
        adversary: sac,
        ..TrainerConfig::default()
    };
    let mut trainer = Trainer::new(&cfg)?;
    let obs = Bilinear::new().reset(0).policy_input();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut value = f64::NAN;
    for i in 0..n_iter {
        trainer.train_iteration()?;
        let p = trainer.pair().protagonist.agent.sample_action(&obs, true, &mut rng)?.action[0];
        let a = trainer.pair().adversary.agent.sample_action(&obs, true, &mut rng)?.action[0];
        value = payoff(p, a);
        if i % 5 == 4 || i + 1 == n_iter {
            println!("iteration {:2}: protagonist {p:+.3} adversary {a:+.3} value {value:+.4}", i + 1);
        }
    }
    println!("grid minimax value {:+.4}", grid_minimax(41));
    Ok(value)
}

#[allow(dead_code)]
fn main() -> advsac::Result<()> {
    run(std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40)).map(|_| ())
}
