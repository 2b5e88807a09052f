// Hindsight relabeling of a failed PickLite2D episode.

use advsac::env::{DisturbanceMode, Environment};
use advsac::envs::PickLite2D;
use advsac::replay::{relabel_episode, RelabelStrategy, ReplayBuffer};
use advsac::rollout::{rollout, UniformController, ZeroController};
use advsac::seeding::{stream, stream_rng};

pub fn run() -> advsac::Result<()> {
    let mut env = PickLite2D::new();
    let mut random = UniformController { dim: 3, rng: stream_rng(0, stream::PROTAGONIST) };
    let ep = rollout(&mut env, &mut random, &mut ZeroController(3), DisturbanceMode::External, 0.0, 0)?.protagonist;
    let rewarded = |ts: &[advsac::env::Transition]| ts.iter().filter(|t| t.reward == 0.0).count();
    println!("original: {} steps, success {}, {} rewarded", ep.len(), ep.success, rewarded(&ep.transitions));

    let mut rng = stream_rng(0, stream::HER);
    for strategy in [RelabelStrategy::Final, RelabelStrategy::Future { k: 4 }] {
        let out = relabel_episode(&ep, strategy, &env, &mut rng)?;
        println!("{strategy:?}: {} transitions, {} rewarded", out.len(), rewarded(&out));
    }

    let spec = env.spec().clone();
    let mut buffer = ReplayBuffer::for_env(10_000, &spec, 3)?;
    buffer.extend(relabel_episode(&ep, RelabelStrategy::Final, &env, &mut rng)?)?;
    let batch = buffer.sample(8, &mut rng)?;
    println!("sampled batch: observations {:?}, rewards {}", batch.observations.dim(), batch.rewards);
    Ok(())
}

#[allow(dead_code)]
fn main() -> advsac::Result<()> {
    run()
}
