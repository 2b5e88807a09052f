// Scripted controllers on every registered environment, with the first
// episode of each written as CSV.

use std::fs::File;
use std::path::PathBuf;

use advsac::env::{write_episode_csv, DisturbanceMode};
use advsac::envs::{make_env, scripted_policy, ENV_IDS};
use advsac::rollout::{rollout, FnController, ZeroController};

pub fn run(out: Option<PathBuf>) -> advsac::Result<()> {
    for id in ENV_IDS {
        let mut env = make_env(id)?;
        let spec = env.spec().clone();
        let mut total = 0.0;
        let mut successes = 0;
        for seed in 0..10 {
            let mut protagonist = FnController(scripted_policy(id)?);
            let mut idle = ZeroController(match spec.native_mode {
                DisturbanceMode::Internal => spec.protagonist_action_dim,
                _ => spec.adversary_action_dim,
            });
            let ep = rollout(&mut *env, &mut protagonist, &mut idle, spec.native_mode, 0.0, seed)?;
            total += ep.protagonist.undiscounted_return;
            successes += ep.protagonist.success as usize;
            if let (0, Some(dir)) = (seed, &out) {
                std::fs::create_dir_all(dir).map_err(|e| advsac::Error::io(dir, e))?;
                let path = dir.join(format!("{id}.csv"));
                let f = File::create(&path).map_err(|e| advsac::Error::io(&path, e))?;
                write_episode_csv(&ep.protagonist, spec.gamma, f)?;
            }
        }
        println!(
            "{id:11} {} mode, horizon {:2}: scripted mean return {:8.3}, success {successes}/10",
            spec.native_mode.as_str(),
            spec.horizon,
            total / 10.0
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> advsac::Result<()> {
    run(std::env::args().nth(1).map(PathBuf::from))
}
