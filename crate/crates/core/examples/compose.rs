// Internal and external disturbance composition.

use advsac::env::{compose_external, compose_internal, DisturbanceMode, JointAction};

pub fn run() -> advsac::Result<()> {
    let protagonist = vec![0.8, -0.2, 0.5];
    let adversary = vec![1.0, -1.0, -0.5];
    for amplitude in [0.0, 0.6, 1.4] {
        let executed = compose_internal(&protagonist, &adversary, amplitude)?;
        println!("internal α={amplitude:.1}: {executed:?}");
    }
    println!("external: {:?}", compose_external(&protagonist, &adversary)?);

    let joint = JointAction::compose(DisturbanceMode::Internal, protagonist, adversary, 0.6)?;
    println!("joint executes {:?} from protagonist {:?}", joint.executed(), joint.protagonist());
    Ok(())
}

#[allow(dead_code)]
fn main() -> advsac::Result<()> {
    run()
}
