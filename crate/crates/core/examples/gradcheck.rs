// Backpropagation against central finite differences on random networks.

use advsac::nn::gradcheck::{check_network, gradcheck};
use advsac::nn::{Activation, Mlp};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(trials: usize) -> advsac::Result<()> {
    let report = gradcheck(trials, 1e-4, 0)?;
    for t in &report.trials {
        println!("{:?} {:?} batch {}: {:.2e}", t.layer_sizes, t.activation, t.batch, t.max_rel_error);
    }
    println!("max relative error {:.2e}, passed {}", report.max_rel_error, report.passed);

    // A single hand-built case.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let net = Mlp::new(&[3, 5, 2], Activation::Tanh, &mut rng)?;
    let x = Array2::from_shape_fn((4, 3), |(i, j)| 0.3 * i as f64 - 0.2 * j as f64);
    let g = Array2::from_elem((4, 2), 1.0);
    println!("3-5-2 tanh: {:.2e}", check_network(&net, x.view(), g.view())?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> advsac::Result<()> {
    run(std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10))
}
