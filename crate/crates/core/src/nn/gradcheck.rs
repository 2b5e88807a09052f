//! Central finite-difference verification of [`Mlp::backward`].

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::Serialize;

use super::mlp::{Activation, Mlp};
use crate::error::{Error, Result};
use crate::seeding::{stream, stream_rng};

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Gradients smaller than this are compared in absolute terms.
const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub batch: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub trials: Vec<TrialReport>,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `|a − n| / max(|a|, |n|, floor)`, maximised over coordinates.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(RELATIVE_FLOOR))
        .fold(0.0, f64::max)
}

fn objective(net: &Mlp, input: ArrayView2<f64>, output_grad: ArrayView2<f64>) -> f64 {
    let out = net.forward_batch(input).expect("shapes checked by caller");
    (&out * &output_grad).sum()
}

/// Central differences of `Σ output ⊙ output_grad` for every parameter,
/// in [`Mlp::flat_params`] order.
pub fn finite_difference_gradients(
    net: &Mlp,
    input: ArrayView2<f64>,
    output_grad: ArrayView2<f64>,
    h: f64,
) -> Vec<f64> {
    let base = net.flat_params();
    let mut probe = net.clone();
    let mut params = base.clone();
    (0..base.len())
        .map(|i| {
            params[i] = base[i] + h;
            probe.set_flat_params(&params).unwrap();
            let up = objective(&probe, input, output_grad);
            params[i] = base[i] - h;
            probe.set_flat_params(&params).unwrap();
            let down = objective(&probe, input, output_grad);
            params[i] = base[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Analytic parameter gradients, flattened.
pub fn analytic_gradients(net: &Mlp, input: ArrayView2<f64>, output_grad: ArrayView2<f64>) -> Result<Vec<f64>> {
    let (_, tape) = net.forward_tape(input)?;
    let (grads, _) = net.backward(&tape, output_grad)?;
    Ok(grads.flatten())
}

/// Compares analytic and numeric gradients for one (net, batch) pair.
pub fn check_network(net: &Mlp, input: ArrayView2<f64>, output_grad: ArrayView2<f64>) -> Result<f64> {
    let analytic = analytic_gradients(net, input, output_grad)?;
    let numeric = finite_difference_gradients(net, input, output_grad, FD_STEP);
    Ok(max_relative_error(&analytic, &numeric))
}

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..=1.0))
}

/// Draws a random architecture, batch and upstream gradient.
pub fn random_case<R: Rng>(rng: &mut R) -> (Mlp, Array2<f64>, Array2<f64>) {
    let depth = rng.random_range(1..=4);
    let mut sizes = vec![rng.random_range(1..=6)];
    for _ in 0..depth - 1 {
        sizes.push(rng.random_range(1..=10));
    }
    sizes.push(rng.random_range(1..=4));
    let activation = if rng.random_bool(0.5) { Activation::Relu } else { Activation::Tanh };
    let net = Mlp::new(&sizes, activation, rng).expect("positive sizes");
    let batch = rng.random_range(1..=4);
    let input = random_matrix(rng, batch, sizes[0]);
    let output_grad = random_matrix(rng, batch, *sizes.last().unwrap());
    (net, input, output_grad)
}

/// Runs `n_trials` random checks; passes iff every error is below `tolerance`.
pub fn gradcheck(n_trials: usize, tolerance: f64, seed: u64) -> Result<GradcheckReport> {
    if n_trials == 0 {
        return Err(Error::Config("gradcheck needs at least one trial".into()));
    }
    let mut rng = stream_rng(seed, stream::GRADCHECK);
    let mut trials = Vec::with_capacity(n_trials);
    for _ in 0..n_trials {
        let (net, input, output_grad) = random_case(&mut rng);
        let err = check_network(&net, input.view(), output_grad.view())?;
        trials.push(TrialReport {
            layer_sizes: net.layer_sizes(),
            activation: net.activation(),
            batch: input.nrows(),
            max_rel_error: err,
        });
    }
    let max_rel_error = trials.iter().map(|t| t.max_rel_error).fold(0.0, f64::max);
    Ok(GradcheckReport { passed: max_rel_error < tolerance, trials, max_rel_error, tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn four_eight_eight_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for act in [Activation::Relu, Activation::Tanh] {
            let net = Mlp::new(&[4, 8, 8, 2], act, &mut rng).unwrap();
            let x = random_matrix(&mut rng, 3, 4);
            let g = random_matrix(&mut rng, 3, 2);
            assert!(check_network(&net, x.view(), g.view()).unwrap() < 1e-4);
        }
    }

    #[test]
    fn random_architectures_pass() {
        let report = gradcheck(12, 1e-4, 0).unwrap();
        assert!(report.passed, "max error {}", report.max_rel_error);
        assert_eq!(report.trials.len(), 12);
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let net = Mlp::new(&[3, 5, 2], Activation::Tanh, &mut rng).unwrap();
        let x = random_matrix(&mut rng, 2, 3);
        let g = random_matrix(&mut rng, 2, 2);
        let mut analytic = analytic_gradients(&net, x.view(), g.view()).unwrap();
        let numeric = finite_difference_gradients(&net, x.view(), g.view(), FD_STEP);
        assert!(max_relative_error(&analytic, &numeric) < 1e-4);
        let i = (0..analytic.len()).max_by(|&a, &b| analytic[a].abs().total_cmp(&analytic[b].abs())).unwrap();
        analytic[i] *= 1.1;
        assert!(max_relative_error(&analytic, &numeric) > 1e-4);
    }

    #[test]
    fn zero_trials_is_an_error() {
        assert!(gradcheck(0, 1e-4, 0).is_err());
    }

    #[test]
    fn zero_tolerance_fails() {
        assert!(!gradcheck(3, 0.0, 1).unwrap().passed);
    }
}
