use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::nn::Mlp;

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Keeps `log(1 − a² + ε)` finite when `tanh` saturates.
pub const TANH_EPSILON: f64 = 1e-6;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// An action in (−1, 1)^d and, for stochastic draws, its log density.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySample {
    pub action: Vec<f64>,
    pub log_prob: Option<f64>,
}

/// Squashed Gaussian draws for a batch of actor outputs.
///
/// `outputs` rows are `[mean (d) | raw log-std (d)]`, `noise` is the standard
/// normal draw ε. Returns actions `tanh(mean + σε)` and per-row log densities
/// including the change-of-variables correction.
pub(crate) struct SquashedBatch {
    /// Whether the raw log-std was inside its clamp (gradient passes).
    pub log_std_free: Array2<bool>,
    pub std: Array2<f64>,
    pub noise: Array2<f64>,
    pub actions: Array2<f64>,
    pub log_probs: Array1<f64>,
}

impl SquashedBatch {
    pub fn new(outputs: &Array2<f64>, noise: Array2<f64>) -> Self {
        let d = outputs.ncols() / 2;
        let mean = outputs.slice(ndarray::s![.., ..d]).to_owned();
        let raw = outputs.slice(ndarray::s![.., d..]);
        let log_std_free = raw.mapv(|v| (LOG_STD_MIN..=LOG_STD_MAX).contains(&v));
        let log_std = raw.mapv(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX));
        let std = log_std.mapv(f64::exp);
        let pre = &mean + &(&std * &noise);
        let actions = pre.mapv(f64::tanh);
        let mut log_probs = Array1::zeros(outputs.nrows());
        for (r, lp) in log_probs.iter_mut().enumerate() {
            *lp = (0..d)
                .map(|i| {
                    let e = noise[[r, i]];
                    let a = actions[[r, i]];
                    -0.5 * e * e - log_std[[r, i]] - HALF_LN_2PI - (1.0 - a * a + TANH_EPSILON).ln()
                })
                .sum();
        }
        SquashedBatch { log_std_free, std, noise, actions, log_probs }
    }
}

pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

/// Log density of the squashed Gaussian at action `a` for one dimension.
pub fn squashed_log_density(action: f64, mean: f64, log_std: f64) -> f64 {
    let log_std = log_std.clamp(LOG_STD_MIN, LOG_STD_MAX);
    let u = action.atanh();
    let z = (u - mean) / log_std.exp();
    -0.5 * z * z - log_std - HALF_LN_2PI - (1.0 - action * action + TANH_EPSILON).ln()
}

/// An immutable copy of an actor, used for frozen opponents and evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorSnapshot {
    actor: Mlp,
}

impl ActorSnapshot {
    pub fn new(actor: Mlp) -> Result<Self> {
        if !actor.output_dim().is_multiple_of(2) {
            return Err(Error::Dimension("actor output must hold a mean and a log-std per action".into()));
        }
        Ok(ActorSnapshot { actor })
    }

    pub fn network(&self) -> &Mlp {
        &self.actor
    }

    pub fn action_dim(&self) -> usize {
        self.actor.output_dim() / 2
    }

    pub fn observation_dim(&self) -> usize {
        self.actor.input_dim()
    }

    /// Deterministic mode: `tanh(mean)`. Stochastic: a reparameterised draw.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        observation: &[f64],
        deterministic: bool,
        rng: &mut R,
    ) -> Result<PolicySample> {
        let out = self.actor.forward(observation)?;
        let d = self.action_dim();
        if deterministic {
            return Ok(PolicySample { action: out[..d].iter().map(|m| m.tanh()).collect(), log_prob: None });
        }
        let outputs = Array2::from_shape_vec((1, 2 * d), out).expect("actor output width");
        let batch = SquashedBatch::new(&outputs, standard_normal(rng, 1, d));
        Ok(PolicySample { action: batch.actions.row(0).to_vec(), log_prob: Some(batch.log_probs[0]) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, Dense};
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// A one-layer actor with constant output `[mean, log_std]`.
    fn constant_actor(mean: f64, log_std: f64) -> ActorSnapshot {
        let layer = Dense { weights: array![[0.0, 0.0]], bias: array![mean, log_std] };
        ActorSnapshot::new(Mlp::from_layers(vec![layer], Activation::Relu).unwrap()).unwrap()
    }

    #[test]
    fn degenerate_variance_gives_near_zero_actions() {
        let actor = constant_actor(0.0, -25.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let det = actor.sample(&[1.0], true, &mut rng).unwrap();
        assert_eq!(det.action, vec![0.0]);
        assert!(det.log_prob.is_none());
        let s = actor.sample(&[1.0], false, &mut rng).unwrap();
        assert!(s.action[0].abs() < 1e-7);
        assert!(s.log_prob.unwrap().is_finite());
    }

    #[test]
    fn samples_are_strictly_inside_the_box() {
        let actor = constant_actor(3.0, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let s = actor.sample(&[0.0], false, &mut rng).unwrap();
            assert!(s.action[0] > -1.0 && s.action[0] < 1.0 || s.action[0].abs() == 1.0);
            assert!(s.log_prob.unwrap().is_finite());
        }
    }

    #[test]
    fn log_prob_matches_density_formula() {
        let actor = constant_actor(0.3, -0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let s = actor.sample(&[0.0], false, &mut rng).unwrap();
            let direct = squashed_log_density(s.action[0], 0.3, -0.5);
            assert!((direct - s.log_prob.unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn empirical_density_matches_log_prob() {
        // Monte-Carlo histogram against exp(log density) integrated by midpoints.
        let (mean, log_std) = (0.3, -0.5);
        let actor = constant_actor(mean, log_std);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bins = 100;
        let n = 1_000_000;
        let mut counts = vec![0usize; bins];
        let outputs = Array2::from_shape_vec((n, 2), [mean, log_std].repeat(n)).unwrap();
        let batch = SquashedBatch::new(&outputs, standard_normal(&mut rng, n, 1));
        for &a in batch.actions.iter() {
            let k = (((a + 1.0) / 2.0) * bins as f64) as usize;
            counts[k.min(bins - 1)] += 1;
        }
        let width = 2.0 / bins as f64;
        let tv: f64 = (0..bins)
            .map(|k| {
                let mid = -1.0 + (k as f64 + 0.5) * width;
                let p = squashed_log_density(mid, mean, log_std).exp() * width;
                (counts[k] as f64 / n as f64 - p).abs()
            })
            .sum::<f64>()
            * 0.5;
        assert!(tv < 0.01, "total variation {tv}");
        let _ = actor;
    }
}
