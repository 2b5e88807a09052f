use ndarray::Zip;
use serde::{Deserialize, Serialize};

use super::mlp::{layers_match, Dense, Gradients, Mlp};
use crate::error::{Error, Result};

/// Adaptive-moment optimiser state for one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    first_moment: Vec<Dense>,
    second_moment: Vec<Dense>,
}

impl Adam {
    /// Zero moments shaped like `net`, default decays (0.9, 0.999) and ε = 1e-8.
    pub fn new(net: &Mlp, learning_rate: f64) -> Self {
        let zeros: Vec<Dense> = net.layers().iter().map(|l| Dense::zeros(l.n_in(), l.n_out())).collect();
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            first_moment: zeros.clone(),
            second_moment: zeros,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected update of `net` along `grads` (descent direction).
    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) -> Result<()> {
        if !layers_match(net.layers(), &grads.0) || !layers_match(net.layers(), &self.first_moment) {
            return Err(Error::Dimension("optimiser, network and gradient shapes differ".into()));
        }
        self.step += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        let lr = self.learning_rate;
        let c1 = 1.0 - b1.powi(self.step as i32);
        let c2 = 1.0 - b2.powi(self.step as i32);
        let update = |p: &mut f64, g: &f64, m: &mut f64, v: &mut f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for (((layer, g), m), v) in
            net.layers_mut().iter_mut().zip(&grads.0).zip(&mut self.first_moment).zip(&mut self.second_moment)
        {
            Zip::from(&mut layer.weights).and(&g.weights).and(&mut m.weights).and(&mut v.weights).for_each(update);
            Zip::from(&mut layer.bias).and(&g.bias).and(&mut m.bias).and(&mut v.bias).for_each(update);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;
    use ndarray::{array, Array1};

    fn two_param_net(a: f64, b: f64) -> Mlp {
        Mlp::from_layers(vec![Dense { weights: array![[a]], bias: array![b] }], Activation::Relu).unwrap()
    }

    fn grads(gw: f64, gb: f64) -> Gradients {
        Gradients(vec![Dense { weights: array![[gw]], bias: Array1::from(vec![gb]) }])
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut net = two_param_net(0.3, -0.2);
        let mut opt = Adam::new(&net, 1e-3);
        for _ in 0..5 {
            opt.step(&mut net, &grads(0.0, 0.0)).unwrap();
        }
        assert_eq!(net, two_param_net(0.3, -0.2));
        assert_eq!(opt.step_count(), 5);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // Step 1: m̂ = g, v̂ = g², so Δ = −lr · g / (|g| + ε).
        let mut net = two_param_net(0.0, 0.0);
        let mut opt = Adam::new(&net, 0.01);
        opt.step(&mut net, &grads(0.5, -3.0)).unwrap();
        let w = net.layers()[0].weights[[0, 0]];
        let b = net.layers()[0].bias[0];
        assert!((w + 0.01 * 0.5 / (0.5 + 1e-8)).abs() < 1e-15);
        assert!((b - 0.01 * 3.0 / (3.0 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn update_is_scale_invariant() {
        let mut net = two_param_net(0.0, 0.0);
        let mut opt = Adam::new(&net, 1e-3);
        for _ in 0..100 {
            opt.step(&mut net, &grads(0.2, 0.4)).unwrap();
        }
        let w = net.layers()[0].weights[[0, 0]];
        let b = net.layers()[0].bias[0];
        assert!(((w - b) / w).abs() < 1e-6, "{w} vs {b}");
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut net = two_param_net(0.0, 0.0);
        let mut opt = Adam::new(&net, 1e-3);
        let bad = Gradients(vec![Dense::zeros(2, 1)]);
        assert!(matches!(opt.step(&mut net, &bad), Err(Error::Dimension(_))));
        assert_eq!(opt.step_count(), 0);
    }
}
