use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, x: &mut Array2<f64>) {
        match self {
            Activation::Relu => x.mapv_inplace(|v| v.max(0.0)),
            Activation::Tanh => x.mapv_inplace(f64::tanh),
        }
    }

    /// Multiplies `grad` by the derivative, given the activation's output.
    fn backprop(self, grad: &mut Array2<f64>, output: &Array2<f64>) {
        match self {
            Activation::Relu => Zip::from(grad).and(output).for_each(|g, &y| {
                if y <= 0.0 {
                    *g = 0.0;
                }
            }),
            Activation::Tanh => Zip::from(grad).and(output).for_each(|g, &y| *g *= 1.0 - y * y),
        }
    }
}

/// A fully-connected layer; `weights` is `n_in × n_out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Dense { weights: Array2::zeros((n_in, n_out)), bias: Array1::zeros(n_out) }
    }

    pub fn n_in(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_out(&self) -> usize {
        self.weights.ncols()
    }

    fn same_shape(&self, other: &Dense) -> bool {
        self.weights.dim() == other.weights.dim() && self.bias.len() == other.bias.len()
    }
}

/// Per-layer parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Dense>);

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        flatten_layers(&self.0)
    }

    /// Elementwise `self += other`.
    pub fn accumulate(&mut self, other: &Gradients) -> Result<()> {
        if !layers_match(&self.0, &other.0) {
            return Err(Error::Dimension("gradient shapes differ".into()));
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.weights += &b.weights;
            a.bias += &b.bias;
        }
        Ok(())
    }
}

fn flatten_layers(layers: &[Dense]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        out.extend(l.weights.iter());
        out.extend(l.bias.iter());
    }
    out
}

pub(crate) fn layers_match(a: &[Dense], b: &[Dense]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_shape(y))
}

/// Activations recorded by a forward pass, consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct Tape {
    /// Input to each layer: the network input, then each hidden output.
    inputs: Vec<Array2<f64>>,
    shapes: Vec<(usize, usize)>,
}

/// Feedforward network: hidden layers use `activation`, the output is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Dense>,
    activation: Activation,
}

impl Mlp {
    /// Uniform initialisation in ±1/√fan_in for weights and biases.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], activation: Activation, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(sizes, activation)?;
        for layer in &mut net.layers {
            let bound = 1.0 / (layer.n_in() as f64).sqrt();
            layer.weights.mapv_inplace(|_| rng.random_range(-bound..=bound));
            layer.bias.mapv_inplace(|_| rng.random_range(-bound..=bound));
        }
        Ok(net)
    }

    pub fn zeros(sizes: &[usize], activation: Activation) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Dimension(format!("layer sizes {sizes:?}: need at least two positive sizes")));
        }
        Ok(Mlp { layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(), activation })
    }

    /// Builds a network from explicit layers.
    pub fn from_layers(layers: Vec<Dense>, activation: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Dimension("network without layers".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.n_out() || l.n_in() == 0 || l.n_out() == 0 {
                return Err(Error::Dimension(format!("layer {i} is malformed")));
            }
        }
        for w in layers.windows(2) {
            if w[0].n_out() != w[1].n_in() {
                return Err(Error::Dimension("consecutive layers do not chain".into()));
            }
        }
        Ok(Mlp { layers, activation })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut v = vec![self.input_dim()];
        v.extend(self.layers.iter().map(Dense::n_out));
        v
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].n_out()
    }

    /// `Σ (n_in + 1) · n_out`.
    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| (l.n_in() + 1) * l.n_out()).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        flatten_layers(&self.layers)
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::Dimension(format!("{} values for {} parameters", flat.len(), self.num_params())));
        }
        let mut it = flat.iter();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|p| *p = *it.next().unwrap());
        }
        Ok(())
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.input_dim() {
            return Err(Error::Dimension(format!("input has {cols} features, network expects {}", self.input_dim())));
        }
        Ok(())
    }

    fn run(&self, input: ArrayView2<f64>, mut tape: Option<&mut Vec<Array2<f64>>>) -> Array2<f64> {
        let last = self.layers.len() - 1;
        let mut x = input.to_owned();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = x.dot(&layer.weights);
            z += &layer.bias;
            if i < last {
                self.activation.apply(&mut z);
            }
            let prev = std::mem::replace(&mut x, z);
            if let Some(t) = tape.as_deref_mut() {
                t.push(prev);
            }
        }
        x
    }

    /// Evaluates one input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input.len())?;
        let x = ArrayView2::from_shape((1, input.len()), input).map_err(|e| Error::Dimension(e.to_string()))?;
        Ok(self.run(x, None).into_raw_vec_and_offset().0)
    }

    /// Evaluates a batch, one row per sample.
    pub fn forward_batch(&self, input: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(input.ncols())?;
        Ok(self.run(input, None))
    }

    /// Evaluates a batch and records what [`Mlp::backward`] needs.
    pub fn forward_tape(&self, input: ArrayView2<f64>) -> Result<(Array2<f64>, Tape)> {
        self.check_input(input.ncols())?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let out = self.run(input, Some(&mut inputs));
        let shapes = self.layers.iter().map(|l| l.weights.dim()).collect();
        Ok((out, Tape { inputs, shapes }))
    }

    /// Reverse-mode gradients of `Σ_rows output · output_grad`.
    ///
    /// Returns parameter gradients and the gradient with respect to the input.
    pub fn backward(&self, tape: &Tape, output_grad: ArrayView2<f64>) -> Result<(Gradients, Array2<f64>)> {
        let shapes: Vec<_> = self.layers.iter().map(|l| l.weights.dim()).collect();
        if tape.shapes != shapes {
            return Err(Error::Protocol("backward with a tape recorded on a different network".into()));
        }
        let rows = tape.inputs[0].nrows();
        if output_grad.dim() != (rows, self.output_dim()) {
            return Err(Error::Dimension(format!(
                "output gradient is {:?}, expected ({rows}, {})",
                output_grad.dim(),
                self.output_dim()
            )));
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = output_grad.to_owned();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let x = &tape.inputs[i];
            let weights = x.t().dot(&g);
            let bias = g.sum_axis(Axis(0));
            let mut gx = g.dot(&layer.weights.t());
            if i > 0 {
                self.activation.backprop(&mut gx, x);
            }
            grads.push(Dense { weights, bias });
            g = gx;
        }
        grads.reverse();
        Ok((Gradients(grads), g))
    }

    /// `self ← τ·source + (1 − τ)·self`.
    pub fn blend_from(&mut self, source: &Mlp, tau: f64) -> Result<()> {
        if !layers_match(&self.layers, &source.layers) {
            return Err(Error::Dimension("soft update between different shapes".into()));
        }
        for (t, s) in self.layers.iter_mut().zip(&source.layers) {
            Zip::from(&mut t.weights).and(&s.weights).for_each(|t, &s| *t = tau * s + (1.0 - tau) * *t);
            Zip::from(&mut t.bias).and(&s.bias).for_each(|t, &s| *t = tau * s + (1.0 - tau) * *t);
        }
        Ok(())
    }
}
