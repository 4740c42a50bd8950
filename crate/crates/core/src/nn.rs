//! Small dense feed-forward networks with hand-written backpropagation,
//! Adam and Polyak averaging.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply<T: Real>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    #[inline]
    fn derivative<T: Real>(self, z: T, a: T) -> T {
        match self {
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => T::one() - a * a,
            Activation::Identity => T::one(),
        }
    }
}

/// Fully connected layer, weights stored row-major as `outputs x inputs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

impl<T: Real> Dense<T> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![T::zero(); inputs * outputs],
            biases: vec![T::zero(); outputs],
        }
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.inputs, self.outputs)
    }

    fn values(&self) -> impl Iterator<Item = &T> {
        self.weights.iter().chain(&self.biases)
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.weights.iter_mut().chain(self.biases.iter_mut())
    }

    #[inline]
    fn affine(&self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        out.extend(self.weights.chunks_exact(self.inputs).zip(&self.biases).map(|(row, &b)| {
            // four accumulators so the reduction can pipeline
            let mut acc = [T::zero(); 4];
            let mut chunks = row.chunks_exact(4).zip(x.chunks_exact(4));
            for (w, xi) in &mut chunks {
                acc[0] = acc[0] + w[0] * xi[0];
                acc[1] = acc[1] + w[1] * xi[1];
                acc[2] = acc[2] + w[2] * xi[2];
                acc[3] = acc[3] + w[3] * xi[3];
            }
            let tail = row.len() - row.len() % 4;
            let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
            for k in tail..row.len() {
                sum = sum + row[k] * x[k];
            }
            sum + b
        }));
    }
}

/// Per-layer gradients, shaped like the network's layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<Dense<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn scale(&mut self, k: T) {
        for l in &mut self.layers {
            for v in l.values_mut() {
                *v = *v * k;
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.layers.iter().flat_map(Dense::values)
    }

    pub fn is_zero(&self) -> bool {
        self.iter().all(|v| *v == T::zero())
    }
}

/// Activations recorded by [`Mlp::forward`] for the backward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache<T> {
    /// `activations[0]` is the input, `activations[l + 1]` the output of layer `l`.
    activations: Vec<Vec<T>>,
    pre_activations: Vec<Vec<T>>,
}

/// Multilayer perceptron with a shared hidden activation.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    layers: Vec<Dense<T>>,
    hidden: Activation,
    output: Activation,
}

impl<T: Real> Mlp<T> {
    /// All-zero network.
    pub fn zeros(layer_sizes: &[usize], hidden: Activation, output: Activation) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!("bad layer sizes {layer_sizes:?}")));
        }
        let layers = layer_sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect();
        Ok(Mlp { layers, hidden, output })
    }

    /// Weights and biases uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn random<R: Rng + ?Sized>(layer_sizes: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes, hidden, output)?;
        for l in &mut net.layers {
            let bound = 1.0 / (l.inputs as f64).sqrt();
            for v in l.values_mut() {
                *v = T::lit(rng.random_range(-bound..=bound));
            }
        }
        Ok(net)
    }

    pub fn from_layers(layers: Vec<Dense<T>>, hidden: Activation, output: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            ensure_len(l.inputs * l.outputs, l.weights.len())?;
            ensure_len(l.outputs, l.biases.len())?;
            if i > 0 {
                ensure_len(layers[i - 1].outputs, l.inputs)?;
            }
            if l.values().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("layer {i} holds non-finite values")));
            }
        }
        Ok(Mlp { layers, hidden, output })
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        &mut self.layers
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs)
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Parameters in layer order, weights before biases.
    pub fn params(&self) -> impl Iterator<Item = &T> {
        self.layers.iter().flat_map(Dense::values)
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers.iter_mut().flat_map(Dense::values_mut)
    }

    pub fn zero_gradients(&self) -> Gradients<T> {
        Gradients {
            layers: self.layers.iter().map(Dense::zeros_like).collect(),
        }
    }

    fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output
        } else {
            self.hidden
        }
    }

    pub fn forward(&self, input: &[T]) -> Result<(Vec<T>, ForwardCache<T>)> {
        ensure_len(self.input_dim(), input.len())?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        activations.push(input.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.outputs);
            layer.affine(&activations[i], &mut z);
            let act = self.activation_of(i);
            let a: Vec<T> = z.iter().map(|&v| act.apply(v)).collect();
            pre_activations.push(z);
            activations.push(a);
        }
        let out = activations[activations.len() - 1].clone();
        Ok((
            out,
            ForwardCache {
                activations,
                pre_activations,
            },
        ))
    }

    /// Forward pass without recording a cache.
    pub fn predict(&self, input: &[T]) -> Result<Vec<T>> {
        ensure_len(self.input_dim(), input.len())?;
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine(&cur, &mut next);
            let act = self.activation_of(i);
            for v in &mut next {
                *v = act.apply(*v);
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Reverse-mode gradients of `output_grad . output` with respect to the
    /// parameters and the input.
    pub fn backward(&self, cache: &ForwardCache<T>, output_grad: &[T]) -> Result<(Gradients<T>, Vec<T>)> {
        let mut grads = self.zero_gradients();
        let input_grad = self.backward_into(cache, output_grad, Some(&mut grads))?;
        Ok((grads, input_grad))
    }

    /// Like [`Mlp::backward`] but accumulates parameter gradients into
    /// `grads` (when given) instead of allocating.
    pub fn backward_into(
        &self,
        cache: &ForwardCache<T>,
        output_grad: &[T],
        mut grads: Option<&mut Gradients<T>>,
    ) -> Result<Vec<T>> {
        ensure_len(self.output_dim(), output_grad.len())?;
        ensure_len(self.layers.len(), cache.pre_activations.len())?;
        if let Some(g) = grads.as_deref() {
            ensure_len(self.layers.len(), g.layers.len())?;
        }
        let mut upstream = output_grad.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let act = self.activation_of(i);
            let z = &cache.pre_activations[i];
            let a = &cache.activations[i + 1];
            let x = &cache.activations[i];
            ensure_len(layer.outputs, z.len())?;
            ensure_len(layer.inputs, x.len())?;
            let delta: Vec<T> = upstream
                .iter()
                .zip(z.iter().zip(a))
                .map(|(&g, (&zi, &ai))| g * act.derivative(zi, ai))
                .collect();
            if let Some(g) = grads.as_deref_mut() {
                let gl = &mut g.layers[i];
                for (o, &d) in delta.iter().enumerate() {
                    if d == T::zero() {
                        continue;
                    }
                    gl.biases[o] = gl.biases[o] + d;
                    let row = &mut gl.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (w, &xi) in row.iter_mut().zip(x) {
                        *w = *w + d * xi;
                    }
                }
            }
            let mut down = vec![T::zero(); layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d == T::zero() {
                    continue;
                }
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (g, &w) in down.iter_mut().zip(row) {
                    *g = *g + w * d;
                }
            }
            upstream = down;
        }
        Ok(upstream)
    }
}

/// Adam optimizer state for one network.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam<T> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    pub step: u64,
    first: Vec<Dense<T>>,
    second: Vec<Dense<T>>,
}

impl<T: Real> Adam<T> {
    pub fn new(net: &Mlp<T>, lr: T) -> Self {
        Self::with_hyper(net, lr, T::lit(0.9), T::lit(0.999), T::lit(1e-8))
    }

    pub fn with_hyper(net: &Mlp<T>, lr: T, beta1: T, beta2: T, eps: T) -> Self {
        let zeros: Vec<Dense<T>> = net.layers.iter().map(Dense::zeros_like).collect();
        Adam {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            first: zeros.clone(),
            second: zeros,
        }
    }

    /// Restores moment accumulators, e.g. from a checkpoint.
    pub fn with_moments(mut self, step: u64, first: Vec<Dense<T>>, second: Vec<Dense<T>>) -> Result<Self> {
        let shape = |v: &[Dense<T>]| {
            v.iter()
                .map(|l| (l.inputs, l.outputs, l.weights.len(), l.biases.len()))
                .collect::<Vec<_>>()
        };
        if shape(&first) != shape(&self.first) || shape(&second) != shape(&self.second) {
            return Err(Error::InvalidConfig("optimizer moments do not match the network".into()));
        }
        self.step = step;
        self.first = first;
        self.second = second;
        Ok(self)
    }

    pub fn moments(&self) -> (&[Dense<T>], &[Dense<T>]) {
        (&self.first, &self.second)
    }

    /// One bias-corrected Adam update (gradient descent direction).
    pub fn step(&mut self, net: &mut Mlp<T>, grads: &Gradients<T>) -> Result<()> {
        ensure_len(net.layers.len(), grads.layers.len())?;
        ensure_len(net.layers.len(), self.first.len())?;
        for (l, g) in net.layers.iter().zip(&grads.layers) {
            ensure_len(l.weights.len(), g.weights.len())?;
            ensure_len(l.biases.len(), g.biases.len())?;
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = T::one() - self.beta1.powi(t);
        let c2 = T::one() - self.beta2.powi(t);
        let (b1, b2) = (self.beta1, self.beta2);
        let params = net.layers.iter_mut().flat_map(Dense::values_mut);
        let gs = grads.layers.iter().flat_map(Dense::values);
        let ms = self.first.iter_mut().flat_map(Dense::values_mut);
        let vs = self.second.iter_mut().flat_map(Dense::values_mut);
        for (((p, &g), m), v) in params.zip(gs).zip(ms).zip(vs) {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p = *p - self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// `target <- tau * source + (1 - tau) * target`, elementwise.
pub fn soft_update<T: Real>(target: &mut Mlp<T>, source: &Mlp<T>, tau: T) -> Result<()> {
    if target.layer_sizes() != source.layer_sizes() {
        return Err(Error::ShapeMismatch {
            expected: target.param_count(),
            got: source.param_count(),
        });
    }
    let keep = T::one() - tau;
    for (t, &s) in target.params_mut().zip(source.params()) {
        *t = tau * s + keep * *t;
    }
    Ok(())
}

/// Serialized network: layer sizes plus flat row-major weights and biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct MlpRecord<T> {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
}

impl<T: Real> From<&Mlp<T>> for MlpRecord<T> {
    fn from(net: &Mlp<T>) -> Self {
        MlpRecord {
            layer_sizes: net.layer_sizes(),
            hidden_activation: net.hidden,
            output_activation: net.output,
            weights: net.layers.iter().map(|l| l.weights.clone()).collect(),
            biases: net.layers.iter().map(|l| l.biases.clone()).collect(),
        }
    }
}

impl<T: Real> TryFrom<MlpRecord<T>> for Mlp<T> {
    type Error = Error;

    fn try_from(rec: MlpRecord<T>) -> Result<Self> {
        if rec.layer_sizes.len() < 2 {
            return Err(Error::InvalidConfig("layer_sizes needs at least two entries".into()));
        }
        let n = rec.layer_sizes.len() - 1;
        ensure_len(n, rec.weights.len())?;
        ensure_len(n, rec.biases.len())?;
        let layers = rec
            .layer_sizes
            .windows(2)
            .zip(rec.weights.into_iter().zip(rec.biases))
            .map(|(w, (weights, biases))| Dense {
                inputs: w[0],
                outputs: w[1],
                weights,
                biases,
            })
            .collect();
        Mlp::from_layers(layers, rec.hidden_activation, rec.output_activation)
    }
}
