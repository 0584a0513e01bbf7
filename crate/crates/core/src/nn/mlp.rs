use rand::Rng;

use crate::Real;

use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    pub fn code(self) -> u32 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Tanh => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            2 => Some(Activation::Tanh),
            _ => None,
        }
    }

    #[inline]
    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(T::zero()),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `x`.
    #[inline]
    fn derivative<T: Real>(self, x: T) -> T {
        match self {
            Activation::Identity => T::one(),
            Activation::Relu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                T::one() - t * t
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub input_width: usize,
    pub hidden: Vec<usize>,
    pub output_width: usize,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl MlpSpec {
    /// Three hidden ReLU layers of 48 with a Tanh head.
    pub fn policy(input_width: usize) -> Self {
        Self {
            input_width,
            hidden: vec![48, 48, 48],
            output_width: 1,
            hidden_activation: Activation::Relu,
            output_activation: Activation::Tanh,
        }
    }

    /// Same trunk as [`MlpSpec::policy`] with an identity head.
    pub fn critic(input_width: usize) -> Self {
        Self { output_activation: Activation::Identity, ..Self::policy(input_width) }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.input_width == 0 || self.output_width == 0 || self.hidden.iter().any(|&h| h == 0) {
            return Err(NnError::Shape("layer widths must be at least 1".into()));
        }
        if !(1..=3).contains(&self.hidden.len()) {
            return Err(NnError::Shape(format!("{} hidden layers; 1 to 3 supported", self.hidden.len())));
        }
        if self.hidden_activation != Activation::Relu {
            return Err(NnError::Shape("hidden activation must be ReLU".into()));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of each affine layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut widths = Vec::with_capacity(self.hidden.len() + 2);
        widths.push(self.input_width);
        widths.extend_from_slice(&self.hidden);
        widths.push(self.output_width);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layer_shapes().iter().map(|&(i, o)| i * o + o).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layer {
    fan_in: usize,
    fan_out: usize,
    weights: usize,
    bias: usize,
}

/// Activations recorded by a forward pass.
#[derive(Debug, Clone)]
pub struct Tape<T> {
    /// Input to each layer.
    inputs: Vec<Vec<T>>,
    /// Pre-activation output of each layer.
    pre: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    spec: MlpSpec,
    layers: Vec<Layer>,
    params: Vec<T>,
}

impl<T: Real> Mlp<T> {
    pub fn zeros(spec: MlpSpec) -> Result<Self, NnError> {
        let n = spec.num_params();
        Self::from_params(spec, vec![T::zero(); n])
    }

    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init<R: Rng + ?Sized>(spec: MlpSpec, rng: &mut R) -> Result<Self, NnError> {
        let mut net = Self::zeros(spec)?;
        for layer in net.layers.clone() {
            let limit = (6.0 / (layer.fan_in + layer.fan_out) as f64).sqrt();
            for w in &mut net.params[layer.weights..layer.bias] {
                *w = T::lit(rng.random_range(-limit..limit));
            }
        }
        Ok(net)
    }

    pub fn from_params(spec: MlpSpec, params: Vec<T>) -> Result<Self, NnError> {
        spec.validate()?;
        if params.len() != spec.num_params() {
            return Err(NnError::Shape(format!(
                "{} parameters supplied, spec needs {}",
                params.len(),
                spec.num_params()
            )));
        }
        let mut layers = Vec::new();
        let mut offset = 0;
        for (fan_in, fan_out) in spec.layer_shapes() {
            let weights = offset;
            let bias = weights + fan_in * fan_out;
            offset = bias + fan_out;
            layers.push(Layer { fan_in, fan_out, weights, bias });
        }
        Ok(Self { spec, layers, params })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn input_width(&self) -> usize {
        self.spec.input_width
    }

    pub fn output_width(&self) -> usize {
        self.spec.output_width
    }

    fn check_input(&self, input: &[T]) -> Result<(), NnError> {
        if input.len() != self.spec.input_width {
            return Err(NnError::Shape(format!("input has width {}, expected {}", input.len(), self.spec.input_width)));
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(NnError::NonFinite);
        }
        Ok(())
    }

    fn affine(&self, layer: &Layer, input: &[T], out: &mut Vec<T>) {
        out.clear();
        let w = &self.params[layer.weights..layer.bias];
        let b = &self.params[layer.bias..layer.bias + layer.fan_out];
        for (row, &bias) in w.chunks_exact(layer.fan_in).zip(b) {
            let mut acc = bias;
            for (&wi, &xi) in row.iter().zip(input) {
                acc += wi * xi;
            }
            out.push(acc);
        }
    }

    fn activation(&self, index: usize) -> Activation {
        if index + 1 == self.layers.len() {
            self.spec.output_activation
        } else {
            self.spec.hidden_activation
        }
    }

    /// Forward pass without recording a tape.
    pub fn predict(&self, input: &[T]) -> Result<Vec<T>, NnError> {
        self.check_input(input)?;
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            self.affine(layer, &cur, &mut next);
            let act = self.activation(k);
            next.iter_mut().for_each(|v| *v = act.apply(*v));
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    pub fn forward(&self, input: &[T]) -> Result<(Vec<T>, Tape<T>), NnError> {
        self.check_input(input)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut cur = input.to_vec();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.fan_out);
            self.affine(layer, &cur, &mut z);
            let act = self.activation(k);
            let a: Vec<T> = z.iter().map(|&v| act.apply(v)).collect();
            inputs.push(std::mem::replace(&mut cur, a));
            pre.push(z);
        }
        Ok((cur, Tape { inputs, pre }))
    }

    /// Reverse pass. Accumulates parameter gradients into `grads` (same layout as the
    /// parameters) and returns the gradient with respect to the input.
    pub fn backward(&self, tape: &Tape<T>, output_grad: &[T], grads: &mut [T]) -> Result<Vec<T>, NnError> {
        if tape.pre.len() != self.layers.len()
            || tape.pre.iter().zip(&self.layers).any(|(z, l)| z.len() != l.fan_out)
        {
            return Err(NnError::Shape("tape was recorded by a different network".into()));
        }
        if output_grad.len() != self.spec.output_width {
            return Err(NnError::Shape(format!("output gradient has width {}", output_grad.len())));
        }
        if grads.len() != self.params.len() {
            return Err(NnError::Shape(format!("gradient buffer has {} slots", grads.len())));
        }

        let last = self.layers.len() - 1;
        let mut delta: Vec<T> = output_grad
            .iter()
            .zip(&tape.pre[last])
            .map(|(&g, &z)| g * self.spec.output_activation.derivative(z))
            .collect();
        for k in (0..self.layers.len()).rev() {
            let layer = self.layers[k];
            let input = &tape.inputs[k];
            let w = &self.params[layer.weights..layer.bias];
            let mut input_grad = vec![T::zero(); layer.fan_in];
            for (o, &d) in delta.iter().enumerate() {
                grads[layer.bias + o] += d;
                if d == T::zero() {
                    continue;
                }
                let row = o * layer.fan_in;
                let gw = &mut grads[layer.weights + row..layer.weights + row + layer.fan_in];
                for (g, &x) in gw.iter_mut().zip(input) {
                    *g += d * x;
                }
                for (ig, &wi) in input_grad.iter_mut().zip(&w[row..row + layer.fan_in]) {
                    *ig += d * wi;
                }
            }
            if k == 0 {
                return Ok(input_grad);
            }
            let act = self.activation(k - 1);
            delta = input_grad.iter().zip(&tape.pre[k - 1]).map(|(&g, &z)| g * act.derivative(z)).collect();
        }
        unreachable!("the loop returns at the first layer")
    }
}
