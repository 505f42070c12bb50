use serde::{Deserialize, Serialize};

use super::conv::{Conv1DLayer, Conv1DTransposeLayer, LayerGrads, Padding};
use super::maxnorm::{apply_max_norm, UnitLayout};
use super::{Activation, NnError, Tensor3};
use crate::rng::{derive_seed, CounterRng};

/// Channel widths and stride of the encoder/decoder stack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchSpec {
    #[serde(rename = "encoder")]
    pub encoder_channels: Vec<usize>,
    #[serde(rename = "decoder")]
    pub decoder_channels: Vec<usize>,
    pub kernel_size: usize,
    pub stride: usize,
}

impl ArchSpec {
    /// Full-size network: 128/32/16/8 encoder, mirrored decoder, stride 2.
    pub fn full_scale() -> Self {
        Self {
            encoder_channels: vec![128, 32, 16, 8],
            decoder_channels: vec![8, 16, 32, 128],
            kernel_size: 3,
            stride: 2,
        }
    }

    /// Reduced-width network for desk-scale runs: 16/8/4/2 mirrored.
    pub fn desk() -> Self {
        Self {
            encoder_channels: vec![16, 8, 4, 2],
            decoder_channels: vec![2, 4, 8, 16],
            kernel_size: 3,
            stride: 2,
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |m: String| Err(NnError::InvalidArchitecture(m));
        if self.encoder_channels.is_empty() && self.decoder_channels.is_empty() {
            return bad("at least one hidden layer is required".into());
        }
        if self
            .encoder_channels
            .iter()
            .chain(&self.decoder_channels)
            .any(|&c| c == 0)
        {
            return bad("channel counts must be positive".into());
        }
        if self.kernel_size.is_multiple_of(2) || self.kernel_size == 0 {
            return bad(format!("kernel size must be odd, got {}", self.kernel_size));
        }
        if self.stride == 0 {
            return bad("stride must be positive".into());
        }
        if self.stride > 1 && self.encoder_channels.len() != self.decoder_channels.len() {
            return bad("strided encoder and decoder must have the same depth".into());
        }
        Ok(())
    }

    /// Total temporal downsampling of the encoder.
    pub fn downsampling_factor(&self) -> usize {
        self.stride.pow(self.encoder_channels.len() as u32)
    }

    /// Channel count at every layer boundary, input to output.
    pub fn channel_chain(&self) -> Vec<usize> {
        std::iter::once(1)
            .chain(self.encoder_channels.iter().copied())
            .chain(self.decoder_channels.iter().copied())
            .chain(std::iter::once(1))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv(Conv1DLayer),
    ConvTranspose(Conv1DTransposeLayer),
}

impl Layer {
    pub fn forward(&self, x: &Tensor3) -> Result<Tensor3, NnError> {
        match self {
            Layer::Conv(l) => l.forward(x),
            Layer::ConvTranspose(l) => l.forward(x),
        }
    }

    pub fn backward(&self, x: &Tensor3, y: &Tensor3, grad_y: &Tensor3) -> Result<(Tensor3, LayerGrads), NnError> {
        match self {
            Layer::Conv(l) => l.backward(x, y, grad_y),
            Layer::ConvTranspose(l) => l.backward(x, y, grad_y),
        }
    }

    pub fn weights(&self) -> &[f64] {
        match self {
            Layer::Conv(l) => &l.weights,
            Layer::ConvTranspose(l) => &l.weights,
        }
    }

    pub fn bias(&self) -> &[f64] {
        match self {
            Layer::Conv(l) => &l.bias,
            Layer::ConvTranspose(l) => &l.bias,
        }
    }

    fn params_mut(&mut self) -> (&mut Vec<f64>, &mut Vec<f64>) {
        match self {
            Layer::Conv(l) => (&mut l.weights, &mut l.bias),
            Layer::ConvTranspose(l) => (&mut l.weights, &mut l.bias),
        }
    }

    /// `(kernel, in, out)` of the stored weight array.
    pub fn weight_shape(&self) -> [usize; 3] {
        match self {
            Layer::Conv(l) => [l.kernel_size, l.in_channels, l.out_channels],
            Layer::ConvTranspose(l) => [l.kernel_size, l.out_channels, l.in_channels],
        }
    }

    /// Fan-in weights of each output unit.
    pub fn unit_layout(&self) -> UnitLayout {
        match self {
            Layer::Conv(l) => UnitLayout {
                outer: l.kernel_size * l.in_channels,
                units: l.out_channels,
                inner: 1,
            },
            Layer::ConvTranspose(l) => UnitLayout {
                outer: l.kernel_size,
                units: l.out_channels,
                inner: l.in_channels,
            },
        }
    }

    fn fans(&self) -> (usize, usize) {
        match self {
            Layer::Conv(l) => (l.kernel_size * l.in_channels, l.kernel_size * l.out_channels),
            Layer::ConvTranspose(l) => (l.kernel_size * l.in_channels, l.kernel_size * l.out_channels),
        }
    }

    /// Glorot-uniform bound `sqrt(6 / (fan_in + fan_out))`.
    pub fn glorot_limit(&self) -> f64 {
        let (fan_in, fan_out) = self.fans();
        (6.0 / (fan_in + fan_out) as f64).sqrt()
    }
}

/// Encoder convolutions, decoder transposed convolutions and a one-channel
/// sigmoid head.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderModel {
    arch: ArchSpec,
    layers: Vec<Layer>,
    version: u64,
}

/// Activations recorded by [`AutoencoderModel::forward`]; entry 0 is the
/// input and entry `i + 1` the output of layer `i`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    activations: Vec<Tensor3>,
}

impl ForwardCache {
    pub fn output(&self) -> &Tensor3 {
        self.activations.last().expect("cache holds at least the input")
    }

    pub fn activations(&self) -> &[Tensor3] {
        &self.activations
    }
}

/// One [`LayerGrads`] per layer, in model order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrads>,
}

impl Gradients {
    /// Flat views in the order of [`AutoencoderModel::parameters_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|g| [g.weights.as_slice(), g.bias.as_slice()])
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|&v| v == 0.0))
    }
}

impl AutoencoderModel {
    /// Builds the layer stack with all parameters zero.
    pub fn zeros(arch: &ArchSpec) -> Result<Self, NnError> {
        arch.validate()?;
        let (k, s) = (arch.kernel_size, arch.stride);
        let mut layers = Vec::new();
        let mut ch = 1;
        for &out in &arch.encoder_channels {
            layers.push(Layer::Conv(Conv1DLayer::new(
                k,
                ch,
                out,
                s,
                Padding::Same,
                Activation::Relu,
            )?));
            ch = out;
        }
        for &out in &arch.decoder_channels {
            layers.push(Layer::ConvTranspose(Conv1DTransposeLayer::new(
                k,
                ch,
                out,
                s,
                Padding::Same,
                Activation::Relu,
            )?));
            ch = out;
        }
        layers.push(Layer::Conv(Conv1DLayer::new(
            k,
            ch,
            1,
            1,
            Padding::Same,
            Activation::Sigmoid,
        )?));
        Ok(Self {
            arch: arch.clone(),
            layers,
            version: 0,
        })
    }

    pub fn arch(&self) -> &ArchSpec {
        &self.arch
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Mutable access to the layers; invalidates outstanding forward caches.
    pub fn layers_mut(&mut self) -> &mut [Layer] {
        self.version += 1;
        &mut self.layers
    }

    pub fn num_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weights().len() + l.bias().len()).sum()
    }

    /// Flat parameter views: weights then bias for each layer in order.
    /// Invalidates outstanding forward caches.
    pub fn parameters_mut(&mut self) -> Vec<&mut [f64]> {
        self.version += 1;
        self.layers
            .iter_mut()
            .flat_map(|l| {
                let (w, b) = l.params_mut();
                [w.as_mut_slice(), b.as_mut_slice()]
            })
            .collect()
    }

    pub fn parameters(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| [l.weights(), l.bias()]).collect()
    }

    /// Projects every output unit's weight vector onto the `max_norm` ball.
    pub fn apply_max_norm(&mut self, max_norm: f64) {
        self.version += 1;
        for layer in &mut self.layers {
            let layout = layer.unit_layout();
            apply_max_norm(layer.params_mut().0, layout, max_norm);
        }
    }

    pub fn forward(&self, x: &Tensor3) -> Result<(Tensor3, ForwardCache), NnError> {
        if x.channels() != 1 {
            return Err(NnError::ChannelMismatch {
                expected: 1,
                got: x.channels(),
            });
        }
        let factor = self.arch.downsampling_factor();
        if x.length() == 0 || !x.length().is_multiple_of(factor) {
            return Err(NnError::LengthNotDivisible {
                length: x.length(),
                factor,
            });
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.clone());
        for layer in &self.layers {
            let next = layer.forward(activations.last().unwrap())?;
            activations.push(next);
        }
        let cache = ForwardCache {
            version: self.version,
            activations,
        };
        Ok((cache.output().clone(), cache))
    }

    /// Output of the encoder half.
    pub fn encode(&self, x: &Tensor3) -> Result<Tensor3, NnError> {
        let (_, cache) = self.forward(x)?;
        Ok(cache.activations[self.arch.encoder_channels.len()].clone())
    }

    pub fn backward(&self, cache: &ForwardCache, grad_output: &Tensor3) -> Result<Gradients, NnError> {
        if cache.version != self.version || cache.activations.len() != self.layers.len() + 1 {
            return Err(NnError::StaleCache);
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut grad = grad_output.clone();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let (gx, g) = layer.backward(&cache.activations[i], &cache.activations[i + 1], &grad)?;
            grads.push(g);
            grad = gx;
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }
}

/// Glorot-uniform weights and zero biases, deterministic per seed.
pub fn init_model(seed: u64, arch: &ArchSpec) -> Result<AutoencoderModel, NnError> {
    let mut model = AutoencoderModel::zeros(arch)?;
    for (i, layer) in model.layers.iter_mut().enumerate() {
        let limit = layer.glorot_limit();
        let mut rng = CounterRng::new(derive_seed(seed, i as u64));
        layer
            .params_mut()
            .0
            .iter_mut()
            .for_each(|w| *w = rng.uniform(-limit, limit));
    }
    Ok(model)
}
