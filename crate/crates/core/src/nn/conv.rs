//! Strided 1D convolution and its transpose.
//!
//! Weights of both layers use the layout `(kernel, a, b)` where the plain
//! convolution maps `a` input channels to `b` outputs and the transposed one
//! maps `b` input channels back to `a` outputs. With shared weights and no
//! bias or activation, the transposed layer is the exact adjoint of the
//! plain one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Activation, NnError, Tensor3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    Same,
    Valid,
}

/// Length bookkeeping for a convolution mapping `long` samples to `short`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Geometry {
    long: usize,
    short: usize,
    pad: usize,
}

fn geometry_from_long(long: usize, kernel: usize, stride: usize, padding: Padding) -> Option<Geometry> {
    match padding {
        Padding::Same => {
            let short = long.div_ceil(stride);
            let total = ((short.max(1) - 1) * stride + kernel).saturating_sub(long);
            Some(Geometry {
                long,
                short,
                pad: total / 2,
            })
        }
        Padding::Valid => (long >= kernel).then(|| Geometry {
            long,
            short: (long - kernel) / stride + 1,
            pad: 0,
        }),
    }
}

fn geometry_from_short(short: usize, kernel: usize, stride: usize, padding: Padding) -> Geometry {
    let long = match padding {
        Padding::Same => short * stride,
        Padding::Valid => (short.max(1) - 1) * stride + kernel,
    };
    let g = geometry_from_long(long, kernel, stride, padding).expect("long side covers the kernel");
    debug_assert_eq!(g.short, short);
    g
}

/// Gradients of one layer's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerGrads {
    fn zeros(nw: usize, nb: usize) -> Self {
        Self {
            weights: vec![0.0; nw],
            bias: vec![0.0; nb],
        }
    }

    fn add_assign(&mut self, other: &LayerGrads) {
        self.weights.iter_mut().zip(&other.weights).for_each(|(a, b)| *a += b);
        self.bias.iter_mut().zip(&other.bias).for_each(|(a, b)| *a += b);
    }
}

/// Sums per-item gradients in batch order so results do not depend on
/// thread scheduling.
fn reduce_in_order(parts: Vec<(Vec<f64>, LayerGrads)>, nw: usize, nb: usize) -> (Vec<f64>, LayerGrads) {
    let mut grads = LayerGrads::zeros(nw, nb);
    let mut grad_x = Vec::new();
    for (gx, g) in parts {
        grad_x.extend_from_slice(&gx);
        grads.add_assign(&g);
    }
    (grad_x, grads)
}

fn check_channels(x: &Tensor3, expected: usize) -> Result<(), NnError> {
    if x.channels() != expected {
        return Err(NnError::ChannelMismatch {
            expected,
            got: x.channels(),
        });
    }
    Ok(())
}

fn check_same_shape(what: &str, a: &Tensor3, b: (usize, usize, usize)) -> Result<(), NnError> {
    if a.shape() != b {
        return Err(NnError::ShapeMismatch(format!(
            "{what} has shape {:?}, expected {b:?}",
            a.shape()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conv1DLayer {
    /// `(kernel_size, in_channels, out_channels)`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub kernel_size: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub stride: usize,
    pub padding: Padding,
    pub activation: Activation,
}

impl Conv1DLayer {
    pub fn new(
        kernel_size: usize,
        in_channels: usize,
        out_channels: usize,
        stride: usize,
        padding: Padding,
        activation: Activation,
    ) -> Result<Self, NnError> {
        validate_hyper(kernel_size, in_channels, out_channels, stride, padding)?;
        Ok(Self {
            weights: vec![0.0; kernel_size * in_channels * out_channels],
            bias: vec![0.0; out_channels],
            kernel_size,
            in_channels,
            out_channels,
            stride,
            padding,
            activation,
        })
    }

    pub fn output_length(&self, input_length: usize) -> Option<usize> {
        geometry_from_long(input_length, self.kernel_size, self.stride, self.padding).map(|g| g.short)
    }

    fn geometry(&self, input_length: usize) -> Result<Geometry, NnError> {
        geometry_from_long(input_length, self.kernel_size, self.stride, self.padding).ok_or_else(|| {
            NnError::ShapeMismatch(format!(
                "input length {input_length} is shorter than kernel {}",
                self.kernel_size
            ))
        })
    }

    fn forward_item(&self, x: &[f64], g: Geometry) -> Vec<f64> {
        let (cin, cout) = (self.in_channels, self.out_channels);
        let mut out = vec![0.0; g.short * cout];
        for (t, acc) in out.chunks_exact_mut(cout).enumerate() {
            acc.copy_from_slice(&self.bias);
            for k in 0..self.kernel_size {
                let Some(pos) = (self.stride * t + k).checked_sub(g.pad) else {
                    continue;
                };
                if pos >= g.long {
                    continue;
                }
                let xrow = &x[pos * cin..(pos + 1) * cin];
                for (c, &xv) in xrow.iter().enumerate() {
                    let wrow = &self.weights[(k * cin + c) * cout..(k * cin + c + 1) * cout];
                    for (a, &w) in acc.iter_mut().zip(wrow) {
                        *a += w * xv;
                    }
                }
            }
        }
        self.activation.apply(&mut out);
        out
    }

    pub fn forward(&self, x: &Tensor3) -> Result<Tensor3, NnError> {
        check_channels(x, self.in_channels)?;
        let g = self.geometry(x.length())?;
        let data: Vec<f64> = (0..x.batch())
            .into_par_iter()
            .map(|b| self.forward_item(x.item(b), g))
            .collect::<Vec<_>>()
            .concat();
        Ok(Tensor3::from_raw(data, x.batch(), g.short, self.out_channels))
    }

    fn backward_item(&self, x: &[f64], y: &[f64], gy: &[f64], g: Geometry) -> (Vec<f64>, LayerGrads) {
        let (cin, cout) = (self.in_channels, self.out_channels);
        let gz = self.activation.backward(y, gy);
        let mut gx = vec![0.0; g.long * cin];
        let mut grads = LayerGrads::zeros(self.weights.len(), cout);
        for (t, gzrow) in gz.chunks_exact(cout).enumerate() {
            grads.bias.iter_mut().zip(gzrow).for_each(|(b, v)| *b += v);
            for k in 0..self.kernel_size {
                let Some(pos) = (self.stride * t + k).checked_sub(g.pad) else {
                    continue;
                };
                if pos >= g.long {
                    continue;
                }
                for c in 0..cin {
                    let widx = (k * cin + c) * cout;
                    let wrow = &self.weights[widx..widx + cout];
                    let xv = x[pos * cin + c];
                    let gwrow = &mut grads.weights[widx..widx + cout];
                    let mut acc = 0.0;
                    for o in 0..cout {
                        gwrow[o] += xv * gzrow[o];
                        acc += wrow[o] * gzrow[o];
                    }
                    gx[pos * cin + c] += acc;
                }
            }
        }
        (gx, grads)
    }

    /// Gradients w.r.t. input, weights and bias given the forward input,
    /// the forward output and the gradient of the loss w.r.t. that output.
    pub fn backward(&self, x: &Tensor3, y: &Tensor3, grad_y: &Tensor3) -> Result<(Tensor3, LayerGrads), NnError> {
        check_channels(x, self.in_channels)?;
        let g = self.geometry(x.length())?;
        let out_shape = (x.batch(), g.short, self.out_channels);
        check_same_shape("forward output", y, out_shape)?;
        check_same_shape("output gradient", grad_y, out_shape)?;
        let parts: Vec<_> = (0..x.batch())
            .into_par_iter()
            .map(|b| self.backward_item(x.item(b), y.item(b), grad_y.item(b), g))
            .collect();
        let (gx, grads) = reduce_in_order(parts, self.weights.len(), self.out_channels);
        Ok((Tensor3::from_raw(gx, x.batch(), g.long, self.in_channels), grads))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conv1DTransposeLayer {
    /// `(kernel_size, out_channels, in_channels)`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub kernel_size: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub stride: usize,
    pub padding: Padding,
    pub activation: Activation,
}

impl Conv1DTransposeLayer {
    pub fn new(
        kernel_size: usize,
        in_channels: usize,
        out_channels: usize,
        stride: usize,
        padding: Padding,
        activation: Activation,
    ) -> Result<Self, NnError> {
        validate_hyper(kernel_size, in_channels, out_channels, stride, padding)?;
        Ok(Self {
            weights: vec![0.0; kernel_size * in_channels * out_channels],
            bias: vec![0.0; out_channels],
            kernel_size,
            in_channels,
            out_channels,
            stride,
            padding,
            activation,
        })
    }

    /// The transposed layer sharing `conv`'s weights, with no bias or activation.
    pub fn adjoint_of(conv: &Conv1DLayer) -> Self {
        Self {
            weights: conv.weights.clone(),
            bias: vec![0.0; conv.in_channels],
            kernel_size: conv.kernel_size,
            in_channels: conv.out_channels,
            out_channels: conv.in_channels,
            stride: conv.stride,
            padding: conv.padding,
            activation: Activation::None,
        }
    }

    pub fn output_length(&self, input_length: usize) -> usize {
        geometry_from_short(input_length, self.kernel_size, self.stride, self.padding).long
    }

    fn forward_item(&self, x: &[f64], g: Geometry) -> Vec<f64> {
        let (cin, cout) = (self.in_channels, self.out_channels);
        let mut out = Vec::with_capacity(g.long * cout);
        for _ in 0..g.long {
            out.extend_from_slice(&self.bias);
        }
        for (t, xrow) in x.chunks_exact(cin).enumerate() {
            for k in 0..self.kernel_size {
                let Some(pos) = (self.stride * t + k).checked_sub(g.pad) else {
                    continue;
                };
                if pos >= g.long {
                    continue;
                }
                let yrow = &mut out[pos * cout..(pos + 1) * cout];
                for (c, yv) in yrow.iter_mut().enumerate() {
                    let widx = (k * cout + c) * cin;
                    let wrow = &self.weights[widx..widx + cin];
                    *yv += wrow.iter().zip(xrow).map(|(w, x)| w * x).sum::<f64>();
                }
            }
        }
        self.activation.apply(&mut out);
        out
    }

    pub fn forward(&self, x: &Tensor3) -> Result<Tensor3, NnError> {
        check_channels(x, self.in_channels)?;
        let g = geometry_from_short(x.length(), self.kernel_size, self.stride, self.padding);
        let data: Vec<f64> = (0..x.batch())
            .into_par_iter()
            .map(|b| self.forward_item(x.item(b), g))
            .collect::<Vec<_>>()
            .concat();
        Ok(Tensor3::from_raw(data, x.batch(), g.long, self.out_channels))
    }

    fn backward_item(&self, x: &[f64], y: &[f64], gy: &[f64], g: Geometry) -> (Vec<f64>, LayerGrads) {
        let (cin, cout) = (self.in_channels, self.out_channels);
        let gz = self.activation.backward(y, gy);
        let mut gx = vec![0.0; g.short * cin];
        let mut grads = LayerGrads::zeros(self.weights.len(), cout);
        for gzrow in gz.chunks_exact(cout) {
            grads.bias.iter_mut().zip(gzrow).for_each(|(b, v)| *b += v);
        }
        for (t, xrow) in x.chunks_exact(cin).enumerate() {
            let gxrow = &mut gx[t * cin..(t + 1) * cin];
            for k in 0..self.kernel_size {
                let Some(pos) = (self.stride * t + k).checked_sub(g.pad) else {
                    continue;
                };
                if pos >= g.long {
                    continue;
                }
                let gzrow = &gz[pos * cout..(pos + 1) * cout];
                for (c, &gzv) in gzrow.iter().enumerate() {
                    let widx = (k * cout + c) * cin;
                    let wrow = &self.weights[widx..widx + cin];
                    let gwrow = &mut grads.weights[widx..widx + cin];
                    for o in 0..cin {
                        gwrow[o] += gzv * xrow[o];
                        gxrow[o] += wrow[o] * gzv;
                    }
                }
            }
        }
        (gx, grads)
    }

    pub fn backward(&self, x: &Tensor3, y: &Tensor3, grad_y: &Tensor3) -> Result<(Tensor3, LayerGrads), NnError> {
        check_channels(x, self.in_channels)?;
        let g = geometry_from_short(x.length(), self.kernel_size, self.stride, self.padding);
        let out_shape = (x.batch(), g.long, self.out_channels);
        check_same_shape("forward output", y, out_shape)?;
        check_same_shape("output gradient", grad_y, out_shape)?;
        let parts: Vec<_> = (0..x.batch())
            .into_par_iter()
            .map(|b| self.backward_item(x.item(b), y.item(b), grad_y.item(b), g))
            .collect();
        let (gx, grads) = reduce_in_order(parts, self.weights.len(), self.out_channels);
        Ok((Tensor3::from_raw(gx, x.batch(), g.short, self.in_channels), grads))
    }
}

fn validate_hyper(kernel: usize, cin: usize, cout: usize, stride: usize, padding: Padding) -> Result<(), NnError> {
    if kernel == 0 || cin == 0 || cout == 0 || stride == 0 {
        return Err(NnError::InvalidArchitecture(
            "kernel size, channel counts and stride must be positive".into(),
        ));
    }
    if padding == Padding::Same && kernel.is_multiple_of(2) {
        return Err(NnError::InvalidArchitecture(format!(
            "`same` padding needs an odd kernel, got {kernel}"
        )));
    }
    Ok(())
}
