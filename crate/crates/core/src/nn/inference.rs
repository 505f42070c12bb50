use super::{AutoencoderModel, NnError, Tensor3};

const INFERENCE_BATCH: usize = 8;

/// Runs the model over a whole unit-range signal in non-overlapping windows.
///
/// The signal is cut into `window_len` chunks; the final short chunk is
/// zero-padded up to the model's downsampling factor, and the output is
/// trimmed back to the input length.
pub fn denoise_samples(model: &AutoencoderModel, samples: &[f64], window_len: usize) -> Result<Vec<f64>, NnError> {
    let factor = model.arch().downsampling_factor();
    if window_len == 0 || !window_len.is_multiple_of(factor) {
        return Err(NnError::LengthNotDivisible {
            length: window_len,
            factor,
        });
    }
    let full = samples.len() / window_len;
    let mut out = Vec::with_capacity(samples.len() + factor);
    let windows: Vec<&[f64]> = samples.chunks_exact(window_len).collect();
    for group in windows.chunks(INFERENCE_BATCH) {
        let (y, _) = model.forward(&Tensor3::from_signals(group)?)?;
        out.extend_from_slice(y.data());
    }
    let tail = &samples[full * window_len..];
    if !tail.is_empty() {
        let mut padded = tail.to_vec();
        padded.resize(tail.len().div_ceil(factor) * factor, 0.0);
        let (y, _) = model.forward(&Tensor3::from_signals(&[padded])?)?;
        out.extend_from_slice(&y.data()[..tail.len()]);
    }
    Ok(out)
}
