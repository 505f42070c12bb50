use super::NnError;

/// Dense `(batch, length, channels)` tensor, channels fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    data: Vec<f64>,
    batch: usize,
    length: usize,
    channels: usize,
}

impl Tensor3 {
    pub fn zeros(batch: usize, length: usize, channels: usize) -> Self {
        Self {
            data: vec![0.0; batch * length * channels],
            batch,
            length,
            channels,
        }
    }

    pub fn from_vec(data: Vec<f64>, batch: usize, length: usize, channels: usize) -> Result<Self, NnError> {
        if data.len() != batch * length * channels {
            return Err(NnError::ShapeMismatch(format!(
                "{} values cannot form a ({batch}, {length}, {channels}) tensor",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(NnError::NonFinite(format!("tensor element {i} is {}", data[i])));
        }
        Ok(Self {
            data,
            batch,
            length,
            channels,
        })
    }

    /// Skips the finiteness scan; for internal results whose shape is known.
    pub(crate) fn from_raw(data: Vec<f64>, batch: usize, length: usize, channels: usize) -> Self {
        debug_assert_eq!(data.len(), batch * length * channels);
        Self {
            data,
            batch,
            length,
            channels,
        }
    }

    /// Stacks equal-length mono signals into a `(n, length, 1)` batch.
    pub fn from_signals<S: AsRef<[f64]>>(signals: &[S]) -> Result<Self, NnError> {
        let length = signals.first().map_or(0, |s| s.as_ref().len());
        if signals.iter().any(|s| s.as_ref().len() != length) {
            return Err(NnError::ShapeMismatch(
                "signals in a batch must share one length".into(),
            ));
        }
        let data = signals.iter().flat_map(|s| s.as_ref().iter().copied()).collect();
        Self::from_vec(data, signals.len(), length, 1)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.batch, self.length, self.channels)
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Contiguous `(length, channels)` block of one batch item.
    pub fn item(&self, b: usize) -> &[f64] {
        let n = self.length * self.channels;
        &self.data[b * n..(b + 1) * n]
    }

    pub fn at(&self, b: usize, t: usize, c: usize) -> f64 {
        self.data[(b * self.length + t) * self.channels + c]
    }

    pub fn dot(&self, other: &Tensor3) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }
}
