//! Max-norm projection of per-unit weight vectors.

pub const DEFAULT_MAX_NORM: f64 = 2.0;

/// Describes where one output unit's fan-in weights sit in a flat weight
/// array: element `(a, u, i)` lives at `(a * units + u) * inner + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitLayout {
    pub outer: usize,
    pub units: usize,
    pub inner: usize,
}

impl UnitLayout {
    /// A single unit whose weights are the whole array.
    pub fn single(len: usize) -> Self {
        Self {
            outer: len,
            units: 1,
            inner: 1,
        }
    }

    fn len(&self) -> usize {
        self.outer * self.units * self.inner
    }
}

/// L2 norm of every unit's weight vector.
pub fn unit_norms(weights: &[f64], layout: UnitLayout) -> Vec<f64> {
    assert_eq!(weights.len(), layout.len(), "layout does not cover the weights");
    // Scaled by the largest magnitude so huge weights do not overflow.
    let mut peak = vec![0.0f64; layout.units];
    for (a_u, block) in weights.chunks_exact(layout.inner).enumerate() {
        let p = &mut peak[a_u % layout.units];
        *p = block.iter().fold(*p, |m, w| m.max(w.abs()));
    }
    let mut sq = vec![0.0; layout.units];
    for (a_u, block) in weights.chunks_exact(layout.inner).enumerate() {
        let u = a_u % layout.units;
        if peak[u] > 0.0 && peak[u].is_finite() {
            sq[u] += block.iter().map(|w| (w / peak[u]).powi(2)).sum::<f64>();
        }
    }
    peak.into_iter()
        .zip(sq)
        .map(|(p, s)| if p.is_finite() { p * s.sqrt() } else { p })
        .collect()
}

/// Rescales each unit whose norm exceeds `max_norm` back onto the ball.
pub fn apply_max_norm(weights: &mut [f64], layout: UnitLayout, max_norm: f64) {
    assert!(max_norm > 0.0, "max_norm must be positive");
    let norms = unit_norms(weights, layout);
    let scales: Vec<f64> = norms
        .iter()
        .map(|&n| if n > max_norm { max_norm / n } else { 1.0 })
        .collect();
    if scales.iter().all(|&s| s == 1.0) {
        return;
    }
    for (a_u, block) in weights.chunks_exact_mut(layout.inner).enumerate() {
        let s = scales[a_u % layout.units];
        if s != 1.0 {
            block.iter_mut().for_each(|w| *w *= s);
        }
    }
}
