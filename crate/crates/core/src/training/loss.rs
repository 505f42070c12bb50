use super::TrainError;

/// Predictions are clamped into `[EPS, 1 - EPS]` before taking logs.
pub const BCE_CLAMP_EPS: f64 = 1e-7;

fn check_shapes(target: &[f64], prediction: &[f64]) -> Result<(), TrainError> {
    if target.len() != prediction.len() || target.is_empty() {
        return Err(TrainError::ShapeMismatch {
            target: target.len(),
            prediction: prediction.len(),
        });
    }
    Ok(())
}

fn clamp(p: f64) -> f64 {
    p.clamp(BCE_CLAMP_EPS, 1.0 - BCE_CLAMP_EPS)
}

/// Sum (not mean) of elementwise binary cross-entropy.
pub(crate) fn bce_sum(target: &[f64], prediction: &[f64]) -> f64 {
    target
        .iter()
        .zip(prediction)
        .map(|(&y, &p)| {
            let p = clamp(p);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum()
}

/// Binary cross-entropy averaged over every element.
pub fn bce_loss(target: &[f64], prediction: &[f64]) -> Result<f64, TrainError> {
    check_shapes(target, prediction)?;
    Ok(bce_sum(target, prediction) / target.len() as f64)
}

/// Derivative of [`bce_loss`] with respect to each prediction.
pub fn bce_grad(target: &[f64], prediction: &[f64]) -> Result<Vec<f64>, TrainError> {
    check_shapes(target, prediction)?;
    let n = target.len() as f64;
    Ok(target
        .iter()
        .zip(prediction)
        .map(|(&y, &p)| {
            let p = clamp(p);
            (-y / p + (1.0 - y) / (1.0 - p)) / n
        })
        .collect())
}

pub fn mse_loss(target: &[f64], prediction: &[f64]) -> Result<f64, TrainError> {
    check_shapes(target, prediction)?;
    let sum: f64 = target.iter().zip(prediction).map(|(y, p)| (y - p).powi(2)).sum();
    Ok(sum / target.len() as f64)
}

pub fn mse_grad(target: &[f64], prediction: &[f64]) -> Result<Vec<f64>, TrainError> {
    check_shapes(target, prediction)?;
    let n = target.len() as f64;
    Ok(target.iter().zip(prediction).map(|(y, p)| 2.0 * (p - y) / n).collect())
}
