use crate::{Result, TrainError};

/// Coefficient of determination 1 - SSres/SStot of one sample's
/// prediction against its target.
pub fn r_squared(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(TrainError::InvalidArgument("pred/target length mismatch".into()));
    }
    let mean = target.iter().sum::<f64>() / target.len() as f64;
    let ss_tot: f64 = target.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(TrainError::InvalidArgument("constant target, R^2 undefined".into()));
    }
    let ss_res: f64 = pred.iter().zip(target).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Average R^2 over samples; each element of the slices is one
/// sample's (pred, target) pair.
pub fn mean_r_squared(samples: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    if samples.is_empty() {
        return Err(TrainError::InvalidArgument("no samples".into()));
    }
    let mut acc = 0.0;
    for (pred, target) in samples {
        acc += r_squared(pred, target)?;
    }
    Ok(acc / samples.len() as f64)
}
