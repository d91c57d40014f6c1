//! Scalar quality measures shared by the tasks.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Threshold used to binarize frames with values in [0, 1].
pub const BINARIZE_AT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub nrmse: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_agreement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery_rate: Option<f64>,
    /// `None` when the prediction never diverged.
    pub divergence_horizon: Option<usize>,
}

/// Root-mean-square error normalised by the target's (population) variance.
pub fn nrmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::dim("nrmse series", y_true.len(), y_pred.len()));
    }
    if y_true.len() < 2 {
        return Err(Error::InvalidParam("nrmse needs at least two samples".into()));
    }
    let len = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / len;
    let var = y_true.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / len;
    if !(var > 0.0) {
        return Err(Error::InvalidParam("nrmse target has zero variance".into()));
    }
    let mse = y_true
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / len;
    Ok((mse / var).sqrt())
}

/// Fraction of samples where prediction and target share a sign.
pub fn sign_agreement(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::dim("sign agreement series", y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(Error::InvalidParam("sign agreement of empty series".into()));
    }
    let agree = y_true
        .iter()
        .zip(y_pred)
        .filter(|(a, b)| a.signum() == b.signum())
        .count();
    Ok(agree as f64 / y_true.len() as f64)
}

/// Fraction of pixels on which the binarized frames agree.
pub fn pixel_accuracy(truth: &[f64], recovered: &[f64]) -> Result<f64> {
    if truth.len() != recovered.len() {
        return Err(Error::dim("frame size", truth.len(), recovered.len()));
    }
    if truth.is_empty() {
        return Err(Error::InvalidParam("empty frame".into()));
    }
    let hits = truth
        .iter()
        .zip(recovered)
        .filter(|(a, b)| (**a > BINARIZE_AT) == (**b > BINARIZE_AT))
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Fraction of frames whose binarized recovery matches the truth on at
/// least `pixel_thresh` of the pixels.
pub fn recovery_rate<T, R>(truth: &[T], recovered: &[R], pixel_thresh: f64) -> Result<f64>
where
    T: AsRef<[f64]>,
    R: AsRef<[f64]>,
{
    if truth.len() != recovered.len() {
        return Err(Error::dim("frame count", truth.len(), recovered.len()));
    }
    if truth.is_empty() {
        return Err(Error::InvalidParam("recovery rate of zero frames".into()));
    }
    let mut good = 0usize;
    for (t, r) in truth.iter().zip(recovered) {
        if pixel_accuracy(t.as_ref(), r.as_ref())? >= pixel_thresh {
            good += 1;
        }
    }
    Ok(good as f64 / truth.len() as f64)
}

/// First index from which `|y_true − y_pred| > epsilon` holds for `hold`
/// consecutive steps.
pub fn divergence_horizon(y_true: &[f64], y_pred: &[f64], epsilon: f64, hold: usize) -> Option<usize> {
    let hold = hold.max(1);
    let mut run = 0usize;
    for (t, (a, b)) in y_true.iter().zip(y_pred).enumerate() {
        // NaN predictions count as diverged.
        if !((a - b).abs() <= epsilon) {
            run += 1;
            if run == hold {
                return Some(t + 1 - hold);
            }
        } else {
            run = 0;
        }
    }
    None
}
