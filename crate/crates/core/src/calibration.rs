//! Effect calibration: a single scale and shift mapping scores onto the
//! effect scale.
//!
//! The fit regresses the inverse-propensity transformed outcome on the
//! score by ordinary least squares. Under randomization the transformed
//! outcome has conditional mean equal to the effect, so the fit targets the
//! best affine approximation of the effect by the score.

use serde::{Deserialize, Serialize};

use crate::data::{transformed_outcome, ExperimentDataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationParams {
    pub scale: f64,
    pub shift: f64,
}

impl CalibrationParams {
    pub const IDENTITY: Self = Self {
        scale: 1.0,
        shift: 0.0,
    };

    pub fn apply(&self, score: f64) -> f64 {
        self.scale * score + self.shift
    }
}

pub fn fit_calibration(scores: &[f64], d: &ExperimentDataset) -> CalibrationParams {
    assert_eq!(scores.len(), d.n_rows());
    fit_affine(scores, &transformed_outcome(d))
}

/// Least-squares line of `target` on `scores`. A constant score vector
/// yields a zero scale and the target mean as the shift.
pub(crate) fn fit_affine(scores: &[f64], target: &[f64]) -> CalibrationParams {
    let n = scores.len() as f64;
    let mean_t = target.iter().sum::<f64>() / n;
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        });
    if lo == hi {
        return CalibrationParams {
            scale: 0.0,
            shift: mean_t,
        };
    }
    let mean_s = scores.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&s, &t) in scores.iter().zip(target) {
        let ds = s - mean_s;
        sxx += ds * ds;
        sxy += ds * (t - mean_t);
    }
    let scale = sxy / sxx;
    CalibrationParams {
        scale,
        shift: mean_t - scale * mean_s,
    }
}

pub fn apply_calibration(p: &CalibrationParams, scores: &[f64]) -> Vec<f64> {
    scores.iter().map(|&s| p.apply(s)).collect()
}
