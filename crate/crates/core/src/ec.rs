//! Effect-classification fine-tuning.
//!
//! Each leaf holds a decision boundary `δ̂` on the incoming score chosen to
//! maximize the IPW value of the policy `a = 1[θ > δ̂]`. The fine-tuned
//! score `θ − δ̂` is positive exactly for the rows the leaf treats.

use crate::calibration::fit_calibration;
use crate::data::ExperimentDataset;
use crate::ee::predict_rows;
use crate::finetuner::{feature_sources, FineTuner, FineTunerKind, Stage};
use crate::tree::{grow_tree, FitConfig, FitData, FitError, SplitCriterion};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdFit {
    pub boundary: f64,
    /// IPW policy value (net of cost) on the subset.
    pub value: f64,
    pub n_treated: usize,
}

/// Optimal boundary for `rows`, scanning treat-none then each distinct score
/// from the top. `epsilon` only matters when the best boundary must sit
/// just below a negative score.
pub fn find_optimal_threshold(
    data: &FitData,
    rows: &[usize],
    cost: f64,
    epsilon: f64,
) -> ThresholdFit {
    let mut sorted = rows.to_vec();
    sort_by_score_desc(data.score, &mut sorted);
    threshold_scan_sorted(data, &sorted, cost, epsilon)
}

pub(crate) fn sort_by_score_desc(score: &[f64], rows: &mut [usize]) {
    rows.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
}

/// Same as [`find_optimal_threshold`] for rows already sorted by descending
/// score.
pub fn threshold_scan_sorted(
    data: &FitData,
    rows: &[usize],
    cost: f64,
    epsilon: f64,
) -> ThresholdFit {
    let n = rows.len();
    if n == 0 {
        return ThresholdFit {
            boundary: 0.0,
            value: 0.0,
            n_treated: 0,
        };
    }
    debug_assert!(rows
        .windows(2)
        .all(|w| data.score[w[0]] >= data.score[w[1]]));
    let p1 = data.propensity;
    let p0 = 1.0 - p1;
    let score = |k: usize| data.score[rows[k]];

    let mut running: f64 = rows
        .iter()
        .filter(|&&i| !data.treatment[i])
        .map(|&i| data.outcome[i] / p0)
        .sum();
    let mut best = (running, 0usize);
    let mut pos = 0;
    while pos < n {
        let s = score(pos);
        while pos < n && score(pos) == s {
            let i = rows[pos];
            let y = data.outcome[i];
            running += if data.treatment[i] { y / p1 } else { -y / p0 } - cost;
            pos += 1;
        }
        if running > best.0 {
            best = (running, pos);
        }
    }

    let n_treated = best.1;
    let boundary = if n_treated == 0 {
        closest_to_zero(score(0), f64::INFINITY, epsilon)
    } else {
        let lo = if n_treated < n {
            score(n_treated)
        } else {
            f64::NEG_INFINITY
        };
        closest_to_zero(lo, score(n_treated - 1), epsilon)
    };

    let total: f64 = rows
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let treat = k < n_treated;
            let y = data.outcome[i];
            let hit = match (treat, data.treatment[i]) {
                (true, true) => y / p1,
                (false, false) => y / p0,
                _ => 0.0,
            };
            hit - if treat { cost } else { 0.0 }
        })
        .sum();
    ThresholdFit {
        boundary,
        value: total / n as f64,
        n_treated,
    }
}

/// Point of `[lo, hi)` with the smallest magnitude. The open upper end is
/// approached by a relative `epsilon`.
fn closest_to_zero(lo: f64, hi: f64, epsilon: f64) -> f64 {
    if lo <= 0.0 && 0.0 < hi {
        0.0
    } else if lo > 0.0 {
        lo
    } else {
        let below = hi - epsilon * hi.abs().max(1.0);
        if below > lo && below < hi {
            below
        } else {
            lo + (hi - lo) / 2.0
        }
    }
}

/// `w_L·π̂_L + w_R·π̂_R − π̂_P`, each at its own optimal boundary.
pub fn ec_split_gain(
    data: &FitData,
    parent: &[usize],
    left: &[usize],
    right: &[usize],
    cost: f64,
) -> f64 {
    let v = |rows: &[usize]| find_optimal_threshold(data, rows, cost, 1e-6).value;
    gain_from_values(
        parent.len(),
        left.len(),
        right.len(),
        v(parent),
        v(left),
        v(right),
    )
}

fn gain_from_values(np: usize, nl: usize, nr: usize, vp: f64, vl: f64, vr: f64) -> f64 {
    let np = np as f64;
    nl as f64 / np * vl + nr as f64 / np * vr - vp
}

/// Tree criterion for EC. Expects every row set to be sorted by descending
/// score, which holds when the root is sorted because partitions keep order.
#[derive(Debug, Clone, Copy)]
pub struct EcCriterion {
    pub cost: f64,
    pub epsilon: f64,
}

impl SplitCriterion for EcCriterion {
    fn leaf_value(&self, data: &FitData, rows: &[usize]) -> Result<f64, FitError> {
        Ok(threshold_scan_sorted(data, rows, self.cost, self.epsilon).boundary)
    }

    fn split_gain(
        &self,
        data: &FitData,
        parent: &[usize],
        left: &[usize],
        right: &[usize],
    ) -> Result<f64, FitError> {
        let v = |rows: &[usize]| threshold_scan_sorted(data, rows, self.cost, self.epsilon).value;
        Ok(gain_from_values(
            parent.len(),
            left.len(),
            right.len(),
            v(parent),
            v(left),
            v(right),
        ))
    }

    fn check_root(
        &self,
        _data: &FitData,
        rows: &[usize],
        _cfg: &FitConfig,
    ) -> Result<(), FitError> {
        if rows.is_empty() {
            return Err(FitError::TooFewRows {
                required: 1,
                got: 0,
            });
        }
        Ok(())
    }
}

/// Boundary tree on the base score with the features plus the base score as
/// split variables, then post-calibration.
pub fn fit_ec(d: &ExperimentDataset, cfg: &FitConfig) -> Result<FineTuner, FitError> {
    cfg.validate()?;
    let data = FitData::with_score(d, d.base_score(), true);
    let mut rows: Vec<usize> = (0..d.n_rows()).collect();
    sort_by_score_desc(d.base_score(), &mut rows);
    let criterion = EcCriterion {
        cost: cfg.cost,
        epsilon: cfg.epsilon,
    };
    let tree = grow_tree(&data, rows, &criterion, cfg)?;
    let tuned: Vec<f64> = d
        .base_score()
        .iter()
        .zip(predict_rows(&tree, &data))
        .map(|(s, b)| s - b)
        .collect();
    let post = fit_calibration(&tuned, d);
    let stages = vec![
        Stage::Correction {
            features: feature_sources(d, true),
            tree,
            zero_base: false,
        },
        Stage::Calibration(post),
    ];
    Ok(FineTuner::new(FineTunerKind::Ec, stages).with_metadata(cfg, d))
}
