//! Evaluation estimators for the three causal tasks.
//!
//! Effect estimation is scored by MSE against the true effect (or the
//! binned variant when only experimental data is available), effect
//! ordering by a level-based AUUC estimate, and effect classification by
//! the inverse-propensity-weighted value of the induced treatment policy.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ExperimentDataset, SimulatedTruth};

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("bin {bin} has {treated} treated and {control} control rows; both arms are required")]
    EmptyArmInBin {
        bin: usize,
        treated: usize,
        control: usize,
    },
    #[error("number of levels must be at least 2, got {0}")]
    TooFewLevels(usize),
}

/// Treatment rule parameters: per-treatment cost, score threshold, and an
/// optional top-fraction rule that overrides the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    pub cost: f64,
    pub threshold: f64,
    pub top_fraction: Option<f64>,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            cost: 0.0,
            threshold: 0.0,
            top_fraction: None,
        }
    }
}

impl PolicyConfig {
    pub fn actions(&self, scores: &[f64]) -> Vec<bool> {
        match self.top_fraction {
            Some(q) => topq_actions(scores, q),
            None => threshold_actions(scores, self.threshold),
        }
    }
}

/// Rank of each observation's level: `floor(m · F)`, where `F` is the
/// fraction of observations with a strictly smaller score. Tied scores
/// share a level.
pub fn score_levels(scores: &[f64], m: usize) -> Vec<usize> {
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut levels = vec![0; n];
    let mut less = 0;
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && scores[order[pos - 1]] < scores[i] {
            less = pos;
        }
        levels[i] = m * less / n;
    }
    levels
}

/// Level structure of a scored sample with cumulative arm counts and
/// outcome sums over levels `>= r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPartition {
    m: usize,
    level_of: Vec<usize>,
    cum_count: Vec<[usize; 2]>,
    cum_sum: Vec<[f64; 2]>,
}

/// AUUC value plus the ranks where one arm was empty and the uplift was
/// taken as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AuucEstimate {
    pub value: f64,
    pub degenerate_ranks: Vec<usize>,
}

impl LevelPartition {
    pub fn from_parts(scores: &[f64], treatment: &[bool], outcome: &[f64], m: usize) -> Self {
        assert_eq!(scores.len(), treatment.len());
        assert_eq!(scores.len(), outcome.len());
        let level_of = score_levels(scores, m);
        let mut cum_count = vec![[0usize; 2]; m];
        let mut cum_sum = vec![[0.0f64; 2]; m];
        for ((&r, &t), &y) in level_of.iter().zip(treatment).zip(outcome) {
            cum_count[r][t as usize] += 1;
            cum_sum[r][t as usize] += y;
        }
        for r in (0..m.saturating_sub(1)).rev() {
            for t in 0..2 {
                cum_count[r][t] += cum_count[r + 1][t];
                cum_sum[r][t] += cum_sum[r + 1][t];
            }
        }
        Self {
            m,
            level_of,
            cum_count,
            cum_sum,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn level_of(&self) -> &[usize] {
        &self.level_of
    }

    /// `N(r, t)`: rows of arm `t` in levels `>= r`.
    pub fn count(&self, r: usize, treated: bool) -> usize {
        self.cum_count[r][treated as usize]
    }

    /// `R(r, t)`: outcome sum of arm `t` over levels `>= r`.
    pub fn sum(&self, r: usize, treated: bool) -> f64 {
        self.cum_sum[r][treated as usize]
    }

    /// Difference in arm means over levels `>= r`; `None` if an arm is empty.
    pub fn uplift(&self, r: usize) -> Option<f64> {
        let [n0, n1] = self.cum_count[r];
        if n0 == 0 || n1 == 0 {
            return None;
        }
        let [s0, s1] = self.cum_sum[r];
        Some(s1 / n1 as f64 - s0 / n0 as f64)
    }

    pub fn auuc(&self) -> AuucEstimate {
        let m = self.m as f64;
        let mut value = 0.0;
        let mut degenerate_ranks = Vec::new();
        for q in 1..=self.m {
            let r = self.m - q;
            match self.uplift(r) {
                Some(v) => value += q as f64 / m * v,
                None => degenerate_ranks.push(r),
            }
        }
        AuucEstimate {
            value,
            degenerate_ranks,
        }
    }
}

pub fn build_levels(scores: &[f64], d: &ExperimentDataset, m: usize) -> LevelPartition {
    LevelPartition::from_parts(scores, d.treatment(), d.outcome(), m)
}

/// Level-based AUUC estimate with diagnostics.
pub fn auuc_estimate(
    scores: &[f64],
    d: &ExperimentDataset,
    m: usize,
) -> Result<AuucEstimate, MetricError> {
    if m < 2 {
        return Err(MetricError::TooFewLevels(m));
    }
    let est = build_levels(scores, d, m).auuc();
    if !est.degenerate_ranks.is_empty() {
        log::warn!(
            "AUUC: ranks {:?} have an empty arm; their uplift is taken as 0",
            est.degenerate_ranks
        );
    }
    Ok(est)
}

pub fn auuc(scores: &[f64], d: &ExperimentDataset, m: usize) -> Result<f64, MetricError> {
    auuc_estimate(scores, d, m).map(|e| e.value)
}

/// Mean squared error against the true conditional effect.
pub fn mse_true(scores: &[f64], truth: &SimulatedTruth) -> f64 {
    assert_eq!(scores.len(), truth.len());
    let n = scores.len() as f64;
    scores
        .iter()
        .zip(&truth.cate)
        .map(|(s, b)| (b - s).powi(2))
        .sum::<f64>()
        / n
}

/// MSE between per-bin model-free effects and per-bin mean scores, with
/// bins taken as percentile groups of `binning_scores`.
pub fn binned_mse(
    scores: &[f64],
    binning_scores: &[f64],
    d: &ExperimentDataset,
    n_bins: usize,
) -> Result<f64, MetricError> {
    assert_eq!(scores.len(), d.n_rows());
    assert_eq!(binning_scores.len(), d.n_rows());
    let bins = score_levels(binning_scores, n_bins);
    let mut count = vec![[0usize; 2]; n_bins];
    let mut ysum = vec![[0.0f64; 2]; n_bins];
    let mut ssum = vec![0.0f64; n_bins];
    for i in 0..d.n_rows() {
        let (b, t) = (bins[i], d.treatment()[i] as usize);
        count[b][t] += 1;
        ysum[b][t] += d.outcome()[i];
        ssum[b] += scores[i];
    }
    let mut total = 0.0;
    let mut used = 0usize;
    for b in 0..n_bins {
        let [n0, n1] = count[b];
        if n0 + n1 == 0 {
            continue;
        }
        if n0 == 0 || n1 == 0 {
            return Err(MetricError::EmptyArmInBin {
                bin: b,
                treated: n1,
                control: n0,
            });
        }
        let effect = ysum[b][1] / n1 as f64 - ysum[b][0] / n0 as f64;
        let mean_score = ssum[b] / (n0 + n1) as f64;
        total += (effect - mean_score).powi(2);
        used += 1;
    }
    Ok(total / used as f64)
}

/// Inverse-propensity estimate of the expected outcome under `actions`,
/// net of the per-treatment cost.
pub fn policy_value(actions: &[bool], d: &ExperimentDataset, cfg: &PolicyConfig) -> f64 {
    assert_eq!(actions.len(), d.n_rows());
    let mut total = 0.0;
    for ((&a, &t), &y) in actions.iter().zip(d.treatment()).zip(d.outcome()) {
        if a == t {
            total += y / d.arm_probability(t);
        }
        if a {
            total -= cfg.cost;
        }
    }
    total / d.n_rows() as f64
}

/// Expected policy outcome computed from known potential outcomes.
pub fn policy_value_true(actions: &[bool], truth: &SimulatedTruth, cost: f64) -> f64 {
    assert_eq!(actions.len(), truth.len());
    let total: f64 = actions
        .iter()
        .enumerate()
        .map(|(i, &a)| if a { truth.y1[i] - cost } else { truth.y0[i] })
        .sum();
    total / truth.len() as f64
}

pub fn threshold_actions(scores: &[f64], threshold: f64) -> Vec<bool> {
    scores.iter().map(|&s| s > threshold).collect()
}

/// Treats exactly `ceil(q·n)` rows with the highest scores; ties at the
/// cutoff go to the lower row index.
pub fn topq_actions(scores: &[f64], q: f64) -> Vec<bool> {
    assert!(q > 0.0 && q <= 1.0, "top fraction must lie in (0, 1]");
    let n = scores.len();
    let k = ((q * n as f64).ceil() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| match scores[b].total_cmp(&scores[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    let mut actions = vec![false; n];
    for &i in &order[..k] {
        actions[i] = true;
    }
    actions
}

/// Effect-weighted misclassification against the true effects.
pub fn ewm_true(scores: &[f64], truth: &SimulatedTruth, cfg: &PolicyConfig) -> f64 {
    assert_eq!(scores.len(), truth.len());
    let total: f64 = scores
        .iter()
        .zip(&truth.cate)
        .filter(|(&s, &b)| (b > cfg.cost) != (s > cfg.threshold))
        .map(|(_, &b)| (b - cfg.cost).abs())
        .sum();
    total / scores.len() as f64
}
