//! Effect-estimation fine-tuning and the causal-tree baseline.
//!
//! Each leaf corrects the mean bias of the incoming score,
//! `δ̂ = mean(θ) − (ȳ₁ − ȳ₀)`, and splits maximize the drop in the plug-in
//! excess MSE `−δ̂²`. Replacing the score by zero turns the same machinery
//! into an adaptive causal tree whose leaves estimate `ȳ₁ − ȳ₀` directly.

use crate::calibration::{apply_calibration, fit_calibration};
use crate::data::ExperimentDataset;
use crate::finetuner::{feature_sources, FineTuner, FineTunerKind, Stage};
use crate::tree::{grow_tree, FitConfig, FitData, FitError, SplitCriterion, TreeNode};

/// Mean-bias correction of `data.score` over `rows`.
pub fn ee_leaf_correction(data: &FitData, rows: &[usize]) -> Result<f64, FitError> {
    let mut n = [0usize; 2];
    let mut y = [0.0f64; 2];
    let mut s = 0.0;
    for &i in rows {
        let t = data.treatment[i] as usize;
        n[t] += 1;
        y[t] += data.outcome[i];
        s += data.score[i];
    }
    if n[0] == 0 || n[1] == 0 {
        return Err(FitError::EmptyArm);
    }
    let effect = y[1] / n[1] as f64 - y[0] / n[0] as f64;
    Ok(s / rows.len() as f64 - effect)
}

/// `−δ̂_P² + w_L·δ̂_L² + w_R·δ̂_R²` with size weights relative to the parent.
pub fn ee_split_gain(
    data: &FitData,
    parent: &[usize],
    left: &[usize],
    right: &[usize],
) -> Result<f64, FitError> {
    let np = parent.len() as f64;
    let dp = ee_leaf_correction(data, parent)?;
    let dl = ee_leaf_correction(data, left)?;
    let dr = ee_leaf_correction(data, right)?;
    Ok(-dp * dp + left.len() as f64 / np * dl * dl + right.len() as f64 / np * dr * dr)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EeCriterion;

impl SplitCriterion for EeCriterion {
    fn leaf_value(&self, data: &FitData, rows: &[usize]) -> Result<f64, FitError> {
        ee_leaf_correction(data, rows)
    }

    fn split_gain(
        &self,
        data: &FitData,
        parent: &[usize],
        left: &[usize],
        right: &[usize],
    ) -> Result<f64, FitError> {
        ee_split_gain(data, parent, left, right)
    }
}

/// Tree prediction for every row of `data`.
pub fn predict_rows(tree: &TreeNode, data: &FitData) -> Vec<f64> {
    (0..data.n_rows())
        .map(|i| tree.predict(|j| data.value(j, i)))
        .collect()
}

/// Pre-calibration, a correction tree over the features plus the calibrated
/// score, then post-calibration.
pub fn fit_ee(d: &ExperimentDataset, cfg: &FitConfig) -> Result<FineTuner, FitError> {
    cfg.validate()?;
    let pre = fit_calibration(d.base_score(), d);
    let calibrated = apply_calibration(&pre, d.base_score());
    let data = FitData::with_score(d, &calibrated, true);
    let tree = grow_tree(&data, (0..d.n_rows()).collect(), &EeCriterion, cfg)?;
    let corrected: Vec<f64> = calibrated
        .iter()
        .zip(predict_rows(&tree, &data))
        .map(|(s, delta)| s - delta)
        .collect();
    let post = fit_calibration(&corrected, d);
    let stages = vec![
        Stage::Calibration(pre),
        Stage::Correction {
            features: feature_sources(d, true),
            tree,
            zero_base: false,
        },
        Stage::Calibration(post),
    ];
    Ok(FineTuner::new(FineTunerKind::Ee, stages).with_metadata(cfg, d))
}

/// Causal-tree baseline. The leaf payload is minus the leaf's
/// difference in arm means, so the stage output is the effect estimate.
/// With `include_base_as_feature` the raw base score is a split candidate.
pub fn fit_causal_tree(
    d: &ExperimentDataset,
    include_base_as_feature: bool,
    cfg: &FitConfig,
) -> Result<FineTuner, FitError> {
    cfg.validate()?;
    let zeros = vec![0.0; d.n_rows()];
    let mut columns: Vec<&[f64]> = d.columns().iter().map(Vec::as_slice).collect();
    if include_base_as_feature {
        columns.push(d.base_score());
    }
    let data = FitData::new(
        columns,
        d.treatment(),
        d.outcome(),
        &zeros,
        d.propensity_treated(),
    );
    let tree = grow_tree(&data, (0..d.n_rows()).collect(), &EeCriterion, cfg)?;
    let effects: Vec<f64> = predict_rows(&tree, &data).iter().map(|v| -v).collect();
    let post = fit_calibration(&effects, d);
    let kind = if include_base_as_feature {
        FineTunerKind::CtBs
    } else {
        FineTunerKind::Ct
    };
    let stages = vec![
        Stage::Correction {
            features: feature_sources(d, include_base_as_feature),
            tree,
            zero_base: true,
        },
        Stage::Calibration(post),
    ];
    Ok(FineTuner::new(kind, stages).with_metadata(cfg, d))
}
