//! Greedy binary-tree induction with pluggable split criteria.
//!
//! The same engine grows the effect-estimation, effect-classification and
//! causal-tree models. A criterion supplies the leaf payload and the gain of
//! a candidate split; the engine owns split enumeration, stopping rules and
//! deterministic tie-breaking.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, ExperimentDataset};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("need at least {required} rows, got {got}")]
    TooFewRows { required: usize, got: usize },
    #[error("{arm} arm has {got} rows, need at least {required}")]
    TooFewInArm {
        arm: &'static str,
        got: usize,
        required: usize,
    },
    #[error("a treated or control arm is empty")]
    EmptyArm,
    #[error("shifted set must be a nonempty strict subset of the rows")]
    InvalidMask,
    #[error("invalid fit config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Hyperparameters shared by all fitters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Minimum treated and minimum control rows in every child.
    pub min_arm: usize,
    pub n_split_quantiles: usize,
    pub min_gain: f64,
    /// AUUC levels.
    pub m: usize,
    /// Maximum number of effect-ordering stumps.
    pub n_trees: usize,
    /// Smallest admissible side of an effect-ordering split, as a fraction.
    pub min_split_fraction: f64,
    /// Percentile groups for shift-search bucketing; `None` searches
    /// individual observations.
    pub bucket_groups: Option<usize>,
    /// Relative nudge past a decision boundary or swap point.
    pub epsilon: f64,
    /// Per-treatment cost used by the classification objective.
    pub cost: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_depth: 4,
            min_leaf: 50,
            min_arm: 10,
            n_split_quantiles: 32,
            min_gain: 0.0,
            m: 10,
            n_trees: 10,
            min_split_fraction: 0.4,
            bucket_groups: Some(100),
            epsilon: 1e-6,
            cost: 0.0,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        let bad = |msg: &str| Err(FitError::InvalidConfig(msg.to_string()));
        if self.min_leaf == 0 {
            return bad("min_leaf must be positive");
        }
        if self.n_split_quantiles == 0 {
            return bad("n_split_quantiles must be positive");
        }
        if self.m < 2 {
            return bad("m must be at least 2");
        }
        if !(self.min_split_fraction > 0.0 && self.min_split_fraction <= 0.5) {
            return bad("min_split_fraction must lie in (0, 0.5]");
        }
        if self.bucket_groups == Some(0) {
            return bad("bucket_groups must be positive");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        if !self.min_gain.is_finite() || !self.cost.is_finite() {
            return bad("min_gain and cost must be finite");
        }
        Ok(())
    }
}

/// Columns available for splitting plus the per-row experiment fields.
#[derive(Debug, Clone)]
pub struct FitData<'a> {
    pub columns: Vec<&'a [f64]>,
    pub treatment: &'a [bool],
    pub outcome: &'a [f64],
    /// Working score the criterion corrects.
    pub score: &'a [f64],
    pub propensity: f64,
}

impl<'a> FitData<'a> {
    pub fn new(
        columns: Vec<&'a [f64]>,
        treatment: &'a [bool],
        outcome: &'a [f64],
        score: &'a [f64],
        propensity: f64,
    ) -> Self {
        let n = treatment.len();
        assert_eq!(outcome.len(), n);
        assert_eq!(score.len(), n);
        assert!(columns.iter().all(|c| c.len() == n));
        Self {
            columns,
            treatment,
            outcome,
            score,
            propensity,
        }
    }

    /// Dataset features only, with the dataset's base score as working score.
    pub fn from_dataset(d: &'a ExperimentDataset) -> Self {
        Self::with_score(d, d.base_score(), false)
    }

    /// Dataset features, optionally extended by `score` as the last column.
    pub fn with_score(d: &'a ExperimentDataset, score: &'a [f64], score_as_feature: bool) -> Self {
        let mut columns: Vec<&[f64]> = d.columns().iter().map(Vec::as_slice).collect();
        if score_as_feature {
            columns.push(score);
        }
        Self::new(
            columns,
            d.treatment(),
            d.outcome(),
            score,
            d.propensity_treated(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.treatment.len()
    }

    pub fn value(&self, feature: usize, row: usize) -> f64 {
        self.columns[feature][row]
    }

    pub fn arm_counts(&self, rows: &[usize]) -> (usize, usize) {
        let treated = rows.iter().filter(|&&i| self.treatment[i]).count();
        (treated, rows.len() - treated)
    }
}

/// Rows with `feature <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
}

impl SplitCandidate {
    pub fn goes_left(&self, data: &FitData, row: usize) -> bool {
        data.value(self.feature, row) <= self.threshold
    }

    /// Order-preserving partition of `rows`.
    pub fn partition(&self, data: &FitData, rows: &[usize]) -> (Vec<usize>, Vec<usize>) {
        rows.iter().partition(|&&i| self.goes_left(data, i))
    }
}

/// Per-child size constraints applied during enumeration.
#[derive(Debug, Clone, Copy)]
pub struct SplitRules {
    pub min_side: usize,
    pub min_arm: usize,
    pub n_quantiles: usize,
}

impl From<&FitConfig> for SplitRules {
    fn from(cfg: &FitConfig) -> Self {
        Self {
            min_side: cfg.min_leaf,
            min_arm: cfg.min_arm,
            n_quantiles: cfg.n_split_quantiles,
        }
    }
}

/// Candidate thresholds for one column given its sorted values: midpoints
/// between adjacent distinct values, thinned to at most `q` cuts placed at
/// empirical quantiles.
pub fn candidate_thresholds(sorted: &[f64], q: usize) -> Vec<f64> {
    let n = sorted.len();
    let cuts: Vec<usize> = (1..n).filter(|&p| sorted[p - 1] < sorted[p]).collect();
    let picked: Vec<usize> = if cuts.len() <= q {
        cuts
    } else {
        let mut out: Vec<usize> = (1..=q)
            .map(|k| {
                let target = k * n / (q + 1);
                let at = cuts.partition_point(|&p| p < target).min(cuts.len() - 1);
                cuts[at]
            })
            .collect();
        out.dedup();
        out
    };
    picked
        .into_iter()
        .map(|p| {
            let (a, b) = (sorted[p - 1], sorted[p]);
            let mid = a + (b - a) / 2.0;
            if mid < b {
                mid
            } else {
                a
            }
        })
        .collect()
}

pub fn enumerate_splits(data: &FitData, rows: &[usize], cfg: &FitConfig) -> Vec<SplitCandidate> {
    enumerate_splits_with(data, rows, SplitRules::from(cfg))
}

/// Candidates ordered by feature index, then threshold.
pub fn enumerate_splits_with(
    data: &FitData,
    rows: &[usize],
    rules: SplitRules,
) -> Vec<SplitCandidate> {
    let mut out = Vec::new();
    let n = rows.len();
    let mut vals: Vec<(f64, bool)> = Vec::with_capacity(n);
    let mut sorted = Vec::with_capacity(n);
    let mut treated_prefix = Vec::with_capacity(n + 1);
    for (feature, col) in data.columns.iter().enumerate() {
        vals.clear();
        vals.extend(rows.iter().map(|&i| (col[i], data.treatment[i])));
        vals.sort_by(|a, b| a.0.total_cmp(&b.0));
        if n == 0 || vals[0].0 == vals[n - 1].0 {
            continue;
        }
        sorted.clear();
        sorted.extend(vals.iter().map(|v| v.0));
        treated_prefix.clear();
        treated_prefix.push(0usize);
        for &(_, t) in &vals {
            treated_prefix.push(treated_prefix.last().unwrap() + t as usize);
        }
        let total_treated = treated_prefix[n];
        for threshold in candidate_thresholds(&sorted, rules.n_quantiles) {
            let n_left = sorted.partition_point(|&v| v <= threshold);
            let n_right = n - n_left;
            let t_left = treated_prefix[n_left];
            let t_right = total_treated - t_left;
            let ok = n_left >= rules.min_side.max(1)
                && n_right >= rules.min_side.max(1)
                && t_left >= rules.min_arm
                && n_left - t_left >= rules.min_arm
                && t_right >= rules.min_arm
                && n_right - t_right >= rules.min_arm;
            if ok {
                out.push(SplitCandidate { feature, threshold });
            }
        }
    }
    out
}

/// A fitted tree. Serializes as `{"feature", "threshold", "left", "right"}`
/// for splits and `{"leaf": payload}` for leaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        leaf: f64,
    },
}

impl TreeNode {
    pub fn leaf(value: f64) -> Self {
        TreeNode::Leaf { leaf: value }
    }

    pub fn predict(&self, value_of: impl Fn(usize) -> f64) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { leaf } => return *leaf,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if value_of(*feature) <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split {
                feature,
                left,
                right,
                ..
            } => Some(
                (*feature)
                    .max(left.max_feature().unwrap_or(0))
                    .max(right.max_feature().unwrap_or(0)),
            ),
        }
    }

    /// Leaf payloads paired with the rows that reach them, left to right.
    pub fn leaf_rows(&self, data: &FitData, rows: &[usize]) -> Vec<(f64, Vec<usize>)> {
        let mut out = Vec::new();
        self.walk(data, rows.to_vec(), &mut |_, _| {}, &mut out);
        out
    }

    /// Calls `f` with every internal split and the rows reaching it,
    /// in pre-order.
    pub fn visit_splits(
        &self,
        data: &FitData,
        rows: &[usize],
        mut f: impl FnMut(SplitCandidate, &[usize]),
    ) {
        let mut sink = Vec::new();
        self.walk(data, rows.to_vec(), &mut f, &mut sink);
    }

    fn walk(
        &self,
        data: &FitData,
        rows: Vec<usize>,
        f: &mut impl FnMut(SplitCandidate, &[usize]),
        leaves: &mut Vec<(f64, Vec<usize>)>,
    ) {
        match self {
            TreeNode::Leaf { leaf } => leaves.push((*leaf, rows)),
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let split = SplitCandidate {
                    feature: *feature,
                    threshold: *threshold,
                };
                f(split, &rows);
                let (l, r) = split.partition(data, &rows);
                left.walk(data, l, f, leaves);
                right.walk(data, r, f, leaves);
            }
        }
    }
}

/// Leaf payload and split gain of a tree-growing objective.
pub trait SplitCriterion {
    fn leaf_value(&self, data: &FitData, rows: &[usize]) -> Result<f64, FitError>;

    /// Gain of replacing `parent` by `left` and `right`; larger is better.
    fn split_gain(
        &self,
        data: &FitData,
        parent: &[usize],
        left: &[usize],
        right: &[usize],
    ) -> Result<f64, FitError>;

    /// Root preconditions. Defaults to the size and arm minimums.
    fn check_root(&self, data: &FitData, rows: &[usize], cfg: &FitConfig) -> Result<(), FitError> {
        check_size_and_arms(data, rows, cfg.min_leaf, cfg.min_arm)
    }
}

pub fn check_size_and_arms(
    data: &FitData,
    rows: &[usize],
    min_rows: usize,
    min_arm: usize,
) -> Result<(), FitError> {
    if rows.len() < min_rows.max(1) {
        return Err(FitError::TooFewRows {
            required: min_rows.max(1),
            got: rows.len(),
        });
    }
    let (treated, control) = data.arm_counts(rows);
    if treated < min_arm {
        return Err(FitError::TooFewInArm {
            arm: "treated",
            got: treated,
            required: min_arm,
        });
    }
    if control < min_arm {
        return Err(FitError::TooFewInArm {
            arm: "control",
            got: control,
            required: min_arm,
        });
    }
    Ok(())
}

/// Best split by gain, first candidate winning ties. `None` when no
/// candidate beats `min_gain`.
pub fn best_split<C: SplitCriterion + ?Sized>(
    data: &FitData,
    rows: &[usize],
    candidates: &[SplitCandidate],
    criterion: &C,
    min_gain: f64,
) -> Result<Option<(SplitCandidate, f64)>, FitError> {
    let mut best: Option<(SplitCandidate, f64)> = None;
    for &c in candidates {
        let (left, right) = c.partition(data, rows);
        let gain = criterion.split_gain(data, rows, &left, &right)?;
        if gain.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((c, gain));
        }
    }
    Ok(best.filter(|&(_, g)| g > min_gain))
}

/// Greedy depth-first growth from `rows`.
pub fn grow_tree<C: SplitCriterion + ?Sized>(
    data: &FitData,
    rows: Vec<usize>,
    criterion: &C,
    cfg: &FitConfig,
) -> Result<TreeNode, FitError> {
    cfg.validate()?;
    criterion.check_root(data, &rows, cfg)?;
    grow(data, rows, 0, criterion, cfg)
}

fn grow<C: SplitCriterion + ?Sized>(
    data: &FitData,
    rows: Vec<usize>,
    depth: usize,
    criterion: &C,
    cfg: &FitConfig,
) -> Result<TreeNode, FitError> {
    if depth >= cfg.max_depth {
        return Ok(TreeNode::leaf(criterion.leaf_value(data, &rows)?));
    }
    let candidates = enumerate_splits(data, &rows, cfg);
    let Some((split, _)) = best_split(data, &rows, &candidates, criterion, cfg.min_gain)? else {
        return Ok(TreeNode::leaf(criterion.leaf_value(data, &rows)?));
    };
    let (left, right) = split.partition(data, &rows);
    drop(rows);
    Ok(TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(data, left, depth + 1, criterion, cfg)?),
        right: Box::new(grow(data, right, depth + 1, criterion, cfg)?),
    })
}
