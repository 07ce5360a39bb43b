//! Effect-ordering fine-tuning.
//!
//! A stump shifts the scores of one side of a split by a constant chosen to
//! maximize the level-based AUUC estimate. The shift search walks through
//! the shifts at which an observation (or bucket) changes level, updating
//! the cumulative arm tables incrementally, so each candidate costs O(1)
//! table updates instead of a full AUUC recomputation. Stumps are boosted:
//! each one is fit on the scores shifted by its predecessors.
//!
//! Units are groups of rows that move together: rows sharing a score and a
//! side, or with bucketing, rows sharing a percentile group and a side. A
//! unit's level is `floor(m · below / n)`, where `below` counts rows in units
//! with a strictly lower score. Shifting the right-hand units up changes
//! `below` only for units whose relative order changes, and each unit
//! crosses each level boundary at most once per direction. Those crossings
//! are the events of the search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::fit_calibration;
use crate::data::ExperimentDataset;
use crate::finetuner::{feature_sources, FineTuner, FineTunerKind, Stage};
use crate::tree::{enumerate_splits_with, FitConfig, FitData, FitError, SplitRules};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Adds `shift` to rows on `side` of `feature` at `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EoStump {
    pub feature: usize,
    pub threshold: f64,
    pub side: Side,
    pub shift: f64,
}

impl EoStump {
    pub fn in_region(&self, value: f64) -> bool {
        match self.side {
            Side::Left => value <= self.threshold,
            Side::Right => value > self.threshold,
        }
    }
}

/// One candidate visited by the search: the shift and the AUUC change it
/// produces relative to no shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftStep {
    pub shift: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSearch {
    pub shift: f64,
    pub delta: f64,
    /// Candidates in visiting order: the positive sweep, then the negative.
    pub path: Vec<ShiftStep>,
}

/// Sort order of the working scores plus each row's unit group. Shared by
/// every split evaluated against the same scores.
#[derive(Debug, Clone)]
pub struct ScoreIndex {
    order: Vec<usize>,
    group: Vec<usize>,
    epsilon: f64,
}

impl ScoreIndex {
    /// `bucket_groups = None` puts each distinct score in its own group.
    /// `epsilon` is relative to the score range.
    pub fn new(scores: &[f64], bucket_groups: Option<usize>, epsilon: f64) -> Self {
        let n = scores.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
        let mut group = vec![0; n];
        let mut less = 0;
        for (pos, &i) in order.iter().enumerate() {
            if pos > 0 && scores[order[pos - 1]] < scores[i] {
                less = pos;
            }
            group[i] = match bucket_groups {
                None => less,
                Some(g) => ((g as u128 * less as u128) / n as u128) as usize,
            };
        }
        let range = match (order.first(), order.last()) {
            (Some(&lo), Some(&hi)) => scores[hi] - scores[lo],
            _ => 0.0,
        };
        let epsilon = if range > 0.0 {
            epsilon * range
        } else {
            epsilon
        };
        Self {
            order,
            group,
            epsilon,
        }
    }
}

#[derive(Debug, Clone)]
struct Unit {
    score: f64,
    size: usize,
    count: [usize; 2],
    sum: [f64; 2],
}

/// Left and right units, each ascending by score.
fn build_units(index: &ScoreIndex, data: &FitData, right: &[bool]) -> [Vec<Unit>; 2] {
    let mut sides: [Vec<Unit>; 2] = [Vec::new(), Vec::new()];
    let mut last_group: [Option<usize>; 2] = [None, None];
    let mut score_sum: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for &i in &index.order {
        let side = right[i] as usize;
        let g = index.group[i];
        if last_group[side] != Some(g) {
            last_group[side] = Some(g);
            sides[side].push(Unit {
                score: 0.0,
                size: 0,
                count: [0; 2],
                sum: [0.0; 2],
            });
            score_sum[side].push(0.0);
        }
        let u = sides[side].last_mut().unwrap();
        let t = data.treatment[i] as usize;
        u.size += 1;
        u.count[t] += 1;
        u.sum[t] += data.outcome[i];
        *score_sum[side].last_mut().unwrap() += data.score[i];
    }
    for side in 0..2 {
        for (u, s) in sides[side].iter_mut().zip(&score_sum[side]) {
            u.score = s / u.size as f64;
        }
    }
    sides
}

/// Cumulative arm tables over levels `>= r`, updated one unit at a time.
struct Tables {
    m: usize,
    count: Vec<[usize; 2]>,
    sum: Vec<[f64; 2]>,
}

impl Tables {
    fn new(m: usize) -> Self {
        Self {
            m,
            count: vec![[0; 2]; m],
            sum: vec![[0.0; 2]; m],
        }
    }

    /// Uplift at rank `r`, zero when an arm is empty.
    fn uplift(&self, r: usize) -> f64 {
        let [n0, n1] = self.count[r];
        if n0 == 0 || n1 == 0 {
            return 0.0;
        }
        self.sum[r][1] / n1 as f64 - self.sum[r][0] / n0 as f64
    }

    fn weight(&self, r: usize) -> f64 {
        (self.m - r) as f64 / self.m as f64
    }

    fn add(&mut self, r: usize, u: &Unit) {
        for t in 0..2 {
            self.count[r][t] += u.count[t];
            self.sum[r][t] += u.sum[t];
        }
    }

    fn remove(&mut self, r: usize, u: &Unit) {
        for t in 0..2 {
            self.count[r][t] -= u.count[t];
            self.sum[r][t] -= u.sum[t];
        }
    }
}

/// Level change of one unit within a batch of simultaneous events.
struct Move {
    mover: bool,
    unit: usize,
    target: usize,
}

/// One direction of the search. `movers` rise relative to `stayers`;
/// returned candidate shifts are `sign · d`.
fn sweep(
    movers: &[Unit],
    stayers: &[Unit],
    n: usize,
    m: usize,
    epsilon: f64,
    sign: f64,
    path: &mut Vec<ShiftStep>,
) {
    let level = |below: usize| m * below / n;
    // Smallest `below` that reaches level `a`.
    let boundary = |a: usize| (a * n).div_ceil(m);
    let prefix = |units: &[Unit]| {
        let mut c = Vec::with_capacity(units.len() + 1);
        c.push(0usize);
        for u in units {
            c.push(c.last().unwrap() + u.size);
        }
        c
    };
    let cum_m = prefix(movers);
    let cum_s = prefix(stayers);

    // Stayers strictly below each mover at d = 0 and at d = 0+, where tied
    // movers have just passed their stayers.
    let strictly_below = |x: f64, units: &[Unit]| units.partition_point(|u| u.score < x);
    let weakly_below = |x: f64, units: &[Unit]| units.partition_point(|u| u.score <= x);

    let mut mover_level: Vec<usize> = movers
        .iter()
        .enumerate()
        .map(|(k, u)| level(cum_m[k] + cum_s[strictly_below(u.score, stayers)]))
        .collect();
    let mut stayer_level: Vec<usize> = stayers
        .iter()
        .enumerate()
        .map(|(i, u)| level(cum_s[i] + cum_m[strictly_below(u.score, movers)]))
        .collect();

    let mut tables = Tables::new(m);
    for (u, &l) in movers.iter().zip(&mover_level) {
        for r in 0..=l {
            tables.add(r, u);
        }
    }
    for (u, &l) in stayers.iter().zip(&stayer_level) {
        for r in 0..=l {
            tables.add(r, u);
        }
    }

    // Batches of simultaneous level changes, keyed by the shift at which
    // they happen. The d = 0+ batch resolves ties between the two sides.
    let mut batches: Vec<(f64, Vec<Move>)> = Vec::new();
    let tie_moves: Vec<Move> = movers
        .iter()
        .enumerate()
        .filter_map(|(k, u)| {
            let target = level(cum_m[k] + cum_s[weakly_below(u.score, stayers)]);
            (target != mover_level[k]).then_some(Move {
                mover: true,
                unit: k,
                target,
            })
        })
        .collect();
    if !tie_moves.is_empty() {
        batches.push((0.0, tie_moves));
    }

    let mut events: Vec<(f64, Move)> = Vec::new();
    for (k, u) in movers.iter().enumerate() {
        let below_m = cum_m[k];
        let start = level(below_m + cum_s[weakly_below(u.score, stayers)]);
        for a in start + 1..m {
            let need = boundary(a) - below_m;
            let c = cum_s.partition_point(|&x| x < need);
            if c > stayers.len() {
                break;
            }
            events.push((
                stayers[c - 1].score - u.score,
                Move {
                    mover: true,
                    unit: k,
                    target: a,
                },
            ));
        }
    }
    for (i, u) in stayers.iter().enumerate() {
        let below_s = cum_s[i];
        for a in (1..=stayer_level[i]).rev() {
            let Some(need) = boundary(a).checked_sub(below_s).filter(|&x| x > 0) else {
                break;
            };
            let c = cum_m.partition_point(|&x| x < need);
            events.push((
                u.score - movers[c - 1].score,
                Move {
                    mover: false,
                    unit: i,
                    target: a - 1,
                },
            ));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut it = events.into_iter().peekable();
    while let Some((t, mv)) = it.next() {
        let mut batch = vec![mv];
        while let Some((t2, _)) = it.peek() {
            if *t2 != t {
                break;
            }
            batch.push(it.next().unwrap().1);
        }
        batches.push((t, batch));
    }

    let mut cumulative = 0.0;
    let mut old = vec![f64::NAN; m];
    let mut touched: Vec<usize> = Vec::new();
    for b in 0..batches.len() {
        let t = batches[b].0;
        for mv in &batches[b].1 {
            let (units, levels) = if mv.mover {
                (movers, &mut mover_level)
            } else {
                (stayers, &mut stayer_level)
            };
            let u = &units[mv.unit];
            let cur = levels[mv.unit];
            let (lo, hi) = if mv.target > cur {
                (cur, mv.target)
            } else {
                (mv.target, cur)
            };
            #[allow(clippy::needless_range_loop)]
            for r in lo + 1..=hi {
                if old[r].is_nan() {
                    old[r] = tables.uplift(r);
                    touched.push(r);
                }
                if mv.target > cur {
                    tables.add(r, u);
                } else {
                    tables.remove(r, u);
                }
            }
            levels[mv.unit] = mv.target;
        }
        for &r in &touched {
            cumulative += tables.weight(r) * (tables.uplift(r) - old[r]);
            old[r] = f64::NAN;
        }
        touched.clear();
        let next = batches.get(b + 1).map(|x| x.0);
        let nudge = match next {
            Some(tn) => epsilon.min((tn - t) / 2.0),
            None => epsilon,
        };
        path.push(ShiftStep {
            shift: sign * (t + nudge),
            delta: cumulative,
        });
    }
}

/// Best additive shift for the rows flagged in `right`, given the working
/// scores in `data.score`.
pub fn find_optimal_shift(
    data: &FitData,
    right: &[bool],
    cfg: &FitConfig,
) -> Result<ShiftSearch, FitError> {
    let n = data.n_rows();
    let n_right = right.iter().filter(|&&r| r).count();
    if right.len() != n || n_right == 0 || n_right == n {
        return Err(FitError::InvalidMask);
    }
    if cfg.m < 2 {
        return Err(FitError::InvalidConfig("m must be at least 2".into()));
    }
    let index = ScoreIndex::new(data.score, cfg.bucket_groups, cfg.epsilon);
    Ok(shift_search(&index, data, right, cfg.m, true))
}

fn shift_search(
    index: &ScoreIndex,
    data: &FitData,
    right: &[bool],
    m: usize,
    keep_path: bool,
) -> ShiftSearch {
    let n = data.n_rows();
    let [left_units, right_units] = build_units(index, data, right);
    let mut path = Vec::new();
    sweep(
        &right_units,
        &left_units,
        n,
        m,
        index.epsilon,
        1.0,
        &mut path,
    );
    sweep(
        &left_units,
        &right_units,
        n,
        m,
        index.epsilon,
        -1.0,
        &mut path,
    );
    let mut best = ShiftStep {
        shift: 0.0,
        delta: 0.0,
    };
    for step in &path {
        if step.delta > best.delta {
            best = *step;
        }
    }
    if !keep_path {
        path = Vec::new();
    }
    ShiftSearch {
        shift: best.shift,
        delta: best.delta,
        path,
    }
}

/// Best single-split stump on the working scores, or `None` when no split
/// improves the AUUC estimate. Only splits leaving at least
/// `min_split_fraction` of the rows on each side are considered; the right
/// side of the split receives the shift.
pub fn fit_eo_stump(data: &FitData, cfg: &FitConfig) -> Result<Option<(EoStump, f64)>, FitError> {
    cfg.validate()?;
    let n = data.n_rows();
    if n == 0 {
        return Err(FitError::TooFewRows {
            required: 1,
            got: 0,
        });
    }
    let rows: Vec<usize> = (0..n).collect();
    let min_side = ((cfg.min_split_fraction * n as f64).ceil() as usize).max(cfg.min_leaf);
    let rules = SplitRules {
        min_side,
        min_arm: cfg.min_arm,
        n_quantiles: cfg.n_split_quantiles,
    };
    let candidates = enumerate_splits_with(data, &rows, rules);
    let index = ScoreIndex::new(data.score, cfg.bucket_groups, cfg.epsilon);
    let results: Vec<ShiftSearch> = candidates
        .par_iter()
        .map(|c| {
            let right: Vec<bool> = (0..n).map(|i| !c.goes_left(data, i)).collect();
            shift_search(&index, data, &right, cfg.m, false)
        })
        .collect();
    let mut best: Option<(EoStump, f64)> = None;
    for (c, r) in candidates.iter().zip(results) {
        if r.delta > best.map_or(0.0, |b| b.1) {
            best = Some((
                EoStump {
                    feature: c.feature,
                    threshold: c.threshold,
                    side: Side::Right,
                    shift: r.shift,
                },
                r.delta,
            ));
        }
    }
    Ok(best)
}

/// Per-iteration record of the boosting loop.
#[derive(Debug, Clone, PartialEq)]
pub struct EoFit {
    pub stumps: Vec<EoStump>,
    /// AUUC gain claimed by each stump on the training rows.
    pub deltas: Vec<f64>,
    /// Working scores after the last stump.
    pub scores: Vec<f64>,
}

/// Boosted stumps on `columns`, starting from `scores`. Split variables stay
/// fixed while the working scores accumulate the shifts.
pub fn fit_eo_stumps(
    columns: Vec<&[f64]>,
    d: &ExperimentDataset,
    scores: &[f64],
    cfg: &FitConfig,
) -> Result<EoFit, FitError> {
    cfg.validate()?;
    let mut working = scores.to_vec();
    let mut stumps = Vec::new();
    let mut deltas = Vec::new();
    for _ in 0..cfg.n_trees {
        let data = FitData::new(
            columns.clone(),
            d.treatment(),
            d.outcome(),
            &working,
            d.propensity_treated(),
        );
        let Some((stump, delta)) = fit_eo_stump(&data, cfg)? else {
            break;
        };
        let col = columns[stump.feature];
        for (w, &x) in working.iter_mut().zip(col) {
            if stump.in_region(x) {
                *w += stump.shift;
            }
        }
        stumps.push(stump);
        deltas.push(delta);
    }
    Ok(EoFit {
        stumps,
        deltas,
        scores: working,
    })
}

/// Boosted EO stumps on the features plus the base score, then
/// post-calibration.
pub fn fit_eo(d: &ExperimentDataset, cfg: &FitConfig) -> Result<FineTuner, FitError> {
    let mut columns: Vec<&[f64]> = d.columns().iter().map(Vec::as_slice).collect();
    columns.push(d.base_score());
    let fit = fit_eo_stumps(columns, d, d.base_score(), cfg)?;
    let post = fit_calibration(&fit.scores, d);
    let stages = vec![
        Stage::Shifts {
            features: feature_sources(d, true),
            stumps: fit.stumps,
        },
        Stage::Calibration(post),
    ];
    Ok(FineTuner::new(FineTunerKind::Eo, stages).with_metadata(cfg, d))
}
