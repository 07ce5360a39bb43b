//! Monte-Carlo comparison of fine-tuning methods on simulated experiments.
//!
//! Every replication draws a fresh DGP, a training pool and a test set from
//! its own RNG stream. Training sets of each size are nested prefixes of the
//! pool. Each method is fit on the training rows, applied to the test set
//! and scored against the simulated truth.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::{apply_calibration, fit_calibration};
use crate::data::{ExperimentDataset, SimulatedTruth};
use crate::ec::fit_ec;
use crate::ee::{fit_causal_tree, fit_ee};
use crate::eo::fit_eo;
use crate::metrics::{auuc, mse_true, policy_value, PolicyConfig};
use crate::simulation::{draw_dgp, rng_for, sample_population, SimulationError, SimulationParams};
use crate::tree::{FitConfig, FitError};

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("invalid benchmark config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error("failed to write report: {0}")]
    Csv(#[from] csv::Error),
    #[error("failed to write report: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Bs,
    BsCal,
    Ct,
    CtBs,
    Ee,
    Eo,
    Ec,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Bs,
        Method::BsCal,
        Method::Ct,
        Method::CtBs,
        Method::Ee,
        Method::Eo,
        Method::Ec,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Bs => "BS",
            Method::BsCal => "BS_CAL",
            Method::Ct => "CT",
            Method::CtBs => "CT_BS",
            Method::Ee => "EE",
            Method::Eo => "EO",
            Method::Ec => "EC",
        }
    }

    /// Scores for `test` after fitting on `train`.
    pub fn fit_and_score(
        &self,
        train: &ExperimentDataset,
        test: &ExperimentDataset,
        cfg: &FitConfig,
    ) -> Result<Vec<f64>, FitError> {
        let model = match self {
            Method::Bs => return Ok(test.base_score().to_vec()),
            Method::BsCal => {
                let p = fit_calibration(train.base_score(), train);
                return Ok(apply_calibration(&p, test.base_score()));
            }
            Method::Ct => fit_causal_tree(train, false, cfg)?,
            Method::CtBs => fit_causal_tree(train, true, cfg)?,
            Method::Ee => fit_ee(train, cfg)?,
            Method::Eo => fit_eo(train, cfg)?,
            Method::Ec => fit_ec(train, cfg)?,
        };
        Ok(model
            .apply(test)
            .expect("test set has the training feature columns"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Mse,
    Auuc,
    Policy,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Mse => "mse",
            MetricKind::Auuc => "auuc",
            MetricKind::Policy => "policy",
        }
    }

    pub fn lower_is_better(&self) -> bool {
        matches!(self, MetricKind::Mse)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub methods: Vec<Method>,
    pub train_sizes: Vec<usize>,
    pub n_reps: usize,
    pub test_size: usize,
    pub sim: SimulationParams,
    pub metrics: Vec<MetricKind>,
    pub policy: PolicyConfig,
    pub fit: FitConfig,
    /// AUUC levels used for evaluation.
    pub m: usize,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            train_sizes: (7..=15).map(|k| 1usize << k).collect(),
            n_reps: 100,
            test_size: 50_000,
            sim: SimulationParams::default(),
            metrics: vec![MetricKind::Mse, MetricKind::Auuc, MetricKind::Policy],
            policy: PolicyConfig::default(),
            fit: FitConfig::default(),
            m: 10,
            seed: 0,
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<(), BenchmarkError> {
        let bad = |m: &str| Err(BenchmarkError::InvalidConfig(m.to_string()));
        if self.n_reps == 0 {
            return bad("n_reps must be at least 1");
        }
        if self.train_sizes.is_empty() || self.train_sizes.contains(&0) {
            return bad("train_sizes must be nonempty and positive");
        }
        if self.test_size == 0 {
            return bad("test_size must be positive");
        }
        if self.methods.is_empty() || self.metrics.is_empty() {
            return bad("methods and metrics must be nonempty");
        }
        if self.m < 2 {
            return bad("m must be at least 2");
        }
        self.sim.validate()?;
        self.fit
            .validate()
            .map_err(|e| BenchmarkError::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub method: Method,
    pub train_size: usize,
    pub rep: usize,
    pub metric: MetricKind,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedCell {
    pub method: Method,
    pub train_size: usize,
    pub rep: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub train_size: usize,
    pub metric: MetricKind,
    pub mean: f64,
    pub n: usize,
    /// Improvement over BS in percent, signed so that positive is better.
    pub pct_vs_bs: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
    pub skipped: Vec<SkippedCell>,
}

impl MetricReport {
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<(), BenchmarkError> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["method", "train_size", "rep", "metric", "value"])?;
        for r in &self.rows {
            w.write_record([
                r.method.name().to_string(),
                r.train_size.to_string(),
                r.rep.to_string(),
                r.metric.name().to_string(),
                r.value.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Replication means per (method, size, metric).
    pub fn means(&self) -> BTreeMap<(Method, usize, MetricKind), (f64, usize)> {
        let mut acc: BTreeMap<(Method, usize, MetricKind), (f64, usize)> = BTreeMap::new();
        for r in &self.rows {
            let e = acc.entry((r.method, r.train_size, r.metric)).or_default();
            e.0 += r.value;
            e.1 += 1;
        }
        for v in acc.values_mut() {
            v.0 /= v.1 as f64;
        }
        acc
    }

    pub fn mean(&self, method: Method, train_size: usize, metric: MetricKind) -> Option<f64> {
        self.means().get(&(method, train_size, metric)).map(|v| v.0)
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let means = self.means();
        means
            .iter()
            .map(|(&(method, train_size, metric), &(mean, n))| {
                let pct_vs_bs = means
                    .get(&(Method::Bs, train_size, metric))
                    .filter(|b| b.0 != 0.0)
                    .map(|&(bs, _)| {
                        let gain = if metric.lower_is_better() {
                            bs - mean
                        } else {
                            mean - bs
                        };
                        100.0 * gain / bs.abs()
                    });
                SummaryRow {
                    method,
                    train_size,
                    metric,
                    mean,
                    n,
                    pct_vs_bs,
                }
            })
            .collect()
    }

    pub fn write_summary_csv<W: Write>(&self, sink: W) -> Result<(), BenchmarkError> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["method", "train_size", "metric", "mean", "n", "pct_vs_bs"])?;
        for s in self.summary() {
            w.write_record([
                s.method.name().to_string(),
                s.train_size.to_string(),
                s.metric.name().to_string(),
                s.mean.to_string(),
                s.n.to_string(),
                s.pct_vs_bs.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn evaluate(
    scores: &[f64],
    test: &ExperimentDataset,
    truth: &SimulatedTruth,
    metric: MetricKind,
    cfg: &BenchmarkConfig,
) -> f64 {
    match metric {
        MetricKind::Mse => mse_true(scores, truth),
        MetricKind::Auuc => auuc(scores, test, cfg.m).expect("m validated"),
        MetricKind::Policy => policy_value(&cfg.policy.actions(scores), test, &cfg.policy),
    }
}

type CellResult = Result<Vec<MetricRow>, SkippedCell>;

fn run_replication(cfg: &BenchmarkConfig, rep: usize) -> Result<Vec<CellResult>, BenchmarkError> {
    let mut rng = rng_for(cfg.seed, rep as u64);
    let dgp = draw_dgp(&cfg.sim, &mut rng)?;
    let pool_size = *cfg.train_sizes.iter().max().expect("validated");
    let (pool, _) = sample_population(&dgp, pool_size, &mut rng)?;
    let (test, truth) = sample_population(&dgp, cfg.test_size, &mut rng)?;

    let cells: Vec<(usize, Method)> = cfg
        .train_sizes
        .iter()
        .flat_map(|&s| cfg.methods.iter().map(move |&m| (s, m)))
        .collect();
    let out = cells
        .par_iter()
        .map(|&(size, method)| {
            let rows: Vec<usize> = (0..size).collect();
            let train = pool.subset(&rows).expect("prefix of the pool");
            match method.fit_and_score(&train, &test, &cfg.fit) {
                Ok(scores) => Ok(cfg
                    .metrics
                    .iter()
                    .map(|&metric| MetricRow {
                        method,
                        train_size: size,
                        rep,
                        metric,
                        value: evaluate(&scores, &test, &truth, metric, cfg),
                    })
                    .collect()),
                Err(e) => {
                    log::warn!("{} at size {size}, rep {rep} skipped: {e}", method.name());
                    Err(SkippedCell {
                        method,
                        train_size: size,
                        rep,
                        reason: e.to_string(),
                    })
                }
            }
        })
        .collect();
    Ok(out)
}

/// Runs every (replication, size, method) cell. Output order depends only
/// on the config, not on scheduling.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<MetricReport, BenchmarkError> {
    cfg.validate()?;
    let per_rep: Vec<Vec<CellResult>> = (0..cfg.n_reps)
        .into_par_iter()
        .map(|rep| run_replication(cfg, rep))
        .collect::<Result<_, _>>()?;
    let mut report = MetricReport::default();
    for cell in per_rep.into_iter().flatten() {
        match cell {
            Ok(rows) => report.rows.extend(rows),
            Err(skip) => report.skipped.push(skip),
        }
    }
    report.rows.sort_by(|a, b| {
        (a.method, a.train_size, a.rep, a.metric).cmp(&(b.method, b.train_size, b.rep, b.metric))
    });
    report
        .skipped
        .sort_by_key(|s| (s.method, s.train_size, s.rep));
    Ok(report)
}
