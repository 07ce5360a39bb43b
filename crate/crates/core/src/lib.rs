//! Causal fine-tuning of non-causal base scores with randomized-experiment
//! data.
//!
//! A base score (say, a predicted baseline outcome) often correlates with
//! treatment effects without being an effect estimate. This crate learns
//! corrections that make such scores useful for three causal tasks:
//!
//! * effect estimation: [`calibration`] and the [`ee`] correction tree,
//! * effect classification: the [`ec`] boundary tree,
//! * effect ordering: boosted [`eo`] shift stumps.
//!
//! Fitted models are [`FineTuner`] pipelines that serialize to JSON. The
//! [`metrics`] module holds the evaluation estimators, [`simulation`] the
//! linear data-generating process, and [`benchmark`] the replication
//! harness that compares all methods against causal-tree baselines.

pub mod benchmark;
pub mod calibration;
pub mod cli;
pub mod data;
pub mod ec;
pub mod ee;
pub mod eo;
pub mod finetuner;
pub mod metrics;
pub mod simulation;
pub mod tree;

use thiserror::Error;

pub use benchmark::{run_benchmark, BenchmarkConfig, Method, MetricKind, MetricReport};
pub use calibration::{apply_calibration, fit_calibration, CalibrationParams};
pub use data::{ColumnRoles, ExperimentDataset, ScoreVector, SimulatedTruth};
pub use ec::{find_optimal_threshold, fit_ec};
pub use ee::{fit_causal_tree, fit_ee};
pub use eo::{find_optimal_shift, fit_eo, fit_eo_stump, EoStump, Side};
pub use finetuner::{apply_finetuner, load_model, save_model, FineTuner, FineTunerKind, Stage};
pub use metrics::{auuc, binned_mse, mse_true, policy_value, LevelPartition, PolicyConfig};
pub use simulation::{draw_dgp, sample_population, DgpInstance, SimulationParams};
pub use tree::{FitConfig, FitError, TreeNode};

/// Any failure surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] data::DataError),
    #[error(transparent)]
    Metric(#[from] metrics::MetricError),
    #[error(transparent)]
    Fit(#[from] tree::FitError),
    #[error(transparent)]
    Model(#[from] finetuner::ModelError),
    #[error(transparent)]
    Simulation(#[from] simulation::SimulationError),
    #[error(transparent)]
    Benchmark(#[from] benchmark::BenchmarkError),
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
