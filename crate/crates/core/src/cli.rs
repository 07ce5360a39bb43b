//! Command-line surface: simulate, fit, apply, evaluate, benchmark.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use crate::benchmark::{run_benchmark, BenchmarkConfig};
use crate::calibration::fit_calibration;
use crate::data::{
    load_dataset, load_scores, load_truth, save_dataset, save_scores, save_truth, ColumnRoles,
    ExperimentDataset,
};
use crate::ec::fit_ec;
use crate::ee::{fit_causal_tree, fit_ee};
use crate::eo::fit_eo;
use crate::finetuner::{apply_finetuner, load_model, save_model, FineTuner, FineTunerKind, Stage};
use crate::metrics::{auuc, binned_mse, mse_true, policy_value, PolicyConfig};
use crate::simulation::{draw_dgp, rng_for, sample_population, SimulationParams};
use crate::tree::FitConfig;
use crate::Error;

#[derive(Debug, Parser)]
#[command(
    name = "causal-finetune",
    version,
    about = "Causal fine-tuning of base scores"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a dataset from the linear DGP; writes a `.truth.csv` sidecar.
    Simulate {
        /// JSON file with simulation parameters; defaults when omitted.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the parameter file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a fine-tuner on experimental data.
    Fit {
        #[arg(long, value_enum)]
        method: FitMethod,
        #[command(flatten)]
        input: DataArgs,
        #[arg(long)]
        out: PathBuf,
        /// JSON file with fit hyperparameters.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score a dataset with a saved fine-tuner.
    Apply {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        input: DataArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print metrics of a score file as one JSON line.
    Evaluate {
        #[arg(long)]
        scores: PathBuf,
        #[command(flatten)]
        input: DataArgs,
        /// Truth sidecar; switches effect error from binned to true MSE.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "mse,auuc,policy")]
        metrics: Vec<EvalMetric>,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[arg(long, default_value_t = 0.0)]
        cost: f64,
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        /// Treat the top fraction of scores instead of thresholding.
        #[arg(long)]
        top_fraction: Option<f64>,
    },
    /// Run the simulation benchmark.
    Benchmark {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Optional per-cell means with percentage improvement over BS.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Design probability of treatment.
    #[arg(long, default_value_t = 0.5)]
    pub propensity: f64,
    #[arg(long, default_value = "treatment")]
    pub treatment_col: String,
    #[arg(long, default_value = "outcome")]
    pub outcome_col: String,
    #[arg(long, default_value = "base_score")]
    pub score_col: String,
}

impl DataArgs {
    pub fn roles(&self) -> ColumnRoles {
        ColumnRoles {
            treatment: self.treatment_col.clone(),
            outcome: self.outcome_col.clone(),
            base_score: self.score_col.clone(),
        }
    }

    pub fn load(&self) -> Result<ExperimentDataset, Error> {
        let f = open(&self.data)?;
        Ok(load_dataset(
            BufReader::new(f),
            &self.roles(),
            self.propensity,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitMethod {
    Calibrate,
    Ee,
    Ec,
    Eo,
    Ct,
    CtBs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMetric {
    Mse,
    Auuc,
    Policy,
}

fn open(path: impl AsRef<Path>) -> Result<File, Error> {
    let path = path.as_ref();
    File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: impl AsRef<Path>) -> Result<File, Error> {
    let path = path.as_ref();
    File::create(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Error> {
    match path {
        None => Ok(T::default()),
        Some(p) => Ok(serde_json::from_reader(BufReader::new(open(p)?))?),
    }
}

/// `data.csv` → `data.truth.csv`.
pub fn truth_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("data");
    out.with_file_name(format!("{stem}.truth.csv"))
}

pub fn fit_method(
    method: FitMethod,
    d: &ExperimentDataset,
    cfg: &FitConfig,
) -> Result<FineTuner, Error> {
    Ok(match method {
        FitMethod::Calibrate => {
            let p = fit_calibration(d.base_score(), d);
            FineTuner::new(FineTunerKind::Calibrated, vec![Stage::Calibration(p)])
                .with_metadata(cfg, d)
        }
        FitMethod::Ee => fit_ee(d, cfg)?,
        FitMethod::Ec => fit_ec(d, cfg)?,
        FitMethod::Eo => fit_eo(d, cfg)?,
        FitMethod::Ct => fit_causal_tree(d, false, cfg)?,
        FitMethod::CtBs => fit_causal_tree(d, true, cfg)?,
    })
}

pub fn run(cli: Cli) -> Result<(), Error> {
    let stdout = std::io::stdout();
    run_with_output(cli, &mut stdout.lock())
}

/// Runs a command, writing any report lines to `out`.
pub fn run_with_output(cli: Cli, out: &mut impl Write) -> Result<(), Error> {
    match cli.command {
        Command::Simulate {
            params,
            n,
            out: path,
            seed,
        } => {
            let mut p: SimulationParams = read_json(params.as_deref())?;
            if let Some(s) = seed {
                p.seed = s;
            }
            let mut rng = rng_for(p.seed, 0);
            let g = draw_dgp(&p, &mut rng)?;
            let (d, truth) = sample_population(&g, n, &mut rng)?;
            save_dataset(&d, BufWriter::new(create(&path)?), &ColumnRoles::default())?;
            save_truth(&truth, BufWriter::new(create(truth_path(&path))?))?;
            log::info!("wrote {n} rows to {}", path.display());
        }
        Command::Fit {
            method,
            input,
            out: path,
            config,
        } => {
            let cfg: FitConfig = read_json(config.as_deref())?;
            let d = input.load()?;
            let model = fit_method(method, &d, &cfg)?;
            save_model(&model, &path)?;
            log::info!("saved {} model to {}", model.kind.as_str(), path.display());
        }
        Command::Apply {
            model,
            input,
            out: path,
        } => {
            let f = load_model(&model)?;
            let d = input.load()?;
            let scores = apply_finetuner(&f, &d)?;
            save_scores(&scores, BufWriter::new(create(&path)?))?;
        }
        Command::Evaluate {
            scores,
            input,
            truth,
            metrics,
            m,
            bins,
            cost,
            threshold,
            top_fraction,
        } => {
            let d = input.load()?;
            let s = load_scores(BufReader::new(open(&scores)?))?;
            if s.len() != d.n_rows() {
                return Err(Error::Usage(format!(
                    "score file has {} rows but the dataset has {}",
                    s.len(),
                    d.n_rows()
                )));
            }
            if let Some(q) = top_fraction {
                if !(q > 0.0 && q <= 1.0) {
                    return Err(Error::Usage("top fraction must lie in (0, 1]".into()));
                }
            }
            let policy = PolicyConfig {
                cost,
                threshold,
                top_fraction,
            };
            let mut report = serde_json::Map::new();
            for metric in metrics {
                match metric {
                    EvalMetric::Mse => match &truth {
                        Some(p) => {
                            let t = load_truth(BufReader::new(open(p)?))?;
                            if t.len() != d.n_rows() {
                                return Err(Error::Usage("truth file length mismatch".into()));
                            }
                            report.insert("mse".into(), mse_true(&s, &t).into());
                        }
                        None => {
                            let v = binned_mse(&s, d.base_score(), &d, bins)?;
                            report.insert("binned_mse".into(), v.into());
                        }
                    },
                    EvalMetric::Auuc => {
                        report.insert("auuc".into(), auuc(&s, &d, m)?.into());
                    }
                    EvalMetric::Policy => {
                        let v = policy_value(&policy.actions(&s), &d, &policy);
                        report.insert("policy_value".into(), v.into());
                    }
                }
            }
            writeln!(out, "{}", serde_json::Value::Object(report))?;
        }
        Command::Benchmark {
            config,
            out: path,
            summary,
        } => {
            let cfg: BenchmarkConfig = read_json(config.as_deref())?;
            let report = run_benchmark(&cfg)?;
            report.write_csv(BufWriter::new(create(&path)?))?;
            if let Some(s) = summary {
                report.write_summary_csv(BufWriter::new(create(s)?))?;
            }
            if !report.skipped.is_empty() {
                log::warn!("{} cells skipped", report.skipped.len());
            }
        }
    }
    Ok(())
}
