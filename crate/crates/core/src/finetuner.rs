//! Serializable scoring pipelines produced by the fitters.
//!
//! A [`FineTuner`] is an ordered list of stages applied to the base-score
//! column: affine calibrations, tree corrections `θ ← θ − δ(X)` and additive
//! EO shifts. Every stage names the inputs it reads, so a model can be
//! applied to any dataset that carries the same feature columns.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::CalibrationParams;
use crate::data::ExperimentDataset;
use crate::eo::EoStump;
use crate::tree::{FitConfig, TreeNode};

pub const SCHEMA_VERSION: u32 = 1;

const KNOWN_KINDS: [&str; 6] = ["calibrated", "ee", "ec", "eo", "ct", "ct_bs"];

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown fine-tuner kind {0:?}")]
    UnknownKind(String),
    #[error("model schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u64, expected: u32 },
    #[error("model field {0:?} is missing")]
    MissingField(&'static str),
    #[error("dataset has no feature column {0:?} required by the model")]
    MissingFeature(String),
    #[error("stage references feature slot {slot} but only {available} are declared")]
    BadFeatureSlot { slot: usize, available: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FineTunerKind {
    Calibrated,
    Ee,
    Ec,
    Eo,
    Ct,
    CtBs,
}

impl FineTunerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FineTunerKind::Calibrated => "calibrated",
            FineTunerKind::Ee => "ee",
            FineTunerKind::Ec => "ec",
            FineTunerKind::Eo => "eo",
            FineTunerKind::Ct => "ct",
            FineTunerKind::CtBs => "ct_bs",
        }
    }
}

/// Where a stage reads one of its split variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSource {
    /// Named dataset column.
    Column(String),
    /// The score entering the stage.
    Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Stage {
    Calibration(CalibrationParams),
    /// `θ ← base − tree(X)`, where `base` is the incoming score, or 0 when
    /// `zero_base` is set.
    Correction {
        features: Vec<FeatureSource>,
        tree: TreeNode,
        #[serde(default)]
        zero_base: bool,
    },
    /// `θ ← θ + Σ shift · 1[X in region]`.
    Shifts {
        features: Vec<FeatureSource>,
        stumps: Vec<EoStump>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub config: FitConfig,
    pub n_train: usize,
    pub propensity_treated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineTuner {
    pub schema_version: u32,
    pub kind: FineTunerKind,
    pub stages: Vec<Stage>,
    pub metadata: Option<ModelMetadata>,
}

impl FineTuner {
    pub fn new(kind: FineTunerKind, stages: Vec<Stage>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind,
            stages,
            metadata: None,
        }
    }

    pub fn with_metadata(mut self, cfg: &FitConfig, d: &ExperimentDataset) -> Self {
        self.metadata = Some(ModelMetadata {
            config: cfg.clone(),
            n_train: d.n_rows(),
            propensity_treated: d.propensity_treated(),
        });
        self
    }

    /// Calibration parameters of the last stage, if it is a calibration.
    pub fn post_calibration(&self) -> Option<CalibrationParams> {
        match self.stages.last() {
            Some(Stage::Calibration(p)) => Some(*p),
            _ => None,
        }
    }

    pub fn apply(&self, d: &ExperimentDataset) -> Result<Vec<f64>, ModelError> {
        apply_finetuner(self, d)
    }
}

/// Feature sources for the dataset's columns, optionally followed by the
/// stage's input score.
pub fn feature_sources(d: &ExperimentDataset, include_score: bool) -> Vec<FeatureSource> {
    let mut out: Vec<FeatureSource> = d
        .feature_names()
        .iter()
        .map(|n| FeatureSource::Column(n.clone()))
        .collect();
    if include_score {
        out.push(FeatureSource::Score);
    }
    out
}

fn resolve<'a>(
    features: &[FeatureSource],
    d: &'a ExperimentDataset,
    score: &'a [f64],
) -> Result<Vec<&'a [f64]>, ModelError> {
    features
        .iter()
        .map(|f| match f {
            FeatureSource::Score => Ok(score),
            FeatureSource::Column(name) => d
                .feature_index(name)
                .map(|j| d.feature(j))
                .ok_or_else(|| ModelError::MissingFeature(name.clone())),
        })
        .collect()
}

fn check_slot(slot: Option<usize>, available: usize) -> Result<(), ModelError> {
    match slot {
        Some(s) if s >= available => Err(ModelError::BadFeatureSlot { slot: s, available }),
        _ => Ok(()),
    }
}

/// Runs every stage in order on the dataset's base scores.
pub fn apply_finetuner(f: &FineTuner, d: &ExperimentDataset) -> Result<Vec<f64>, ModelError> {
    let mut score = d.base_score().to_vec();
    for stage in &f.stages {
        score = match stage {
            Stage::Calibration(p) => crate::calibration::apply_calibration(p, &score),
            Stage::Correction {
                features,
                tree,
                zero_base,
            } => {
                check_slot(tree.max_feature(), features.len())?;
                let cols = resolve(features, d, &score)?;
                (0..score.len())
                    .map(|i| {
                        let base = if *zero_base { 0.0 } else { score[i] };
                        base - tree.predict(|j| cols[j][i])
                    })
                    .collect()
            }
            Stage::Shifts { features, stumps } => {
                check_slot(stumps.iter().map(|s| s.feature).max(), features.len())?;
                let cols = resolve(features, d, &score)?;
                (0..score.len())
                    .map(|i| {
                        score[i]
                            + stumps
                                .iter()
                                .filter(|s| s.in_region(cols[s.feature][i]))
                                .map(|s| s.shift)
                                .sum::<f64>()
                    })
                    .collect()
            }
        };
    }
    Ok(score)
}

pub fn model_to_json(f: &FineTuner) -> Result<String, ModelError> {
    Ok(serde_json::to_string_pretty(f)?)
}

/// Parses a model, checking the schema version and kind before the body so
/// those failures get specific errors.
pub fn model_from_json(text: &str) -> Result<FineTuner, ModelError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let version = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or(ModelError::MissingField("schema_version"))?;
    if version != SCHEMA_VERSION as u64 {
        return Err(ModelError::SchemaVersion {
            found: version,
            expected: SCHEMA_VERSION,
        });
    }
    let kind = value.get("kind").ok_or(ModelError::MissingField("kind"))?;
    match kind.as_str() {
        Some(k) if KNOWN_KINDS.contains(&k) => {}
        _ => {
            let shown = kind
                .as_str()
                .map(str::to_string)
                .unwrap_or_else(|| kind.to_string());
            return Err(ModelError::UnknownKind(shown));
        }
    }
    Ok(serde_json::from_value(value)?)
}

pub fn save_model(f: &FineTuner, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, f)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FineTuner, ModelError> {
    let mut text = String::new();
    std::io::Read::read_to_string(&mut BufReader::new(File::open(path)?), &mut text)?;
    model_from_json(&text)
}
