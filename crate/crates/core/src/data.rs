//! Experimental datasets, score vectors and simulated ground truth.
//!
//! Features are stored column-major so split enumeration can scan one
//! column at a time. Datasets are immutable once built.

use std::io::{Read, Write};
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("empty dataset")]
    Empty,
    #[error("missing {role} column `{column}`")]
    MissingColumn { role: &'static str, column: String },
    #[error("line {line}, column `{column}`: treatment must be 0 or 1, got `{value}`")]
    NonBinaryTreatment {
        line: u64,
        column: String,
        value: String,
    },
    #[error("line {line}, column `{column}`: cannot parse `{value}` as a number")]
    Unparseable {
        line: u64,
        column: String,
        value: String,
    },
    #[error("line {line}, column `{column}`: missing value")]
    MissingValue { line: u64, column: String },
    #[error("line {line}, column `{column}`: non-finite value `{value}`")]
    NonFinite {
        line: u64,
        column: String,
        value: String,
    },
    #[error("propensity must lie strictly between 0 and 1, got {0}")]
    InvalidPropensity(f64),
    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: String,
        got: usize,
        expected: usize,
    },
    #[error("{0} contains a non-finite value")]
    NonFiniteField(&'static str),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Column names carrying the treatment, outcome and base-score roles.
/// Every other column is a feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnRoles {
    pub treatment: String,
    pub outcome: String,
    pub base_score: String,
}

impl Default for ColumnRoles {
    fn default() -> Self {
        Self {
            treatment: "treatment".into(),
            outcome: "outcome".into(),
            base_score: "base_score".into(),
        }
    }
}

/// Randomized-experiment data: features, treatment flag, outcome, base
/// score, and the design probability of treatment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentDataset {
    columns: Vec<Vec<f64>>,
    feature_names: Vec<String>,
    treatment: Vec<bool>,
    outcome: Vec<f64>,
    base_score: Vec<f64>,
    propensity_treated: f64,
}

impl ExperimentDataset {
    pub fn new(
        columns: Vec<Vec<f64>>,
        feature_names: Vec<String>,
        treatment: Vec<bool>,
        outcome: Vec<f64>,
        base_score: Vec<f64>,
        propensity_treated: f64,
    ) -> Result<Self, DataError> {
        let n = treatment.len();
        if n == 0 {
            return Err(DataError::Empty);
        }
        if !(propensity_treated > 0.0 && propensity_treated < 1.0) {
            return Err(DataError::InvalidPropensity(propensity_treated));
        }
        check_len("outcome", outcome.len(), n)?;
        check_len("base_score", base_score.len(), n)?;
        check_len("feature_names", feature_names.len(), columns.len())?;
        for (name, col) in feature_names.iter().zip(&columns) {
            check_len(name, col.len(), n)?;
            if col.iter().any(|v| !v.is_finite()) {
                return Err(DataError::NonFiniteField("features"));
            }
        }
        if outcome.iter().any(|v| !v.is_finite()) {
            return Err(DataError::NonFiniteField("outcome"));
        }
        if base_score.iter().any(|v| !v.is_finite()) {
            return Err(DataError::NonFiniteField("base_score"));
        }
        Ok(Self {
            columns,
            feature_names,
            treatment,
            outcome,
            base_score,
            propensity_treated,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.treatment.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn feature(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn treatment(&self) -> &[bool] {
        &self.treatment
    }

    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }

    pub fn base_score(&self) -> &[f64] {
        &self.base_score
    }

    pub fn propensity_treated(&self) -> f64 {
        self.propensity_treated
    }

    /// Probability of the arm actually received by a row.
    pub fn arm_probability(&self, treated: bool) -> f64 {
        if treated {
            self.propensity_treated
        } else {
            1.0 - self.propensity_treated
        }
    }

    pub fn n_treated(&self) -> usize {
        self.treatment.iter().filter(|&&t| t).count()
    }

    /// Same rows with a different base-score column.
    pub fn with_base_score(&self, base_score: Vec<f64>) -> Result<Self, DataError> {
        check_len("base_score", base_score.len(), self.n_rows())?;
        let mut out = self.clone();
        out.base_score = base_score;
        Ok(out)
    }

    /// Rows selected by index, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Self, DataError> {
        let pick = |v: &[f64]| rows.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self::new(
            self.columns.iter().map(|c| pick(c)).collect(),
            self.feature_names.clone(),
            rows.iter().map(|&i| self.treatment[i]).collect(),
            pick(&self.outcome),
            pick(&self.base_score),
            self.propensity_treated,
        )
    }
}

fn check_len(what: &str, got: usize, expected: usize) -> Result<(), DataError> {
    if got != expected {
        return Err(DataError::LengthMismatch {
            what: what.to_string(),
            got,
            expected,
        });
    }
    Ok(())
}

/// Causal scores aligned with a dataset by row index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(values: Vec<f64>) -> Result<Self, DataError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DataError::NonFiniteField("scores"));
        }
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ScoreVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Potential outcomes and true conditional effects, available only for
/// simulated data.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedTruth {
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    pub cate: Vec<f64>,
}

impl SimulatedTruth {
    pub fn new(y0: Vec<f64>, y1: Vec<f64>, cate: Vec<f64>) -> Result<Self, DataError> {
        check_len("y1", y1.len(), y0.len())?;
        check_len("cate", cate.len(), y0.len())?;
        Ok(Self { y0, y1, cate })
    }

    /// Truth for a fully enumerated population, where each row's effect is
    /// its own potential-outcome difference.
    pub fn from_potential_outcomes(y0: Vec<f64>, y1: Vec<f64>) -> Result<Self, DataError> {
        check_len("y1", y1.len(), y0.len())?;
        let cate = y0.iter().zip(&y1).map(|(a, b)| b - a).collect();
        Ok(Self { y0, y1, cate })
    }

    pub fn len(&self) -> usize {
        self.cate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cate.is_empty()
    }
}

/// Inverse-propensity transformed outcome `y·t/p − y·(1−t)/(1−p)`.
pub fn transformed_outcome(d: &ExperimentDataset) -> Vec<f64> {
    let p = d.propensity_treated();
    d.outcome()
        .iter()
        .zip(d.treatment())
        .map(|(&y, &t)| if t { y / p } else { -y / (1.0 - p) })
        .collect()
}

/// Horvitz–Thompson estimate of the average effect.
pub fn horvitz_thompson_ate(d: &ExperimentDataset) -> f64 {
    let p = d.propensity_treated();
    let n = d.n_rows() as f64;
    let (mut s1, mut s0) = (0.0, 0.0);
    for (&y, &t) in d.outcome().iter().zip(d.treatment()) {
        if t {
            s1 += y;
        } else {
            s0 += y;
        }
    }
    s1 / n / p - s0 / n / (1.0 - p)
}

fn parse_cell(line: u64, column: &str, raw: &str) -> Result<f64, DataError> {
    let s = raw.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan") {
        return Err(DataError::MissingValue {
            line,
            column: column.to_string(),
        });
    }
    let v: f64 = s.parse().map_err(|_| DataError::Unparseable {
        line,
        column: column.to_string(),
        value: raw.to_string(),
    })?;
    if !v.is_finite() {
        return Err(DataError::NonFinite {
            line,
            column: column.to_string(),
            value: raw.to_string(),
        });
    }
    Ok(v)
}

fn parse_treatment(line: u64, column: &str, raw: &str) -> Result<bool, DataError> {
    match raw.trim() {
        "" => Err(DataError::MissingValue {
            line,
            column: column.to_string(),
        }),
        "0" | "0.0" => Ok(false),
        "1" | "1.0" => Ok(true),
        _ => Err(DataError::NonBinaryTreatment {
            line,
            column: column.to_string(),
            value: raw.to_string(),
        }),
    }
}

/// Reads a headed CSV. Role columns are located by name; all remaining
/// columns become features in file order.
pub fn load_dataset<R: Read>(
    source: R,
    roles: &ColumnRoles,
    propensity_treated: f64,
) -> Result<ExperimentDataset, DataError> {
    if !(propensity_treated > 0.0 && propensity_treated < 1.0) {
        return Err(DataError::InvalidPropensity(propensity_treated));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let find = |role: &'static str, name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| DataError::MissingColumn {
                role,
                column: name.to_string(),
            })
    };
    let t_idx = find("treatment", &roles.treatment)?;
    let y_idx = find("outcome", &roles.outcome)?;
    let s_idx = find("base score", &roles.base_score)?;
    let feature_idx: Vec<usize> = (0..headers.len())
        .filter(|i| ![t_idx, y_idx, s_idx].contains(i))
        .collect();
    let feature_names: Vec<String> = feature_idx
        .iter()
        .map(|&i| headers[i].trim().to_string())
        .collect();

    let mut columns = vec![Vec::new(); feature_idx.len()];
    let (mut treatment, mut outcome, mut base_score) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |i: usize| record.get(i).unwrap_or("");
        treatment.push(parse_treatment(line, &roles.treatment, cell(t_idx))?);
        outcome.push(parse_cell(line, &roles.outcome, cell(y_idx))?);
        base_score.push(parse_cell(line, &roles.base_score, cell(s_idx))?);
        for (col, (&i, name)) in columns
            .iter_mut()
            .zip(feature_idx.iter().zip(&feature_names))
        {
            col.push(parse_cell(line, name, cell(i))?);
        }
    }
    if treatment.is_empty() {
        return Err(DataError::Empty);
    }
    ExperimentDataset::new(
        columns,
        feature_names,
        treatment,
        outcome,
        base_score,
        propensity_treated,
    )
}

/// Writes features followed by the three role columns. Floats use the
/// shortest representation that parses back to the same bits.
pub fn save_dataset<W: Write>(
    d: &ExperimentDataset,
    sink: W,
    roles: &ColumnRoles,
) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header: Vec<&str> = d.feature_names.iter().map(String::as_str).collect();
    header.extend([
        roles.treatment.as_str(),
        roles.outcome.as_str(),
        roles.base_score.as_str(),
    ]);
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..d.n_rows() {
        row.clear();
        row.extend(d.columns.iter().map(|c| c[i].to_string()));
        row.push(if d.treatment[i] { "1" } else { "0" }.to_string());
        row.push(d.outcome[i].to_string());
        row.push(d.base_score[i].to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_truth<W: Write>(truth: &SimulatedTruth, sink: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["y0", "y1", "cate"])?;
    for i in 0..truth.len() {
        w.write_record([
            truth.y0[i].to_string(),
            truth.y1[i].to_string(),
            truth.cate[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_truth<R: Read>(source: R) -> Result<SimulatedTruth, DataError> {
    let cols = read_named_columns(source, &["y0", "y1", "cate"])?;
    let mut it = cols.into_iter();
    let (y0, y1, cate) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    SimulatedTruth::new(y0, y1, cate)
}

pub fn save_scores<W: Write>(scores: &[f64], sink: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["score"])?;
    for s in scores {
        w.write_record([s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_scores<R: Read>(source: R) -> Result<ScoreVector, DataError> {
    let mut cols = read_named_columns(source, &["score"])?;
    ScoreVector::new(cols.pop().unwrap())
}

fn read_named_columns<R: Read>(source: R, names: &[&str]) -> Result<Vec<Vec<f64>>, DataError> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader.headers()?.clone();
    let idx = names
        .iter()
        .map(|&name| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| DataError::MissingColumn {
                    role: "required",
                    column: name.to_string(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        for ((col, &i), name) in out.iter_mut().zip(&idx).zip(names) {
            col.push(parse_cell(line, name, record.get(i).unwrap_or(""))?);
        }
    }
    if out[0].is_empty() {
        return Err(DataError::Empty);
    }
    Ok(out)
}
