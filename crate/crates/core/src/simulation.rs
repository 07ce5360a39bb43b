//! Linear simulation with correlated baseline and effect coefficients.
//!
//! Each DGP draw samples per-feature coefficients `(α_j, β_j)` from a
//! bivariate normal. Rows then get Bernoulli(0.5) features, a fair coin for
//! treatment, and correlated noise on the baseline outcome and the effect.
//! The base score is the noiseless baseline `Σ α_j X_j`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ExperimentDataset, SimulatedTruth};

#[derive(Debug, Error, PartialEq)]
pub enum SimulationError {
    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationParams {
    pub w: usize,
    pub w_e: usize,
    pub rho: f64,
    pub sigma2_alpha: f64,
    pub sigma2_beta: f64,
    pub sigma2_y: f64,
    pub sigma2_c: f64,
    pub seed: u64,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            w: 50,
            w_e: 50,
            rho: 0.5,
            sigma2_alpha: 1.0,
            sigma2_beta: 1.0,
            sigma2_y: 12.5,
            sigma2_c: 12.5,
            seed: 0,
        }
    }
}

impl SimulationParams {
    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: &str| Err(SimulationError::InvalidParams(m.to_string()));
        if self.w_e > self.w {
            return bad("w_e must not exceed w");
        }
        if self.rho.is_nan() || self.rho.abs() > 1.0 {
            return bad("rho must lie in [-1, 1]");
        }
        let vars = [
            self.sigma2_alpha,
            self.sigma2_beta,
            self.sigma2_y,
            self.sigma2_c,
        ];
        if vars.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("variances must be finite and non-negative");
        }
        Ok(())
    }
}

/// RNG for replication `stream` under a master seed. Streams are
/// independent, so replications can run in any order or in parallel.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Pair of zero-mean normals with the given variances and correlation.
fn correlated_pair(rng: &mut impl Rng, var_a: f64, var_b: f64, rho: f64) -> (f64, f64) {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let a = var_a.sqrt() * z1;
    let b = var_b.sqrt() * (rho * z1 + (1.0 - rho * rho).max(0.0).sqrt() * z2);
    (a, b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpInstance {
    pub alpha: Vec<f64>,
    pub beta_coef: Vec<f64>,
    pub params: SimulationParams,
}

pub fn draw_dgp(p: &SimulationParams, rng: &mut impl Rng) -> Result<DgpInstance, SimulationError> {
    p.validate()?;
    let (alpha, beta_coef) = (0..p.w)
        .map(|_| correlated_pair(rng, p.sigma2_alpha, p.sigma2_beta, p.rho))
        .unzip();
    Ok(DgpInstance {
        alpha,
        beta_coef,
        params: p.clone(),
    })
}

/// `n` rows with only the first `w_e` features exposed, named `x0, x1, …`.
pub fn sample_population(
    g: &DgpInstance,
    n: usize,
    rng: &mut impl Rng,
) -> Result<(ExperimentDataset, SimulatedTruth), SimulationError> {
    let p = &g.params;
    if n == 0 {
        return Err(SimulationError::InvalidParams(
            "n must be at least 1".into(),
        ));
    }
    let mut columns = vec![Vec::with_capacity(n); p.w_e];
    let mut treatment = Vec::with_capacity(n);
    let mut outcome = Vec::with_capacity(n);
    let mut base = Vec::with_capacity(n);
    let (mut y0s, mut y1s, mut cates) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    let mut x = vec![false; p.w];
    for _ in 0..n {
        for xj in x.iter_mut() {
            *xj = rng.random_bool(0.5);
        }
        let (ey, ec) = correlated_pair(rng, p.sigma2_y, p.sigma2_c, p.rho);
        let t = rng.random_bool(0.5);
        let (mut mu0, mut cate) = (0.0, 0.0);
        for (j, &on) in x.iter().enumerate() {
            if on {
                mu0 += g.alpha[j];
                cate += g.beta_coef[j];
            }
        }
        let y0 = mu0 + ey;
        let y1 = y0 + cate + ec;
        for (col, &on) in columns.iter_mut().zip(&x) {
            col.push(on as u8 as f64);
        }
        treatment.push(t);
        outcome.push(if t { y1 } else { y0 });
        base.push(mu0);
        y0s.push(y0);
        y1s.push(y1);
        cates.push(cate);
    }
    let names = (0..p.w_e).map(|j| format!("x{j}")).collect();
    let d = ExperimentDataset::new(columns, names, treatment, outcome, base, 0.5)
        .expect("simulated data satisfies dataset invariants");
    let truth = SimulatedTruth::new(y0s, y1s, cates).expect("aligned truth vectors");
    Ok((d, truth))
}
