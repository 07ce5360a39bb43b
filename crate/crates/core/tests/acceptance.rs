//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Exact-oracle criteria fail the target. Directional benchmark claims are
//! reported but only fail the target when `ACCEPTANCE_STRICT` is set, since
//! they are statistical statements about a finite replication average.
//! Set `CRITEO_CSV` to a local copy of the Criteo uplift file to run the
//! optional ingestion smoke check.

use std::fs::File;
use std::io::BufReader;
use std::time::{Duration, Instant};

use causal_finetune::benchmark::{run_benchmark, BenchmarkConfig, Method, MetricKind};
use causal_finetune::data::load_dataset;
use causal_finetune::ec::find_optimal_threshold;
use causal_finetune::eo::find_optimal_shift;
use causal_finetune::finetuner::{FineTuner, Stage};
use causal_finetune::metrics::{ewm_true, policy_value_true, threshold_actions};
use causal_finetune::simulation::{draw_dgp, rng_for, sample_population, SimulationParams};
use causal_finetune::tree::{enumerate_splits, FitConfig, FitData, TreeNode};
use causal_finetune::{
    apply_calibration, auuc, fit_calibration, fit_ec, fit_ee, fit_eo, policy_value, ColumnRoles,
    ExperimentDataset, PolicyConfig, SimulatedTruth,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Default)]
struct Tally {
    hard_failures: Vec<String>,
    soft_failures: Vec<String>,
}

impl Tally {
    fn report(&mut self, id: &str, name: &str, hard: bool, o: Outcome, took: Duration) {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} [{id}] {name}: {} ({:.1}s)",
            o.detail,
            took.as_secs_f64()
        );
        if !o.pass {
            if hard {
                self.hard_failures.push(id.to_string());
            } else {
                self.soft_failures.push(id.to_string());
            }
        }
    }
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let o = f();
    (o, start.elapsed())
}

fn dataset(t: Vec<bool>, y: Vec<f64>, s: Vec<f64>, p: f64) -> ExperimentDataset {
    let n = t.len();
    ExperimentDataset::new(vec![vec![0.0; n]], vec!["x".into()], t, y, s, p).unwrap()
}

/// Reference AUUC: level floor(m·less/n); V(r) is the difference in arm
/// means over all levels >= r (zero when an arm is empty), weighted
/// (m − r)/m.
fn oracle_auuc(s: &[f64], t: &[bool], y: &[f64], m: usize) -> f64 {
    let n = s.len();
    let level: Vec<usize> = (0..n)
        .map(|i| m * s.iter().filter(|&&v| v < s[i]).count() / n)
        .collect();
    (0..m)
        .map(|r| {
            let mean = |arm: bool| {
                let v: Vec<f64> = (0..n)
                    .filter(|&i| level[i] >= r && t[i] == arm)
                    .map(|i| y[i])
                    .collect();
                (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
            };
            let u = match (mean(true), mean(false)) {
                (Some(a), Some(b)) => a - b,
                _ => 0.0,
            };
            (m - r) as f64 / m as f64 * u
        })
        .sum()
}

/// Exhaustive boundary search: treat-none, then every "score ≥ level" set
/// from the top, keeping the first strict maximum. Returns the treated set
/// and its value.
fn oracle_threshold(s: &[f64], t: &[bool], y: &[f64], p: f64) -> (Vec<bool>, f64) {
    let d = dataset(t.to_vec(), y.to_vec(), s.to_vec(), p);
    let cfg = PolicyConfig::default();
    let mut levels = s.to_vec();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels.dedup();
    let mut best_set = vec![false; s.len()];
    let mut best = policy_value(&best_set, &d, &cfg);
    for lv in levels {
        let set: Vec<bool> = s.iter().map(|&v| v >= lv).collect();
        let v = policy_value(&set, &d, &cfg);
        if v > best {
            best = v;
            best_set = set;
        }
    }
    (best_set, best)
}

fn pick<T: Copy>(rows: &[usize], v: &[T]) -> Vec<T> {
    rows.iter().map(|&i| v[i]).collect()
}

fn c1_ipw_unbiased() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=12usize);
        let y0: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let y1: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let a: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            let t: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let y = (0..n).map(|i| if t[i] { y1[i] } else { y0[i] }).collect();
            total += policy_value(
                &a,
                &dataset(t, y, vec![0.0; n], 0.5),
                &PolicyConfig::default(),
            );
        }
        let avg = total / f64::from(1u32 << n);
        let truth = SimulatedTruth::from_potential_outcomes(y0, y1).unwrap();
        worst = worst.max((avg - policy_value_true(&a, &truth, 0.0)).abs());
    }
    Outcome::new(
        worst < 1e-9,
        format!("50 tables, max |error| {worst:.2e} (tol 1e-9)"),
    )
}

fn c2_policy_plus_ewm() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = PolicyConfig::default();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..60usize);
        let y0: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let y1: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let constant = (0..n)
            .map(|i| y0[i] + (y1[i] - y0[i]).max(0.0))
            .sum::<f64>()
            / n as f64;
        let truth = SimulatedTruth::from_potential_outcomes(y0, y1).unwrap();
        let a = threshold_actions(&scores, cfg.threshold);
        let total = policy_value_true(&a, &truth, cfg.cost) + ewm_true(&scores, &truth, &cfg);
        worst = worst.max((total - constant).abs());
    }
    Outcome::new(
        worst < 1e-9,
        format!("100 instances, max |residual| {worst:.2e} (tol 1e-9)"),
    )
}

fn c3_incremental_delta() -> Outcome {
    // Hand-evaluated: top level uplift 1, whole sample 0.5, AUUC 1.0.
    let hand = oracle_auuc(
        &[4.0, 3.0, 2.0, 1.0],
        &[true, false, true, false],
        &[1.0, 0.0, 0.0, 0.0],
        2,
    );
    assert!((hand - 1.0).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut steps = 0usize;
    let mut done = 0;
    while done < 200 {
        let n = rng.random_range(2..=50usize);
        let m = rng.random_range(2..=5usize);
        let s: Vec<f64> = (0..n)
            .map(|_| f64::from(rng.random_range(0..15)) * 0.5)
            .collect();
        let right: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        if right.iter().all(|&r| r) || right.iter().all(|&r| !r) {
            continue;
        }
        let t: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let cfg = FitConfig {
            m,
            bucket_groups: None,
            ..FitConfig::default()
        };
        let res = find_optimal_shift(&FitData::new(vec![], &t, &y, &s, 0.5), &right, &cfg).unwrap();
        let base = oracle_auuc(&s, &t, &y, m);
        for step in &res.path {
            let moved: Vec<f64> = (0..n)
                .map(|i| if right[i] { s[i] + step.shift } else { s[i] })
                .collect();
            worst = worst.max((oracle_auuc(&moved, &t, &y, m) - base - step.delta).abs());
            steps += 1;
        }
        done += 1;
    }
    Outcome::new(
        worst < 1e-9,
        format!("200 searches, {steps} path steps, max |error| {worst:.2e} (tol 1e-9)"),
    )
}

fn c4_threshold_exact() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for k in 0..200 {
        let n = rng.random_range(1..40usize);
        // Every other leaf uses a coarse grid so tied scores are exercised.
        let s: Vec<f64> = (0..n)
            .map(|_| {
                if k % 2 == 0 {
                    f64::from(rng.random_range(-4..5))
                } else {
                    rng.random_range(-3.0..3.0)
                }
            })
            .collect();
        let t: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let p = rng.random_range(0.2..0.8);
        let data = FitData::new(vec![], &t, &y, &s, p);
        let rows: Vec<usize> = (0..n).collect();
        let fit = find_optimal_threshold(&data, &rows, 0.0, 1e-6);
        let (want_set, want_value) = oracle_threshold(&s, &t, &y, p);
        let got_set: Vec<bool> = s.iter().map(|&v| v > fit.boundary).collect();
        if got_set != want_set {
            mismatches += 1;
        }
        worst = worst.max((fit.value - want_value).abs());
    }
    Outcome::new(
        mismatches == 0 && worst < 1e-12,
        format!(
            "200 leaves, {mismatches} classification mismatches, max |value error| {worst:.2e}"
        ),
    )
}

fn correction_tree(f: &FineTuner) -> &TreeNode {
    f.stages
        .iter()
        .find_map(|s| match s {
            Stage::Correction { tree, .. } => Some(tree),
            _ => None,
        })
        .unwrap()
}

fn ee_oracle_delta(data: &FitData, rows: &[usize]) -> f64 {
    let n = rows.len() as f64;
    let mean_s = rows.iter().map(|&i| data.score[i]).sum::<f64>() / n;
    let arm = |a: bool| {
        let v: Vec<f64> = rows
            .iter()
            .filter(|&&i| data.treatment[i] == a)
            .map(|&i| data.outcome[i])
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    mean_s - (arm(true) - arm(false))
}

fn ee_oracle_gain(data: &FitData, p: &[usize], l: &[usize], r: &[usize]) -> f64 {
    let n = p.len() as f64;
    let sq = |rows: &[usize]| ee_oracle_delta(data, rows).powi(2);
    -sq(p) + l.len() as f64 / n * sq(l) + r.len() as f64 / n * sq(r)
}

fn ec_oracle_gain(data: &FitData, p: &[usize], l: &[usize], r: &[usize]) -> f64 {
    let v = |rows: &[usize]| {
        oracle_threshold(
            &pick(rows, data.score),
            &pick(rows, data.treatment),
            &pick(rows, data.outcome),
            data.propensity,
        )
        .1
    };
    let n = p.len() as f64;
    l.len() as f64 / n * v(l) + r.len() as f64 / n * v(r) - v(p)
}

/// Counts nodes whose split falls short of the best candidate under the
/// oracle gain.
fn suboptimal_nodes(
    tree: &TreeNode,
    data: &FitData,
    rows: &[usize],
    cfg: &FitConfig,
    gain: impl Fn(&FitData, &[usize], &[usize], &[usize]) -> f64,
) -> (usize, usize) {
    let (mut nodes, mut bad) = (0, 0);
    tree.visit_splits(data, rows, |chosen, node_rows| {
        nodes += 1;
        let g = |c: &causal_finetune::tree::SplitCandidate| {
            let (l, r) = c.partition(data, node_rows);
            gain(data, node_rows, &l, &r)
        };
        let best = enumerate_splits(data, node_rows, cfg)
            .iter()
            .map(g)
            .fold(f64::NEG_INFINITY, f64::max);
        if g(&chosen) < best - 1e-9 {
            bad += 1;
        }
    });
    (nodes, bad)
}

fn random_sim(rng: &mut ChaCha8Rng, seed: u64) -> ExperimentDataset {
    let w = rng.random_range(2..=6usize);
    let n = rng.random_range(200..=600usize);
    let p = SimulationParams {
        w,
        w_e: w,
        ..SimulationParams::default()
    };
    let mut r = rng_for(seed, 0);
    let g = draw_dgp(&p, &mut r).unwrap();
    sample_population(&g, n, &mut r).unwrap().0
}

fn c5_split_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = FitConfig {
        min_leaf: 20,
        min_arm: 5,
        n_split_quantiles: 8,
        ..FitConfig::default()
    };
    let (mut nodes, mut bad) = (0, 0);
    for k in 0..50 {
        let d = random_sim(&mut rng, 500 + k);
        let rows: Vec<usize> = (0..d.n_rows()).collect();

        let ee = fit_ee(&d, &cfg).unwrap();
        let cal = match &ee.stages[0] {
            Stage::Calibration(p) => apply_calibration(p, d.base_score()),
            _ => unreachable!(),
        };
        let data = FitData::with_score(&d, &cal, true);
        let (a, b) = suboptimal_nodes(correction_tree(&ee), &data, &rows, &cfg, ee_oracle_gain);
        nodes += a;
        bad += b;

        let ec = fit_ec(&d, &cfg).unwrap();
        let data = FitData::with_score(&d, d.base_score(), true);
        let mut sorted = rows.clone();
        sorted.sort_by(|&i, &j| {
            d.base_score()[j]
                .total_cmp(&d.base_score()[i])
                .then(i.cmp(&j))
        });
        let (a, b) = suboptimal_nodes(correction_tree(&ec), &data, &sorted, &cfg, ec_oracle_gain);
        nodes += a;
        bad += b;
    }
    Outcome::new(
        bad == 0 && nodes > 0,
        format!("50 EE + 50 EC fits, {nodes} split nodes, {bad} below the brute-force best"),
    )
}

fn c6_bucketing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut differ = 0;
    let mut stumps = 0;
    for k in 0..50 {
        let d = random_sim(&mut rng, 600 + k);
        let base = FitConfig {
            min_leaf: 20,
            min_arm: 5,
            n_trees: 3,
            ..FitConfig::default()
        };
        let plain = fit_eo(
            &d,
            &FitConfig {
                bucket_groups: None,
                ..base.clone()
            },
        )
        .unwrap();
        let bucketed = fit_eo(
            &d,
            &FitConfig {
                bucket_groups: Some(d.n_rows() + k as usize),
                ..base
            },
        )
        .unwrap();
        if let Stage::Shifts { stumps: s, .. } = &plain.stages[0] {
            stumps += s.len();
        }
        if plain.stages != bucketed.stages {
            differ += 1;
        }
    }
    Outcome::new(
        differ == 0,
        format!("50 instances, {stumps} stumps, {differ} differ from the unbucketed fit"),
    )
}

fn c7_affine_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut calibrated_checked = 0;
    for _ in 0..100 {
        let n = rng.random_range(10..300usize);
        let m = rng.random_range(2..=10usize);
        let s: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let t: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 0.3 * s[i] * t[i] as u8 as f64 + rng.random_range(-3.0..3.0))
            .collect();
        let d = dataset(t, y, s.clone(), 0.5);
        let a = rng.random_range(0.01..20.0);
        let b = rng.random_range(-10.0..10.0);
        let moved: Vec<f64> = s.iter().map(|v| a * v + b).collect();
        let base = auuc(&s, &d, m).unwrap();
        worst = worst.max((auuc(&moved, &d, m).unwrap() - base).abs());
        let p = fit_calibration(&s, &d);
        if p.scale > 0.0 {
            calibrated_checked += 1;
            worst = worst.max((auuc(&apply_calibration(&p, &s), &d, m).unwrap() - base).abs());
        }
    }
    Outcome::new(
        worst <= 1e-12,
        format!(
            "100 affine maps and {calibrated_checked} positive-scale calibrations, max |ΔAUUC| {worst:.2e} (tol 1e-12)"
        ),
    )
}

fn c8_directional(tally: &mut Tally) {
    let sizes = [128usize, 512, 2048, 8192];
    let cfg = BenchmarkConfig {
        train_sizes: sizes.to_vec(),
        n_reps: 20,
        sim: SimulationParams {
            w: 20,
            w_e: 20,
            ..SimulationParams::default()
        },
        ..BenchmarkConfig::default()
    };
    let start = Instant::now();
    let report = run_benchmark(&cfg).expect("benchmark runs");
    let took = start.elapsed();
    let mean = |m: Method, s: usize, k: MetricKind| report.mean(m, s, k).unwrap_or(f64::NAN);
    println!(
        "     benchmark: 20 reps, sizes {sizes:?}, {} rows, {} skipped cells, {:.1}s (limit 900s)",
        report.rows.len(),
        report.skipped.len(),
        took.as_secs_f64()
    );
    for k in [MetricKind::Mse, MetricKind::Auuc, MetricKind::Policy] {
        for m in Method::ALL {
            let cells: Vec<String> = sizes
                .iter()
                .map(|&s| format!("{:8.3}", mean(m, s, k)))
                .collect();
            println!("     {:6} {:6} {}", k.name(), m.name(), cells.join(" "));
        }
    }
    let runtime_ok = took < Duration::from_secs(900);

    let (cal, ct) = (
        mean(Method::BsCal, 128, MetricKind::Mse),
        mean(Method::Ct, 128, MetricKind::Mse),
    );
    tally.report(
        "8a",
        "calibrated base beats CT on MSE at 128",
        false,
        Outcome::new(
            cal < ct && runtime_ok,
            format!("BS_CAL {cal:.3} vs CT {ct:.3}"),
        ),
        took,
    );

    let mut misses = Vec::new();
    for k in [MetricKind::Mse, MetricKind::Auuc, MetricKind::Policy] {
        for &s in &sizes {
            let (bs, plain) = (mean(Method::CtBs, s, k), mean(Method::Ct, s, k));
            let ok = if k.lower_is_better() {
                bs <= plain
            } else {
                bs >= plain
            };
            if !ok {
                misses.push(format!(
                    "{} at {s}: CT_BS {bs:.3} vs CT {plain:.3}",
                    k.name()
                ));
            }
        }
    }
    let detail = if misses.is_empty() {
        "12 of 12 cells".to_string()
    } else {
        format!("{} of 12 cells miss: {}", misses.len(), misses.join("; "))
    };
    tally.report(
        "8b",
        "CT-BS at least CT on every metric and size",
        false,
        Outcome::new(misses.is_empty(), detail),
        Duration::ZERO,
    );

    let mut misses = Vec::new();
    for &s in &sizes {
        let (eo, ct) = (
            mean(Method::Eo, s, MetricKind::Auuc),
            mean(Method::Ct, s, MetricKind::Auuc),
        );
        let ok = if s == 8192 { eo > ct } else { eo >= ct };
        if !ok {
            misses.push(format!("{s}: EO {eo:.3} vs CT {ct:.3}"));
        }
    }
    let detail = if misses.is_empty() {
        format!(
            "EO above CT at every size; at 8192 {:.3} vs {:.3}",
            mean(Method::Eo, 8192, MetricKind::Auuc),
            mean(Method::Ct, 8192, MetricKind::Auuc)
        )
    } else {
        format!("misses at {}", misses.join("; "))
    };
    tally.report(
        "8c",
        "EO AUUC at least CT, strictly at 8192",
        false,
        Outcome::new(misses.is_empty(), detail),
        Duration::ZERO,
    );

    let calibrated = [
        Method::BsCal,
        Method::Ct,
        Method::CtBs,
        Method::Ee,
        Method::Eo,
        Method::Ec,
    ];
    let mut misses = Vec::new();
    for &s in sizes.iter().filter(|&&s| s >= 512) {
        let bs = mean(Method::Bs, s, MetricKind::Mse);
        for m in calibrated {
            let v = mean(m, s, MetricKind::Mse);
            if v.is_nan() || v >= bs {
                misses.push(format!("{} at {s}: {v:.3} vs BS {bs:.3}", m.name()));
            }
        }
    }
    let detail = if misses.is_empty() {
        "18 of 18 cells".to_string()
    } else {
        format!("{} of 18 cells miss: {}", misses.len(), misses.join("; "))
    };
    tally.report(
        "8d",
        "uncalibrated BS has the worst MSE from 512 up",
        false,
        Outcome::new(misses.is_empty(), detail),
        Duration::ZERO,
    );
}

fn variance(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    v.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

fn c9_variance_shares() -> Outcome {
    // A single DGP draw gives a chi-square-like explained share, so the
    // shares are pooled over independent draws.
    let p = SimulationParams::default();
    let draws = 40;
    let (mut explained_y, mut total_y, mut explained_c, mut total_c) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..draws {
        let mut rng = rng_for(900, k);
        let g = draw_dgp(&p, &mut rng).unwrap();
        let (d, truth) = sample_population(&g, 100_000, &mut rng).unwrap();
        explained_y += variance(d.base_score().iter().copied());
        total_y += variance(truth.y0.iter().copied());
        explained_c += variance(truth.cate.iter().copied());
        total_c += variance(truth.y1.iter().zip(&truth.y0).map(|(a, b)| a - b));
    }
    let (sy, sc) = (explained_y / total_y, explained_c / total_c);
    Outcome::new(
        (sy - 0.5).abs() <= 0.03 && (sc - 0.5).abs() <= 0.03,
        format!("{draws} draws at n = 100000: Y0 share {sy:.3}, effect share {sc:.3} (target 0.50 ± 0.03)"),
    )
}

fn c10_criteo(tally: &mut Tally) {
    let Ok(path) = std::env::var("CRITEO_CSV") else {
        println!("SKIP [10] Criteo smoke check: CRITEO_CSV not set");
        return;
    };
    let (o, took) = timed(|| {
        let roles = ColumnRoles {
            treatment: "treatment".into(),
            outcome: "visit".into(),
            base_score: "f9".into(),
        };
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) => return Outcome::new(false, format!("cannot open {path}: {e}")),
        };
        match load_dataset(BufReader::new(file), &roles, 0.85) {
            Ok(d) => {
                let n = d.n_rows() as f64;
                let visit = 100.0 * d.outcome().iter().sum::<f64>() / n;
                let treated = 100.0 * d.n_treated() as f64 / n;
                Outcome::new(
                    (visit - 4.70).abs() <= 0.05 && (treated - 85.0).abs() <= 0.5,
                    format!("{n} rows, visit rate {visit:.2}% (4.70 ± 0.05), treated {treated:.2}% (85 ± 0.5)"),
                )
            }
            Err(e) => Outcome::new(false, format!("load failed: {e}")),
        }
    });
    tally.report("10", "Criteo smoke check", true, o, took);
}

fn main() {
    // Let `cargo test -- --list` and name filters behave like a harness.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    if args
        .iter()
        .any(|a| !a.starts_with('-') && !"acceptance".contains(a.as_str()))
    {
        return;
    }

    let mut tally = Tally::default();
    let (o, took) = timed(c1_ipw_unbiased);
    let o = Outcome::new(o.pass && took < Duration::from_secs(10), o.detail);
    tally.report("1", "IPW policy value is unbiased", true, o, took);
    let (o, took) = timed(c2_policy_plus_ewm);
    tally.report("2", "policy value plus EWM is constant", true, o, took);
    let (o, took) = timed(c3_incremental_delta);
    tally.report(
        "3",
        "incremental AUUC change matches recount",
        true,
        o,
        took,
    );
    let (o, took) = timed(c4_threshold_exact);
    tally.report(
        "4",
        "optimal threshold equals exhaustive scan",
        true,
        o,
        took,
    );
    let (o, took) = timed(c5_split_optimality);
    tally.report(
        "5",
        "EE and EC splits are brute-force optimal",
        true,
        o,
        took,
    );
    let (o, took) = timed(c6_bucketing);
    tally.report(
        "6",
        "fine buckets reproduce the unbucketed EO fit",
        true,
        o,
        took,
    );
    let (o, took) = timed(c7_affine_invariance);
    tally.report("7", "AUUC invariant to positive affine maps", true, o, took);
    c8_directional(&mut tally);
    let (o, took) = timed(c9_variance_shares);
    tally.report("9", "features explain half the variance", true, o, took);
    c10_criteo(&mut tally);

    let strict = std::env::var_os("ACCEPTANCE_STRICT").is_some();
    println!(
        "acceptance: {} exact-criterion failures {:?}, {} directional failures {:?}{}",
        tally.hard_failures.len(),
        tally.hard_failures,
        tally.soft_failures.len(),
        tally.soft_failures,
        if strict { " (strict)" } else { "" }
    );
    if !tally.hard_failures.is_empty() || (strict && !tally.soft_failures.is_empty()) {
        std::process::exit(1);
    }
}
