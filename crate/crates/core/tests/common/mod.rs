#![allow(dead_code)]

use causal_finetune::simulation::{draw_dgp, rng_for, sample_population, SimulationParams};
use causal_finetune::{ExperimentDataset, SimulatedTruth};

/// Small simulated experiment with `w` binary features.
pub fn simulated(seed: u64, n: usize, w: usize) -> (ExperimentDataset, SimulatedTruth) {
    let p = SimulationParams {
        w,
        w_e: w,
        seed,
        ..SimulationParams::default()
    };
    let mut rng = rng_for(seed, 0);
    let g = draw_dgp(&p, &mut rng).unwrap();
    sample_population(&g, n, &mut rng).unwrap()
}

/// Balanced noiseless design: every feature cell appears `reps` times in
/// each arm. `y0` and `cate` map the two binary features to outcomes.
pub fn balanced(
    reps: usize,
    y0: impl Fn(f64, f64) -> f64,
    cate: impl Fn(f64, f64) -> f64,
    base: impl Fn(f64, f64) -> f64,
) -> ExperimentDataset {
    let (mut x0, mut x1, mut t, mut y, mut s) = (vec![], vec![], vec![], vec![], vec![]);
    for r in 0..reps {
        for cell in 0..4 {
            let (a, b) = ((cell & 1) as f64, (cell >> 1) as f64);
            for treated in [r % 2 == 0, r % 2 != 0] {
                x0.push(a);
                x1.push(b);
                t.push(treated);
                y.push(y0(a, b) + if treated { cate(a, b) } else { 0.0 });
                s.push(base(a, b));
            }
        }
    }
    ExperimentDataset::new(vec![x0, x1], vec!["x0".into(), "x1".into()], t, y, s, 0.5).unwrap()
}
