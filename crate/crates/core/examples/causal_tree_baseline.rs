//! Causal-tree baselines: effects estimated from features alone, and with
//! the base score added as a feature.

use causal_finetune::simulation::rng_for;
use causal_finetune::{
    auuc, draw_dgp, fit_causal_tree, mse_true, sample_population, FitConfig, SimulationParams,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = SimulationParams {
        w: 10,
        w_e: 10,
        ..Default::default()
    };
    let mut rng = rng_for(5, 0);
    let g = draw_dgp(&p, &mut rng)?;
    let (train, _) = sample_population(&g, 8_000, &mut rng)?;
    let (test, truth) = sample_population(&g, 10_000, &mut rng)?;

    for (name, with_base) in [("CT", false), ("CT-BS", true)] {
        let scores = fit_causal_tree(&train, with_base, &FitConfig::default())?.apply(&test)?;
        println!(
            "{name:6} MSE {:.3}  AUUC {:.4}",
            mse_true(&scores, &truth),
            auuc(&scores, &test, 10)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
