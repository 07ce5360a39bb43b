//! Effect estimation: a tree of leaf-level bias corrections on calibrated
//! base scores, compared with plain calibration on true effect MSE.

use causal_finetune::simulation::rng_for;
use causal_finetune::{
    apply_calibration, draw_dgp, fit_calibration, fit_ee, mse_true, sample_population, FitConfig,
    SimulationParams, Stage,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = SimulationParams {
        w: 10,
        w_e: 10,
        ..Default::default()
    };
    let mut rng = rng_for(2, 0);
    let g = draw_dgp(&p, &mut rng)?;
    let (train, _) = sample_population(&g, 8_000, &mut rng)?;
    let (test, truth) = sample_population(&g, 10_000, &mut rng)?;

    let model = fit_ee(&train, &FitConfig::default())?;
    if let Some(Stage::Correction { tree, .. }) = model.stages.get(1) {
        println!(
            "correction tree: {} leaves, depth {}",
            tree.n_leaves(),
            tree.depth()
        );
    }
    let cal = apply_calibration(
        &fit_calibration(train.base_score(), &train),
        test.base_score(),
    );
    println!("MSE calibrated base {:.3}", mse_true(&cal, &truth));
    println!(
        "MSE fine-tuned      {:.3}",
        mse_true(&model.apply(&test)?, &truth)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
