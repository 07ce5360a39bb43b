//! Effect ordering: boosted single-split shifts that raise AUUC.

use causal_finetune::simulation::rng_for;
use causal_finetune::{
    auuc, draw_dgp, fit_eo, sample_population, FitConfig, SimulationParams, Stage,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = SimulationParams {
        w: 10,
        w_e: 10,
        ..Default::default()
    };
    let mut rng = rng_for(4, 0);
    let g = draw_dgp(&p, &mut rng)?;
    let (train, _) = sample_population(&g, 8_000, &mut rng)?;
    let (test, _) = sample_population(&g, 10_000, &mut rng)?;

    let model = fit_eo(&train, &FitConfig::default())?;
    if let Some(Stage::Shifts { features, stumps }) = model.stages.first() {
        for s in stumps {
            println!(
                "shift {:+.3} where {:?} is {:?} of {:.2}",
                s.shift, features[s.feature], s.side, s.threshold
            );
        }
    }
    println!(
        "test AUUC base       {:.4}",
        auuc(test.base_score(), &test, 10)?
    );
    println!(
        "test AUUC fine-tuned {:.4}",
        auuc(&model.apply(&test)?, &test, 10)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
