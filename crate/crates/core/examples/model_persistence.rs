//! Save a fitted fine-tuner as JSON and score new data with the reloaded
//! model.

use causal_finetune::simulation::rng_for;
use causal_finetune::{
    draw_dgp, fit_ee, load_model, sample_population, save_model, FitConfig, SimulationParams,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = SimulationParams {
        w: 8,
        w_e: 8,
        ..Default::default()
    };
    let mut rng = rng_for(7, 0);
    let g = draw_dgp(&p, &mut rng)?;
    let (train, _) = sample_population(&g, 3_000, &mut rng)?;
    let (fresh, _) = sample_population(&g, 1_000, &mut rng)?;

    let model = fit_ee(&train, &FitConfig::default())?;
    let path = std::env::temp_dir().join(format!("ee-model-{}.json", std::process::id()));
    save_model(&model, &path)?;
    let loaded = load_model(&path)?;
    std::fs::remove_file(&path)?;

    let same = model.apply(&fresh)? == loaded.apply(&fresh)?;
    println!(
        "{} stages, identical scores after reload: {same}",
        loaded.stages.len()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
