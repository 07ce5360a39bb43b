//! Effect classification: per-leaf decision boundaries that maximise the
//! estimated value of treating everyone with a positive score.

use causal_finetune::ec::ThresholdFit;
use causal_finetune::metrics::policy_value_true;
use causal_finetune::simulation::rng_for;
use causal_finetune::tree::FitData;
use causal_finetune::{
    draw_dgp, find_optimal_threshold, fit_ec, sample_population, FitConfig, PolicyConfig,
    SimulationParams,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = SimulationParams {
        w: 10,
        w_e: 10,
        ..Default::default()
    };
    let mut rng = rng_for(3, 0);
    let g = draw_dgp(&p, &mut rng)?;
    let (train, _) = sample_population(&g, 8_000, &mut rng)?;
    let (test, truth) = sample_population(&g, 10_000, &mut rng)?;

    // One global boundary on the raw scores.
    let rows: Vec<usize> = (0..train.n_rows()).collect();
    let ThresholdFit {
        boundary,
        value,
        n_treated,
    } = find_optimal_threshold(&FitData::from_dataset(&train), &rows, 0.0, 1e-6);
    println!("global boundary {boundary:.3}: treats {n_treated} rows, estimated value {value:.3}");

    let model = fit_ec(&train, &FitConfig::default())?;
    let policy = PolicyConfig::default();
    let treat_raw = policy.actions(test.base_score());
    let treat_ec = policy.actions(&model.apply(&test)?);
    println!(
        "true value, raw score > 0: {:.3}",
        policy_value_true(&treat_raw, &truth, 0.0)
    );
    println!(
        "true value, fine-tuned:    {:.3}",
        policy_value_true(&treat_ec, &truth, 0.0)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
