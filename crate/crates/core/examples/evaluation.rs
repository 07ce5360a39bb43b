//! Metrics that need no ground truth: AUUC, binned MSE and the IPW value of
//! a top-10% policy.

use causal_finetune::simulation::rng_for;
use causal_finetune::{
    auuc, binned_mse, draw_dgp, policy_value, sample_population, PolicyConfig, SimulationParams,
};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = SimulationParams {
        w: 10,
        w_e: 10,
        ..Default::default()
    };
    let mut rng = rng_for(6, 0);
    let g = draw_dgp(&p, &mut rng)?;
    let (d, _) = sample_population(&g, 20_000, &mut rng)?;
    let scores = d.base_score();

    println!("AUUC (m = 10) {:.4}", auuc(scores, &d, 10)?);
    println!("binned MSE    {:.3}", binned_mse(scores, scores, &d, 10)?);
    let top = PolicyConfig {
        top_fraction: Some(0.1),
        ..Default::default()
    };
    let all = PolicyConfig::default();
    println!(
        "value, treat top 10%:   {:.3}",
        policy_value(&top.actions(scores), &d, &top)
    );
    println!(
        "value, treat score > 0: {:.3}",
        policy_value(&all.actions(scores), &d, &all)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
