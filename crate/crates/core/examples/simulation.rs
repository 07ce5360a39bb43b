//! Draw a linear DGP and sample an experiment with its hidden truth.

use causal_finetune::simulation::rng_for;
use causal_finetune::{draw_dgp, sample_population, SimulationParams};

fn variance(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let p = SimulationParams {
        w_e: 30,
        ..Default::default()
    };
    let mut rng = rng_for(p.seed, 0);
    let g = draw_dgp(&p, &mut rng)?;
    let (d, truth) = sample_population(&g, 20_000, &mut rng)?;
    println!(
        "{} rows, {} visible of {} features",
        d.n_rows(),
        d.n_features(),
        p.w
    );
    println!(
        "treated fraction {:.3}",
        d.n_treated() as f64 / d.n_rows() as f64
    );
    println!(
        "Var(base) {:.2}, Var(Y0) {:.2}, Var(cate) {:.2}",
        variance(d.base_score()),
        variance(&truth.y0),
        variance(&truth.cate)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
