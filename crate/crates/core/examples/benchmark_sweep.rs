//! A small Monte-Carlo sweep over methods and training sizes.

use causal_finetune::{run_benchmark, BenchmarkConfig, SimulationParams};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = BenchmarkConfig {
        train_sizes: vec![256, 1024],
        n_reps: 3,
        test_size: 5_000,
        sim: SimulationParams {
            w: 10,
            w_e: 10,
            ..Default::default()
        },
        ..Default::default()
    };
    let report = run_benchmark(&cfg)?;
    println!(
        "{:6} {:>5} {:7} {:>9} {:>8}",
        "method", "size", "metric", "mean", "vs BS %"
    );
    for s in report.summary() {
        let pct = s.pct_vs_bs.map(|v| format!("{v:8.1}")).unwrap_or_default();
        println!(
            "{:6} {:>5} {:7} {:>9.4} {pct}",
            s.method.name(),
            s.train_size,
            s.metric.name(),
            s.mean
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
