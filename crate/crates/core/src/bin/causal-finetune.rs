use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = causal_finetune::cli::Cli::parse();
    if let Err(e) = causal_finetune::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
