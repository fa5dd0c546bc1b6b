//! Run all three modes on a registry problem, write traces and a ranking.
//!
//! `cargo run --release --example benchmark_compare -- H3-n 1000 3`

use noisy_seed_opt::bench::{compare, ExperimentConfig};
use noisy_seed_opt::orchestrator::Mode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let problem = args.next().unwrap_or_else(|| "H2-n".into());
    let cap: usize = args.next().map_or(Ok(150), |s| s.parse())?;
    let trials: usize = args.next().map_or(Ok(2), |s| s.parse())?;
    let out = std::env::temp_dir().join("noisy-seed-opt-compare");

    let configs: Vec<ExperimentConfig> = Mode::ALL
        .into_iter()
        .map(|mode| ExperimentConfig {
            trials,
            rng_seed_base: 100,
            output_dir: Some(out.clone()),
            ..ExperimentConfig::new(problem.clone(), mode)
        }
        .with_cap(cap))
        .collect();
    println!("{}", configs[0].to_toml_string()?);

    let result = compare(&configs)?;
    for r in &result.ranking {
        println!(
            "{}. {:<10} mean best {:.6} +- {:.6}, best reached after {:.0} evals",
            r.rank, r.row.mode, r.row.mean_best, r.row.std_best, r.row.mean_evals_to_best
        );
    }
    println!("traces and progress data in {}", out.display());
    Ok(())
}
