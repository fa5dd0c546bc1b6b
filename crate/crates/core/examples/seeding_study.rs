//! GP+ImFil with a few wide local boxes against one ImFil search from the
//! domain center, on a landscape with a deep and a shallow basin.
//!
//! `cargo run --release --example seeding_study -- twowells-9 10`

use noisy_seed_opt::bench::{seeding_study, SeedingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let problem = args.next().unwrap_or_else(|| "twowells-2".into());
    let repetitions: usize = args.next().map_or(Ok(4), |s| s.parse())?;

    let report = seeding_study(&SeedingConfig {
        repetitions,
        rng_seed_base: 100,
        ..SeedingConfig::new(problem)
    })?;
    print!("{}", report.table());
    for r in &report.runs {
        println!(
            "seed {:>4}: best {:.6} in {:>5} evals, success {}, boundary seed {}",
            r.rng_seed, r.best_value, r.n_evals, r.success, r.boundary_seed
        );
    }
    Ok(())
}
