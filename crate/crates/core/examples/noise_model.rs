//! The measurement-noise model: readout bias toward the spectral middle plus
//! shot jitter, reproducible per evaluation counter.

use noisy_seed_opt::objectives::{apply_noise, lookup, NoiseSpec, Shots};

fn main() -> noisy_seed_opt::error::Result<()> {
    let problem = lookup("H2")?;
    let range = problem.value_range;
    let e0 = problem.reference_min;

    for shots in [Shots::Finite(100), Shots::Finite(8192), Shots::Infinite] {
        let spec = NoiseSpec { shots, ..NoiseSpec::default() };
        let draws: Vec<f64> = (0..10_000).map(|c| apply_noise(e0, &spec, range, c)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let sd = (draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / draws.len() as f64).sqrt();
        println!(
            "{shots:?}: mean {mean:.5} (clean {e0:.5}), sd {sd:.5} (model {:.5})",
            spec.shot_std(range)
        );
    }

    // The same counter always gives the same noisy value.
    let f = problem.objective(Some(&NoiseSpec::default().with_stream(9)))?;
    let x = [0.3, 0.2];
    println!("E(x) at counter 5: {:.6} and again {:.6}", f.evaluate(&x, 5)?, f.evaluate(&x, 5)?);
    println!("E(x) at counter 6: {:.6}", f.evaluate(&x, 6)?);
    Ok(())
}
