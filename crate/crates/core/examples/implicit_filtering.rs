//! Implicit filtering on a bound-constrained problem whose minimizer sits on
//! the boundary, with and without additive noise.

use noisy_seed_opt::design::SearchDomain;
use noisy_seed_opt::imfil::{imfil_minimize, ImfilConfig};
use noisy_seed_opt::objectives::{from_fn, from_keyed_fn};
use noisy_seed_opt::rng;
use rand::Rng;

fn main() -> noisy_seed_opt::error::Result<()> {
    let bbox = SearchDomain::cube(3, -1.0, 1.0)?;
    let clean = |x: &[f64]| (x[0] - 0.4).powi(2) + (x[1] + 2.0).powi(2) + 3.0 * (x[2] - 0.1).powi(2);
    let cfg = ImfilConfig::default().with_max_evals(300);

    let r = imfil_minimize(&from_fn(3, clean), &bbox, &[0.9, 0.9, 0.9], &cfg, 0)?;
    println!("clean: best {:.6} at {:.4?} after {} evals ({:?})", r.best_value, r.best_theta, r.n_evals, r.termination);
    println!("       accepted moves per scale {:?}", r.moves_per_scale);

    // Noise keyed by the evaluation counter keeps the run reproducible.
    let noisy = from_keyed_fn(3, move |x: &[f64], counter: u64| {
        clean(x) + 0.01 * (rng::seeded(counter).random::<f64>() - 0.5)
    });
    let r = imfil_minimize(&noisy, &bbox, &[0.9, 0.9, 0.9], &cfg, 7)?;
    println!("noisy: best {:.6} at {:.4?} after {} evals ({:?})", r.best_value, r.best_theta, r.n_evals, r.termination);
    Ok(())
}
