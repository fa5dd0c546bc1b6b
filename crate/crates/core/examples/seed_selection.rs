//! Picking diverse low-valued starting points from an archive of samples.

use noisy_seed_opt::design::{latin_hypercube, EvaluatedSample, Phase, SearchDomain};
use noisy_seed_opt::seeds::{select_starts, WeightPattern};

fn main() -> noisy_seed_opt::error::Result<()> {
    // Two basins: a deep one near (0.2, 0.2) and a shallow one near (0.8, 0.7).
    let f = |x: &[f64]| {
        let a = (x[0] - 0.2).powi(2) + (x[1] - 0.2).powi(2);
        let b = (x[0] - 0.8).powi(2) + (x[1] - 0.7).powi(2);
        -(-a / 0.02).exp() - 0.8 * (-b / 0.02).exp()
    };
    let domain = SearchDomain::unit(2)?;
    let archive: Vec<EvaluatedSample> = latin_hypercube(&domain, 60, 5)?
        .into_iter()
        .enumerate()
        .map(|(i, theta)| EvaluatedSample {
            value: f(&theta),
            theta,
            eval_index: i + 1,
            phase: Phase::InitDesign,
            seed_index: None,
        })
        .collect();

    for (label, pattern) in [
        ("value only", WeightPattern::constant(0.99, 4)?),
        ("distance only", WeightPattern::constant(0.0, 4)?),
        ("default cycle", WeightPattern::default_for(4)),
    ] {
        println!("{label} (weights {:?}):", pattern.weights());
        for s in select_starts(&archive, &pattern, 4)? {
            println!("  [{:.3}, {:.3}]  f = {:.4}", s[0], s[1], f(&s));
        }
    }
    Ok(())
}
