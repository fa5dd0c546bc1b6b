//! Expected improvement on a small GP, and the point that maximizes it.

use noisy_seed_opt::acquisition::{expected_improvement, maximize_ei};
use noisy_seed_opt::design::SearchDomain;
use noisy_seed_opt::gp::{fit, KernelSpec};

fn main() -> noisy_seed_opt::error::Result<()> {
    let f = |x: f64| (x - 0.3).powi(2) + 0.1 * (12.0 * x).sin();
    let xs: Vec<Vec<f64>> = [0.05, 0.25, 0.5, 0.7, 0.95].iter().map(|&x| vec![x]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| f(x[0])).collect();
    let best = ys.iter().copied().fold(f64::INFINITY, f64::min);

    let model = fit(&xs, &ys, &KernelSpec::squared_exponential(), 0)?;
    let domain = SearchDomain::unit(1)?;

    for i in 0..=20 {
        let x = i as f64 / 20.0;
        let ei = expected_improvement(&model, &[x], best)?;
        println!("{x:5.2} {:<50} {ei:.5}", "#".repeat((ei * 2000.0).round().min(50.0) as usize));
    }
    let next = maximize_ei(&model, &domain, best, 0)?;
    println!(
        "next sample at x = {:.4} (EI {:.5}, {} candidates)",
        next.theta_new[0], next.ei_value, next.n_candidates
    );
    Ok(())
}
