//! Fit a GP to noisy samples of sin(3x), with and without the white-noise
//! kernel, and compare predictions.

use noisy_seed_opt::gp::{fit, KernelSpec};
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

fn main() -> noisy_seed_opt::error::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let xs: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 * 3.0 / 39.0]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x[0]).sin() + noise.sample(&mut rng)).collect();

    let se = fit(&xs, &ys, &KernelSpec::squared_exponential(), 1)?;
    let wn = fit(&xs, &ys, &KernelSpec::with_white_noise(), 1)?;
    println!("SE      tau = {:?}", se.hyper().tau);
    println!("SE + WN tau = {:?}, noise std = {:.4} (true 0.05)", wn.hyper().tau, wn.hyper().noise_std());

    println!("{:>5} {:>9} {:>9} {:>9} {:>9}", "x", "sin(3x)", "SE", "SE+WN", "sd");
    for i in 0..=10 {
        let x = i as f64 * 0.3;
        let (m_se, _) = se.predict(&[x])?;
        let (m_wn, mse) = wn.predict(&[x])?;
        println!("{x:5.2} {:9.4} {m_se:9.4} {m_wn:9.4} {:9.4}", (3.0 * x).sin(), mse.sqrt());
    }
    Ok(())
}
