//! Expected improvement and its best-effort maximization over a box.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::design::{latin_hypercube, SearchDomain};
use crate::error::{check_dim, Result};
use crate::gp::GpModel;
use crate::rng;

/// Predicted MSE at or below this fraction of `sigma2_hat` counts as zero
/// uncertainty, which makes EI exactly zero.
pub const MSE_ZERO_REL: f64 = 1e-10;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn std_normal_pdf(g: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * g * g).exp()
}

pub fn std_normal_cdf(g: f64) -> f64 {
    0.5 * erfc(-g / std::f64::consts::SQRT_2)
}

/// `eps * (g Phi(g) + phi(g))` with `g = (e_best - mean) / eps`.
pub fn ei_from_moments(mean: f64, eps: f64, e_best: f64) -> f64 {
    if !(eps > 0.0) {
        return 0.0;
    }
    let g = (e_best - mean) / eps;
    (eps * (g * std_normal_cdf(g) + std_normal_pdf(g))).max(0.0)
}

/// Expected improvement of the model at `theta` over the incumbent `e_best`.
pub fn expected_improvement(model: &GpModel, theta: &[f64], e_best: f64) -> Result<f64> {
    let (mean, mse) = model.predict(theta)?;
    Ok(ei_with_floor(model, mean, mse, e_best))
}

fn ei_with_floor(model: &GpModel, mean: f64, mse: f64, e_best: f64) -> f64 {
    if mse <= MSE_ZERO_REL * model.hyper().sigma2_hat {
        0.0
    } else {
        ei_from_moments(mean, mse.sqrt(), e_best)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionResult {
    pub theta_new: Vec<f64>,
    pub ei_value: f64,
    pub n_candidates: usize,
    /// True when every candidate had zero EI and the farthest point was used.
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionOptions {
    /// LHS candidates per input dimension.
    pub lhs_per_dim: usize,
    /// Gaussian perturbations around the incumbent training point.
    pub n_local: usize,
    /// Perturbation standard deviation as a fraction of box width.
    pub local_sigma: f64,
    /// How many top candidates get a coordinate-ascent polish.
    pub n_polish: usize,
    pub polish_iters: usize,
    /// Initial polish step as a fraction of box width.
    pub polish_step: f64,
    /// Additional caller-supplied candidates.
    pub extra: Vec<Vec<f64>>,
}

impl Default for AcquisitionOptions {
    fn default() -> Self {
        Self {
            lhs_per_dim: 1000,
            n_local: 50,
            local_sigma: 0.05,
            n_polish: 5,
            polish_iters: 20,
            polish_step: 0.05,
            extra: Vec::new(),
        }
    }
}

/// Maximize EI with default candidate settings.
pub fn maximize_ei(model: &GpModel, domain: &SearchDomain, e_best: f64, rng_seed: u64) -> Result<AcquisitionResult> {
    maximize_ei_with(model, domain, e_best, rng_seed, &AcquisitionOptions::default())
}

/// Candidate-set search followed by coordinate-ascent polishing.
///
/// No global optimality is claimed; the result is the best point seen. Ties
/// go to the lowest candidate index.
pub fn maximize_ei_with(
    model: &GpModel,
    domain: &SearchDomain,
    e_best: f64,
    rng_seed: u64,
    opts: &AcquisitionOptions,
) -> Result<AcquisitionResult> {
    let d = domain.dim();
    check_dim(d, model.dim())?;
    let mut candidates = latin_hypercube(domain, (opts.lhs_per_dim * d).max(1), rng::derive(rng_seed, 1))?;

    if opts.n_local > 0 {
        let incumbent = model
            .train_x()
            .iter()
            .zip(model.train_y())
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(x, _)| x.clone())
            .expect("fitted model has training data");
        let mut rng = rng::seeded(rng::derive(rng_seed, 2));
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        for _ in 0..opts.n_local {
            let p: Vec<f64> = (0..d)
                .map(|j| {
                    let x = incumbent[j] + opts.local_sigma * domain.width(j) * normal.sample(&mut rng);
                    x.clamp(domain.lower()[j], domain.upper()[j])
                })
                .collect();
            candidates.push(p);
        }
    }
    for extra in &opts.extra {
        check_dim(d, extra.len())?;
        candidates.push(extra.clone());
    }

    // EI grows with the predictive spread, so a cheap MSE upper bound gives
    // an EI upper bound. Candidates whose bound is already below the current
    // top-`n_keep` cannot be selected or polished and skip the exact solve.
    let n_keep = opts.n_polish.max(1);
    let mut top: Vec<f64> = Vec::with_capacity(n_keep + 1);
    let mut scores = Vec::with_capacity(candidates.len());
    for c in &candidates {
        let threshold = if top.len() == n_keep { top[n_keep - 1] } else { f64::NEG_INFINITY };
        let keep = |mean: f64, bound: f64| ei_from_moments(mean, (bound * (1.0 + 1e-9)).sqrt(), e_best) >= threshold;
        let Some((mean, mse)) = model.predict_screened(c, keep)? else {
            scores.push(f64::NEG_INFINITY);
            continue;
        };
        let ei = ei_with_floor(model, mean, mse, e_best);
        scores.push(ei);
        let pos = top.partition_point(|t| *t >= ei);
        if pos < n_keep {
            top.insert(pos, ei);
            top.truncate(n_keep);
        }
    }
    let mut n_evaluated = candidates.len();

    if scores.iter().all(|s| *s <= 0.0) {
        let idx = farthest_candidate(&candidates, model.train_x(), domain);
        return Ok(AcquisitionResult {
            theta_new: candidates[idx].clone(),
            ei_value: 0.0,
            n_candidates: n_evaluated,
            saturated: true,
        });
    }

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut best_theta = candidates[order[0]].clone();
    let mut best_ei = scores[order[0]];

    for &start in order.iter().take(opts.n_polish) {
        if scores[start] <= 0.0 {
            break;
        }
        let (theta, ei, used) = polish(model, domain, e_best, &candidates[start], scores[start], opts)?;
        n_evaluated += used;
        if ei > best_ei {
            best_ei = ei;
            best_theta = theta;
        }
    }
    Ok(AcquisitionResult {
        theta_new: best_theta,
        ei_value: best_ei,
        n_candidates: n_evaluated,
        saturated: false,
    })
}

fn polish(
    model: &GpModel,
    domain: &SearchDomain,
    e_best: f64,
    start: &[f64],
    start_ei: f64,
    opts: &AcquisitionOptions,
) -> Result<(Vec<f64>, f64, usize)> {
    let mut x = start.to_vec();
    let mut fx = start_ei;
    let mut step = opts.polish_step;
    let mut used = 0;
    for _ in 0..opts.polish_iters {
        let mut improved = false;
        for j in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[j] = (y[j] + sign * step * domain.width(j)).clamp(domain.lower()[j], domain.upper()[j]);
                if y[j] == x[j] {
                    continue;
                }
                let (mean, mse) = model.predict(&y)?;
                used += 1;
                let fy = ei_with_floor(model, mean, mse, e_best);
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((x, fx, used))
}

/// Index of the candidate with the largest minimum distance (in unit-cube
/// coordinates) to `existing`; lowest index wins ties.
pub fn farthest_candidate(candidates: &[Vec<f64>], existing: &[Vec<f64>], domain: &SearchDomain) -> usize {
    let existing_unit: Vec<Vec<f64>> = existing.iter().map(|e| domain.to_unit(e)).collect();
    let mut best = (0, f64::NEG_INFINITY);
    for (i, c) in candidates.iter().enumerate() {
        let cu = domain.to_unit(c);
        let dmin = existing_unit
            .iter()
            .map(|e| crate::design::distance(&cu, e))
            .fold(f64::INFINITY, f64::min);
        if dmin > best.1 {
            best = (i, dmin);
        }
    }
    best.0
}

/// Pure exploration step: the LHS candidate farthest from all existing
/// samples. Used when no surrogate is available.
pub fn exploration_point(domain: &SearchDomain, existing: &[Vec<f64>], n_candidates: usize, rng_seed: u64) -> Result<Vec<f64>> {
    let candidates = latin_hypercube(domain, n_candidates.max(1), rng_seed)?;
    let idx = farthest_candidate(&candidates, existing, domain);
    Ok(candidates[idx].clone())
}

/// Uniform random points in the box; handy for probes and fuzzing.
pub fn random_points(domain: &SearchDomain, n: usize, rng_seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::seeded(rng_seed);
    (0..n)
        .map(|_| {
            (0..domain.dim())
                .map(|j| rng.random_range(domain.lower()[j]..=domain.upper()[j]))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{fit, KernelSpec};

    #[test]
    fn ei_at_zero_g_is_pdf_at_zero() {
        assert!((ei_from_moments(1.3, 1.0, 1.3) - 0.398_942_280_401_432_7).abs() < 1e-12);
    }

    #[test]
    fn ei_at_g_two() {
        // 0.5 * (2 * Phi(2) + phi(2)), Phi(2) = 0.977249868051821, phi(2) = 0.053990966513188
        let expected = 0.5 * (2.0 * 0.977_249_868_051_821 + 0.053_990_966_513_188_06);
        assert!((ei_from_moments(0.0, 0.5, 1.0) - expected).abs() < 1e-9);
        assert!((expected - 1.00424).abs() < 1e-5);
    }

    #[test]
    fn ei_zero_for_zero_uncertainty() {
        assert_eq!(ei_from_moments(0.0, 0.0, 10.0), 0.0);
    }

    #[test]
    fn ei_never_negative_far_below() {
        assert!(ei_from_moments(100.0, 1e-3, 0.0) >= 0.0);
    }

    #[test]
    fn saturated_model_falls_back_to_farthest_point() {
        let xs = vec![vec![0.1], vec![0.2], vec![0.3]];
        let ys = vec![1.0, 1.0, 1.0];
        let m = fit(&xs, &ys, &KernelSpec::squared_exponential(), 0).unwrap();
        let dom = SearchDomain::unit(1).unwrap();
        // e_best far below every prediction and negligible variance: EI == 0
        let r = maximize_ei(&m, &dom, -1e9, 4).unwrap();
        assert!(r.saturated);
        assert!(r.theta_new[0] > 0.95, "{:?}", r.theta_new);
    }
}
