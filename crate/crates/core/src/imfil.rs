//! Implicit filtering: a bound-constrained, derivative-free local search
//! driven by central-difference stencils at a decreasing sequence of scales.

use serde::{Deserialize, Serialize};

use crate::design::{EvaluatedSample, Phase, SearchDomain};
use crate::error::{check_dim, OptError, Result};
use crate::objectives::Objective;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImfilConfig {
    /// Evaluation budget of one search.
    pub max_evals: usize,
    /// Stencil sizes as fractions of the box width, strictly decreasing.
    pub scales: Vec<f64>,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo_c: f64,
    pub max_line_steps: usize,
    /// First line-search trial length, in units of the current scale
    /// (infinity norm, box-width coordinates).
    pub initial_step: f64,
}

impl Default for ImfilConfig {
    fn default() -> Self {
        Self {
            max_evals: 10_000,
            scales: (1..=7).map(|k| 0.5f64.powi(k)).collect(),
            armijo_c: 1e-4,
            max_line_steps: 5,
            initial_step: 2.0,
        }
    }
}

impl ImfilConfig {
    pub fn with_max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            return Err(OptError::InvalidArgument("imfil scales must not be empty".into()));
        }
        if self.scales.iter().any(|h| !(*h > 0.0 && *h <= 1.0)) {
            return Err(OptError::InvalidArgument("imfil scales must lie in (0, 1]".into()));
        }
        if self.scales.windows(2).any(|w| w[1] >= w[0]) {
            return Err(OptError::InvalidArgument("imfil scales must be strictly decreasing".into()));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(OptError::InvalidArgument("armijo_c must lie in (0, 1)".into()));
        }
        if self.max_evals == 0 || self.max_line_steps == 0 {
            return Err(OptError::InvalidArgument("max_evals and max_line_steps must be positive".into()));
        }
        if !(self.initial_step > 0.0) {
            return Err(OptError::InvalidArgument("initial_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    ScalesExhausted,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalResult {
    pub best_theta: Vec<f64>,
    pub best_value: f64,
    /// Every evaluation in call order; `eval_index` counts from 1 within the search.
    pub samples: Vec<EvaluatedSample>,
    pub n_evals: usize,
    pub termination: Termination,
    /// Accepted moves at each scale visited.
    pub moves_per_scale: Vec<usize>,
}

/// Minimize `objective` over `bbox` from `start`.
///
/// Evaluation `i` of the search is keyed with counter `rng::derive(rng_seed, i)`.
pub fn imfil_minimize<O: Objective + ?Sized>(
    objective: &O,
    bbox: &SearchDomain,
    start: &[f64],
    config: &ImfilConfig,
    rng_seed: u64,
) -> Result<LocalResult> {
    imfil_minimize_keyed(objective, bbox, start, config, None, |i| rng::derive(rng_seed, i as u64))
}

/// As [`imfil_minimize`], with an explicit counter for evaluation `i` and an
/// optional seed index stamped on the samples.
pub fn imfil_minimize_keyed<O, K>(
    objective: &O,
    bbox: &SearchDomain,
    start: &[f64],
    config: &ImfilConfig,
    seed_index: Option<usize>,
    counter: K,
) -> Result<LocalResult>
where
    O: Objective + ?Sized,
    K: Fn(usize) -> u64,
{
    config.validate()?;
    check_dim(bbox.dim(), start.len())?;
    check_dim(bbox.dim(), objective.dim())?;
    if !bbox.contains(start) {
        return Err(OptError::OutsideDomain);
    }
    let d = bbox.dim();
    let mut ev = Evaluator {
        objective,
        bbox,
        counter,
        seed_index,
        budget: config.max_evals,
        samples: Vec::new(),
    };

    let mut x = bbox.to_unit(start);
    let Some(mut fx) = ev.eval(&x)? else {
        unreachable!("budget is at least one evaluation")
    };
    let mut moves_per_scale = Vec::new();
    let mut termination = Termination::ScalesExhausted;

    'scales: for &h in &config.scales {
        moves_per_scale.push(0);
        loop {
            // Stencil: x +- h e_j, clipped to the unit box; clipped-to-center points are skipped.
            let mut grad = vec![0.0; d];
            let mut best_stencil: Option<(Vec<f64>, f64)> = None;
            for j in 0..d {
                let mut side = [None, None];
                for (s, sign) in [1.0, -1.0].into_iter().enumerate() {
                    let mut y = x.clone();
                    y[j] = (x[j] + sign * h).clamp(0.0, 1.0);
                    if y[j] == x[j] {
                        continue;
                    }
                    let Some(fy) = ev.eval(&y)? else {
                        termination = Termination::BudgetExhausted;
                        break 'scales;
                    };
                    if best_stencil.as_ref().is_none_or(|(_, fb)| fy < *fb) {
                        best_stencil = Some((y.clone(), fy));
                    }
                    side[s] = Some((y[j], fy));
                }
                grad[j] = match side {
                    [Some((xp, fp)), Some((xm, fm))] => (fp - fm) / (xp - xm),
                    [Some((xp, fp)), None] => (fp - fx) / (xp - x[j]),
                    [None, Some((xm, fm))] => (fx - fm) / (x[j] - xm),
                    [None, None] => 0.0,
                };
            }
            let Some((xs, fs)) = best_stencil else { break };
            if fx <= fs {
                // stencil failure
                break;
            }

            let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            let mut accepted = None;
            if gmax > 0.0 {
                let mut lambda = config.initial_step * h / gmax;
                for _ in 0..config.max_line_steps {
                    let trial: Vec<f64> = x
                        .iter()
                        .zip(&grad)
                        .map(|(xi, gi)| (xi - lambda * gi).clamp(0.0, 1.0))
                        .collect();
                    let decrease: f64 = grad.iter().zip(trial.iter().zip(&x)).map(|(g, (t, xi))| g * (xi - t)).sum();
                    if decrease <= 0.0 {
                        lambda *= 0.5;
                        continue;
                    }
                    let Some(ft) = ev.eval(&trial)? else {
                        termination = Termination::BudgetExhausted;
                        break 'scales;
                    };
                    if ft <= fx - config.armijo_c * decrease {
                        accepted = Some((trial, ft));
                        break;
                    }
                    lambda *= 0.5;
                }
            }
            let (xn, fxn) = accepted.unwrap_or((xs, fs));
            x = xn;
            fx = fxn;
            *moves_per_scale.last_mut().expect("pushed above") += 1;
        }
    }

    let best = ev
        .samples
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value).then(a.eval_index.cmp(&b.eval_index)))
        .expect("start was evaluated");
    Ok(LocalResult {
        best_theta: best.theta.clone(),
        best_value: best.value,
        n_evals: ev.samples.len(),
        samples: ev.samples,
        termination,
        moves_per_scale,
    })
}

struct Evaluator<'a, O: ?Sized, K> {
    objective: &'a O,
    bbox: &'a SearchDomain,
    counter: K,
    seed_index: Option<usize>,
    budget: usize,
    samples: Vec<EvaluatedSample>,
}

impl<O: Objective + ?Sized, K: Fn(usize) -> u64> Evaluator<'_, O, K> {
    /// Evaluate at unit-cube point `u`; `None` once the budget is spent.
    fn eval(&mut self, u: &[f64]) -> Result<Option<f64>> {
        if self.samples.len() >= self.budget {
            return Ok(None);
        }
        let mut theta = self.bbox.from_unit(u);
        // Guard against rounding just outside the box.
        for (j, t) in theta.iter_mut().enumerate() {
            *t = t.clamp(self.bbox.lower()[j], self.bbox.upper()[j]);
        }
        let i = self.samples.len();
        let value = self.objective.evaluate(&theta, (self.counter)(i))?;
        self.samples.push(EvaluatedSample {
            theta,
            value,
            eval_index: i + 1,
            phase: Phase::LocalSearch,
            seed_index: self.seed_index,
        });
        Ok(Some(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::from_fn;

    #[test]
    fn quadratic_converges() {
        let f = from_fn(2, |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] - 0.7).powi(2));
        let dom = SearchDomain::unit(2).unwrap();
        let r = imfil_minimize(&f, &dom, &[0.9, 0.1], &ImfilConfig::default().with_max_evals(200), 0).unwrap();
        assert!((r.best_theta[0] - 0.3).abs() < 1e-2 && (r.best_theta[1] - 0.7).abs() < 1e-2, "{:?}", r.best_theta);
        assert!(r.n_evals <= 200);
    }

    #[test]
    fn constant_objective_exhausts_scales() {
        let f = from_fn(3, |_| 1.0);
        let dom = SearchDomain::unit(3).unwrap();
        let cfg = ImfilConfig::default();
        let r = imfil_minimize(&f, &dom, &[0.2, 0.5, 0.9], &cfg, 0).unwrap();
        assert_eq!(r.termination, Termination::ScalesExhausted);
        assert!(r.n_evals <= (1 + 2 * 3) * cfg.scales.len());
        assert_eq!(r.best_theta, vec![0.2, 0.5, 0.9]);
    }

    #[test]
    fn budget_is_respected() {
        let f = from_fn(2, |x: &[f64]| x[0] + x[1]);
        let dom = SearchDomain::unit(2).unwrap();
        let r = imfil_minimize(&f, &dom, &[0.5, 0.5], &ImfilConfig::default().with_max_evals(7), 0).unwrap();
        assert_eq!(r.n_evals, 7);
        assert_eq!(r.termination, Termination::BudgetExhausted);
    }

    #[test]
    fn corner_minimum_reached_with_one_sided_differences() {
        let f = from_fn(2, |x: &[f64]| x[0] + 2.0 * x[1]);
        let dom = SearchDomain::cube(2, -1.0, 1.0).unwrap();
        let r = imfil_minimize(&f, &dom, &[0.0, 0.0], &ImfilConfig::default(), 0).unwrap();
        assert_eq!(r.best_theta, vec![-1.0, -1.0]);
        assert!(r.samples.iter().all(|s| dom.contains(&s.theta)));
    }

    #[test]
    fn start_outside_box_rejected() {
        let f = from_fn(1, |x: &[f64]| x[0]);
        let dom = SearchDomain::unit(1).unwrap();
        assert!(imfil_minimize(&f, &dom, &[1.5], &ImfilConfig::default(), 0).is_err());
    }

    #[test]
    fn bad_scales_rejected() {
        let mut cfg = ImfilConfig::default();
        cfg.scales = vec![0.25, 0.5];
        assert!(cfg.validate().is_err());
        cfg.scales.clear();
        assert!(cfg.validate().is_err());
    }
}
