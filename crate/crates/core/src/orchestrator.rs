//! Optimization driver: initial design, GP-guided sampling, seed selection
//! and sub-box local searches, plus the two baseline modes.

use std::time::{Duration, Instant};

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{exploration_point, maximize_ei_with, AcquisitionOptions};
use crate::design::{latin_hypercube, sub_box, EvaluatedSample, Phase, SearchDomain};
use crate::error::{check_dim, OptError, Result};
use crate::gp::{fit_with, FitOptions, GpModel, InputScaling, KernelSpec};
use crate::imfil::{imfil_minimize_keyed, ImfilConfig, LocalResult, Termination};
use crate::objectives::Objective;
use crate::rng;
use crate::seeds::{select_start_indices, DistanceMetric, WeightPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    GpImfil,
    ImfilOnly,
    GpOnly,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::GpImfil, Mode::ImfilOnly, Mode::GpOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::GpImfil => "GpImfil",
            Mode::ImfilOnly => "ImfilOnly",
            Mode::GpOnly => "GpOnly",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = OptError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_', '+'], "").as_str() {
            "gpimfil" => Ok(Mode::GpImfil),
            "imfilonly" | "imfil" => Ok(Mode::ImfilOnly),
            "gponly" | "gp" => Ok(Mode::GpOnly),
            _ => Err(OptError::Config(format!("unknown mode {s:?}"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

/// Evaluation budgets of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetPlan {
    /// Initial design size.
    pub n0: usize,
    /// Total evaluations through the end of the GP phase.
    pub b_gp: usize,
    /// Evaluations available to the local searches.
    pub b_loc: usize,
    /// Maximum number of local searches.
    pub b_start: usize,
    /// Half-width of each local search box, in parameter units.
    pub local_half_width: f64,
    /// Absolute evaluation ceiling.
    pub total_cap: usize,
}

impl BudgetPlan {
    /// `n0 = 2(d+1)`, `b_gp = n0 + 8(d+1)`, the rest of `total_cap` for local
    /// search, 10 starts in boxes of half-width 0.05 (clamped for tiny caps).
    pub fn standard(d: usize, total_cap: usize) -> Self {
        let n0 = (2 * (d + 1)).min(total_cap).max(1);
        let b_gp = (n0 + 8 * (d + 1)).min(total_cap).max(n0);
        Self {
            n0,
            b_gp,
            b_loc: total_cap.saturating_sub(b_gp),
            b_start: 10,
            local_half_width: 0.05,
            total_cap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(OptError::Config(m));
        if self.n0 == 0 || self.total_cap == 0 || self.b_start == 0 {
            return bad("n0, b_start and total_cap must be positive".into());
        }
        if !(self.n0 <= self.b_gp && self.b_gp <= self.total_cap) {
            return bad(format!(
                "need n0 <= b_gp <= total_cap, got {} / {} / {}",
                self.n0, self.b_gp, self.total_cap
            ));
        }
        if self.b_gp + self.b_loc > self.total_cap {
            return bad(format!(
                "b_gp + b_loc = {} exceeds total_cap = {}",
                self.b_gp + self.b_loc,
                self.total_cap
            ));
        }
        if !(self.local_half_width > 0.0 && self.local_half_width.is_finite()) {
            return bad("local_half_width must be positive".into());
        }
        Ok(())
    }
}

/// Surrogate settings for the GP phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpSettings {
    pub kernel: KernelSpec,
    /// Hyperparameters are re-estimated at every iteration while the
    /// archive has at most this many points...
    pub refit_every_until: usize,
    /// ...and every `refit_every` iterations afterwards; in between the
    /// previous hyperparameters are reused with a fresh factorization.
    pub refit_every: usize,
    /// Random restarts of the first likelihood fit.
    pub restarts: usize,
    /// Random restarts of later fits, which also start from the previous optimum.
    pub warm_restarts: usize,
    pub max_iters: usize,
    /// Largest training set used for the likelihood fit.
    pub max_fit_points: usize,
    /// Largest training set the surrogate conditions on.
    pub max_train_points: usize,
    /// LHS candidates per dimension for the EI search.
    pub lhs_per_dim: usize,
    /// Leave the GP phase after this many iterations without a new incumbent.
    pub stall_threshold: Option<usize>,
}

impl Default for GpSettings {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::default(),
            refit_every_until: 50,
            refit_every: 5,
            restarts: 10,
            warm_restarts: 2,
            max_iters: 60,
            max_fit_points: 100,
            max_train_points: 150,
            lhs_per_dim: 1000,
            stall_threshold: None,
        }
    }
}

/// Everything that determines a run besides the objective, domain and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub budgets: BudgetPlan,
    #[serde(default)]
    pub pattern: Option<WeightPattern>,
    #[serde(default)]
    pub gp: GpSettings,
    #[serde(default)]
    pub imfil: ImfilConfig,
    #[serde(default)]
    pub seed_metric: DistanceMetric,
    /// Run the local searches concurrently (results are identical to the
    /// sequential order).
    #[serde(default)]
    pub parallel_local: bool,
}

impl RunConfig {
    pub fn new(mode: Mode, budgets: BudgetPlan) -> Self {
        Self {
            mode,
            budgets,
            pattern: None,
            gp: GpSettings::default(),
            imfil: ImfilConfig::default(),
            seed_metric: DistanceMetric::default(),
            parallel_local: false,
        }
    }

    /// Weight pattern in effect: the configured one or the default cycle.
    pub fn effective_pattern(&self) -> WeightPattern {
        self.pattern
            .clone()
            .unwrap_or_else(|| WeightPattern::default_for(self.budgets.b_start))
    }

    pub fn validate(&self) -> Result<()> {
        self.budgets.validate()?;
        self.gp.kernel.validate()?;
        self.imfil.validate()?;
        if self.gp.refit_every == 0 || self.gp.max_fit_points < 2 || self.gp.max_train_points < 2 {
            return Err(OptError::Config("GP refit cadence and training caps must be positive".into()));
        }
        if self.mode == Mode::GpImfil && self.effective_pattern().len() + 1 < self.budgets.b_start {
            return Err(OptError::Config(format!(
                "weight pattern needs at least {} entries",
                self.budgets.b_start - 1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalRunSummary {
    pub seed_index: usize,
    pub start: Vec<f64>,
    pub n_evals: usize,
    pub best_value: f64,
    pub termination: Termination,
    /// Some start coordinate lies within `local_half_width` of the domain boundary.
    pub near_boundary: bool,
}

/// Wall-clock time per phase; informational and excluded from serialization.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTiming {
    pub design: Duration,
    pub gp_fit: Duration,
    pub acquisition: Duration,
    pub local: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub mode: Mode,
    pub samples: Vec<EvaluatedSample>,
    pub best_theta: Vec<f64>,
    pub best_value: f64,
    pub seeds_used: Vec<Vec<f64>>,
    pub local_runs: Vec<LocalRunSummary>,
    /// Eval indices of GP-phase points chosen by pure exploration because the fit failed.
    pub fallback_evals: Vec<usize>,
    pub warnings: Vec<String>,
    pub config_snapshot: serde_json::Value,
    pub rng_seed: u64,
    #[serde(skip)]
    pub timing: PhaseTiming,
}

impl RunRecord {
    /// Number of local searches started.
    pub fn restarts(&self) -> usize {
        self.local_runs.len()
    }

    /// Incumbent after `n` evaluations (or after all of them, if fewer).
    pub fn best_after(&self, n: usize) -> Option<f64> {
        self.samples.iter().take(n).map(|s| s.value).min_by(f64::total_cmp)
    }

    /// Running minimum of the trace.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.samples
            .iter()
            .map(|s| {
                best = best.min(s.value);
                best
            })
            .collect()
    }
}

/// A run that stopped on an error; `partial` holds everything evaluated so far.
#[derive(Debug, Clone, thiserror::Error)]
#[error("run aborted after {} evaluations: {error}", partial.samples.len())]
pub struct RunAbort {
    pub error: OptError,
    pub partial: Box<RunRecord>,
}

impl From<RunAbort> for OptError {
    fn from(a: RunAbort) -> Self {
        a.error
    }
}

/// Run `config.mode` on `objective` over `domain`.
pub fn run(
    objective: &dyn Objective,
    domain: &SearchDomain,
    config: &RunConfig,
    rng_seed: u64,
) -> std::result::Result<RunRecord, RunAbort> {
    let mut state = RunState::new(objective, domain, config, rng_seed);
    let outcome = state.validate().and_then(|_| match config.mode {
        Mode::GpImfil => state.gp_imfil(),
        Mode::ImfilOnly => state.imfil_only(),
        Mode::GpOnly => state.gp_phase(config.budgets.total_cap),
    });
    match outcome {
        Ok(()) => Ok(state.finish()),
        Err(error) => Err(RunAbort {
            error,
            partial: Box::new(state.finish()),
        }),
    }
}

/// GP-guided global phase followed by sub-box local searches from selected seeds.
pub fn run_gp_imfil(
    objective: &dyn Objective,
    domain: &SearchDomain,
    budgets: &BudgetPlan,
    pattern: &WeightPattern,
    kernel: &KernelSpec,
    imfil: &ImfilConfig,
    rng_seed: u64,
) -> std::result::Result<RunRecord, RunAbort> {
    let mut cfg = RunConfig::new(Mode::GpImfil, budgets.clone());
    cfg.pattern = Some(pattern.clone());
    cfg.gp.kernel = kernel.clone();
    cfg.imfil = imfil.clone();
    run(objective, domain, &cfg, rng_seed)
}

/// Multistart local search from the initial design points over the full domain.
pub fn run_imfil_only(
    objective: &dyn Objective,
    domain: &SearchDomain,
    budgets: &BudgetPlan,
    imfil: &ImfilConfig,
    rng_seed: u64,
) -> std::result::Result<RunRecord, RunAbort> {
    let mut cfg = RunConfig::new(Mode::ImfilOnly, budgets.clone());
    cfg.imfil = imfil.clone();
    run(objective, domain, &cfg, rng_seed)
}

/// Bayesian optimization for the whole budget.
pub fn run_gp_only(
    objective: &dyn Objective,
    domain: &SearchDomain,
    budgets: &BudgetPlan,
    kernel: &KernelSpec,
    rng_seed: u64,
) -> std::result::Result<RunRecord, RunAbort> {
    let mut cfg = RunConfig::new(Mode::GpOnly, budgets.clone());
    cfg.gp.kernel = kernel.clone();
    run(objective, domain, &cfg, rng_seed)
}

const TAG_LHS: u64 = 1;
const TAG_FIT: u64 = 1 << 20;
const TAG_ACQ: u64 = 2 << 20;
const TAG_EXPLORE: u64 = 3 << 20;

/// Noise counter for evaluation `intra` (1-based) of local search `seed_index`.
pub fn local_counter(seed_index: usize, intra: usize) -> u64 {
    ((seed_index as u64 + 1) << 32) | intra as u64
}

struct RunState<'a> {
    objective: &'a dyn Objective,
    domain: &'a SearchDomain,
    config: &'a RunConfig,
    rng_seed: u64,
    samples: Vec<EvaluatedSample>,
    seeds_used: Vec<Vec<f64>>,
    local_runs: Vec<LocalRunSummary>,
    fallback_evals: Vec<usize>,
    warnings: Vec<String>,
    timing: PhaseTiming,
}

impl<'a> RunState<'a> {
    fn new(objective: &'a dyn Objective, domain: &'a SearchDomain, config: &'a RunConfig, rng_seed: u64) -> Self {
        Self {
            objective,
            domain,
            config,
            rng_seed,
            samples: Vec::new(),
            seeds_used: Vec::new(),
            local_runs: Vec::new(),
            fallback_evals: Vec::new(),
            warnings: Vec::new(),
            timing: PhaseTiming::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        self.config.validate()?;
        check_dim(self.domain.dim(), self.objective.dim())
    }

    fn finish(self) -> RunRecord {
        let best = self
            .samples
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value).then(a.eval_index.cmp(&b.eval_index)));
        RunRecord {
            mode: self.config.mode,
            best_theta: best.map(|s| s.theta.clone()).unwrap_or_default(),
            best_value: best.map_or(f64::NAN, |s| s.value),
            samples: self.samples,
            seeds_used: self.seeds_used,
            local_runs: self.local_runs,
            fallback_evals: self.fallback_evals,
            warnings: self.warnings,
            config_snapshot: serde_json::to_value(self.config).unwrap_or(serde_json::Value::Null),
            rng_seed: self.rng_seed,
            timing: self.timing,
        }
    }

    fn best(&self) -> Option<&EvaluatedSample> {
        self.samples.iter().min_by(|a, b| a.value.total_cmp(&b.value))
    }

    /// Evaluate at `theta`; the counter is the 1-based eval index.
    fn evaluate(&mut self, theta: Vec<f64>, phase: Phase) -> Result<f64> {
        let eval_index = self.samples.len() + 1;
        let value = self.objective.evaluate(&theta, eval_index as u64)?;
        if !value.is_finite() {
            return Err(OptError::Objective(format!("non-finite value {value} at evaluation {eval_index}")));
        }
        self.samples.push(EvaluatedSample {
            theta,
            value,
            eval_index,
            phase,
            seed_index: None,
        });
        Ok(value)
    }

    fn initial_design(&mut self) -> Result<()> {
        let t = Instant::now();
        let n = self.config.budgets.n0.min(self.config.budgets.total_cap);
        for p in latin_hypercube(self.domain, n, rng::derive(self.rng_seed, TAG_LHS))? {
            self.evaluate(p, Phase::InitDesign)?;
        }
        self.timing.design += t.elapsed();
        Ok(())
    }

    /// Initial design plus GP iterations until the archive holds `until` points.
    fn gp_phase(&mut self, until: usize) -> Result<()> {
        self.initial_design()?;
        let config = self.config;
        let gp = &config.gp;
        let scaling = InputScaling::from_domain(self.domain);
        let mut model: Option<GpModel> = None;
        let mut last_fit: Option<(Vec<f64>, f64)> = None;
        let mut fits = 0usize;
        let mut stall = 0usize;
        let mut incumbent = self.best().map_or(f64::INFINITY, |s| s.value);
        let acq_opts = AcquisitionOptions {
            lhs_per_dim: gp.lhs_per_dim,
            ..AcquisitionOptions::default()
        };

        while self.samples.len() < until {
            let k = self.samples.len();
            let t = Instant::now();
            let refit = last_fit.is_none() || k <= gp.refit_every_until || fits % gp.refit_every == 0;
            fits += 1;
            let fitted = if refit {
                let (xs, ys) = training_subset(&self.samples, gp.max_fit_points);
                let opts = FitOptions {
                    restarts: if last_fit.is_some() { gp.warm_restarts } else { gp.restarts },
                    max_iters: gp.max_iters,
                    warm_start: last_fit.clone(),
                    scaling: Some(scaling.clone()),
                };
                fit_with(&xs, &ys, &gp.kernel, rng::derive(self.rng_seed, TAG_FIT + k as u64), &opts).and_then(|m| {
                    last_fit = Some((m.hyper().tau.clone(), m.hyper().sigma_noise));
                    if xs.len() == k.min(gp.max_train_points) {
                        Ok(m)
                    } else {
                        self.condition(&m, &scaling)
                    }
                })
            } else {
                let prev = model.as_ref().expect("a model exists between refits");
                self.condition(prev, &scaling)
            };
            self.timing.gp_fit += t.elapsed();

            let t = Instant::now();
            let e_best = self.best().map_or(f64::INFINITY, |s| s.value);
            let next = match fitted {
                Ok(m) => {
                    let r = maximize_ei_with(&m, self.domain, e_best, rng::derive(self.rng_seed, TAG_ACQ + k as u64), &acq_opts)?;
                    model = Some(m);
                    r.theta_new
                }
                Err(e) => {
                    debug!("GP fit failed at k = {k}: {e}; exploring instead");
                    self.fallback_evals.push(k + 1);
                    let existing: Vec<Vec<f64>> = self.samples.iter().map(|s| s.theta.clone()).collect();
                    exploration_point(
                        self.domain,
                        &existing,
                        gp.lhs_per_dim * self.domain.dim(),
                        rng::derive(self.rng_seed, TAG_EXPLORE + k as u64),
                    )?
                }
            };
            self.timing.acquisition += t.elapsed();
            let v = self.evaluate(next, Phase::GpIteration)?;

            if v < incumbent {
                incumbent = v;
                stall = 0;
            } else {
                stall += 1;
            }
            if gp.stall_threshold.is_some_and(|s| stall >= s) {
                debug!("GP phase stalled after {k} evaluations");
                break;
            }
        }
        Ok(())
    }

    /// Condition a surrogate with `template`'s hyperparameters on the current archive.
    fn condition(&self, template: &GpModel, scaling: &InputScaling) -> Result<GpModel> {
        let (xs, ys) = training_subset(&self.samples, self.config.gp.max_train_points);
        let h = template.hyper();
        GpModel::with_hyperparams(&xs, &ys, template.kernel(), &h.tau, h.sigma_noise, scaling.clone())
    }

    fn gp_imfil(&mut self) -> Result<()> {
        let config = self.config;
        let b = &config.budgets;
        self.gp_phase(b.b_gp)?;
        if b.b_loc == 0 {
            return Ok(());
        }

        let mut b_start = b.b_start;
        if b_start > self.samples.len() {
            let msg = format!("b_start = {b_start} exceeds the archive size {}; using all points", self.samples.len());
            warn!("{msg}");
            self.warnings.push(msg);
            b_start = self.samples.len();
        }
        let pattern = config.effective_pattern();
        let idx = select_start_indices(&self.samples, &pattern, b_start, config.seed_metric, Some(self.domain))?;
        let seeds: Vec<Vec<f64>> = idx.iter().map(|&i| self.samples[i].theta.clone()).collect();

        let t = Instant::now();
        let per_search = ImfilConfig {
            max_evals: config.imfil.max_evals.min(b.b_loc),
            ..config.imfil.clone()
        };
        let (objective, domain) = (self.objective, self.domain);
        let search = |(i, seed): (usize, &Vec<f64>)| -> Result<LocalResult> {
            let bbox = sub_box(seed, b.local_half_width, domain)?;
            imfil_minimize_keyed(objective, &bbox, seed, &per_search, Some(i), |j| local_counter(i, j + 1))
        };

        // A search cut short by the remaining budget is exactly the prefix of
        // the same search with a larger budget, so running every search with
        // the full allowance and truncating on merge gives identical traces
        // in both sequential and parallel mode.
        let mut used = 0usize;
        if config.parallel_local {
            let results: Vec<Result<LocalResult>> = seeds.par_iter().enumerate().map(search).collect();
            for (i, r) in results.into_iter().enumerate() {
                if used >= b.b_loc {
                    break;
                }
                used += self.merge_local(i, &seeds[i], truncate(r?, b.b_loc - used));
            }
        } else {
            for (i, seed) in seeds.iter().enumerate() {
                if used >= b.b_loc {
                    break;
                }
                let r = search((i, seed))?;
                used += self.merge_local(i, seed, truncate(r, b.b_loc - used));
            }
        }
        self.timing.local += t.elapsed();
        Ok(())
    }

    fn merge_local(&mut self, seed_index: usize, seed: &[f64], r: LocalResult) -> usize {
        let near = self.domain.distance_to_boundary(seed) < self.config.budgets.local_half_width;
        if near {
            let msg = format!("seed {seed_index} lies within the local half-width of the domain boundary");
            warn!("{msg}");
            self.warnings.push(msg);
        }
        let offset = self.samples.len();
        for mut s in r.samples {
            s.eval_index += offset;
            self.samples.push(s);
        }
        self.seeds_used.push(seed.to_vec());
        self.local_runs.push(LocalRunSummary {
            seed_index,
            start: seed.to_vec(),
            n_evals: r.n_evals,
            best_value: r.best_value,
            termination: r.termination,
            near_boundary: near,
        });
        r.n_evals
    }

    fn imfil_only(&mut self) -> Result<()> {
        let cap = self.config.budgets.total_cap;
        self.initial_design()?;
        let t = Instant::now();
        let mut order: Vec<usize> = (0..self.samples.len()).collect();
        order.sort_by(|&a, &b| self.samples[a].value.total_cmp(&self.samples[b].value).then(a.cmp(&b)));
        for (i, start_idx) in order.into_iter().enumerate() {
            let remaining = cap.saturating_sub(self.samples.len());
            if remaining == 0 {
                break;
            }
            let start = self.samples[start_idx].theta.clone();
            let cfg = ImfilConfig {
                max_evals: self.config.imfil.max_evals.min(remaining),
                ..self.config.imfil.clone()
            };
            let offset = self.samples.len();
            let r = imfil_minimize_keyed(self.objective, self.domain, &start, &cfg, Some(i), |j| (offset + j + 1) as u64)?;
            self.merge_local(i, &start, r);
        }
        self.timing.local += t.elapsed();
        Ok(())
    }
}

/// Keep the first `limit` evaluations of a local search.
fn truncate(mut r: LocalResult, limit: usize) -> LocalResult {
    if r.samples.len() <= limit {
        return r;
    }
    r.samples.truncate(limit);
    r.n_evals = limit;
    r.termination = Termination::BudgetExhausted;
    let best = r
        .samples
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value).then(a.eval_index.cmp(&b.eval_index)))
        .expect("limit is positive");
    r.best_theta = best.theta.clone();
    r.best_value = best.value;
    r
}

/// Training set of at most `cap` points: all of them if they fit, otherwise
/// the best `cap / 2` by value plus the most recent of the rest.
fn training_subset(samples: &[EvaluatedSample], cap: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let keep: Vec<usize> = if samples.len() <= cap {
        (0..samples.len()).collect()
    } else {
        let mut by_value: Vec<usize> = (0..samples.len()).collect();
        by_value.sort_by(|&a, &b| samples[a].value.total_cmp(&samples[b].value).then(a.cmp(&b)));
        let mut chosen = vec![false; samples.len()];
        for &i in by_value.iter().take(cap / 2) {
            chosen[i] = true;
        }
        let mut extra = cap - cap / 2;
        for i in (0..samples.len()).rev() {
            if extra == 0 {
                break;
            }
            if !chosen[i] {
                chosen[i] = true;
                extra -= 1;
            }
        }
        (0..samples.len()).filter(|&i| chosen[i]).collect()
    };
    (
        keep.iter().map(|&i| samples[i].theta.clone()).collect(),
        keep.iter().map(|&i| samples[i].value).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::from_fn;

    fn quad(d: usize) -> impl Objective {
        from_fn(d, |x: &[f64]| x.iter().map(|v| (v - 0.3).powi(2)).sum())
    }

    #[test]
    fn standard_budgets() {
        let b = BudgetPlan::standard(2, 1000);
        assert_eq!((b.n0, b.b_gp, b.b_loc), (6, 30, 970));
        b.validate().unwrap();
    }

    #[test]
    fn budget_validation() {
        let mut b = BudgetPlan::standard(2, 100);
        b.b_loc = 100;
        assert!(b.validate().is_err());
        let mut b = BudgetPlan::standard(2, 100);
        b.n0 = 50;
        b.b_gp = 40;
        assert!(b.validate().is_err());
    }

    #[test]
    fn phase_transitions_follow_budgets() {
        let f = quad(2);
        let dom = SearchDomain::unit(2).unwrap();
        let b = BudgetPlan::standard(2, 120);
        let r = run(&f, &dom, &RunConfig::new(Mode::GpImfil, b), 3).unwrap();
        assert_eq!(r.samples[5].phase, Phase::InitDesign);
        assert_eq!(r.samples[6].phase, Phase::GpIteration);
        assert_eq!(r.samples[29].phase, Phase::GpIteration);
        assert_eq!(r.samples[30].phase, Phase::LocalSearch);
        for (i, s) in r.samples.iter().enumerate() {
            assert_eq!(s.eval_index, i + 1);
        }
    }

    #[test]
    fn imfil_only_respects_cap_exactly() {
        let f = quad(3);
        let dom = SearchDomain::unit(3).unwrap();
        let b = BudgetPlan::standard(3, 150);
        let r = run(&f, &dom, &RunConfig::new(Mode::ImfilOnly, b), 0).unwrap();
        assert_eq!(r.samples.len(), 150);
        assert!(r.restarts() >= 2);
    }

    #[test]
    fn cap_below_design_size() {
        let f = quad(3);
        let dom = SearchDomain::unit(3).unwrap();
        let mut b = BudgetPlan::standard(3, 5);
        b.n0 = 5;
        b.b_gp = 5;
        let r = run(&f, &dom, &RunConfig::new(Mode::ImfilOnly, b), 0).unwrap();
        assert_eq!(r.samples.len(), 5);
        assert!(r.samples.iter().all(|s| s.phase == Phase::InitDesign));
    }

    #[test]
    fn zero_local_budget_matches_gp_only_prefix() {
        let f = quad(2);
        let dom = SearchDomain::unit(2).unwrap();
        let mut b = BudgetPlan::standard(2, 30);
        b.b_loc = 0;
        let a = run(&f, &dom, &RunConfig::new(Mode::GpImfil, b.clone()), 9).unwrap();
        let g = run(&f, &dom, &RunConfig::new(Mode::GpOnly, b), 9).unwrap();
        assert_eq!(a.samples, g.samples);
    }

    #[test]
    fn parallel_local_matches_sequential() {
        let f = quad(2);
        let dom = SearchDomain::unit(2).unwrap();
        let b = BudgetPlan::standard(2, 200);
        let mut cfg = RunConfig::new(Mode::GpImfil, b);
        let seq = run(&f, &dom, &cfg, 1).unwrap();
        cfg.parallel_local = true;
        let par = run(&f, &dom, &cfg, 1).unwrap();
        assert_eq!(seq.samples, par.samples);
    }

    #[test]
    fn objective_failure_returns_partial_record() {
        let f = crate::objectives::from_fn(1, |x: &[f64]| if x[0] > 0.9 { f64::NAN } else { x[0] });
        let dom = SearchDomain::unit(1).unwrap();
        let mut b = BudgetPlan::standard(1, 40);
        b.n0 = 20;
        b.b_gp = 20;
        b.b_loc = 20;
        let err = run(&f, &dom, &RunConfig::new(Mode::GpImfil, b), 0).unwrap_err();
        assert!(matches!(err.error, OptError::Objective(_)));
        assert!(err.partial.samples.len() < 20);
    }

    #[test]
    fn training_subset_keeps_best_and_recent() {
        let samples: Vec<EvaluatedSample> = (0..10)
            .map(|i| EvaluatedSample {
                theta: vec![i as f64],
                value: if i == 2 { -5.0 } else { i as f64 },
                eval_index: i + 1,
                phase: Phase::GpIteration,
                seed_index: None,
            })
            .collect();
        let (xs, _) = training_subset(&samples, 4);
        assert_eq!(xs, vec![vec![0.0], vec![2.0], vec![8.0], vec![9.0]]);
    }
}
