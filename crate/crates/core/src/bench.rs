//! Benchmark harness: repeated trials over registry problems, trace and
//! summary files, multi-mode comparisons and the seeding study.
//!
//! Trial `i` of an experiment runs with seed `rng_seed_base + i`; its noise
//! stream is derived from that seed, so every trial is reproducible on its own
//! and trials can run concurrently.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::distance;
use crate::error::{OptError, Result};
use crate::gp::KernelSpec;
use crate::imfil::{imfil_minimize, ImfilConfig};
use crate::objectives::{lookup, NoiseSpec, Problem};
use crate::orchestrator::{run, BudgetPlan, GpSettings, Mode, RunConfig, RunRecord};
use crate::rng;
use crate::seeds::{DistanceMetric, WeightPattern};

/// Caps the number of worker threads used for trial fan-out.
pub const THREADS_ENV: &str = "NOISY_SEED_OPT_THREADS";

const TAG_NOISE: u64 = 0x6e6f_6973_65;

/// Which noise to put on the objective.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum NoiseChoice {
    /// Whatever the problem ID implies (`-n` suffix means noisy).
    #[default]
    Registry,
    None,
    Spec(NoiseSpec),
}

/// One experiment: `trials` runs of one mode on one problem.
///
/// Only `problem_id` is required in TOML; budgets default to the standard
/// protocol for the problem's dimension at `total_cap` evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem_id: String,
    pub mode: Mode,
    pub trials: usize,
    pub total_cap: usize,
    pub budgets: Option<BudgetPlan>,
    #[serde(with = "noise_choice")]
    pub noise: NoiseChoice,
    pub pattern: Option<WeightPattern>,
    pub kernel: Option<KernelSpec>,
    pub gp: GpSettings,
    pub imfil: ImfilConfig,
    pub seed_metric: DistanceMetric,
    pub rng_seed_base: u64,
    /// Where traces, records and summaries go; nothing is written when unset.
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem_id: String::new(),
            mode: Mode::GpImfil,
            trials: 3,
            total_cap: 1000,
            budgets: None,
            noise: NoiseChoice::Registry,
            pattern: None,
            kernel: None,
            gp: GpSettings::default(),
            imfil: ImfilConfig::default(),
            seed_metric: DistanceMetric::default(),
            rng_seed_base: 0,
            output_dir: None,
        }
    }
}

// `noise = "none"`, `noise = "registry"` or a `[noise]` table.
mod noise_choice {
    use super::{NoiseChoice, NoiseSpec};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Word(String),
        Spec(NoiseSpec),
    }

    pub fn serialize<S: Serializer>(c: &NoiseChoice, s: S) -> Result<S::Ok, S::Error> {
        match c {
            NoiseChoice::Registry => Repr::Word("registry".into()),
            NoiseChoice::None => Repr::Word("none".into()),
            NoiseChoice::Spec(n) => Repr::Spec(n.clone()),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NoiseChoice, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Word(w) if w.eq_ignore_ascii_case("none") => Ok(NoiseChoice::None),
            Repr::Word(w) if w.eq_ignore_ascii_case("registry") => Ok(NoiseChoice::Registry),
            Repr::Word(w) => Err(serde::de::Error::custom(format!("unknown noise setting {w:?}"))),
            Repr::Spec(n) => n.validate().map(|_| NoiseChoice::Spec(n)).map_err(serde::de::Error::custom),
        }
    }
}

impl ExperimentConfig {
    pub fn new(problem_id: impl Into<String>, mode: Mode) -> Self {
        Self {
            problem_id: problem_id.into(),
            mode,
            ..Self::default()
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| OptError::Config(e.to_string()))?;
        if cfg.problem_id.is_empty() {
            return Err(OptError::Config("problem_id is required".into()));
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| OptError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| OptError::Config(e.to_string()))
    }

    /// Replace the evaluation cap, rescaling explicit budgets to fit.
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.total_cap = cap;
        if let Some(b) = &mut self.budgets {
            b.total_cap = cap;
            b.n0 = b.n0.min(cap);
            b.b_gp = b.b_gp.min(cap);
            b.b_loc = cap - b.b_gp;
        }
        self
    }

    /// Budgets in effect for a problem of dimension `d`.
    pub fn budgets_for(&self, d: usize) -> BudgetPlan {
        self.budgets
            .clone()
            .unwrap_or_else(|| BudgetPlan::standard(d, self.total_cap))
    }

    /// The orchestrator configuration for a problem of dimension `d`.
    pub fn run_config(&self, d: usize) -> RunConfig {
        let mut cfg = RunConfig::new(self.mode, self.budgets_for(d));
        cfg.pattern = self.pattern.clone();
        cfg.gp = self.gp.clone();
        if let Some(k) = &self.kernel {
            cfg.gp.kernel = k.clone();
        }
        cfg.imfil = self.imfil.clone();
        cfg.seed_metric = self.seed_metric;
        cfg
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.rng_seed_base.wrapping_add(trial as u64)
    }

    /// Noise applied in trial `trial`, or `None` for a clean objective.
    pub fn trial_noise(&self, problem: &Problem, trial: usize) -> Option<NoiseSpec> {
        let stream = rng::derive(self.trial_seed(trial), TAG_NOISE);
        match &self.noise {
            NoiseChoice::Registry => problem.default_noise.clone().map(|n| n.with_stream(stream)),
            NoiseChoice::None => None,
            NoiseChoice::Spec(n) => Some(n.clone().with_stream(stream)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(OptError::Config("trials must be at least 1".into()));
        }
        if self.total_cap == 0 {
            return Err(OptError::Config("total_cap must be positive".into()));
        }
        Ok(())
    }

    fn file_stem(&self) -> String {
        format!("{}_{}", self.problem_id, self.mode)
    }
}

/// Aggregate over the trials of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub problem_id: String,
    pub mode: Mode,
    pub mean_best: f64,
    /// Population standard deviation (divisor `n`).
    pub std_best: f64,
    /// Mean eval index at which each trial first reached its best value.
    pub mean_evals_to_best: f64,
    pub trials: usize,
}

impl SummaryRow {
    pub fn from_records(problem_id: &str, mode: Mode, records: &[RunRecord]) -> Self {
        let bests: Vec<f64> = records.iter().map(|r| r.best_value).collect();
        let (mean, std) = mean_std(&bests);
        let to_best: Vec<f64> = records.iter().map(|r| evals_to_best(r) as f64).collect();
        Self {
            problem_id: problem_id.to_string(),
            mode,
            mean_best: mean,
            std_best: std,
            mean_evals_to_best: mean_std(&to_best).0,
            trials: records.len(),
        }
    }
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Eval index of the first sample attaining the run's best value.
pub fn evals_to_best(record: &RunRecord) -> usize {
    record
        .samples
        .iter()
        .find(|s| s.value == record.best_value)
        .map_or(0, |s| s.eval_index)
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: SummaryRow,
    pub records: Vec<RunRecord>,
    /// Files written, in order.
    pub files: Vec<PathBuf>,
}

/// Worker count from `NOISY_SEED_OPT_THREADS`, else rayon's default.
pub fn worker_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

fn pool() -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads())
        .build()
        .map_err(|e| OptError::Config(e.to_string()))
}

/// Run all trials of `config`, writing per-trial files when `output_dir` is set.
///
/// A trial that aborts leaves its trace and record behind with a `.partial`
/// suffix and fails the experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let problem = lookup(&config.problem_id)?;
    let run_cfg = config.run_config(problem.dim());
    run_cfg.validate()?;
    if let Some(dir) = &config.output_dir {
        fs::create_dir_all(dir)?;
    }

    let trial = |i: usize| -> Result<(RunRecord, Vec<PathBuf>)> {
        let noise = config.trial_noise(&problem, i);
        let objective = problem.objective(noise.as_ref())?;
        let seed = config.trial_seed(i);
        let outcome = run(objective.as_ref(), &problem.domain, &run_cfg, seed);
        let (mut record, failure) = match outcome {
            Ok(r) => (r, None),
            Err(abort) => (*abort.partial, Some(abort.error)),
        };
        record.config_snapshot = resolved_snapshot(config, &run_cfg, noise.as_ref(), seed);
        let mut files = Vec::new();
        if let Some(dir) = &config.output_dir {
            let stem = format!("{}_trial{i}", config.file_stem());
            let suffix = if failure.is_some() { ".partial" } else { "" };
            let trace = dir.join(format!("{stem}.csv{suffix}"));
            write_trace(&trace, &record)?;
            let json = dir.join(format!("{stem}.json{suffix}"));
            fs::write(&json, serde_json::to_string_pretty(&record)?)?;
            files.extend([trace, json]);
        }
        match failure {
            Some(e) => Err(e),
            None => Ok((record, files)),
        }
    };

    let results: Vec<Result<(RunRecord, Vec<PathBuf>)>> =
        pool()?.install(|| (0..config.trials).into_par_iter().map(trial).collect());
    let mut records = Vec::with_capacity(config.trials);
    let mut files = Vec::new();
    for r in results {
        let (rec, f) = r?;
        records.push(rec);
        files.extend(f);
    }

    let summary = SummaryRow::from_records(&config.problem_id, config.mode, &records);
    if let Some(dir) = &config.output_dir {
        let path = dir.join(format!("{}_summary.csv", config.file_stem()));
        let mut w = csv::Writer::from_path(&path)?;
        w.serialize(&summary)?;
        w.flush()?;
        files.push(path);
        let path = dir.join(format!("{}_timing.csv", config.file_stem()));
        write_timing(&path, &records)?;
        files.push(path);
    }
    Ok(ExperimentOutcome { summary, records, files })
}

fn resolved_snapshot(
    config: &ExperimentConfig,
    run_cfg: &RunConfig,
    noise: Option<&NoiseSpec>,
    seed: u64,
) -> serde_json::Value {
    serde_json::json!({
        "problem_id": config.problem_id,
        "trials": config.trials,
        "rng_seed_base": config.rng_seed_base,
        "trial_seed": seed,
        "noise": noise,
        "run": run_cfg,
    })
}

/// Trace columns: `eval_index, theta_0.., value, best_so_far, phase, seed_index`.
pub fn write_trace(path: &Path, record: &RunRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let d = record.best_theta.len();
    let mut header = vec!["eval_index".to_string()];
    header.extend((0..d).map(|j| format!("theta_{j}")));
    header.extend(["value", "best_so_far", "phase", "seed_index"].map(String::from));
    w.write_record(&header)?;
    for (s, best) in record.samples.iter().zip(record.best_so_far()) {
        let mut row = vec![s.eval_index.to_string()];
        row.extend(s.theta.iter().map(|t| t.to_string()));
        row.push(s.value.to_string());
        row.push(best.to_string());
        row.push(s.phase.as_str().to_string());
        row.push(s.seed_index.map(|i| i.to_string()).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_timing(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "trial,design_s,gp_fit_s,acquisition_s,local_s")?;
    for (i, r) in records.iter().enumerate() {
        let t = r.timing;
        writeln!(
            f,
            "{i},{},{},{},{}",
            t.design.as_secs_f64(),
            t.gp_fit.as_secs_f64(),
            t.acquisition.as_secs_f64(),
            t.local.as_secs_f64()
        )?;
    }
    Ok(())
}

/// One entry of a [`compare`] ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRow {
    pub rank: usize,
    pub row: SummaryRow,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    /// Ascending by `mean_best`.
    pub ranking: Vec<RankedRow>,
    pub outcomes: Vec<ExperimentOutcome>,
}

/// Run several experiments on the same problem and cap, then rank them.
///
/// Writes `<problem>_progress.csv` (long format: mode, trial, eval_index,
/// best_so_far) and `<problem>_ranking.csv` into the first config's
/// `output_dir`, when set.
pub fn compare(configs: &[ExperimentConfig]) -> Result<Comparison> {
    let first = configs
        .first()
        .ok_or_else(|| OptError::Config("nothing to compare".into()))?;
    let problem = lookup(&first.problem_id)?;
    let d = problem.dim();
    for c in &configs[1..] {
        if c.problem_id != first.problem_id {
            return Err(OptError::Config(format!(
                "cannot compare different problems: {} vs {}",
                first.problem_id, c.problem_id
            )));
        }
        if c.budgets_for(d).total_cap != first.budgets_for(d).total_cap {
            return Err(OptError::Config("compared experiments must share total_cap".into()));
        }
    }

    let outcomes = configs.iter().map(run_experiment).collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<SummaryRow> = outcomes.iter().map(|o| o.summary.clone()).collect();
    rows.sort_by(|a, b| a.mean_best.total_cmp(&b.mean_best));
    let ranking: Vec<RankedRow> = rows
        .into_iter()
        .enumerate()
        .map(|(i, row)| RankedRow { rank: i + 1, row })
        .collect();

    if let Some(dir) = &first.output_dir {
        fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join(format!("{}_progress.csv", first.problem_id)))?;
        w.write_record(["mode", "trial", "eval_index", "best_so_far"])?;
        for o in &outcomes {
            for (t, r) in o.records.iter().enumerate() {
                for (s, best) in r.samples.iter().zip(r.best_so_far()) {
                    w.write_record([
                        o.summary.mode.to_string(),
                        t.to_string(),
                        s.eval_index.to_string(),
                        best.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join(format!("{}_ranking.csv", first.problem_id)))?;
        w.write_record(["rank", "problem_id", "mode", "mean_best", "std_best", "mean_evals_to_best", "trials"])?;
        for r in &ranking {
            let s = &r.row;
            w.write_record([
                r.rank.to_string(),
                s.problem_id.clone(),
                s.mode.to_string(),
                s.mean_best.to_string(),
                s.std_best.to_string(),
                s.mean_evals_to_best.to_string(),
                s.trials.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(Comparison { ranking, outcomes })
}

/// Settings of the seeding study: GP+ImFil with a few wide local boxes and
/// no local budget limit, against one ImFil search from the domain center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedingConfig {
    pub problem_id: String,
    pub repetitions: usize,
    pub b_start: usize,
    pub local_half_width: f64,
    /// Evaluations through the end of the GP phase; the standard protocol when unset.
    pub b_gp: Option<usize>,
    /// A run succeeds when its best value is within this of the global minimum.
    pub success_tol: f64,
    pub gp: GpSettings,
    pub imfil: ImfilConfig,
    pub rng_seed_base: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for SeedingConfig {
    fn default() -> Self {
        Self {
            problem_id: String::new(),
            repetitions: 10,
            b_start: 5,
            local_half_width: 0.2,
            b_gp: None,
            success_tol: 0.02,
            gp: GpSettings::default(),
            imfil: ImfilConfig::default(),
            rng_seed_base: 0,
            output_dir: None,
        }
    }
}

impl SeedingConfig {
    pub fn new(problem_id: impl Into<String>) -> Self {
        Self {
            problem_id: problem_id.into(),
            ..Self::default()
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| OptError::Config(e.to_string()))
    }

    /// Budgets for a problem of dimension `d`: every seed may run its
    /// search to completion.
    pub fn budgets_for(&self, d: usize) -> BudgetPlan {
        let std = BudgetPlan::standard(d, usize::MAX / 4);
        let b_gp = self.b_gp.unwrap_or(std.b_gp).max(std.n0);
        let b_loc = self.b_start * self.imfil.max_evals;
        BudgetPlan {
            n0: std.n0,
            b_gp,
            b_loc,
            b_start: self.b_start,
            local_half_width: self.local_half_width,
            total_cap: b_gp + b_loc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedingRun {
    pub rng_seed: u64,
    pub best_value: f64,
    pub n_evals: usize,
    pub success: bool,
    /// Some seed has a coordinate within `local_half_width` of the domain boundary.
    pub boundary_seed: bool,
    pub seeds: Vec<Vec<f64>>,
    pub min_seed_distance: f64,
}

/// Table columns for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub mean_result: f64,
    pub mean_iters: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedingReport {
    pub problem_id: String,
    pub reference_min: f64,
    pub success_tol: f64,
    pub baseline: MethodStats,
    pub gp_imfil: MethodStats,
    pub runs: Vec<SeedingRun>,
}

impl SeedingReport {
    /// Plain-text table with the Result / Iters / Rate columns.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{} (global minimum {:.6}, tolerance {})\n{:<10} {:>12} {:>10} {:>6}\n",
            self.problem_id, self.reference_min, self.success_tol, "method", "result", "iters", "rate"
        );
        for (name, m) in [("ImFil", &self.baseline), ("GP+ImFil", &self.gp_imfil)] {
            s += &format!(
                "{name:<10} {:>12.6} {:>10.1} {:>5.0}%\n",
                m.mean_result,
                m.mean_iters,
                100.0 * m.success_rate
            );
        }
        let flagged = self.runs.iter().filter(|r| r.boundary_seed).count();
        s += &format!("runs with a boundary seed: {flagged}/{}\n", self.runs.len());
        s
    }
}

/// Seeding study on a noise-free problem over its registered domain.
pub fn seeding_study(config: &SeedingConfig) -> Result<SeedingReport> {
    if config.repetitions == 0 || config.b_start == 0 {
        return Err(OptError::Config("repetitions and b_start must be positive".into()));
    }
    let problem = lookup(&config.problem_id)?;
    if problem.default_noise.is_some() {
        return Err(OptError::Config("the seeding study needs a noise-free problem".into()));
    }
    if !problem.reference_min.is_finite() {
        return Err(OptError::Config(format!("{} has no registered global minimum", problem.id)));
    }
    let objective = problem.clean_objective();
    let domain = &problem.domain;
    let success = |v: f64| v <= problem.reference_min + config.success_tol;

    let mut run_cfg = RunConfig::new(Mode::GpImfil, config.budgets_for(problem.dim()));
    run_cfg.gp = config.gp.clone();
    run_cfg.imfil = config.imfil.clone();
    run_cfg.validate()?;

    let one = |i: usize| -> Result<(SeedingRun, f64, usize)> {
        let seed = config.rng_seed_base.wrapping_add(i as u64);
        let record = run(objective.as_ref(), domain, &run_cfg, seed)?;
        let boundary_seed = record
            .seeds_used
            .iter()
            .any(|s| domain.distance_to_boundary(s) < config.local_half_width);
        let mut min_dist = f64::INFINITY;
        for (a, sa) in record.seeds_used.iter().enumerate() {
            for sb in &record.seeds_used[a + 1..] {
                min_dist = min_dist.min(distance(sa, sb));
            }
        }
        let base = imfil_minimize(objective.as_ref(), domain, &domain.center(), &config.imfil, seed)?;
        let run = SeedingRun {
            rng_seed: seed,
            best_value: record.best_value,
            n_evals: record.samples.len(),
            success: success(record.best_value),
            boundary_seed,
            seeds: record.seeds_used,
            min_seed_distance: min_dist,
        };
        Ok((run, base.best_value, base.n_evals))
    };
    let results: Vec<_> = pool()?.install(|| (0..config.repetitions).into_par_iter().map(one).collect());
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let n = results.len() as f64;
    let stats = |vals: Vec<(f64, usize)>| MethodStats {
        mean_result: vals.iter().map(|v| v.0).sum::<f64>() / n,
        mean_iters: vals.iter().map(|v| v.1 as f64).sum::<f64>() / n,
        success_rate: vals.iter().filter(|v| success(v.0)).count() as f64 / n,
    };
    let baseline = stats(results.iter().map(|r| (r.1, r.2)).collect());
    let gp_imfil = stats(results.iter().map(|r| (r.0.best_value, r.0.n_evals)).collect());
    let report = SeedingReport {
        problem_id: problem.id.clone(),
        reference_min: problem.reference_min,
        success_tol: config.success_tol,
        baseline,
        gp_imfil,
        runs: results.into_iter().map(|r| r.0).collect(),
    };
    if let Some(dir) = &config.output_dir {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join(format!("{}_seeding.json", problem.id)),
            serde_json::to_string_pretty(&report)?,
        )?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_defaults() {
        let cfg = ExperimentConfig::from_toml_str("problem_id = \"H2\"\nmode = \"ImfilOnly\"\nnoise = \"none\"").unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.noise, NoiseChoice::None);
        assert_eq!(cfg.mode, Mode::ImfilOnly);
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);

        let cfg = ExperimentConfig::from_toml_str("problem_id = \"H2\"\n[noise]\nshots = 100\nmisclass = 0.01").unwrap();
        assert!(matches!(cfg.noise, NoiseChoice::Spec(ref n) if n.misclass == 0.01));
        assert!(ExperimentConfig::from_toml_str("mode = \"GpOnly\"").is_err());
        assert!(ExperimentConfig::from_toml_str("problem_id = \"H2\"\nnoise = \"loud\"").is_err());
        assert!(ExperimentConfig::from_toml_str("problem_id = \"H2\"\ntrails = 3").is_err());
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }

    #[test]
    fn cap_override_rescales_budgets() {
        let mut cfg = ExperimentConfig::new("H2", Mode::GpImfil);
        cfg.budgets = Some(BudgetPlan::standard(2, 1000));
        let cfg = cfg.with_cap(20);
        let b = cfg.budgets_for(2);
        assert_eq!((b.n0, b.b_gp, b.b_loc, b.total_cap), (6, 20, 0, 20));
        b.validate().unwrap();
    }

    #[test]
    fn summary_matches_records() {
        let mut cfg = ExperimentConfig::new("sphere-2", Mode::ImfilOnly);
        cfg.total_cap = 60;
        cfg.trials = 2;
        let out = run_experiment(&cfg).unwrap();
        let mean = out.records.iter().map(|r| r.best_value).sum::<f64>() / 2.0;
        assert!((out.summary.mean_best - mean).abs() < 1e-12);
        assert!(out.records.iter().all(|r| r.samples.len() <= 60));
    }

    #[test]
    fn compare_rejects_mismatch() {
        let a = ExperimentConfig::new("H2", Mode::GpOnly);
        let b = ExperimentConfig::new("H1", Mode::GpOnly);
        assert!(compare(&[a.clone(), b]).is_err());
        let c = ExperimentConfig::new("H2", Mode::ImfilOnly).with_cap(500);
        assert!(compare(&[a, c]).is_err());
    }

    #[test]
    fn seeding_rejects_noisy_problem() {
        assert!(seeding_study(&SeedingConfig::new("H2-n")).is_err());
    }
}
