use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use noisy_seed_opt::bench::{compare, run_experiment, seeding_study, ExperimentConfig, SeedingConfig};
use noisy_seed_opt::error::OptError;
use noisy_seed_opt::objectives::{list, lookup};
use noisy_seed_opt::orchestrator::Mode;

#[derive(Parser)]
#[command(version, about = "Benchmark harness for GP-seeded Implicit Filtering")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Run one experiment (all trials of one mode on one problem).
    Run(Common),
    /// Run several modes on one problem and rank them.
    Compare(Common),
    /// GP+ImFil seeding study against a single center-start ImFil.
    Seeding(Common),
    /// List registered problems.
    List,
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// Repeat for `compare`; all three modes when omitted there.
    #[arg(long)]
    mode: Vec<Mode>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base RNG seed; trial i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Total evaluation cap.
    #[arg(long)]
    cap: Option<usize>,
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<OptError> for Failure {
    fn from(e: OptError) -> Self {
        match e {
            OptError::Config(_) | OptError::UnknownProblem(_) | OptError::InvalidArgument(_) => {
                Failure::Config(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

fn experiment(c: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = &c.problem {
        cfg.problem_id = p.clone();
    }
    if cfg.problem_id.is_empty() {
        return Err(Failure::Config("no problem given (--problem or problem_id in --config)".into()));
    }
    if let Some(m) = c.mode.first() {
        cfg.mode = *m;
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if let Some(s) = c.seed {
        cfg.rng_seed_base = s;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = Some(o.clone());
    }
    if let Some(cap) = c.cap {
        cfg = cfg.with_cap(cap);
    }
    Ok(cfg)
}

fn seeding(c: &Common) -> Result<SeedingConfig, Failure> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            SeedingConfig::from_toml_str(&text)?
        }
        None => SeedingConfig::default(),
    };
    if let Some(p) = &c.problem {
        cfg.problem_id = p.clone();
    }
    if let Some(t) = c.trials {
        cfg.repetitions = t;
    }
    if let Some(s) = c.seed {
        cfg.rng_seed_base = s;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = Some(o.clone());
    }
    Ok(cfg)
}

fn execute(verb: Verb) -> Result<(), Failure> {
    match verb {
        Verb::List => {
            let mut text = format!("{:<16} {:>4} {:>14}  description\n", "id", "dim", "reference_min");
            for id in list() {
                let info = lookup(&id)?.info();
                text += &format!("{:<16} {:>4} {:>14.6}  {}\n", info.id, info.dim, info.reference_min, info.description);
            }
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
        Verb::Run(c) => {
            let out = run_experiment(&experiment(&c)?)?;
            let s = &out.summary;
            println!(
                "{} {}: mean best {:.6} (std {:.6}) over {} trials, mean evals to best {:.1}",
                s.problem_id, s.mode, s.mean_best, s.std_best, s.trials, s.mean_evals_to_best
            );
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Verb::Compare(c) => {
            let base = experiment(&c)?;
            let modes = if c.mode.is_empty() { Mode::ALL.to_vec() } else { c.mode.clone() };
            let configs: Vec<ExperimentConfig> = modes
                .into_iter()
                .map(|m| ExperimentConfig { mode: m, ..base.clone() })
                .collect();
            let cmp = compare(&configs)?;
            println!("{:<5} {:<10} {:>12} {:>10} {:>14}", "rank", "mode", "mean_best", "std", "evals_to_best");
            for r in &cmp.ranking {
                println!(
                    "{:<5} {:<10} {:>12.6} {:>10.6} {:>14.1}",
                    r.rank, r.row.mode, r.row.mean_best, r.row.std_best, r.row.mean_evals_to_best
                );
            }
        }
        Verb::Seeding(c) => {
            let cfg = seeding(&c)?;
            if cfg.problem_id.is_empty() {
                return Err(Failure::Config("no problem given".into()));
            }
            print!("{}", seeding_study(&cfg)?.table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match execute(cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
