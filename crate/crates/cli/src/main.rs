use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::{info, warn};
use novelty_grid::catalog::catalog;
use novelty_grid::experiment::{
    classify, metrics_csv, read_jsonl, run_experiment, seed_metrics, ExperimentConfig,
    ExperimentError, RunManifest,
};
use novelty_grid::metrics::ConvergenceCriterion;
use novelty_grid::ontology::validate_declaration;

/// Inject novelty into grid-world training runs and measure adaptation.
///
/// Log verbosity is controlled by RUST_LOG (default: info).
#[derive(Debug, Parser)]
#[command(name = "novelty-grid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train, inject the novelty, keep training, and write logs and metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the config's seed list. Repeatable.
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Replaces the config's novelty; its parameters fall back to defaults.
        #[arg(long)]
        novelty: Option<String>,
        #[arg(long)]
        injection_episode: Option<u64>,
    },
    /// Print the ontology report for the configured novelty as JSON.
    Classify {
        #[arg(long)]
        config: PathBuf,
        /// Report every catalog novelty applicable to the layout instead.
        #[arg(long)]
        all: bool,
    },
    /// Recompute the metric summary from an existing episode log.
    Metrics {
        #[arg(long)]
        log: PathBuf,
        /// Convergence window in evaluation blocks; defaults to the run's.
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            // 2 for a bad config, 1 for everything else.
            match e.downcast_ref::<ExperimentError>() {
                Some(ExperimentError::Invalid(_) | ExperimentError::Parse(_)) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            seeds,
            out_dir,
            novelty,
            injection_episode,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if !seeds.is_empty() {
                cfg.seeds = seeds;
            }
            if let Some(dir) = out_dir {
                cfg.out_dir = dir;
            }
            if let Some(name) = novelty {
                if name != cfg.novelty.name && !cfg.novelty.params.is_empty() {
                    info!("dropping parameters of `{}` for `{name}`", cfg.novelty.name);
                    cfg.novelty.params.clear();
                }
                cfg.novelty.name = name;
            }
            if let Some(ep) = injection_episode {
                cfg.novelty.injection_episode = ep;
            }
            let artifacts = run_experiment(&cfg)?;
            let csv = metrics_csv(
                &cfg.name,
                &artifacts.classification.novelty,
                &artifacts.metrics,
            );
            print!("{csv}");
            info!("artifacts written to {}", artifacts.out_dir.display());
            Ok(())
        }
        Command::Classify { config, all } => {
            let cfg = ExperimentConfig::load(&config)?;
            if !all {
                println!("{}", serde_json::to_string(&classify(&cfg)?)?);
                return Ok(());
            }
            let pre = cfg.layout.resolve().context("cannot resolve layout")?;
            for entry in catalog() {
                let missing = entry.missing_features(&pre);
                if !missing.is_empty() {
                    let needs: Vec<_> = missing.iter().map(|f| f.describe()).collect();
                    warn!(
                        "skipping {}: layout lacks {}",
                        entry.descriptor.name,
                        needs.join(", ")
                    );
                    continue;
                }
                let report = validate_declaration(&entry.descriptor, &pre)?;
                println!("{}", serde_json::to_string(&report)?);
            }
            Ok(())
        }
        Command::Metrics {
            log,
            window,
            tolerance,
        } => {
            let manifest = read_manifest(&log);
            let mut criterion = manifest
                .as_ref()
                .map(|m| m.evaluation.criterion())
                .unwrap_or_else(|| ConvergenceCriterion {
                    window: 10,
                    ..ConvergenceCriterion::default()
                });
            if let Some(w) = window {
                criterion.window = w;
            }
            if let Some(t) = tolerance {
                criterion.tolerance = t;
            }
            criterion.validate()?;

            let file = fs::File::open(&log).with_context(|| format!("{}", log.display()))?;
            let records = read_jsonl(BufReader::new(file))
                .map_err(|e| anyhow::anyhow!("{}: {e}", log.display()))?;
            if records.is_empty() {
                bail!("{}: no episode records", log.display());
            }
            let mut by_seed: BTreeMap<u64, Vec<_>> = BTreeMap::new();
            for r in records {
                by_seed.entry(r.seed).or_default().push(r);
            }
            let rows = by_seed
                .iter()
                .map(|(&seed, recs)| seed_metrics(seed, recs, criterion))
                .collect::<Result<Vec<_>, _>>()?;
            let (run_id, novelty) = match &manifest {
                Some(m) => (m.name.clone(), m.novelty.clone()),
                None => (
                    log.file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default(),
                    String::new(),
                ),
            };
            print!("{}", metrics_csv(&run_id, &novelty, &rows));
            Ok(())
        }
    }
}

/// The `run.json` written beside a log, if there is one.
fn read_manifest(log: &Path) -> Option<RunManifest> {
    let path = log.parent()?.join("run.json");
    let text = fs::read_to_string(&path).ok()?;
    match serde_json::from_str(&text) {
        Ok(m) => Some(m),
        Err(e) => {
            warn!("ignoring {}: {e}", path.display());
            None
        }
    }
}
