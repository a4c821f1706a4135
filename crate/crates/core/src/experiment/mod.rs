//! Train, inject, adapt: the end-to-end experiment protocol.
//!
//! Per seed the learner trains on a [`WrappedEnvironment`] until the timestep
//! budget is spent. A frozen copy of the learner is evaluated every
//! `cadence` training episodes, right before the injection, and right after
//! the first post-novelty episode. At the injection point the frozen
//! pre-novelty learner and a random agent are also evaluated on the
//! post-novelty config. Evaluations run on fresh worlds with their own seeds
//! and never advance the injection counter.

mod config;
mod records;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{debug, info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{
    validate_config, AgentConfig, EvaluationConfig, ExperimentConfig, Issue, LayoutSource,
    NoveltyConfig, Severity,
};
pub use records::{
    emit_plot_data, evaluation_curve, metrics_csv, moving_average, read_jsonl, seed_metrics,
    write_jsonl, EpisodeRecord, RecordKind, SeedLog, SeedMetrics,
};

use crate::agents::{Agent, Policy, QLearningAgent, RandomAgent, Transition};
use crate::catalog::NoveltyDescriptor;
use crate::grid::{generate_grid, EnvironmentConfig};
use crate::injection::{wrap, NoveltySchedule};
use crate::ontology::{validate_declaration, DeclarationReport};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Issue>),
    #[error("cannot parse experiment config: {0}")]
    Parse(String),
    #[error("{}: {error}", path.display())]
    Io {
        path: PathBuf,
        error: std::io::Error,
    },
    #[error("{0}")]
    Other(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |error| ExperimentError::Io {
        path: path.to_path_buf(),
        error,
    }
}

/// Everything a run produced, also written under the output directory.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub logs: Vec<SeedLog>,
    pub metrics: Vec<SeedMetrics>,
    pub classification: DeclarationReport,
}

/// Contents of `run.json`, written next to the episode logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub layout: String,
    pub novelty: String,
    pub injection_episode: u64,
    pub seeds: Vec<u64>,
    pub total_timesteps: u64,
    pub evaluation: EvaluationConfig,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

const ENV_STREAM: u64 = 0;
const AGENT_STREAM: u64 = 1;
/// Evaluation episode `i` uses streams `EVAL_STREAM + 2i` (world) and
/// `EVAL_STREAM + 2i + 1` (policy), identical for every block.
const EVAL_STREAM: u64 = 1 << 32;

/// Runs `episodes` evaluation episodes of `policy` on fresh worlds.
/// Returns (return, steps) per episode.
pub fn evaluate(
    policy: &dyn Policy,
    config: &EnvironmentConfig,
    seed: u64,
    episodes: usize,
) -> Vec<(f64, u32)> {
    (0..episodes as u64)
        .map(|i| {
            let mut world =
                generate_grid(config, stream(seed, EVAL_STREAM + 2 * i)).expect("validated config");
            let mut rng = stream(seed, EVAL_STREAM + 2 * i + 1);
            let mut obs = world.observe();
            let mut ret = 0.0;
            loop {
                let r = world
                    .step(policy.act(&obs, &mut rng))
                    .expect("episode live");
                ret += r.reward;
                obs = r.observation;
                if r.terminated || r.truncated {
                    return (ret, world.step_count());
                }
            }
        })
        .collect()
}

struct SeedRun<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
    started: Instant,
    records: Vec<EpisodeRecord>,
}

impl SeedRun<'_> {
    #[allow(clippy::too_many_arguments)]
    fn log_eval(
        &mut self,
        kind: RecordKind,
        policy: &dyn Policy,
        config: &EnvironmentConfig,
        episode: u64,
        timestep: u64,
        post_novelty: bool,
    ) {
        if kind == RecordKind::Eval
            && self
                .records
                .iter()
                .rev()
                .find(|r| r.kind == RecordKind::Eval)
                .is_some_and(|r| r.episode == episode)
        {
            return;
        }
        for (ret, steps) in evaluate(policy, config, self.seed, self.cfg.evaluation.episodes) {
            let wall_ms = self.wall_ms();
            self.records.push(EpisodeRecord {
                kind,
                episode,
                timestep,
                ret,
                steps,
                post_novelty,
                evaluation: true,
                seed: self.seed,
                wall_ms,
            });
        }
    }

    fn wall_ms(&self) -> Option<u64> {
        self.cfg
            .record_wall_clock
            .then(|| self.started.elapsed().as_millis() as u64)
    }
}

fn make_agent(cfg: &ExperimentConfig) -> Result<Box<dyn Agent>, ExperimentError> {
    Ok(match &cfg.agent {
        AgentConfig::Random => Box::new(RandomAgent),
        AgentConfig::QLearning(p) => Box::new(
            QLearningAgent::new(p.clone(), cfg.total_timesteps).map_err(|e| {
                ExperimentError::Invalid(vec![Issue {
                    severity: Severity::Error,
                    message: e.to_string(),
                }])
            })?,
        ),
    })
}

/// Trains and evaluates one seed. Pure function of (config, seed).
pub fn run_seed(
    cfg: &ExperimentConfig,
    pre: &EnvironmentConfig,
    descriptor: &NoveltyDescriptor,
    seed: u64,
) -> Result<Vec<EpisodeRecord>, ExperimentError> {
    let schedule = NoveltySchedule::new(cfg.novelty.injection_episode)
        .map_err(|e| ExperimentError::Other(e.to_string()))?;
    let mut env = wrap(pre, descriptor, schedule, stream(seed, ENV_STREAM))
        .map_err(|e| ExperimentError::Other(e.to_string()))?;
    let post = env.post_config().clone();
    let mut agent = make_agent(cfg)?;
    let mut rng = stream(seed, AGENT_STREAM);
    let cadence = cfg.evaluation.cadence;
    let mut run = SeedRun {
        cfg,
        seed,
        started: Instant::now(),
        records: Vec::new(),
    };

    let mut timestep = 0u64;
    let mut completed = 0u64;
    'training: while timestep < cfg.total_timesteps {
        if schedule.is_post(completed + 1) && !env.is_post_novelty() {
            let frozen = agent.freeze();
            run.log_eval(
                RecordKind::Eval,
                frozen.as_ref(),
                pre,
                completed,
                timestep,
                false,
            );
            run.log_eval(
                RecordKind::Resilience,
                frozen.as_ref(),
                &post,
                completed,
                timestep,
                true,
            );
            run.log_eval(
                RecordKind::Random,
                &RandomAgent,
                &post,
                completed,
                timestep,
                true,
            );
            agent.novelty_injected();
            info!(
                "seed {seed}: novelty injected at episode {} (timestep {timestep})",
                completed + 1
            );
        }

        let mut obs = env.reset();
        agent.begin_episode();
        let mut ret = 0.0;
        loop {
            if timestep >= cfg.total_timesteps {
                debug!("seed {seed}: budget exhausted mid-episode");
                break 'training;
            }
            let action = agent.act(&obs, &mut rng);
            let r = env.step(action).expect("episode live");
            timestep += 1;
            ret += r.reward;
            agent.observe(&Transition {
                observation: &obs,
                action,
                reward: r.reward,
                next_observation: &r.observation,
                terminal: r.terminated,
            });
            obs = r.observation;
            if r.terminated || r.truncated {
                break;
            }
        }
        completed += 1;
        let post_novelty = env.is_post_novelty();
        let wall_ms = run.wall_ms();
        run.records.push(EpisodeRecord {
            kind: RecordKind::Train,
            episode: completed,
            timestep,
            ret,
            steps: env.world().step_count(),
            post_novelty,
            evaluation: false,
            seed,
            wall_ms,
        });

        let first_post = completed == schedule.injection_episode();
        if first_post || completed.is_multiple_of(cadence) {
            let frozen = agent.freeze();
            let config = if post_novelty { &post } else { pre };
            run.log_eval(
                RecordKind::Eval,
                frozen.as_ref(),
                config,
                completed,
                timestep,
                post_novelty,
            );
        }
    }
    if !env.is_post_novelty() {
        warn!("seed {seed}: budget ran out before the injection episode");
    }
    Ok(run.records)
}

/// Validates, trains every seed in parallel, and writes all artifacts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts, ExperimentError> {
    let issues = validate_config(cfg);
    for i in issues.iter().filter(|i| i.severity == Severity::Warning) {
        warn!("{}", i.message);
    }
    if issues.iter().any(|i| i.severity == Severity::Error) {
        return Err(ExperimentError::Invalid(issues));
    }
    let pre = cfg
        .layout
        .resolve()
        .map_err(|e| ExperimentError::Other(e.to_string()))?;
    let descriptor = cfg.descriptor()?;
    let classification = validate_declaration(&descriptor, &pre)
        .map_err(|e| ExperimentError::Other(e.to_string()))?;

    let out_dir = cfg.out_dir.join(&cfg.name);
    fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
    info!(
        "running `{}`: {} on {} for {} seed(s)",
        cfg.name,
        descriptor.name,
        cfg.layout.label(),
        cfg.seeds.len()
    );

    let results: Vec<Result<SeedLog, ExperimentError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .seeds
            .iter()
            .map(|&seed| {
                let (pre, descriptor, out_dir) = (&pre, &descriptor, &out_dir);
                scope.spawn(move || {
                    let records = run_seed(cfg, pre, descriptor, seed)?;
                    let path = out_dir.join(format!("episodes-seed{seed}.jsonl"));
                    let file = fs::File::create(&path).map_err(io_err(&path))?;
                    write_jsonl(&mut BufWriter::new(file), &records).map_err(io_err(&path))?;
                    Ok(SeedLog { seed, records })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("seed worker panicked"))
            .collect()
    });
    let logs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let criterion = cfg.evaluation.criterion();
    let metrics = logs
        .iter()
        .map(|l| seed_metrics(l.seed, &l.records, criterion))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ExperimentError::Other(e.to_string()))?;
    for m in &metrics {
        if !m.converged {
            warn!("seed {}: post-novelty curve did not converge", m.seed);
        }
    }

    let write = |name: &str, text: &str| -> Result<(), ExperimentError> {
        let path = out_dir.join(name);
        fs::write(&path, text).map_err(io_err(&path))
    };
    write(
        "metrics.csv",
        &metrics_csv(&cfg.name, &descriptor.name, &metrics),
    )?;
    let plot =
        emit_plot_data(&logs, cfg.evaluation.smoothing_window).map_err(ExperimentError::Other)?;
    write("curve.csv", &plot)?;
    write(
        "classification.jsonl",
        &format!(
            "{}\n",
            serde_json::to_string(&classification).expect("report serializes")
        ),
    )?;
    let manifest = RunManifest {
        name: cfg.name.clone(),
        layout: cfg.layout.label(),
        novelty: descriptor.name.clone(),
        injection_episode: cfg.novelty.injection_episode,
        seeds: cfg.seeds.clone(),
        total_timesteps: cfg.total_timesteps,
        evaluation: cfg.evaluation.clone(),
    };
    write(
        "run.json",
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;

    Ok(RunArtifacts {
        out_dir,
        logs,
        metrics,
        classification,
    })
}

/// Ontology report for the configured novelty, without training.
pub fn classify(cfg: &ExperimentConfig) -> Result<DeclarationReport, ExperimentError> {
    let pre = cfg
        .layout
        .resolve()
        .map_err(|e| ExperimentError::Other(e.to_string()))?;
    let descriptor = cfg.descriptor()?;
    validate_declaration(&descriptor, &pre).map_err(|e| ExperimentError::Other(e.to_string()))
}
