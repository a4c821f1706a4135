use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::agents::QLearningParams;
use crate::catalog::{lookup, NoveltyDescriptor};
use crate::grid::EnvironmentConfig;
use crate::injection::{wrap, NoveltySchedule};
use crate::layout::{self, LayoutError, LayoutSpec};
use crate::metrics::ConvergenceCriterion;
use crate::ontology::optimal_plan_length;

use super::ExperimentError;

/// Where the layout comes from: a bundled name or an inline document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "toml::Table", into = "toml::Table")]
pub enum LayoutSource {
    Named(String),
    Inline(Box<LayoutSpec>),
}

impl TryFrom<toml::Table> for LayoutSource {
    type Error = String;

    fn try_from(table: toml::Table) -> Result<Self, Self::Error> {
        if table.contains_key("grid") {
            let spec: LayoutSpec = table
                .try_into()
                .map_err(|e: toml::de::Error| e.to_string())?;
            return Ok(LayoutSource::Inline(Box::new(spec)));
        }
        match (table.get("name"), table.len()) {
            (Some(toml::Value::String(n)), 1) => Ok(LayoutSource::Named(n.clone())),
            (Some(_), 1) => Err("layout name must be a string".into()),
            (Some(_), _) => {
                Err("a named layout takes no other keys; add `grid` for an inline layout".into())
            }
            (None, _) => Err("layout needs either `name` or an inline `grid`".into()),
        }
    }
}

impl From<LayoutSource> for toml::Table {
    fn from(src: LayoutSource) -> Self {
        match src {
            LayoutSource::Named(n) => {
                toml::Table::from_iter([("name".to_string(), toml::Value::String(n))])
            }
            LayoutSource::Inline(spec) => {
                toml::Table::try_from(*spec).expect("layout spec serializes")
            }
        }
    }
}

impl LayoutSource {
    pub fn resolve(&self) -> Result<EnvironmentConfig, LayoutError> {
        match self {
            LayoutSource::Named(n) => layout::shipped(n),
            LayoutSource::Inline(spec) => spec.to_config(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            LayoutSource::Named(n) => n.clone(),
            LayoutSource::Inline(spec) => spec.name.clone().unwrap_or_else(|| "inline".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoveltyConfig {
    pub name: String,
    pub injection_episode: u64,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentConfig {
    QLearning(QLearningParams),
    Random,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig::QLearning(QLearningParams::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Evaluate the frozen learner every this many training episodes.
    pub cadence: u64,
    /// Episodes per evaluation block.
    pub episodes: usize,
    /// Window, in evaluation blocks, for convergence detection.
    pub convergence_window: usize,
    pub convergence_tolerance: f64,
    /// Trailing moving-average window, in training episodes, for plot data.
    pub smoothing_window: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            cadence: 50,
            episodes: 20,
            convergence_window: 10,
            convergence_tolerance: 0.05,
            smoothing_window: 100,
        }
    }
}

impl EvaluationConfig {
    pub fn criterion(&self) -> ConvergenceCriterion {
        ConvergenceCriterion {
            window: self.convergence_window,
            tolerance: self.convergence_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seeds: Vec<u64>,
    pub total_timesteps: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Adds a wall-clock field to episode records. Off by default so logs
    /// stay byte-identical across runs.
    #[serde(default)]
    pub record_wall_clock: bool,
    pub layout: LayoutSource,
    pub novelty: NoveltyConfig,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|error| ExperimentError::Io {
            path: path.to_path_buf(),
            error,
        })?;
        Self::from_toml(&text)
    }

    pub fn descriptor(&self) -> Result<NoveltyDescriptor, ExperimentError> {
        NoveltyDescriptor::parse(&self.novelty.name, &self.novelty.params)
            .map_err(|e| ExperimentError::Invalid(vec![Issue::error(e.to_string())]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
}

impl Issue {
    fn error(message: impl Into<String>) -> Self {
        Issue {
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn warning(message: impl Into<String>) -> Self {
        Issue {
            severity: Severity::Warning,
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Cross-field checks run before any training. An empty list means the
/// config is ready to run.
pub fn validate_config(cfg: &ExperimentConfig) -> Vec<Issue> {
    let mut issues = Vec::new();
    if cfg.total_timesteps == 0 {
        issues.push(Issue::error("total_timesteps must be positive"));
    }
    if cfg.seeds.is_empty() {
        issues.push(Issue::error("seeds must not be empty"));
    }
    let distinct: BTreeSet<_> = cfg.seeds.iter().collect();
    if distinct.len() != cfg.seeds.len() {
        issues.push(Issue::error("seeds must be distinct"));
    }
    let eval = &cfg.evaluation;
    if eval.cadence == 0 {
        issues.push(Issue::error("evaluation.cadence must be at least 1"));
    }
    if eval.episodes == 0 {
        issues.push(Issue::error("evaluation.episodes must be at least 1"));
    }
    if eval.smoothing_window == 0 {
        issues.push(Issue::error(
            "evaluation.smoothing_window must be at least 1",
        ));
    }
    if let Err(e) = eval.criterion().validate() {
        issues.push(Issue::error(e.to_string()));
    }
    if let AgentConfig::QLearning(p) = &cfg.agent {
        if let Err(e) = p.validate() {
            issues.push(Issue::error(format!("agent: {e}")));
        }
    }

    let pre = match cfg.layout.resolve() {
        Ok(c) => Some(c),
        Err(e) => {
            issues.push(Issue::error(format!("layout: {e}")));
            None
        }
    };
    let descriptor = match NoveltyDescriptor::parse(&cfg.novelty.name, &cfg.novelty.params) {
        Ok(d) => Some(d),
        Err(e) => {
            issues.push(Issue::error(format!("novelty: {e}")));
            None
        }
    };
    let schedule = match NoveltySchedule::new(cfg.novelty.injection_episode) {
        Ok(s) => Some(s),
        Err(e) => {
            issues.push(Issue::error(format!("novelty: {e}")));
            None
        }
    };

    if let (Some(pre), Some(d)) = (&pre, &descriptor) {
        if let Ok(entry) = lookup(&d.name) {
            for f in entry.missing_features(pre) {
                issues.push(Issue::error(format!(
                    "{} needs a layout with {}; `{}` has none",
                    d.name,
                    f.describe(),
                    cfg.layout.label()
                )));
            }
        }
        if let Some(s) = schedule {
            if let Err(e) = wrap(pre, d, s, rand::SeedableRng::seed_from_u64(0)) {
                issues.push(Issue::error(format!("novelty: {e}")));
            }
        }
        // Episodes can be no shorter than the optimal plan (or one step when
        // the oracle does not apply).
        let shortest = optimal_plan_length(pre).ok().flatten().unwrap_or(1).max(1) as u64;
        let max_episodes = cfg.total_timesteps / shortest;
        if cfg.novelty.injection_episode > max_episodes {
            issues.push(Issue::warning(format!(
                "injection_episode {} cannot be reached: {} timesteps allow at most {} episodes of {} steps",
                cfg.novelty.injection_episode, cfg.total_timesteps, max_episodes, shortest
            )));
        }
    }
    issues
}
