//! Adaptation metrics over evaluation curves.
//!
//! A [`PerformanceCurve`] holds frozen-policy evaluation means taken during
//! training. Records flagged `post_novelty` were taken after the injection;
//! the last pre-novelty record marks the injection point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("need at least {needed} values, have {have}")]
    InsufficientData { needed: usize, have: usize },
    #[error("no convergence detected; tail mean {tail_mean}")]
    NotConverged { tail_mean: f64 },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid convergence criterion: {0}")]
    InvalidCriterion(String),
    #[error("curve has no pre-novelty record marking the injection point")]
    NoInjectionPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub episode: u64,
    /// Cumulative training timesteps when the record was taken.
    pub timestep: u64,
    #[serde(rename = "return")]
    pub ret: f64,
    pub post_novelty: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PerformanceCurve {
    records: Vec<CurveRecord>,
}

impl PerformanceCurve {
    pub fn new(records: Vec<CurveRecord>) -> Result<Self, MetricError> {
        for (i, r) in records.iter().enumerate() {
            if !r.ret.is_finite() {
                return Err(MetricError::InvalidCurve(format!(
                    "record {i} has return {}",
                    r.ret
                )));
            }
            if let Some(prev) = i.checked_sub(1).map(|j| &records[j]) {
                if r.episode <= prev.episode {
                    return Err(MetricError::InvalidCurve(format!(
                        "episode {} follows {}",
                        r.episode, prev.episode
                    )));
                }
                if r.timestep < prev.timestep {
                    return Err(MetricError::InvalidCurve(format!(
                        "timestep {} follows {}",
                        r.timestep, prev.timestep
                    )));
                }
                if prev.post_novelty && !r.post_novelty {
                    return Err(MetricError::InvalidCurve(format!(
                        "pre-novelty record at episode {} follows a post-novelty one",
                        r.episode
                    )));
                }
            }
        }
        Ok(PerformanceCurve { records })
    }

    pub fn records(&self) -> &[CurveRecord] {
        &self.records
    }

    pub fn returns(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.ret).collect()
    }

    pub fn pre_novelty(&self) -> &[CurveRecord] {
        &self.records[..self.split()]
    }

    pub fn post_novelty(&self) -> &[CurveRecord] {
        &self.records[self.split()..]
    }

    fn split(&self) -> usize {
        self.records
            .iter()
            .position(|r| r.post_novelty)
            .unwrap_or(self.records.len())
    }

    /// Adds `c` to every return.
    pub fn shifted(&self, c: f64) -> Self {
        PerformanceCurve {
            records: self
                .records
                .iter()
                .map(|r| CurveRecord {
                    ret: r.ret + c,
                    ..*r
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    pub episodes: usize,
}

impl EvalSummary {
    pub fn from_returns(returns: &[f64]) -> Result<Self, MetricError> {
        if returns.is_empty() {
            return Err(MetricError::InsufficientData { needed: 1, have: 0 });
        }
        let mean = mean(returns);
        let variance =
            returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / returns.len() as f64;
        Ok(EvalSummary {
            mean,
            variance,
            episodes: returns.len(),
        })
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCriterion {
    pub window: usize,
    pub tolerance: f64,
}

impl Default for ConvergenceCriterion {
    fn default() -> Self {
        ConvergenceCriterion {
            window: 100,
            tolerance: 0.05,
        }
    }
}

impl ConvergenceCriterion {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.window < 1 {
            return Err(MetricError::InvalidCriterion(
                "window must be at least 1".into(),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(MetricError::InvalidCriterion(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Mean of the final `window` values.
pub fn tail_mean(values: &[f64], window: usize) -> Result<f64, MetricError> {
    if window == 0 || values.len() < window {
        return Err(MetricError::InsufficientData {
            needed: window.max(1),
            have: values.len(),
        });
    }
    Ok(mean(&values[values.len() - window..]))
}

/// Earliest index `e` such that the mean of every window starting at or after
/// `e` lies within the tolerance of the final full-window mean.
///
/// Windows are `values[j..min(j + W, n)]`, so the ones near the end shrink
/// down to the last value alone; a curve still oscillating at its end never
/// converges. `e` must leave a full window after it, otherwise the result is
/// `None`.
pub fn detect_convergence(
    values: &[f64],
    criterion: ConvergenceCriterion,
) -> Result<Option<usize>, MetricError> {
    criterion.validate()?;
    let (n, w) = (values.len(), criterion.window);
    let target = tail_mean(values, w)?;
    let mut earliest = None;
    for j in (0..n).rev() {
        let window = &values[j..(j + w).min(n)];
        if (mean(window) - target).abs() <= criterion.tolerance {
            earliest = Some(j);
        } else {
            break;
        }
    }
    Ok(earliest.filter(|&e| e <= n - w))
}

/// Frozen pre-novelty policy on the post-novelty task, relative to random.
pub fn resilience(frozen_eval: &EvalSummary, random_eval: &EvalSummary) -> f64 {
    frozen_eval.mean - random_eval.mean
}

/// Post-novelty records' convergence point, or why there is none.
fn post_convergence(
    curve: &PerformanceCurve,
    criterion: ConvergenceCriterion,
) -> Result<(usize, f64), MetricError> {
    let post: Vec<f64> = curve.post_novelty().iter().map(|r| r.ret).collect();
    let tail = tail_mean(&post, criterion.window)?;
    match detect_convergence(&post, criterion)? {
        Some(e) => Ok((e, tail)),
        None => Err(MetricError::NotConverged { tail_mean: tail }),
    }
}

/// Converged post-novelty performance above random.
pub fn asymptotic_adaptive_performance(
    curve: &PerformanceCurve,
    random_eval: &EvalSummary,
    criterion: ConvergenceCriterion,
) -> Result<f64, MetricError> {
    let (_, tail) = post_convergence(curve, criterion)?;
    Ok(tail - random_eval.mean)
}

/// Training timesteps from the injection to post-novelty convergence.
pub fn adaptive_efficiency(
    curve: &PerformanceCurve,
    criterion: ConvergenceCriterion,
) -> Result<u64, MetricError> {
    let injection = curve
        .pre_novelty()
        .last()
        .ok_or(MetricError::NoInjectionPoint)?;
    let (e, _) = post_convergence(curve, criterion)?;
    let converged = curve.post_novelty()[e];
    Ok(converged.timestep - injection.timestep)
}

/// Evaluation return after the first post-novelty training episode.
pub fn one_shot_adaptive_performance(curve: &PerformanceCurve) -> Result<f64, MetricError> {
    curve
        .post_novelty()
        .first()
        .map(|r| r.ret)
        .ok_or(MetricError::InsufficientData { needed: 1, have: 0 })
}
