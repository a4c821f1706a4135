use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::metrics::{
    adaptive_efficiency, asymptotic_adaptive_performance, detect_convergence,
    one_shot_adaptive_performance, resilience, tail_mean, ConvergenceCriterion, CurveRecord,
    EvalSummary, MetricError, PerformanceCurve,
};

/// What produced an episode record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    /// A learning episode.
    Train,
    /// Frozen learner on the config currently being trained on.
    Eval,
    /// Frozen pre-novelty learner on the post-novelty config, taken at the
    /// injection point.
    Resilience,
    /// Random agent on the post-novelty config.
    Random,
}

/// One line of the episode log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub kind: RecordKind,
    /// Training episodes completed, including this one for training records.
    pub episode: u64,
    /// Cumulative training timesteps, including this episode for training records.
    pub timestep: u64,
    #[serde(rename = "return")]
    pub ret: f64,
    pub steps: u32,
    pub post_novelty: bool,
    pub evaluation: bool,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

pub fn write_jsonl<W: Write>(out: &mut W, records: &[EpisodeRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<EpisodeRecord>, String> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| format!("line {}: {e}", i + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(records)
}

/// Per-seed results. Metric fields are `None` when undefined for the run,
/// e.g. when the budget ran out before the injection or convergence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: u64,
    pub injection_episode: Option<u64>,
    pub injection_timestep: Option<u64>,
    /// Final-window mean of the pre-novelty evaluation curve.
    pub pre_plateau: Option<f64>,
    pub frozen_post: Option<f64>,
    pub random_post: Option<f64>,
    /// Final-window mean of the post-novelty evaluation curve.
    pub post_plateau: Option<f64>,
    pub resilience: Option<f64>,
    pub one_shot: Option<f64>,
    pub asymptotic: Option<f64>,
    pub adaptive_efficiency: Option<u64>,
    pub converged: bool,
}

fn block_means(records: &[&EpisodeRecord]) -> Vec<(u64, u64, bool, f64)> {
    let mut blocks: BTreeMap<(u64, bool), (u64, Vec<f64>)> = BTreeMap::new();
    for r in records {
        blocks
            .entry((r.episode, r.post_novelty))
            .or_insert_with(|| (r.timestep, Vec::new()))
            .1
            .push(r.ret);
    }
    blocks
        .into_iter()
        .map(|((ep, post), (t, rets))| (ep, t, post, rets.iter().sum::<f64>() / rets.len() as f64))
        .collect()
}

/// Rebuilds the evaluation curve of one seed from its log.
pub fn evaluation_curve(records: &[EpisodeRecord]) -> Result<PerformanceCurve, MetricError> {
    let evals: Vec<&EpisodeRecord> = records
        .iter()
        .filter(|r| r.kind == RecordKind::Eval)
        .collect();
    let points = block_means(&evals)
        .into_iter()
        .map(|(episode, timestep, post_novelty, ret)| CurveRecord {
            episode,
            timestep,
            ret,
            post_novelty,
        })
        .collect();
    PerformanceCurve::new(points)
}

fn summary(records: &[EpisodeRecord], kind: RecordKind) -> Option<EvalSummary> {
    let rets: Vec<f64> = records
        .iter()
        .filter(|r| r.kind == kind)
        .map(|r| r.ret)
        .collect();
    EvalSummary::from_returns(&rets).ok()
}

/// Computes every metric for one seed's log.
pub fn seed_metrics(
    seed: u64,
    records: &[EpisodeRecord],
    criterion: ConvergenceCriterion,
) -> Result<SeedMetrics, MetricError> {
    let curve = evaluation_curve(records)?;
    let first_post = records
        .iter()
        .find(|r| r.kind == RecordKind::Train && r.post_novelty);
    let injection_episode = first_post.map(|r| r.episode);
    let injection_timestep = first_post.map(|r| r.timestep - r.steps as u64);

    let frozen = summary(records, RecordKind::Resilience);
    let random = summary(records, RecordKind::Random);
    let pre: Vec<f64> = curve.pre_novelty().iter().map(|r| r.ret).collect();
    let post: Vec<f64> = curve.post_novelty().iter().map(|r| r.ret).collect();

    let pre_plateau = tail_mean(&pre, criterion.window.min(pre.len())).ok();
    let post_plateau = tail_mean(&post, criterion.window).ok();
    let converged = matches!(detect_convergence(&post, criterion), Ok(Some(_)));

    let (asymptotic, adaptive) = match &random {
        Some(r) if converged => (
            asymptotic_adaptive_performance(&curve, r, criterion).ok(),
            adaptive_efficiency(&curve, criterion).ok(),
        ),
        _ => (None, None),
    };
    Ok(SeedMetrics {
        seed,
        injection_episode,
        injection_timestep,
        pre_plateau,
        frozen_post: frozen.map(|s| s.mean),
        random_post: random.map(|s| s.mean),
        post_plateau,
        resilience: frozen.zip(random).map(|(f, r)| resilience(&f, &r)),
        one_shot: one_shot_adaptive_performance(&curve).ok(),
        asymptotic,
        adaptive_efficiency: adaptive,
        converged,
    })
}

const METRIC_HEADER: &str = "run_id,novelty,seed,resilience,one_shot,asymptotic,adaptive_efficiency,converged,injection_episode,injection_timestep,pre_plateau,frozen_post,random_post,post_plateau";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Metric summary as CSV, one row per seed.
pub fn metrics_csv(run_id: &str, novelty: &str, rows: &[SeedMetrics]) -> String {
    let mut out = String::from(METRIC_HEADER);
    out.push('\n');
    for m in rows {
        let fields = [
            run_id.to_string(),
            novelty.to_string(),
            m.seed.to_string(),
            opt(m.resilience),
            opt(m.one_shot),
            opt(m.asymptotic),
            opt(m.adaptive_efficiency),
            m.converged.to_string(),
            opt(m.injection_episode),
            opt(m.injection_timestep),
            opt(m.pre_plateau),
            opt(m.frozen_post),
            opt(m.random_post),
            opt(m.post_plateau),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedLog {
    pub seed: u64,
    pub records: Vec<EpisodeRecord>,
}

/// Trailing moving average; early points average what is available.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..values.len())
        .map(|i| {
            let w = &values[(i + 1).saturating_sub(window)..=i];
            w.iter().sum::<f64>() / w.len() as f64
        })
        .collect()
}

/// Smoothed training return against timestep for every seed, their mean, and
/// an injection marker column, as CSV.
///
/// Rows are the union of all seeds' episode-end timesteps; a seed's column
/// carries its latest smoothed value at or before the row (empty before its
/// first episode). `injection` is 1 on rows equal to some seed's injection
/// timestep.
pub fn emit_plot_data(logs: &[SeedLog], smoothing: usize) -> Result<String, String> {
    if logs.is_empty()
        || logs
            .iter()
            .all(|l| l.records.iter().all(|r| r.kind != RecordKind::Train))
    {
        return Err("no training episodes to plot".into());
    }
    let series: Vec<Vec<(u64, f64)>> = logs
        .iter()
        .map(|log| {
            let train: Vec<&EpisodeRecord> = log
                .records
                .iter()
                .filter(|r| r.kind == RecordKind::Train)
                .collect();
            let rets: Vec<f64> = train.iter().map(|r| r.ret).collect();
            train
                .iter()
                .map(|r| r.timestep)
                .zip(moving_average(&rets, smoothing))
                .collect()
        })
        .collect();
    let injections: Vec<u64> = logs
        .iter()
        .filter_map(|log| {
            log.records
                .iter()
                .find(|r| r.kind == RecordKind::Train && r.post_novelty)
                .map(|r| r.timestep - r.steps as u64)
        })
        .collect();

    let mut times: Vec<u64> = series.iter().flatten().map(|(t, _)| *t).collect();
    times.extend(&injections);
    times.sort_unstable();
    times.dedup();

    let mut out = String::from("timestep");
    for log in logs {
        out.push_str(&format!(",seed_{}", log.seed));
    }
    out.push_str(",mean,injection\n");

    let mut cursor = vec![0usize; series.len()];
    let mut current: Vec<Option<f64>> = vec![None; series.len()];
    for t in times {
        let mut row = t.to_string();
        for (s, points) in series.iter().enumerate() {
            while cursor[s] < points.len() && points[cursor[s]].0 <= t {
                current[s] = Some(points[cursor[s]].1);
                cursor[s] += 1;
            }
            row.push(',');
            row.push_str(&opt(current[s]));
        }
        let present: Vec<f64> = current.iter().flatten().copied().collect();
        let mean =
            (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64);
        row.push(',');
        row.push_str(&opt(mean));
        row.push_str(if injections.contains(&t) {
            ",1\n"
        } else {
            ",0\n"
        });
        out.push_str(&row);
    }
    Ok(out)
}
