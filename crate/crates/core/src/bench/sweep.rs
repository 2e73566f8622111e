//! Deterministic sweep execution and result files.
//!
//! Every (point, repeat) pair gets its own seed,
//! `u64::from_le_bytes(sha256(master_le || name || point_le || repeat_le)[..8])`,
//! so results do not depend on worker count or scheduling. Records are
//! sorted on (point, repeat) before anything is written.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ScenarioConfig, SweepAxis};
use super::experiments::Experiment;
use crate::error::{Error, Result};
use crate::modem::qam::Scheme;

/// Seed of one (point, repeat) evaluation.
pub fn derive_seed(master: u64, experiment: &str, point: usize, repeat: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(experiment.as_bytes());
    h.update((point as u64).to_le_bytes());
    h.update((repeat as u64).to_le_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

/// What one evaluation of an experiment produces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointOutcome {
    /// Named metrics in a fixed order; EVMs are in percent.
    pub metrics: Vec<(String, f64)>,
    /// Equalized symbols of the first stream, for constellation dumps.
    pub constellation: Vec<Complex64>,
}

impl PointOutcome {
    pub fn metric(mut self, name: impl Into<String>, value: f64) -> Self {
        self.metrics.push((name.into(), value));
        self
    }

    pub fn with_constellation(mut self, symbols: Vec<Complex64>) -> Self {
        self.constellation = symbols;
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub point: usize,
    pub repeat: usize,
    pub seed: u64,
    pub outcome: PointOutcome,
}

/// Sweep settings that come from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: u64,
    /// Overrides `scenario.repeats`.
    pub repeats: Option<usize>,
    /// Worker threads; `None` uses all cores.
    pub workers: Option<usize>,
}

impl RunOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            repeats: None,
            workers: None,
        }
    }
}

/// Values of every swept parameter at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub index: usize,
    pub values: Vec<(String, f64)>,
}

/// Everything a sweep produced.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub experiment: String,
    pub master_seed: u64,
    pub repeats: usize,
    pub scheme: Scheme,
    pub config: ScenarioConfig,
    pub axes: Vec<SweepAxis>,
    pub points: Vec<GridPoint>,
    /// Sorted on (point, repeat).
    pub records: Vec<PointRecord>,
}

/// Mean and sample standard deviation of one metric at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub name: String,
    pub mean: f64,
    pub std: f64,
}

impl SweepResult {
    pub fn records_at(&self, point: usize) -> impl Iterator<Item = &PointRecord> {
        self.records.iter().filter(move |r| r.point == point)
    }

    /// Names of the metrics, in the order the experiment reports them.
    pub fn metric_names(&self) -> Vec<String> {
        self.records
            .first()
            .map(|r| r.outcome.metrics.iter().map(|(n, _)| n.clone()).collect())
            .unwrap_or_default()
    }

    /// Mean and standard deviation over repeats of every metric at `point`.
    pub fn summary(&self, point: usize) -> Vec<MetricSummary> {
        self.metric_names()
            .into_iter()
            .map(|name| {
                let v: Vec<f64> = self
                    .records_at(point)
                    .filter_map(|r| r.outcome.get(&name))
                    .collect();
                let (mean, std) = mean_std(&v);
                MetricSummary { name, mean, std }
            })
            .collect()
    }

    /// Mean of `metric` at `point`.
    pub fn mean(&self, point: usize, metric: &str) -> Option<f64> {
        self.summary(point)
            .into_iter()
            .find(|m| m.name == metric)
            .map(|m| m.mean)
    }
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Row-major enumeration of the grid spanned by `axes`; the last axis
/// varies fastest. No axes means one point.
pub fn grid_indices(axes: &[SweepAxis]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..axis.values.len()).map(move |k| {
                    let mut p = prefix.clone();
                    p.push(k);
                    p
                })
            })
            .collect();
    }
    out
}

/// Runs `exp` over the configured sweep (or the experiment's default one).
pub fn run_experiment(
    exp: &dyn Experiment,
    cfg: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<SweepResult> {
    let base = exp.prepare(cfg)?;
    base.validate()?;
    let axes = if base.sweep.is_empty() {
        exp.default_axes()
    } else {
        base.sweep.clone()
    };
    let repeats = opts.repeats.unwrap_or(base.scenario.repeats);
    if repeats == 0 {
        return Err(Error::Config {
            key: "scenario.repeats".into(),
            reason: "must be >= 1".into(),
        });
    }

    let grid = grid_indices(&axes);
    let mut configs = Vec::with_capacity(grid.len());
    let mut points = Vec::with_capacity(grid.len());
    for (index, idx) in grid.iter().enumerate() {
        let point_cfg = base.at_point(&axes, idx)?;
        point_cfg.validate()?;
        let mut values = Vec::new();
        for (axis, &k) in axes.iter().zip(idx) {
            values.push((axis.parameter.clone(), axis.values[k]));
            for l in &axis.linked {
                values.push((l.parameter.clone(), l.values[k]));
            }
        }
        points.push(GridPoint { index, values });
        configs.push(point_cfg);
    }

    let name = exp.name();
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|p| (0..repeats).map(move |r| (p, r)))
        .collect();
    let eval = |&(point, repeat): &(usize, usize)| -> Result<PointRecord> {
        let seed = derive_seed(opts.seed, name, point, repeat);
        log::debug!("{name}: point {point} repeat {repeat} seed {seed}");
        let outcome = exp.run_point(&configs[point], seed)?;
        Ok(PointRecord {
            point,
            repeat,
            seed,
            outcome,
        })
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = opts.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::param("workers", format!("cannot start worker pool: {e}")))?;
    let mut records: Vec<PointRecord> =
        pool.install(|| jobs.par_iter().map(eval).collect::<Result<Vec<_>>>())?;
    records.sort_by_key(|r| (r.point, r.repeat));

    Ok(SweepResult {
        experiment: name.to_string(),
        master_seed: opts.seed,
        repeats,
        scheme: base.waveform.scheme,
        config: base,
        axes,
        points,
        records,
    })
}

/// Formats a float for the result files. Rust's shortest round-trip
/// formatting is deterministic across platforms.
fn fmt_value(v: f64) -> String {
    format!("{v:?}")
}

/// The results table: one row per (point, repeat).
pub fn results_csv(result: &SweepResult) -> String {
    let metric_names = result.metric_names();
    let axis_names: Vec<String> = result
        .points
        .first()
        .map(|p| p.values.iter().map(|(n, _)| n.clone()).collect())
        .unwrap_or_else(|| {
            result
                .axes
                .iter()
                .flat_map(|a| {
                    std::iter::once(a.parameter.clone())
                        .chain(a.linked.iter().map(|l| l.parameter.clone()))
                })
                .collect()
        });
    let mut header = vec!["point".to_string()];
    header.extend(axis_names);
    header.extend(["repeat".to_string(), "seed".to_string()]);
    header.extend(metric_names.iter().cloned());
    header.extend(metric_names.iter().map(|m| format!("std_{m}")));
    let mut out = header.join(",");
    out.push('\n');

    let summaries: Vec<Vec<MetricSummary>> = (0..result.points.len())
        .map(|p| result.summary(p))
        .collect();
    for r in &result.records {
        let mut row = vec![r.point.to_string()];
        row.extend(
            result.points[r.point]
                .values
                .iter()
                .map(|(_, v)| fmt_value(*v)),
        );
        row.push(r.repeat.to_string());
        row.push(r.seed.to_string());
        row.extend(
            metric_names
                .iter()
                .map(|m| fmt_value(r.outcome.get(m).unwrap_or(f64::NAN))),
        );
        row.extend(summaries[r.point].iter().map(|s| fmt_value(s.std)));
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

#[derive(Serialize)]
struct PointSummary<'a> {
    point: usize,
    values: &'a [(String, f64)],
    metrics: Vec<MetricSummary>,
    /// Per metric: whether the mean EVM meets the requirement of the scheme.
    meets_requirement: Vec<(String, bool)>,
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    master_seed: u64,
    repeats: usize,
    fingerprint: String,
    evm_requirement_percent: Thresholds,
    scheme: Scheme,
    config: &'a ScenarioConfig,
    points: Vec<PointSummary<'a>>,
}

#[derive(Serialize)]
struct Thresholds {
    qam16: f64,
    qpsk: f64,
}

/// JSON summary: fingerprint, resolved config, requirement thresholds and
/// per-point mean/std.
pub fn summary_json(result: &SweepResult) -> Result<String> {
    let req = result.scheme.evm_requirement_percent();
    let points = result
        .points
        .iter()
        .map(|p| {
            let metrics = result.summary(p.index);
            let meets_requirement = metrics
                .iter()
                .filter(|m| m.name.starts_with("evm"))
                .map(|m| (m.name.clone(), m.mean <= req))
                .collect();
            PointSummary {
                point: p.index,
                values: &p.values,
                metrics,
                meets_requirement,
            }
        })
        .collect();
    let s = Summary {
        experiment: &result.experiment,
        master_seed: result.master_seed,
        repeats: result.repeats,
        fingerprint: format!("{}:{}", result.config.fingerprint(), result.master_seed),
        evm_requirement_percent: Thresholds {
            qam16: Scheme::Qam16.evm_requirement_percent(),
            qpsk: Scheme::Qpsk.evm_requirement_percent(),
        },
        scheme: result.scheme,
        config: &result.config,
        points,
    };
    serde_json::to_string_pretty(&s).map_err(|e| Error::param("summary", e.to_string()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `results.csv`, `summary.json` and, when enabled, one
/// `constellation_p<point>_r<repeat>.txt` per record.
pub fn emit_results(result: &SweepResult, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join("results.csv"), &results_csv(result))?;
    write(&dir.join("summary.json"), &summary_json(result)?)?;
    if result.config.output.constellation {
        for r in result
            .records
            .iter()
            .filter(|r| !r.outcome.constellation.is_empty())
        {
            let mut text = String::new();
            for s in &r.outcome.constellation {
                let _ = writeln!(text, "{},{}", fmt_value(s.re), fmt_value(s.im));
            }
            write(
                &dir.join(format!("constellation_p{}_r{}.txt", r.point, r.repeat)),
                &text,
            )?;
        }
    }
    Ok(())
}
