use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::planner::ScriptedPlanner;

use super::config::RunConfig;
use super::episode::{run_episode, EpisodeResult};
use super::scenario::{benchmark_scenario, ScenarioError, ScenarioFile, DEFAULT_SCENARIO_COUNT};

pub const DEFAULT_EPISODE_SEEDS: [u64; 3] = [1, 2, 3];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchMatrix {
    pub configs: Vec<RunConfig>,
    pub scenario_ids: Vec<u32>,
    pub episode_seeds: Vec<u64>,
}

impl BenchMatrix {
    pub fn default_matrix() -> Self {
        Self {
            configs: super::config::default_matrix(),
            scenario_ids: (0..DEFAULT_SCENARIO_COUNT).collect(),
            episode_seeds: DEFAULT_EPISODE_SEEDS.to_vec(),
        }
    }

    pub fn episode_count(&self) -> usize {
        self.configs.len() * self.scenario_ids.len() * self.episode_seeds.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigAggregate {
    pub config: String,
    pub episodes: u32,
    pub successes: u32,
    pub success_rate: f64,
    /// Mean over successful episodes; `None` without any.
    pub mean_time_success: Option<f64>,
    pub mean_time_all: f64,
    pub failures: u32,
    pub recovered: u32,
    /// See [`recovery_rate`].
    pub recovery_rate: Option<f64>,
    pub mean_replans: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<EpisodeResult>,
    pub aggregates: Vec<ConfigAggregate>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Σrecovered / Σfailures; with no failures the rate is 1.0 only when the
/// whole matrix saw none, otherwise undefined for this config.
pub fn recovery_rate(recovered: u32, failures: u32, matrix_failures: u32) -> Option<f64> {
    if failures > 0 {
        Some(recovered as f64 / failures as f64)
    } else if matrix_failures == 0 {
        Some(1.0)
    } else {
        None
    }
}

/// Recomputes the per-config aggregates from episode rows, in the order the
/// configs first appear.
pub fn aggregate(rows: &[EpisodeResult]) -> Vec<ConfigAggregate> {
    let mut order: Vec<&str> = Vec::new();
    for r in rows {
        if !order.contains(&r.config.as_str()) {
            order.push(&r.config);
        }
    }
    let matrix_failures: u32 = rows.iter().map(|r| r.failures).sum();
    order
        .into_iter()
        .map(|label| {
            let rs: Vec<&EpisodeResult> = rows.iter().filter(|r| r.config == label).collect();
            let n = rs.len() as u32;
            let ok: Vec<&&EpisodeResult> = rs.iter().filter(|r| r.success).collect();
            let failures = rs.iter().map(|r| r.failures).sum();
            let recovered = rs.iter().map(|r| r.recovered).sum();
            let mean = |xs: &mut dyn Iterator<Item = f64>, k: usize| xs.sum::<f64>() / k as f64;
            ConfigAggregate {
                config: label.to_string(),
                episodes: n,
                successes: ok.len() as u32,
                success_rate: ok.len() as f64 / n as f64,
                mean_time_success: (!ok.is_empty()).then(|| mean(&mut ok.iter().map(|r| r.time), ok.len())),
                mean_time_all: mean(&mut rs.iter().map(|r| r.time), rs.len()),
                failures,
                recovered,
                recovery_rate: recovery_rate(recovered, failures, matrix_failures),
                mean_replans: mean(&mut rs.iter().map(|r| r.replans as f64), rs.len()),
            }
        })
        .collect()
}

/// Runs every (config, scenario, seed) cell. Rows come back in matrix order
/// whatever the degree of parallelism; `jobs == 0` uses all cores.
pub fn run_benchmark(matrix: &BenchMatrix, jobs: usize) -> Result<BenchReport, BenchError> {
    let scenarios: Vec<ScenarioFile> = matrix
        .scenario_ids
        .iter()
        .map(|&id| benchmark_scenario(id))
        .collect::<Result<_, _>>()?;
    let cells: Vec<(&RunConfig, &ScenarioFile, u64)> = matrix
        .configs
        .iter()
        .flat_map(|c| scenarios.iter().flat_map(move |s| matrix.episode_seeds.iter().map(move |&e| (c, s, e))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let rows: Vec<EpisodeResult> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(cfg, s, e)| run_episode(s, e, cfg, &mut ScriptedPlanner::default()).result)
            .collect()
    });
    let aggregates = aggregate(&rows);
    Ok(BenchReport { rows, aggregates })
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

pub const CSV_HEADER: [&str; 13] = [
    "config",
    "scenario_id",
    "episode_seed",
    "success",
    "time_s",
    "failures",
    "recovered",
    "replans",
    "planning_time_s",
    "valuables_in_tray",
    "debris_collected",
    "nothing_damaged",
    "abort_reason",
];

/// One row per episode, numbers at fixed precision.
pub fn to_csv(report: &BenchReport) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.config.clone(),
            r.scenario_id.to_string(),
            r.episode_seed.to_string(),
            r.success.to_string(),
            f4(r.time),
            r.failures.to_string(),
            r.recovered.to_string(),
            r.replans.to_string(),
            f4(r.planning_time),
            r.verdict.valuables_in_tray.to_string(),
            r.verdict.debris_collected.to_string(),
            r.verdict.nothing_damaged.to_string(),
            r.abort_reason.map_or("", |a| a.as_str()).to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Pool(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Aggregate table with one row per config.
pub fn to_markdown(report: &BenchReport) -> String {
    let mut s = String::new();
    s.push_str("| Config | Success (%) | Time, successful (s) | Time, all (s) | Recovery | Failures | Replans/ep | Episodes |\n");
    s.push_str("|---|---:|---:|---:|---:|---:|---:|---:|\n");
    for a in &report.aggregates {
        let _ = writeln!(
            s,
            "| {} | {:.1} | {} | {:.1} | {} | {} | {:.2} | {} |",
            a.config,
            100.0 * a.success_rate,
            a.mean_time_success.map_or("-".to_string(), |t| format!("{t:.1}")),
            a.mean_time_all,
            a.recovery_rate.map_or("-".to_string(), |r| format!("{r:.2}")),
            a.failures,
            a.mean_replans,
            a.episodes
        );
    }
    s
}
