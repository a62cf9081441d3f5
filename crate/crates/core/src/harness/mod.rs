//! Scenario generation, closed-loop episodes and the benchmark matrix.

mod bench;
mod config;
mod episode;
mod recovery;
mod scenario;

pub use bench::{
    aggregate, recovery_rate, run_benchmark, to_csv, to_markdown, BenchError, BenchMatrix, BenchReport,
    ConfigAggregate, CSV_HEADER, DEFAULT_EPISODE_SEEDS,
};
pub use config::{
    benchmark_injection, default_matrix, CliOverrides, ConfigError, FileSettings, PlannerKind, RunConfig, Settings,
    ENV_ENDPOINT, ENV_PLANNER, ENV_TIMEOUT_MS,
};
pub use episode::{
    episode_rng, failure_histogram, run_episode, AbortReason, EpisodeResult, EpisodeRun, Segment, Trace,
};
pub use recovery::{compute_recovery, event_goal_met, FailureEvent};
pub use scenario::{
    benchmark_scenario, generate_scenario, scenario_seed, ScenarioError, ScenarioFile, ScenarioParams, ScenarioSpec,
    DEFAULT_SCENARIO_COUNT, DEFAULT_TIME_LIMIT,
};
