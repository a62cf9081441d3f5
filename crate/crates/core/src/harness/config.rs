use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::coordination::CoordinationParams;
use crate::planner::{Fallback, DEFAULT_TIMEOUT};
use crate::scenegraph::{ObservationNoise, SceneParams};
use crate::world::{FailureInjectionConfig, SimParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Scripted,
    Http,
}

impl PlannerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlannerKind::Scripted => "scripted",
            PlannerKind::Http => "http",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "scripted" => Some(PlannerKind::Scripted),
            "http" => Some(PlannerKind::Http),
            _ => None,
        }
    }
}

/// Injection profile used by the default benchmark matrix.
pub fn benchmark_injection() -> FailureInjectionConfig {
    FailureInjectionConfig {
        p_slip_rigid: 0.08,
        p_slip_fragile: 0.15,
        p_force_exceed: 0.03,
        place_noise_sigma: 0.008,
        wipe_residual_p: 0.02,
        rng_stream: 0,
    }
}

/// One row of the experiment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub label: String,
    pub planner: PlannerKind,
    pub reflective: bool,
    pub arms: usize,
    pub debris_threshold: f64,
    pub replan_budget: u32,
    /// Failures on one object after which it is given up.
    pub object_failure_cap: u32,
    /// Seconds charged per planning call.
    pub planning_latency: f64,
    pub injection: FailureInjectionConfig,
    pub scene: SceneParams,
    pub sim: SimParams,
    pub coordination: CoordinationParams,
}

impl RunConfig {
    pub fn new(label: impl Into<String>, reflective: bool, arms: usize) -> Self {
        Self {
            label: label.into(),
            planner: PlannerKind::Scripted,
            reflective,
            arms,
            debris_threshold: 1.0,
            replan_budget: 10,
            object_failure_cap: 3,
            planning_latency: 0.25,
            injection: FailureInjectionConfig::none(),
            scene: SceneParams::default(),
            sim: SimParams::default(),
            coordination: CoordinationParams::default(),
        }
    }

    /// No injected failures and exact perception.
    pub fn failure_free(label: impl Into<String>, arms: usize) -> Self {
        let mut c = Self::new(label, true, arms);
        c.scene.noise = ObservationNoise::none();
        c
    }

    /// Benchmark profile: relaxed debris objective plus injected failures.
    pub fn benchmark(label: impl Into<String>, reflective: bool, arms: usize) -> Self {
        Self {
            debris_threshold: 0.95,
            injection: benchmark_injection(),
            ..Self::new(label, reflective, arms)
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(1..=2).contains(&self.arms) {
            return Err(format!("arms must be 1 or 2, got {}", self.arms));
        }
        if !(0.0..=1.0).contains(&self.debris_threshold) {
            return Err(format!("debris_threshold must be in [0,1], got {}", self.debris_threshold));
        }
        self.injection.validate()
    }
}

/// The three rows of the default comparison.
pub fn default_matrix() -> Vec<RunConfig> {
    vec![
        RunConfig::benchmark("reflective+dual", true, 2),
        RunConfig::benchmark("static+dual", false, 2),
        RunConfig::benchmark("reflective+single", true, 1),
    ]
}

/// Settings read from a TOML file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSettings {
    #[serde(default)]
    pub planner: FilePlanner,
    #[serde(default)]
    pub bench: FileBench,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilePlanner {
    pub kind: Option<PlannerKind>,
    pub endpoint: Option<String>,
    pub timeout_ms: Option<u64>,
    pub fallback: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileBench {
    pub jobs: Option<usize>,
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CliOverrides {
    pub planner: Option<PlannerKind>,
    pub endpoint: Option<String>,
    pub timeout_ms: Option<u64>,
    pub jobs: Option<usize>,
}

/// Effective settings after layering file < environment < command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub planner: PlannerKind,
    pub endpoint: Option<String>,
    pub timeout: Duration,
    pub fallback: Fallback,
    pub jobs: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config file {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid value {value:?} for {name}")]
    BadValue { name: String, value: String },
}

pub const ENV_ENDPOINT: &str = "DESKCLEAN_ENDPOINT";
pub const ENV_TIMEOUT_MS: &str = "DESKCLEAN_TIMEOUT_MS";
pub const ENV_PLANNER: &str = "DESKCLEAN_PLANNER";

impl Settings {
    pub fn load_file(path: &Path) -> Result<FileSettings, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// Layers the three sources; `env` is injected so tests need not touch
    /// the process environment.
    pub fn resolve(file: &FileSettings, env: impl Fn(&str) -> Option<String>, cli: &CliOverrides) -> Result<Self, ConfigError> {
        let bad = |name: &str, value: String| ConfigError::BadValue {
            name: name.to_string(),
            value,
        };
        let env_planner = match env(ENV_PLANNER) {
            Some(v) => Some(PlannerKind::parse(&v).ok_or_else(|| bad(ENV_PLANNER, v))?),
            None => None,
        };
        let env_timeout = match env(ENV_TIMEOUT_MS) {
            Some(v) => Some(v.parse::<u64>().map_err(|_| bad(ENV_TIMEOUT_MS, v))?),
            None => None,
        };
        let fallback = match file.planner.fallback.as_deref() {
            None | Some("scripted") => Fallback::Scripted,
            Some("abort") => Fallback::Abort,
            Some(other) => return Err(bad("planner.fallback", other.to_string())),
        };
        let timeout_ms = cli.timeout_ms.or(env_timeout).or(file.planner.timeout_ms);
        Ok(Self {
            planner: cli.planner.or(env_planner).or(file.planner.kind).unwrap_or(PlannerKind::Scripted),
            endpoint: cli.endpoint.clone().or_else(|| env(ENV_ENDPOINT)).or_else(|| file.planner.endpoint.clone()),
            timeout: timeout_ms.map(Duration::from_millis).unwrap_or(DEFAULT_TIMEOUT),
            fallback,
            jobs: cli.jobs.or(file.bench.jobs).unwrap_or(0),
        })
    }
}
