//! Command-line front end. Exit status: 0 ok, 1 plan violations, 2 runtime
//! or usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::harness::{
    benchmark_scenario, generate_scenario, run_benchmark, run_episode, scenario_seed, to_csv, to_markdown,
    BenchMatrix, CliOverrides, FileSettings, PlannerKind, RunConfig, ScenarioFile, ScenarioParams, Settings,
    DEFAULT_SCENARIO_COUNT,
};
use crate::plan::{parse_plan, SCHEMA_REFERENCE};
use crate::planner::{HttpPlanClient, HttpPlanner, Planner, ScriptedPlanner};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "deskclean", version, about = "Desk-cleaning simulator and benchmark")]
struct Cli {
    /// TOML settings file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write benchmark scenario files as JSON.
    Gen(GenArgs),
    /// Run one episode and print its result.
    Run(RunArgs),
    /// Run a configuration matrix and write the reports.
    Bench(BenchArgs),
    /// Check a plan document against the schema.
    Validate(ValidateArgs),
    /// Print the plan schema reference.
    Schema,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value = "scenarios")]
    out_dir: PathBuf,
    /// Number of scenarios, ids starting at 0.
    #[arg(long, default_value_t = DEFAULT_SCENARIO_COUNT)]
    count: u32,
    /// Layout seed; defaults to the benchmark seed of each id.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Profile {
    /// Injected failures and perception noise.
    Benchmark,
    /// No injection, exact perception.
    Clean,
}

#[derive(Debug, Args)]
struct PlannerArgs {
    #[arg(long, value_enum)]
    planner: Option<PlannerArg>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    timeout_ms: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlannerArg {
    Scripted,
    Http,
}

impl From<PlannerArg> for PlannerKind {
    fn from(p: PlannerArg) -> Self {
        match p {
            PlannerArg::Scripted => PlannerKind::Scripted,
            PlannerArg::Http => PlannerKind::Http,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Benchmark scenario id or path to a scenario JSON file.
    #[arg(long)]
    scenario: String,
    /// Episode seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    arms: u8,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    reflective: bool,
    #[arg(long, value_enum, default_value = "benchmark")]
    profile: Profile,
    /// Write the event trace here.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[command(flatten)]
    planner: PlannerArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "default")]
    matrix: MatrixArg,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_md: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MatrixArg {
    /// reflective+dual, static+dual and reflective+single under injection.
    Default,
    /// Scripted dual-arm runs without injection or noise.
    Clean,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    file: PathBuf,
}

fn env_var(name: &str) -> Option<String> {
    std::env::var(name).ok()
}

fn settings(config: Option<&Path>, cli: &CliOverrides) -> anyhow::Result<Settings> {
    let file = match config {
        Some(p) => Settings::load_file(p)?,
        None => FileSettings::default(),
    };
    Ok(Settings::resolve(&file, env_var, cli)?)
}

fn load_scenario(arg: &str) -> anyhow::Result<ScenarioFile> {
    if let Ok(id) = arg.parse::<u32>() {
        return Ok(benchmark_scenario(id)?);
    }
    let text = std::fs::read_to_string(arg).with_context(|| format!("reading scenario {arg}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing scenario {arg}"))
}

fn make_planner(s: &Settings) -> anyhow::Result<Box<dyn Planner>> {
    Ok(match s.planner {
        PlannerKind::Scripted => Box::new(ScriptedPlanner::default()),
        PlannerKind::Http => {
            let Some(endpoint) = s.endpoint.clone() else {
                bail!("the http planner needs an endpoint (--endpoint or DESKCLEAN_ENDPOINT)");
            };
            Box::new(HttpPlanner::new(HttpPlanClient::new(endpoint, s.timeout), s.fallback))
        }
    })
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for id in 0..a.count {
        let seed = a.seed.map_or(scenario_seed(id), |s| s.wrapping_add(id as u64));
        let sc = generate_scenario(id, seed, &ScenarioParams::default())?;
        let path = a.out_dir.join(format!("scenario_{id:02}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&sc)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        writeln!(out, "{}", path.display())?;
    }
    Ok(EXIT_OK)
}

fn cmd_run(a: &RunArgs, config: Option<&Path>, out: &mut dyn Write) -> anyhow::Result<i32> {
    let s = settings(
        config,
        &CliOverrides {
            planner: a.planner.planner.map(Into::into),
            endpoint: a.planner.endpoint.clone(),
            timeout_ms: a.planner.timeout_ms,
            jobs: None,
        },
    )?;
    let scenario = load_scenario(&a.scenario)?;
    let arms = a.arms as usize;
    let label = format!("{}+{}", if a.reflective { "reflective" } else { "static" }, if arms == 2 { "dual" } else { "single" });
    let mut cfg = match a.profile {
        Profile::Benchmark => RunConfig::benchmark(label, a.reflective, arms),
        Profile::Clean => {
            let mut c = RunConfig::failure_free(label, arms);
            c.reflective = a.reflective;
            c
        }
    };
    cfg.planner = s.planner;
    let mut planner = make_planner(&s)?;
    let run = run_episode(&scenario, a.seed, &cfg, planner.as_mut());
    if let Some(p) = &a.trace_out {
        std::fs::write(p, run.trace.to_text()).with_context(|| format!("writing {}", p.display()))?;
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&run.result)?)?;
    Ok(EXIT_OK)
}

fn cmd_bench(a: &BenchArgs, config: Option<&Path>, out: &mut dyn Write) -> anyhow::Result<i32> {
    let s = settings(
        config,
        &CliOverrides {
            jobs: a.jobs,
            ..CliOverrides::default()
        },
    )?;
    if s.planner != PlannerKind::Scripted {
        bail!("bench runs the scripted planner only");
    }
    let mut matrix = BenchMatrix::default_matrix();
    if let MatrixArg::Clean = a.matrix {
        matrix.configs = vec![RunConfig::failure_free("scripted+dual", 2)];
    }
    let report = run_benchmark(&matrix, s.jobs)?;
    let md = to_markdown(&report);
    if let Some(p) = &a.out_csv {
        std::fs::write(p, to_csv(&report)?).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &a.out_md {
        std::fs::write(p, &md).with_context(|| format!("writing {}", p.display()))?;
    }
    write!(out, "{md}")?;
    Ok(EXIT_OK)
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let text = std::fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    match parse_plan(&text) {
        Ok(plan) => {
            writeln!(out, "OK: plan {} with {} steps", plan.plan_id, plan.steps.len())?;
            Ok(EXIT_OK)
        }
        Err(errors) => {
            writeln!(out, "{} violation(s):", errors.0.len())?;
            write!(out, "{errors}")?;
            Ok(EXIT_VIOLATION)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let config = cli.config.as_deref();
    let r = match &cli.command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Run(a) => cmd_run(a, config, out),
        Command::Bench(a) => cmd_bench(a, config, out),
        Command::Validate(a) => cmd_validate(a, out),
        Command::Schema => writeln!(out, "{SCHEMA_REFERENCE}").map(|_| EXIT_OK).map_err(Into::into),
    };
    r.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e:#}");
        EXIT_ERROR
    })
}
