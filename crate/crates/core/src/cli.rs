//! Command-line front end. Exit status 0 on success, 2 when the configuration
//! or an input file cannot be parsed or validated, 1 for anything that fails
//! while running.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;

use crate::config::SimConfig;
use crate::controllers::{SchemeKind, DEFAULT_DEGRADATION_TARGET, DEFAULT_GAMMA_SWEEP_DB};
use crate::error::{Error, Result};
use crate::optim::{self, brute_force_power_oracle_refined, random_problem, Goal, PowerProblem};
use crate::scenario::Network;
use crate::sim::output::{
    write_cdf_csv, write_comparison_csv, write_moving_csv, write_summary_json, write_sweep_csv, write_ue_csv,
};
use crate::sim::{moving_ue_scenario, run_campaign, run_sweep, MetricsSummary};
use crate::SimRng;

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "remshare", version, about = "Indoor/outdoor downlink spectrum-sharing simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One Monte Carlo campaign: summary JSON, per-UE CSV, per-network CDFs.
    Run(Common),
    /// Γ calibration sweep of a belt scheme against the indoor-off baseline.
    Sweep(SweepArgs),
    /// Several schemes on identical seeds: a CDF per scheme and network plus a comparison table.
    Compare(CompareArgs),
    /// One outdoor UE driving past the building, rates averaged per window.
    Moving(Common),
    /// Cross-check the power solvers against exhaustive search.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Dotted `key=value` applied on top of the file, e.g. `campaign.iterations=20`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Candidate margins in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = DEFAULT_GAMMA_SWEEP_DB)]
    pub gammas: Vec<f64>,
    /// Largest accepted loss of the outdoor 10th percentile, as a fraction.
    #[arg(long, default_value_t = DEFAULT_DEGRADATION_TARGET)]
    pub target: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// Schemes to run, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "off,modified_lsa,cbrs,semi_static,semi_static_area,dynamic")]
    pub schemes: Vec<String>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Problem file as written by the solver dump; random instances when omitted.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Grid points per axis.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// Zoom passes after the full grid.
    #[arg(long, default_value_t = 3)]
    pub rounds: usize,
    /// Accepted relative gap between solver and oracle objectives.
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    /// Writes `oracle.csv` here when given.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure tagged with the exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: Error,
}

impl CliError {
    fn config(error: Error) -> Self {
        Self { code: EXIT_CONFIG, error }
    }
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::Config(_) | Error::Parse(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        };
        Self { code, error }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self { code: EXIT_RUNTIME, error: Error::Io(e) }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("remshare: {}", e.error);
            e.code
        }
    }
}

pub fn execute(cli: &Cli) -> std::result::Result<(), CliError> {
    match &cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Moving(c) => cmd_moving(c),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

/// Every load problem, a missing file included, is a configuration error.
fn load_config(common: &Common) -> std::result::Result<SimConfig, CliError> {
    let cfg = match &common.config {
        Some(path) => SimConfig::from_path(path, &common.overrides),
        None => SimConfig::from_toml_str("", &common.overrides),
    };
    cfg.map_err(CliError::config)
}

fn output_dir(path: &Path) -> std::result::Result<(), CliError> {
    fs::create_dir_all(path)?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> std::result::Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn network_name(n: Network) -> &'static str {
    match n {
        Network::Outdoor => "outdoor",
        Network::Indoor => "indoor",
    }
}

fn write_cdfs(
    dir: &Path,
    prefix: &str,
    config: &SimConfig,
    summary: &MetricsSummary,
) -> std::result::Result<(), CliError> {
    for net in [Network::Outdoor, Network::Indoor] {
        let mut f = create(dir, &format!("{prefix}{}.csv", network_name(net)))?;
        write_cdf_csv(&mut f, config, summary, net)?;
        f.flush()?;
    }
    Ok(())
}

fn print_summary(s: &MetricsSummary) {
    println!(
        "{:<16} outdoor mean {:.3} Mbit/s (±{:.3}) p10 {:.3} | indoor mean {:.3} Mbit/s (±{:.3}) p10 {:.3} | indoor BS power {:.4} mW",
        s.scheme.name(),
        s.outdoor.mean_rate_bps / 1e6,
        s.outdoor.ci95_bps / 1e6,
        s.outdoor.p10_rate_bps / 1e6,
        s.indoor.mean_rate_bps / 1e6,
        s.indoor.ci95_bps / 1e6,
        s.indoor.p10_rate_bps / 1e6,
        s.mean_indoor_power_mw,
    );
}

pub fn cmd_run(common: &Common) -> std::result::Result<(), CliError> {
    let config = load_config(common)?;
    output_dir(&common.out)?;
    let summary = run_campaign(&config)?;
    let mut f = create(&common.out, "summary.json")?;
    write_summary_json(&mut f, &config, &summary)?;
    f.flush()?;
    let mut f = create(&common.out, "ues.csv")?;
    write_ue_csv(&mut f, &config, &summary)?;
    f.flush()?;
    write_cdfs(&common.out, "cdf_", &config, &summary)?;
    print_summary(&summary);
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> std::result::Result<(), CliError> {
    let config = load_config(&args.common)?;
    if !matches!(config.scheme.name, SchemeKind::SemiStatic | SchemeKind::SemiStaticArea) {
        return Err(CliError::config(Error::Config(format!(
            "sweep needs scheme semi_static or semi_static_area, got {}",
            config.scheme.name
        ))));
    }
    if args.gammas.is_empty() {
        return Err(CliError::config(Error::Config("--gammas is empty".into())));
    }
    output_dir(&args.common.out)?;
    let calibration = run_sweep(&config, &args.gammas, args.target)?;
    let mut f = create(&args.common.out, "sweep.csv")?;
    write_sweep_csv(&mut f, &config, &calibration)?;
    f.flush()?;
    for row in &calibration.rows {
        let g = row.gamma_db.map_or_else(|| "off".to_string(), |g| format!("{g}"));
        println!(
            "gamma {g:>5}  p10 {:.3} Mbit/s  degradation {:5.1}%  indoor power {:.4} mW",
            row.stats.outdoor_p10_bps / 1e6,
            100.0 * row.degradation,
            row.stats.mean_indoor_power_mw
        );
    }
    println!(
        "calibrated gamma {} dB{}",
        calibration.margin.gamma_db,
        if calibration.met_target { "" } else { " (target not met)" }
    );
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs) -> std::result::Result<(), CliError> {
    let config = load_config(&args.common)?;
    let schemes = args
        .schemes
        .iter()
        .map(|s| s.trim().parse::<SchemeKind>())
        .collect::<Result<Vec<_>>>()
        .map_err(CliError::config)?;
    if schemes.is_empty() {
        return Err(CliError::config(Error::Config("--schemes is empty".into())));
    }
    output_dir(&args.common.out)?;
    let mut summaries = Vec::with_capacity(schemes.len());
    for kind in schemes {
        let c = config.clone().with_scheme(kind);
        let s = run_campaign(&c)?;
        write_cdfs(&args.common.out, &format!("cdf_{}_", kind.name()), &config, &s)?;
        print_summary(&s);
        summaries.push(s);
    }
    let mut f = create(&args.common.out, "comparison.csv")?;
    write_comparison_csv(&mut f, &config, &summaries)?;
    f.flush()?;
    Ok(())
}

pub fn cmd_moving(common: &Common) -> std::result::Result<(), CliError> {
    let config = load_config(common)?;
    output_dir(&common.out)?;
    let series = moving_ue_scenario(&config)?;
    let mut f = create(&common.out, "moving.csv")?;
    write_moving_csv(&mut f, &config, &series)?;
    f.flush()?;
    println!("{} windows over {:.1} m", series.time_ms.len(), crate::sim::MovingUeSeries::path_length_m(&config));
    Ok(())
}

/// One solver checked against the oracle on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub instance: usize,
    pub goal: Goal,
    pub n_bs: usize,
    pub n_points: usize,
    pub solver_objective: f64,
    pub oracle_objective: f64,
    pub feasible: bool,
}

impl OracleCheck {
    /// Solver shortfall relative to the oracle; negative when the solver is better.
    pub fn relative_gap(&self) -> f64 {
        (self.oracle_objective - self.solver_objective) / self.oracle_objective.abs().max(1e-12)
    }
}

/// Runs every goal on `problem` and compares with the refined grid oracle.
pub fn check_against_oracle(
    problem: &PowerProblem,
    instance: usize,
    grid: usize,
    rounds: usize,
) -> Result<Vec<OracleCheck>> {
    [Goal::SumPower, Goal::MaxMin, Goal::LogSum]
        .into_iter()
        .map(|goal| {
            let p = problem.with_goal(goal);
            let sol = optim::solve(&p)?;
            let oracle = brute_force_power_oracle_refined(&p, grid, rounds)?;
            Ok(OracleCheck {
                instance,
                goal,
                n_bs: p.n_bs(),
                n_points: p.n_points(),
                solver_objective: sol.objective_value,
                oracle_objective: oracle.objective_value,
                feasible: p.is_feasible(&sol.p_tx),
            })
        })
        .collect()
}

pub fn cmd_oracle(args: &OracleArgs) -> std::result::Result<(), CliError> {
    let problems: Vec<PowerProblem> = match &args.problem {
        Some(path) => {
            let f = File::open(path).map_err(|e| CliError::config(Error::Io(e)))?;
            vec![optim::read_problem(BufReader::new(f)).map_err(CliError::config)?]
        }
        None => {
            let mut rng = SimRng::seed_from_u64(args.seed);
            (0..args.instances).map(|_| random_problem(&mut rng, Goal::SumPower)).collect()
        }
    };
    let mut checks = Vec::new();
    for (i, p) in problems.iter().enumerate() {
        checks.extend(check_against_oracle(p, i, args.grid, args.rounds)?);
    }
    if let Some(dir) = &args.out {
        output_dir(dir)?;
        let mut f = create(dir, "oracle.csv")?;
        f.write_all(format!("# seed={}\n", args.seed).as_bytes())?;
        let mut w = csv::Writer::from_writer(&mut f);
        w.write_record([
            "instance",
            "goal",
            "n_bs",
            "n_points",
            "solver_objective",
            "oracle_objective",
            "relative_gap",
            "feasible",
        ])
        .map_err(Error::from)?;
        for c in &checks {
            w.write_record([
                c.instance.to_string(),
                c.goal.name().to_string(),
                c.n_bs.to_string(),
                c.n_points.to_string(),
                c.solver_objective.to_string(),
                c.oracle_objective.to_string(),
                c.relative_gap().to_string(),
                c.feasible.to_string(),
            ])
            .map_err(Error::from)?;
        }
        w.flush()?;
        drop(w);
        f.flush()?;
    }
    let bad: Vec<&OracleCheck> =
        checks.iter().filter(|c| !c.feasible || c.relative_gap().abs() > args.tolerance).collect();
    let worst = checks.iter().map(|c| c.relative_gap().abs()).fold(0.0, f64::max);
    println!(
        "{} checks on {} instances, worst relative gap {worst:.3e}, {} outside tolerance",
        checks.len(),
        problems.len(),
        bad.len()
    );
    for c in &bad {
        println!(
            "  instance {} {}: solver {} oracle {} feasible {}",
            c.instance,
            c.goal.name(),
            c.solver_objective,
            c.oracle_objective,
            c.feasible
        );
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError {
            code: EXIT_RUNTIME,
            error: Error::Invariant(format!("{} solver results disagree with the oracle", bad.len())),
        })
    }
}
