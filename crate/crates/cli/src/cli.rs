//! Argument parsing and the four subcommands.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use keenjump_core::config::{apply_document, apply_setting, check};
use keenjump_core::montecarlo::CrisisCriterion;
use keenjump_core::{default_params, simulate_path_with, ModelParams, SimConfig, Status};

use crate::output::{fmt_num, write_heatmap, write_jumps, write_sweep, write_trajectory, Header};
use crate::parallel::{self, thread_pool, worker_count};
use crate::validation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("validation failed")]
    ChecksFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Invalid(_) | CliError::ChecksFailed => EXIT_INVALID,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "keenjump", version, about = "Simulate a Keen debt economy coupled to a jump-diffusion asset market")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one path and write its trajectory and jump log.
    Simulate(SimulateArgs),
    /// Crisis probability along one parameter axis.
    Sweep(SweepArgs),
    /// Crisis probability over a grid of two parameters.
    Heatmap(HeatmapArgs),
    /// Compare analytic stationary moments with simulation.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one key; applied left to right after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Trajectory CSV.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Jump log CSV; defaults to the trajectory path with a `.jumps.csv` suffix.
    #[arg(long, value_name = "FILE")]
    pub jumps: Option<PathBuf>,
    /// Run index of the random stream.
    #[arg(long, default_value_t = 0)]
    pub run: u64,
    /// Keep simulating after a crisis.
    #[arg(long)]
    pub no_stop: bool,
    /// Crisis horizon in years.
    #[arg(long, default_value_t = 150.0)]
    pub horizon: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Axis as name:start:stop:count, with an optional :log suffix.
    #[arg(long)]
    pub axis: AxisSpec,
    /// Runs per point.
    #[arg(long, default_value_t = 500)]
    pub runs: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Crisis horizon in years.
    #[arg(long, default_value_t = 150.0)]
    pub horizon: f64,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Two axes, the first one varying slowest.
    #[arg(long, num_args = 1, required = true)]
    pub axis: Vec<AxisSpec>,
    /// Runs per grid cell.
    #[arg(long, default_value_t = 300)]
    pub runs: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Crisis horizon in years.
    #[arg(long, default_value_t = 150.0)]
    pub horizon: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Jump-free paths; the constant-flow checks run runs * horizon years.
    #[arg(long, default_value_t = 200)]
    pub runs: u64,
    /// Years per jump-free path.
    #[arg(long, default_value_t = 200.0)]
    pub horizon: f64,
    /// Years discarded at the start of every path.
    #[arg(long, default_value_t = 20.0)]
    pub burn_in: f64,
    /// Also write the table as CSV.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Parameter axis `name:start:stop:count[:log]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl AxisSpec {
    /// Evenly spaced values including both ends; geometric spacing for log
    /// axes.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.stop
                } else if self.log {
                    (self.start.ln() + (self.stop.ln() - self.start.ln()) * k as f64 / last).exp()
                } else {
                    self.start + (self.stop - self.start) * k as f64 / last
                }
            })
            .collect()
    }
}

impl FromStr for AxisSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let log = match parts.len() {
            4 => false,
            5 if parts[4] == "log" => true,
            _ => return Err(format!("expected name:start:stop:count[:log], got '{s}'")),
        };
        let name = parts[0].trim();
        if ModelParams::range_of(name).is_none() {
            return Err(format!("unknown parameter '{name}'"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number '{t}' in '{s}'"));
        let (start, stop) = (num(parts[1])?, num(parts[2])?);
        if !(start.is_finite() && stop.is_finite()) {
            return Err(format!("axis ends must be finite in '{s}'"));
        }
        let count: usize = parts[3]
            .trim()
            .parse()
            .ok()
            .filter(|&c| c >= 1)
            .ok_or_else(|| format!("count must be a positive integer in '{s}'"))?;
        if log && !(start > 0.0 && stop > 0.0) {
            return Err(format!("log axis needs positive ends in '{s}'"));
        }
        Ok(AxisSpec {
            name: name.to_string(),
            start,
            stop,
            count,
            log,
        })
    }
}

/// Defaults, then the config file, then `--set` overrides in order.
pub fn resolve(args: &ConfigArgs) -> Result<(ModelParams, SimConfig), CliError> {
    let mut p = default_params();
    let mut cfg = SimConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        apply_document(&text, &mut p, &mut cfg)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    for item in &args.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{item}'")))?;
        apply_setting(&mut p, &mut cfg, k.trim(), v).map_err(|e| CliError::Usage(format!("--set {item}: {e}")))?;
    }
    check(&p, &cfg).map_err(|inv| CliError::Invalid(format!("invalid configuration: {inv}")))?;
    Ok((p, cfg))
}

fn criterion(horizon: f64) -> Result<CrisisCriterion, CliError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(CliError::Usage(format!("--horizon must be positive, got {horizon}")));
    }
    Ok(CrisisCriterion {
        horizon,
        ..CrisisCriterion::default()
    })
}

fn positive_runs(runs: u64) -> Result<u64, CliError> {
    if runs == 0 {
        Err(CliError::Usage("--runs must be at least 1".into()))
    } else {
        Ok(runs)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), CliError> {
    let mut w = create(path)?;
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes to `path`, or to standard output without one.
fn emit(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, |w| body(w)),
        None => {
            let mut out = io::stdout().lock();
            body(&mut out).and_then(|_| out.flush()).map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn criterion_notes(h: Header, c: &CrisisCriterion) -> Header {
    h.note("e_floor", fmt_num(c.e_floor))
        .note("debt_ceiling", fmt_num(c.debt_ceiling))
        .note("horizon", fmt_num(c.horizon))
        .note("count_blowup_as_crisis", c.count_blowup_as_crisis)
}

fn default_jumps_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.jumps.csv"))
}

fn status_text(s: &Status) -> String {
    match s {
        Status::Completed => "completed".into(),
        Status::Crisis { reason, t } => format!("crisis {reason} at t = {}", fmt_num(*t)),
        Status::BlowUp { t, cause } => format!("blowup ({cause}) at t = {}", fmt_num(*t)),
    }
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let (p, cfg) = resolve(&a.config)?;
    let c = criterion(a.horizon)?;
    let stop = (!a.no_stop).then_some(&c);
    let traj = simulate_path_with(&cfg, &p, a.run, stop).map_err(|e| CliError::Invalid(e.to_string()))?;
    let header = criterion_notes(
        Header::new("simulate", &p, &cfg)
            .note("run_index", a.run)
            .note("stop_on_crisis", !a.no_stop),
        &c,
    )
    .note("status", status_text(&traj.status));
    write_file(&a.out, |w| write_trajectory(w, &header, &traj))?;
    let jumps = a.jumps.clone().unwrap_or_else(|| default_jumps_path(&a.out));
    write_file(&jumps, |w| write_jumps(w, &header, &traj))?;
    eprintln!(
        "{} samples, {} jumps, {}",
        traj.samples.len(),
        traj.jumps.len(),
        status_text(&traj.status)
    );
    Ok(())
}

fn sweep(a: &SweepArgs, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let (p, cfg) = resolve(&a.config)?;
    let c = criterion(a.horizon)?;
    let runs = positive_runs(a.runs)?;
    let values = a.axis.values();
    let results = pool.install(|| parallel::sweep_1d(&a.axis.name, &values, &p, &cfg, &c, runs));
    for (v, r) in values.iter().zip(&results) {
        match r {
            Ok(m) => eprintln!("{} = {}: p_hat = {}", a.axis.name, fmt_num(*v), fmt_num(m.p_hat)),
            Err(e) => eprintln!("{} = {}: {e}", a.axis.name, fmt_num(*v)),
        }
    }
    let header = criterion_notes(
        Header::new("sweep", &p, &cfg).note("axis", axis_text(&a.axis)).note("runs", runs),
        &c,
    );
    emit(a.out.as_deref(), |w| write_sweep(w, &header, &a.axis.name, &values, &results))
}

fn axis_text(a: &AxisSpec) -> String {
    format!(
        "{}:{}:{}:{}{}",
        a.name,
        fmt_num(a.start),
        fmt_num(a.stop),
        a.count,
        if a.log { ":log" } else { "" }
    )
}

fn heatmap(a: &HeatmapArgs, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let [ax1, ax2] = a.axis.as_slice() else {
        return Err(CliError::Usage(format!("heatmap needs exactly two --axis, got {}", a.axis.len())));
    };
    let (p, cfg) = resolve(&a.config)?;
    let c = criterion(a.horizon)?;
    let runs = positive_runs(a.runs)?;
    let (v1, v2) = (ax1.values(), ax2.values());
    let results = pool.install(|| parallel::sweep_2d(&ax1.name, &v1, &ax2.name, &v2, &p, &cfg, &c, runs));
    let header = criterion_notes(
        Header::new("heatmap", &p, &cfg)
            .note("axis", axis_text(ax1))
            .note("axis", axis_text(ax2))
            .note("runs", runs),
        &c,
    );
    emit(a.out.as_deref(), |w| {
        write_heatmap(w, &header, (&ax1.name, &v1), (&ax2.name, &v2), &results)
    })
}

fn validate(a: &ValidateArgs, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let (p, cfg) = resolve(&a.config)?;
    if a.runs < 2 {
        return Err(CliError::Usage("--runs must be at least 2 for validate".into()));
    }
    if !(a.horizon > a.burn_in && a.burn_in >= 0.0) {
        return Err(CliError::Usage("need 0 <= --burn-in < --horizon".into()));
    }
    let settings = validation::Settings {
        runs: a.runs,
        horizon: a.horizon,
        burn_in: a.burn_in,
    };
    let rows = pool.install(|| validation::run(&p, &cfg, &settings));
    validation::print_table(io::stdout().lock(), &rows).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })?;
    if let Some(out) = &a.out {
        let header = Header::new("validate", &p, &cfg)
            .note("runs", a.runs)
            .note("horizon", fmt_num(a.horizon))
            .note("burn_in", fmt_num(a.burn_in));
        write_file(out, |w| validation::write_csv(w, &header, &rows))?;
    }
    if validation::all_pass(&rows) {
        Ok(())
    } else {
        Err(CliError::ChecksFailed)
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let workers = worker_count().map_err(CliError::Usage)?;
    let pool = thread_pool(workers);
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a, &pool),
        Command::Heatmap(a) => heatmap(a, &pool),
        Command::Validate(a) => validate(a, &pool),
    }
}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("keenjump: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("run 'keenjump --help' for usage");
            }
            e.exit_code()
        }
    }
}
