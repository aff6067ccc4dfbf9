//! Crisis detection and crisis-probability estimation.
//!
//! Runs are keyed by `run_index`, so any partition of the index range over
//! workers reproduces the sequential result once outcomes are put back in
//! index order.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::integrator::{simulate_path_with, Sample, Status, Trajectory};
use crate::params::{validate, ConfigError, ModelParams, SimConfig, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrisisReason {
    Employment,
    Debt,
    BlowUp,
}

impl CrisisReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            CrisisReason::Employment => "employment",
            CrisisReason::Debt => "debt",
            CrisisReason::BlowUp => "blowup",
        }
    }
}

impl fmt::Display for CrisisReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrisisCriterion {
    pub e_floor: f64,
    /// Threshold on net debt `ell - m`.
    pub debt_ceiling: f64,
    pub horizon: f64,
    pub count_blowup_as_crisis: bool,
}

impl Default for CrisisCriterion {
    fn default() -> Self {
        CrisisCriterion {
            e_floor: 0.05,
            debt_ceiling: 10.0,
            horizon: 150.0,
            count_blowup_as_crisis: true,
        }
    }
}

impl CrisisCriterion {
    /// Reason the sample is in crisis, if it is and lies within the horizon.
    pub fn check_sample(&self, s: &Sample) -> Option<CrisisReason> {
        if s.t > self.horizon * (1.0 + 1e-12) {
            None
        } else if s.econ.e <= self.e_floor {
            Some(CrisisReason::Employment)
        } else if s.econ.net_debt() >= self.debt_ceiling {
            Some(CrisisReason::Debt)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrisisEvent {
    pub reason: CrisisReason,
    pub t: f64,
}

/// First crisis of a recorded trajectory within the horizon.
pub fn detect_crisis(traj: &Trajectory, c: &CrisisCriterion) -> Option<CrisisEvent> {
    for s in &traj.samples {
        if let Some(reason) = c.check_sample(s) {
            return Some(CrisisEvent { reason, t: s.t });
        }
    }
    match traj.status {
        Status::BlowUp { t, .. } if c.count_blowup_as_crisis && t <= c.horizon * (1.0 + 1e-12) => {
            Some(CrisisEvent {
                reason: CrisisReason::BlowUp,
                t,
            })
        }
        _ => None,
    }
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z / denom * libm::sqrt(p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f));
    let lo = if k == 0 { 0.0 } else { libm::fmin(libm::fmax(center - half, 0.0), p) };
    let hi = if k == n { 1.0 } else { libm::fmax(libm::fmin(center + half, 1.0), p) };
    (lo, hi)
}

/// Outcome of a single run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub crisis: Option<CrisisEvent>,
    pub blowup: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub point: ModelParams,
    pub n_runs: u64,
    pub n_crisis: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_blowup: u64,
    /// NaN when no run had a crisis.
    pub mean_crisis_time: f64,
}

impl McResult {
    /// Aggregates outcomes listed in run-index order.
    pub fn from_outcomes(point: ModelParams, outcomes: &[RunOutcome]) -> McResult {
        let n_runs = outcomes.len() as u64;
        let mut n_crisis = 0;
        let mut n_blowup = 0;
        let mut t_sum = 0.0;
        for o in outcomes {
            if let Some(ev) = o.crisis {
                n_crisis += 1;
                t_sum += ev.t;
            }
            n_blowup += o.blowup as u64;
        }
        let (ci_low, ci_high) = wilson_interval(n_crisis, n_runs);
        McResult {
            point,
            n_runs,
            n_crisis,
            p_hat: if n_runs == 0 {
                f64::NAN
            } else {
                n_crisis as f64 / n_runs as f64
            },
            ci_low,
            ci_high,
            n_blowup,
            mean_crisis_time: if n_crisis == 0 {
                f64::NAN
            } else {
                t_sum / n_crisis as f64
            },
        }
    }
}

/// Simulation settings used for crisis runs: the path only needs to reach
/// the horizon.
pub fn crisis_config(cfg: &SimConfig, c: &CrisisCriterion) -> SimConfig {
    SimConfig {
        t_end: libm::fmin(cfg.t_end, c.horizon),
        ..*cfg
    }
}

/// Runs one path and classifies it.
pub fn run_outcome(
    point: &ModelParams,
    cfg: &SimConfig,
    c: &CrisisCriterion,
    run_index: u64,
) -> Result<RunOutcome, ConfigError> {
    let traj = simulate_path_with(&crisis_config(cfg, c), point, run_index, Some(c))?;
    Ok(RunOutcome {
        crisis: detect_crisis(&traj, c),
        blowup: matches!(traj.status, Status::BlowUp { .. }),
    })
}

/// Reason a Monte Carlo point was not evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum PointError {
    InvalidParams(Vec<Violation>),
    Config(ConfigError),
    UnknownField(String),
    NoRuns,
}

impl fmt::Display for PointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointError::InvalidParams(v) => {
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            PointError::Config(e) => write!(f, "{e}"),
            PointError::UnknownField(name) => write!(f, "unknown parameter '{name}'"),
            PointError::NoRuns => f.write_str("at least one run is required"),
        }
    }
}

/// Checks that a point can be simulated.
pub fn check_point(point: &ModelParams, cfg: &SimConfig, n_runs: u64) -> Result<(), PointError> {
    if n_runs == 0 {
        return Err(PointError::NoRuns);
    }
    let v = validate(point);
    if !v.is_empty() {
        return Err(PointError::InvalidParams(v));
    }
    cfg.check().map_err(PointError::Config)
}

/// Sequential crisis-probability estimate over run indices `0..n_runs`.
pub fn estimate(
    point: &ModelParams,
    cfg: &SimConfig,
    c: &CrisisCriterion,
    n_runs: u64,
) -> Result<McResult, PointError> {
    check_point(point, cfg, n_runs)?;
    let mut outcomes = Vec::with_capacity(n_runs as usize);
    for i in 0..n_runs {
        outcomes.push(run_outcome(point, cfg, c, i).map_err(PointError::Config)?);
    }
    Ok(McResult::from_outcomes(*point, &outcomes))
}

/// Copy of `base` with one field replaced.
pub fn with_field(base: &ModelParams, name: &str, value: f64) -> Result<ModelParams, PointError> {
    let mut p = *base;
    p.set(name, value)
        .map_err(|_| PointError::UnknownField(String::from(name)))?;
    Ok(p)
}

/// One estimate per value of `name`, in input order.
pub fn sweep_1d(
    name: &str,
    values: &[f64],
    base: &ModelParams,
    cfg: &SimConfig,
    c: &CrisisCriterion,
    n_runs: u64,
) -> Vec<Result<McResult, PointError>> {
    values
        .iter()
        .map(|&v| with_field(base, name, v).and_then(|p| estimate(&p, cfg, c, n_runs)))
        .collect()
}

/// Row-major grid over `(p1, p2)`: the outer index runs over `p1_values`.
#[allow(clippy::too_many_arguments)]
pub fn sweep_2d(
    p1_name: &str,
    p1_values: &[f64],
    p2_name: &str,
    p2_values: &[f64],
    base: &ModelParams,
    cfg: &SimConfig,
    c: &CrisisCriterion,
    n_runs: u64,
) -> Vec<Result<McResult, PointError>> {
    let mut out = Vec::with_capacity(p1_values.len() * p2_values.len());
    for &v1 in p1_values {
        for &v2 in p2_values {
            out.push(
                with_field(base, p1_name, v1)
                    .and_then(|p| with_field(&p, p2_name, v2))
                    .and_then(|p| estimate(&p, cfg, c, n_runs)),
            );
        }
    }
    out
}
