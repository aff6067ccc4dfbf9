//! Analytic stationary quantities against simulation.
//!
//! Each checked row passes when the simulated value lies within four
//! standard errors of the formula. Rows marked `info` report the published
//! skewness and kurtosis expressions, which are not compared.

use std::io::{self, Write};

use rayon::prelude::*;

use keenjump_core::analytics::{
    deterministic_limits, jump_ou_exact_moments, jump_ou_moments, ou_moments,
    premium_lognormal_mean, JumpDirection,
};
use keenjump_core::integrator::constant_flow_trend;
use keenjump_core::stats::{batch_means, sample_moments};
use keenjump_core::{simulate_path_with, ModelParams, SimConfig};

use crate::output::{fmt_num, Header};

/// Flow magnitudes of the two constant-flow harnesses.
pub const DOWN_FLOW: f64 = 0.0566;
pub const UP_FLOW: f64 = 0.15;
pub const TOLERANCE_SE: f64 = 4.0;
const BATCHES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Info,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub formula: f64,
    pub simulated: f64,
    pub std_error: f64,
    pub outcome: Outcome,
}

impl Row {
    fn checked(quantity: &str, formula: f64, simulated: f64, std_error: f64) -> Row {
        let ok = (simulated - formula).abs() <= TOLERANCE_SE * std_error;
        Row {
            quantity: quantity.into(),
            formula,
            simulated,
            std_error,
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
        }
    }

    /// Exact agreement up to a relative tolerance.
    fn exact(quantity: &str, formula: f64, simulated: f64) -> Row {
        let ok = (simulated - formula).abs() <= 1e-9 * formula.abs().max(1e-12);
        Row {
            quantity: quantity.into(),
            formula,
            simulated,
            std_error: 0.0,
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
        }
    }

    fn info(quantity: &str, formula: f64, simulated: f64) -> Row {
        Row {
            quantity: quantity.into(),
            formula,
            simulated,
            std_error: f64::NAN,
            outcome: Outcome::Info,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    /// Paths for the jump-free checks; the constant-flow harnesses run one
    /// path of `runs * horizon` years each.
    pub runs: u64,
    pub horizon: f64,
    pub burn_in: f64,
}

/// Pooled mean and central second moment of per-path samples, with
/// standard errors from the spread of the per-path values.
#[derive(Debug, Clone, Copy)]
pub struct PooledMoments {
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
}

pub fn pooled_moments(paths: &[Vec<f64>]) -> PooledMoments {
    let total: usize = paths.iter().map(Vec::len).sum();
    let mean = paths.iter().flatten().sum::<f64>() / total as f64;
    let path_means: Vec<f64> = paths
        .iter()
        .map(|v| v.iter().sum::<f64>() / v.len() as f64)
        .collect();
    let path_vars: Vec<f64> = paths
        .iter()
        .map(|v| v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64)
        .collect();
    let variance = paths
        .iter()
        .flatten()
        .map(|x| (x - mean) * (x - mean))
        .sum::<f64>()
        / total as f64;
    let se = |v: &[f64]| {
        let m = sample_moments(v);
        (m.variance / v.len() as f64).sqrt()
    };
    PooledMoments {
        mean,
        mean_se: se(&path_means),
        variance,
        variance_se: se(&path_vars),
    }
}

/// Trend indicator and premium after the burn-in of jump-free paths,
/// run indices `0..runs`.
pub fn jump_free_samples(
    p: &ModelParams,
    cfg: &SimConfig,
    runs: u64,
    horizon: f64,
    burn_in: f64,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut q = *p;
    q.lambda_up = 0.0;
    q.lambda_down = 0.0;
    let sim = SimConfig {
        t_end: horizon,
        ..*cfg
    };
    (0..runs)
        .into_par_iter()
        .map(|i| {
            let tr = simulate_path_with(&sim, &q, i, None).expect("checked configuration");
            tr.samples
                .iter()
                .filter(|s| s.t >= burn_in)
                .map(|s| (s.market.mu, s.premium))
                .unzip()
        })
        .collect()
}

/// Constant-flow trend samples after the burn-in, on the recording grid of
/// `cfg`.
pub fn constant_flow_samples(p: &ModelParams, cfg: &SimConfig, f: f64, years: f64, burn_in: f64) -> Vec<f64> {
    let n_steps = ((years + burn_in) / cfg.dt).ceil() as u64;
    let stride = cfg.record_stride as u64;
    let skip = (burn_in / (cfg.dt * stride as f64)).ceil() as usize;
    let run_index = if f > 0.0 { 0 } else { 1 };
    let mu = constant_flow_trend(p, f, p.r_l, cfg.dt, n_steps, stride, cfg.seed, run_index);
    mu[skip.min(mu.len())..].to_vec()
}

fn batch_se_of(xs: &[f64], stat: impl Fn(&[f64]) -> f64) -> f64 {
    let len = xs.len() / BATCHES;
    let per: Vec<f64> = xs[..len * BATCHES].chunks_exact(len).map(&stat).collect();
    (sample_moments(&per).variance / BATCHES as f64).sqrt()
}

fn jump_rows(rows: &mut Vec<Row>, label: &str, dir: JumpDirection, f: f64, mu: &[f64], p: &ModelParams) {
    let published = jump_ou_moments(dir, f, p).expect("positive flow");
    let exact = jump_ou_exact_moments(dir, f, p).expect("positive flow");
    let bm = batch_means(mu, BATCHES);
    let m = sample_moments(mu);
    rows.push(Row::checked(&format!("{label} mean"), published.mean, bm.mean, bm.mean_se));
    rows.push(Row::checked(&format!("{label} variance"), published.variance, bm.variance, bm.variance_se));
    let skew_se = batch_se_of(mu, |b| sample_moments(b).skewness);
    let kurt_se = batch_se_of(mu, |b| sample_moments(b).kurtosis);
    rows.push(Row::checked(&format!("{label} skewness"), exact.skewness, m.skewness, skew_se));
    rows.push(Row::checked(&format!("{label} kurtosis"), exact.kurtosis, m.kurtosis, kurt_se));
    rows.push(Row::info(&format!("{label} skewness (published)"), published.skewness, m.skewness));
    rows.push(Row::info(&format!("{label} kurtosis (published)"), published.kurtosis, m.kurtosis));
}

/// Computes every row. The configuration must already be valid.
pub fn run(p: &ModelParams, cfg: &SimConfig, s: &Settings) -> Vec<Row> {
    let mut rows = Vec::new();

    let ou = ou_moments(p).expect("validated eta_mu");
    let samples = jump_free_samples(p, cfg, s.runs, s.horizon, s.burn_in);
    let (mu, prem): (Vec<Vec<f64>>, Vec<Vec<f64>>) = samples.into_iter().unzip();
    let m = pooled_moments(&mu);
    rows.push(Row::checked("ou mean", ou.mean, m.mean, m.mean_se));
    rows.push(Row::checked("ou variance", ou.variance, m.variance, m.variance_se));
    let pr = pooled_moments(&prem);
    rows.push(Row::checked("premium mean", premium_lognormal_mean(p), pr.mean, pr.mean_se));

    let mut q = *p;
    q.sigma = 0.0;
    q.lambda_up = 0.0;
    q.lambda_down = 0.0;
    let quiet = SimConfig {
        t_end: s.horizon,
        ..*cfg
    };
    let tr = simulate_path_with(&quiet, &q, 0, None).expect("checked configuration");
    let last = tr.samples.last().expect("at least one sample");
    let (growth, rate) = deterministic_limits(&q);
    rows.push(Row::exact("deterministic log-price growth", growth, (last.market.s / cfg.init_s).ln() / last.t));
    rows.push(Row::exact("deterministic lending rate", rate, last.r));

    let years = s.runs as f64 * s.horizon;
    let down = constant_flow_samples(p, cfg, DOWN_FLOW, years, s.burn_in);
    jump_rows(&mut rows, "jump-ou down", JumpDirection::DownPrice, DOWN_FLOW, &down, p);
    let up = constant_flow_samples(p, cfg, -UP_FLOW, years, s.burn_in);
    jump_rows(&mut rows, "jump-ou up", JumpDirection::UpPrice, UP_FLOW, &up, p);
    rows
}

pub fn all_pass(rows: &[Row]) -> bool {
    rows.iter().all(|r| r.outcome != Outcome::Fail)
}

pub fn print_table<W: Write>(mut w: W, rows: &[Row]) -> io::Result<()> {
    let width = rows.iter().map(|r| r.quantity.len()).max().unwrap_or(8).max(8);
    writeln!(w, "{:<width$}  {:>16}  {:>16}  {:>12}  result", "quantity", "formula", "simulated", "std_error")?;
    for r in rows {
        writeln!(
            w,
            "{:<width$}  {:>16}  {:>16}  {:>12}  {}",
            r.quantity,
            fmt_num(r.formula),
            fmt_num(r.simulated),
            fmt_num(r.std_error),
            r.outcome.as_str()
        )?;
    }
    Ok(())
}

pub fn write_csv<W: Write>(mut w: W, header: &Header, rows: &[Row]) -> io::Result<()> {
    header.write_to(&mut w)?;
    writeln!(w, "quantity,formula,simulated,std_error,result")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.quantity,
            fmt_num(r.formula),
            fmt_num(r.simulated),
            fmt_num(r.std_error),
            r.outcome.as_str()
        )?;
    }
    Ok(())
}
