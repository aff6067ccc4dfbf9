//! Explicit pathwise solutions of the market equations for a recorded noise
//! path and a recorded intensity path.
//!
//! On a grid `t_k = k h` the intensities are taken piecewise linear between
//! nodes. `ln S` is then the exact sum of drift, Brownian increments,
//! compensator integrals and log-jumps. `mu` is the exact convolution of the
//! piecewise-linear drift and compensators against `exp(-eta (t - s))`; the
//! Brownian convolution weights each recorded increment at its interval
//! midpoint and each jump by its own kernel value.

use alloc::vec::Vec;
use core::fmt;

use super::{JumpEvent, JumpKind};
use crate::market::{log_drop, log_rise, trend_drift_target, JumpIntensities, MarketState};
use crate::params::ModelParams;

/// Recorded driving noise on a uniform grid of spacing `h`.
#[derive(Debug, Clone, Copy)]
pub struct RecordedNoise<'a> {
    pub h: f64,
    /// Brownian increment of each interval.
    pub dw: &'a [f64],
    /// Jumps with their exact times in `(0, n h]`.
    pub jumps: &'a [JumpEvent],
}

/// Intensities at the grid nodes `0..=n`.
#[derive(Debug, Clone, Copy)]
pub struct IntensityPath<'a> {
    pub lam_up: &'a [f64],
    pub lam_down: &'a [f64],
}

/// `S` and `mu` at the grid nodes `0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketPath {
    pub s: Vec<f64>,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleError {
    LengthMismatch { intervals: usize, nodes: usize },
    Step(f64),
    JumpOutsideGrid(f64),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::LengthMismatch { intervals, nodes } => write!(
                f,
                "{intervals} noise intervals need {} intensity nodes, got {nodes}",
                intervals + 1
            ),
            OracleError::Step(h) => write!(f, "grid spacing must be positive, got {h}"),
            OracleError::JumpOutsideGrid(t) => write!(f, "jump at t = {t} lies outside the grid"),
        }
    }
}

/// `(1 - exp(-x)) / x`, continuous at 0.
fn kernel_mass(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -libm::expm1(-x) / x
    }
}

/// `(1 - exp(-x)(1 + x)) / x^2`, continuous at 0.
fn kernel_moment(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // sum_{n>=2} (-1)^n (n-1) x^(n-2) / n!
        let mut term = 0.5;
        let mut sum = 0.0;
        for n in 2..20 {
            let n = n as f64;
            sum += term;
            term *= -x * n / ((n + 1.0) * (n - 1.0));
        }
        sum
    } else {
        (-libm::expm1(-x) - x * libm::exp(-x)) / (x * x)
    }
}

pub fn closed_form_market(
    init: MarketState,
    noise: &RecordedNoise<'_>,
    lams: &IntensityPath<'_>,
    p: &ModelParams,
) -> Result<MarketPath, OracleError> {
    let n = noise.dw.len();
    if lams.lam_up.len() != n + 1 || lams.lam_down.len() != n + 1 {
        return Err(OracleError::LengthMismatch {
            intervals: n,
            nodes: lams.lam_up.len().min(lams.lam_down.len()),
        });
    }
    let h = noise.h;
    if !(h > 0.0 && h.is_finite()) {
        return Err(OracleError::Step(h));
    }
    let t_end = n as f64 * h;
    for j in noise.jumps {
        if !(j.t > 0.0 && j.t <= t_end * (1.0 + 1e-12)) {
            return Err(OracleError::JumpOutsideGrid(j.t));
        }
    }
    let mut jumps: Vec<JumpEvent> = noise.jumps.to_vec();
    jumps.sort_by(|a, b| a.t.total_cmp(&b.t));

    let (ln_drop, ln_rise) = (log_drop(p), log_rise(p));
    let eta = p.eta_mu;
    let x = eta * h;
    let decay = libm::exp(-x);
    let mid_decay = libm::exp(-0.5 * x);
    let i0 = h * kernel_mass(x);
    let i1_over_h = h * kernel_moment(x);
    let base_drift = p.r_l - 0.5 * p.sigma * p.sigma;

    let target = |k: usize| {
        trend_drift_target(
            &JumpIntensities {
                lam_up: lams.lam_up[k],
                lam_down: lams.lam_down[k],
            },
            p,
        )
    };
    // drift of mu without the log-jump compensators: eta a - ln_drop lam_up - ln_rise lam_down
    let forcing = |k: usize| eta * target(k) - ln_drop * lams.lam_up[k] - ln_rise * lams.lam_down[k];

    let mut s_out = Vec::with_capacity(n + 1);
    let mut mu_out = Vec::with_capacity(n + 1);
    let mut ln_s = libm::log(init.s);
    let mut mu = init.mu;
    s_out.push(init.s);
    mu_out.push(mu);

    let mut next_jump = 0;
    let mut f_left = forcing(0);
    for k in 0..n {
        let t_right = (k + 1) as f64 * h;
        let f_right = forcing(k + 1);
        let int_up = 0.5 * h * (lams.lam_up[k] + lams.lam_up[k + 1]);
        let int_down = 0.5 * h * (lams.lam_down[k] + lams.lam_down[k + 1]);

        ln_s += base_drift * h + p.sigma * noise.dw[k] + p.j_up * int_up - p.j_down * int_down;
        mu = decay * mu + f_right * i0 + (f_left - f_right) * i1_over_h + p.sigma * mid_decay * noise.dw[k];

        let last = k + 1 == n;
        while next_jump < jumps.len() && (jumps[next_jump].t <= t_right || last) {
            let j = &jumps[next_jump];
            let size = match j.kind {
                JumpKind::PriceDown => ln_drop,
                JumpKind::PriceUp => ln_rise,
            };
            ln_s += size;
            mu += size * libm::exp(-eta * libm::fmax(t_right - j.t, 0.0));
            next_jump += 1;
        }

        s_out.push(libm::exp(ln_s));
        mu_out.push(mu);
        f_left = f_right;
    }
    Ok(MarketPath { s: s_out, mu: mu_out })
}
