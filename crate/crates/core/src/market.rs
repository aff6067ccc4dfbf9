//! Asset-market block: jump intensities driven by speculative flow, the
//! predictable log-return drift tracked by the trend indicator, and the
//! lending-rate and premium maps.
//!
//! **Sign convention.** "up" and "down" in this crate follow the *intensity*
//! labels, not the direction of the price move:
//!
//! * `lam_up` is driven by positive speculative flow and fires **price
//!   drops** by the factor `1 - j_up`;
//! * `lam_down` is driven by negative speculative flow and fires **price
//!   rises** by the factor `1 + j_down`.

use crate::params::ModelParams;

/// Asset price and trend indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    pub s: f64,
    pub mu: f64,
}

/// Jump intensities per year. At most one of them is positive.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JumpIntensities {
    /// Intensity of price drops, `lambda_up * max(f, 0)`.
    pub lam_up: f64,
    /// Intensity of price rises, `lambda_down * max(-f, 0)`.
    pub lam_down: f64,
}

#[inline]
pub fn jump_intensities(f: f64, p: &ModelParams) -> JumpIntensities {
    JumpIntensities {
        lam_up: p.lambda_up * libm::fmax(f, 0.0),
        lam_down: p.lambda_down * libm::fmax(-f, 0.0),
    }
}

/// Log-size of a price-drop jump, `ln(1 - j_up) < 0`.
#[inline]
pub fn log_drop(p: &ModelParams) -> f64 {
    libm::log1p(-p.j_up)
}

/// Log-size of a price-rise jump, `ln(1 + j_down) > 0`.
#[inline]
pub fn log_rise(p: &ModelParams) -> f64 {
    libm::log1p(p.j_down)
}

/// Predictable drift of log-returns; the level the trend indicator reverts to.
#[inline]
pub fn trend_drift_target(lams: &JumpIntensities, p: &ModelParams) -> f64 {
    p.r_l - 0.5 * p.sigma * p.sigma
        + (log_drop(p) + p.j_up) * lams.lam_up
        + (log_rise(p) - p.j_down) * lams.lam_down
}

/// Drift of `ln S` once the jump compensators are folded back in. Equal to
/// [`trend_drift_target`]; kept separate to name the role at call sites.
#[inline]
pub fn log_price_increment_drift(lams: &JumpIntensities, p: &ModelParams) -> f64 {
    trend_drift_target(lams, p)
}

/// Drift of `ln S` *without* compensation of the log-jumps, i.e. the drift
/// to pair with raw jump counts.
#[inline]
pub fn log_price_raw_drift(lams: &JumpIntensities, p: &ModelParams) -> f64 {
    p.r_l - 0.5 * p.sigma * p.sigma + p.j_up * lams.lam_up - p.j_down * lams.lam_down
}

/// Spread over `r_l` charged by banks. Zero when `rho_1 = 0`.
#[inline]
pub fn premium(mu: f64, p: &ModelParams) -> f64 {
    if p.rho_1 == 0.0 {
        return 0.0;
    }
    p.rho_1 * libm::exp(-p.rho_2 * (mu - p.r_l))
}

/// Effective lending rate, capped at `r_max`.
#[inline]
pub fn lending_rate(mu: f64, p: &ModelParams) -> f64 {
    libm::fmin(p.r_max, p.r_l + premium(mu, p))
}
