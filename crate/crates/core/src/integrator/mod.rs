//! Fixed-step simulation of the coupled economy and market.
//!
//! Each step evaluates the lending rate, the speculative flow and the jump
//! intensities at the left endpoint, advances the real economy with one
//! Runge-Kutta-4 step at that frozen rate, and advances `(ln S, mu)` with an
//! Euler step driven by a single Gaussian shared by both. Jumps are sampled
//! per type as Bernoulli events with probability `1 - exp(-lambda dt)` and act
//! multiplicatively on `S` and additively (by the log-jump) on `mu`.

mod closed_form;

use alloc::vec::Vec;
use core::fmt;

pub use closed_form::{closed_form_market, IntensityPath, MarketPath, OracleError, RecordedNoise};

use crate::econ::{self, apriori_bounds, EconDerived, EconError, EconState};
use crate::market::{
    jump_intensities, lending_rate, log_drop, log_price_raw_drift, log_rise, premium,
    trend_drift_target, JumpIntensities, MarketState,
};
use crate::montecarlo::{CrisisCriterion, CrisisReason};
use crate::params::{ConfigError, ModelParams, SimConfig};
use crate::rng::RngStream;

/// Direction of the price move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    /// Drop by `1 - j_up`, fired by positive speculative flow.
    PriceDown,
    /// Rise by `1 + j_down`, fired by negative speculative flow.
    PriceUp,
}

impl JumpKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            JumpKind::PriceDown => "down",
            JumpKind::PriceUp => "up",
        }
    }

    pub fn factor(&self, p: &ModelParams) -> f64 {
        match self {
            JumpKind::PriceDown => 1.0 - p.j_up,
            JumpKind::PriceUp => 1.0 + p.j_down,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    pub kind: JumpKind,
    pub factor: f64,
}

/// Noise consumed by one step: the Brownian increment and the number of jumps
/// of each kind.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepNoise {
    pub dw: f64,
    pub n_down: u32,
    pub n_up: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub econ: EconState,
    pub market: MarketState,
    /// Lending rate used during the step.
    pub r: f64,
    /// Derived economy at the start of the step.
    pub derived: EconDerived,
    pub lams: JumpIntensities,
    pub noise: StepNoise,
}

impl StepOutcome {
    /// Jump events of this step, stamped with the step's end time.
    pub fn jump_events(&self, t_end: f64, p: &ModelParams) -> impl Iterator<Item = JumpEvent> {
        let down = JumpEvent {
            t: t_end,
            kind: JumpKind::PriceDown,
            factor: JumpKind::PriceDown.factor(p),
        };
        let up = JumpEvent {
            t: t_end,
            kind: JumpKind::PriceUp,
            factor: JumpKind::PriceUp.factor(p),
        };
        core::iter::repeat_n(down, self.noise.n_down as usize)
            .chain(core::iter::repeat_n(up, self.noise.n_up as usize))
    }
}

/// A step produced a non-finite or non-positive quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlowUp {
    Econ(EconError),
    Market(&'static str),
    Debt,
}

impl fmt::Display for BlowUp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlowUp::Econ(e) => write!(f, "economy: {e}"),
            BlowUp::Market(what) => write!(f, "market: {what}"),
            BlowUp::Debt => f.write_str("debt beyond ten times the a-priori cap"),
        }
    }
}

impl From<EconError> for BlowUp {
    fn from(e: EconError) -> Self {
        BlowUp::Econ(e)
    }
}

/// Advances `(S, mu)` over one step with the intensities frozen.
#[inline]
pub fn advance_market(
    mkt: &MarketState,
    lams: &JumpIntensities,
    dt: f64,
    noise: &StepNoise,
    p: &ModelParams,
) -> MarketState {
    let (ln_drop, ln_rise) = (log_drop(p), log_rise(p));
    let target = trend_drift_target(lams, p);
    let n_down = noise.n_down as f64;
    let n_up = noise.n_up as f64;
    let shock = p.sigma * noise.dw;
    let d_ln_s = log_price_raw_drift(lams, p) * dt + shock + n_down * ln_drop + n_up * ln_rise;
    let mu = mkt.mu
        + p.eta_mu * (target - mkt.mu) * dt
        + shock
        + ln_drop * (n_down - lams.lam_up * dt)
        + ln_rise * (n_up - lams.lam_down * dt);
    MarketState {
        s: mkt.s * libm::exp(d_ln_s),
        mu,
    }
}

/// One step driven by externally supplied noise.
pub fn step_with_noise(
    s: &EconState,
    mkt: &MarketState,
    dt: f64,
    noise: StepNoise,
    p: &ModelParams,
) -> Result<StepOutcome, BlowUp> {
    let r = lending_rate(mkt.mu, p);
    let (econ, derived) = econ::rk4_step(s, r, dt, p)?;
    let lams = jump_intensities(derived.f, p);
    let market = advance_market(mkt, &lams, dt, &noise, p);
    check_market(&market)?;
    Ok(StepOutcome {
        econ,
        market,
        r,
        derived,
        lams,
        noise,
    })
}

/// One step with noise drawn from `rng`, which must already be positioned at
/// this step.
#[inline]
pub fn step(
    s: &EconState,
    mkt: &MarketState,
    dt: f64,
    rng: &mut RngStream,
    p: &ModelParams,
) -> Result<StepOutcome, BlowUp> {
    let r = lending_rate(mkt.mu, p);
    let (econ, derived) = econ::rk4_step(s, r, dt, p)?;
    let lams = jump_intensities(derived.f, p);
    let noise = draw_noise(rng, &lams, dt);
    let market = advance_market(mkt, &lams, dt, &noise, p);
    check_market(&market)?;
    Ok(StepOutcome {
        econ,
        market,
        r,
        derived,
        lams,
        noise,
    })
}

/// Gaussian increment and per-type Bernoulli jump indicators for one step.
#[inline]
pub fn draw_noise(rng: &mut RngStream, lams: &JumpIntensities, dt: f64) -> StepNoise {
    let z = rng.draw_gaussian();
    let u_down = rng.draw_uniform();
    let u_up = rng.draw_uniform();
    StepNoise {
        dw: libm::sqrt(dt) * z,
        n_down: (u_down < -libm::expm1(-lams.lam_up * dt)) as u32,
        n_up: (u_up < -libm::expm1(-lams.lam_down * dt)) as u32,
    }
}

#[inline]
fn check_market(m: &MarketState) -> Result<(), BlowUp> {
    if !(m.s.is_finite() && m.s > 0.0) {
        return Err(BlowUp::Market("s"));
    }
    if !m.mu.is_finite() {
        return Err(BlowUp::Market("mu"));
    }
    Ok(())
}

/// One recorded point of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub econ: EconState,
    pub market: MarketState,
    pub pi: f64,
    pub f: f64,
    pub r: f64,
    pub premium: f64,
    /// `exp(-r_l t) S`.
    pub s_disc: f64,
}

impl Sample {
    pub fn at(t: f64, econ: EconState, market: MarketState, p: &ModelParams) -> Sample {
        let r = lending_rate(market.mu, p);
        let d = econ::derived(&econ, r, p);
        Sample {
            t,
            econ,
            market,
            pi: d.pi,
            f: d.f,
            r,
            premium: premium(market.mu, p),
            s_disc: market.s * libm::exp(-p.r_l * t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Status {
    Completed,
    Crisis { reason: CrisisReason, t: f64 },
    BlowUp { t: f64, cause: BlowUp },
}

/// Recorded path: samples on the stride grid, every jump, and how it ended.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub jumps: Vec<JumpEvent>,
    pub status: Status,
}

/// Simulates one path, stopping at the first crisis under the default
/// criterion.
pub fn simulate_path(
    cfg: &SimConfig,
    p: &ModelParams,
    run_index: u64,
) -> Result<Trajectory, ConfigError> {
    simulate_path_with(cfg, p, run_index, Some(&CrisisCriterion::default()))
}

/// Simulates one path. With `stop = Some(c)` the path ends at the first
/// recorded sample (at or before `c.horizon`) that meets the crisis
/// criterion; with `None` it runs to `t_end` unless it blows up.
pub fn simulate_path_with(
    cfg: &SimConfig,
    p: &ModelParams,
    run_index: u64,
    stop: Option<&CrisisCriterion>,
) -> Result<Trajectory, ConfigError> {
    cfg.check()?;
    let n_steps = cfg.n_steps();
    let stride = cfg.record_stride as u64;
    let bounds = apriori_bounds(&cfg.init_econ, cfg.t_end, p, p.r_max);
    let debt_limit = bounds.debt_cap.scale(10.0).to_f64();

    let mut econ = cfg.init_econ;
    let mut market = cfg.initial_market(p);
    let mut rng = RngStream::new(cfg.seed, run_index);
    let mut samples = Vec::with_capacity((n_steps / stride + 2) as usize);
    let mut jumps = Vec::new();

    let first = Sample::at(0.0, econ, market, p);
    if let Some(reason) = stop.and_then(|c| c.check_sample(&first)) {
        samples.push(first);
        return Ok(Trajectory {
            samples,
            jumps,
            status: Status::Crisis { reason, t: 0.0 },
        });
    }
    samples.push(first);

    for n in 0..n_steps {
        let t_next = (n + 1) as f64 * cfg.dt;
        rng.seek_step(n);
        let out = match step(&econ, &market, cfg.dt, &mut rng, p) {
            Ok(out) => out,
            Err(cause) => {
                return Ok(Trajectory {
                    samples,
                    jumps,
                    status: Status::BlowUp { t: t_next, cause },
                })
            }
        };
        econ = out.econ;
        market = out.market;
        if out.noise.n_down + out.noise.n_up > 0 {
            jumps.extend(out.jump_events(t_next, p));
        }
        if libm::fabs(econ.m) + libm::fabs(econ.ell) > debt_limit {
            return Ok(Trajectory {
                samples,
                jumps,
                status: Status::BlowUp {
                    t: t_next,
                    cause: BlowUp::Debt,
                },
            });
        }
        if (n + 1) % stride == 0 || n + 1 == n_steps {
            let sample = Sample::at(t_next, econ, market, p);
            let fired = stop.and_then(|c| c.check_sample(&sample));
            samples.push(sample);
            if let Some(reason) = fired {
                return Ok(Trajectory {
                    samples,
                    jumps,
                    status: Status::Crisis { reason, t: t_next },
                });
            }
        }
    }
    Ok(Trajectory {
        samples,
        jumps,
        status: Status::Completed,
    })
}

/// Trend indicator driven by a constant speculative flow `f`, with the
/// economy switched off. Returns `mu` every `stride` steps, starting with the
/// initial value. Positive `f` activates price drops, negative `f` price
/// rises.
#[allow(clippy::too_many_arguments)]
pub fn constant_flow_trend(
    p: &ModelParams,
    f: f64,
    mu0: f64,
    dt: f64,
    n_steps: u64,
    stride: u64,
    seed: u64,
    run_index: u64,
) -> Vec<f64> {
    let lams = jump_intensities(f, p);
    let mut rng = RngStream::new(seed, run_index);
    let mut market = MarketState { s: 1.0, mu: mu0 };
    let mut out = Vec::with_capacity((n_steps / stride.max(1)) as usize + 1);
    out.push(market.mu);
    for n in 0..n_steps {
        rng.seek_step(n);
        let noise = draw_noise(&mut rng, &lams, dt);
        market = advance_market(&market, &lams, dt, &noise, p);
        // the price is irrelevant here; keep it from under- or overflowing
        market.s = 1.0;
        if (n + 1) % stride.max(1) == 0 {
            out.push(market.mu);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::default_params;

    fn quiet_params() -> ModelParams {
        let mut p = default_params();
        p.sigma = 0.0;
        p.lambda_up = 0.0;
        p.lambda_down = 0.0;
        p.rho_1 = 0.0;
        p
    }

    fn start() -> (EconState, MarketState) {
        (
            EconState {
                omega: 0.75,
                e: 0.9,
                m: 0.2,
                ell: 0.5,
            },
            MarketState { s: 1.0, mu: 0.02 },
        )
    }

    #[test]
    fn deterministic_limit_is_rk4_and_exponential_growth() {
        let p = quiet_params();
        let (s, m) = start();
        let dt = 0.01;
        let mut rng = RngStream::new(3, 0);
        rng.seek_step(0);
        let out = step(&s, &m, dt, &mut rng, &p).unwrap();
        let (rk, _) = econ::rk4_step(&s, p.r_l, dt, &p).unwrap();
        assert_eq!(out.econ, rk);
        assert_eq!(out.market.s, libm::exp(p.r_l * dt));
        assert_eq!(out.noise.n_down + out.noise.n_up, 0);
        // mu relaxes toward r_l; started at r_l it stays there
        assert!((out.market.mu - p.r_l).abs() < 1e-17);
    }

    #[test]
    fn forced_drop_scales_price_and_shifts_trend() {
        let p = quiet_params();
        let (s, m) = start();
        let noise = StepNoise {
            dw: 0.0,
            n_down: 1,
            n_up: 0,
        };
        let out = step_with_noise(&s, &m, 1e-3, noise, &p).unwrap();
        let expected_s = 0.9 * libm::exp(p.r_l * 1e-3);
        assert!((out.market.s - expected_s).abs() < 1e-15);
        assert!((out.market.mu - (m.mu + libm::log(0.9))).abs() < 1e-15);
        assert!((libm::log(0.9) + 0.105_36).abs() < 1e-5);
        let ev: Vec<_> = out.jump_events(1e-3, &p).collect();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, JumpKind::PriceDown);
        assert!((ev[0].factor - 0.9).abs() < 1e-15);
    }

    #[test]
    fn shared_gaussian_drives_price_and_trend() {
        // reconstruct the Brownian increment from both updates
        let mut p = default_params();
        p.lambda_up = 0.0;
        p.lambda_down = 0.0;
        let (s, m) = start();
        let dt = 0.005;
        let mut rng = RngStream::new(11, 4);
        for n in 0..200 {
            rng.seek_step(n);
            let out = step(&s, &m, dt, &mut rng, &p).unwrap();
            let lams = out.lams;
            let from_price = (libm::log(out.market.s / m.s) - log_price_raw_drift(&lams, &p) * dt) / p.sigma;
            let from_trend =
                (out.market.mu - m.mu - p.eta_mu * (trend_drift_target(&lams, &p) - m.mu) * dt) / p.sigma;
            assert!((from_price - out.noise.dw).abs() < 1e-12);
            assert!((from_trend - out.noise.dw).abs() < 1e-12);
        }
    }

    #[test]
    fn jump_probability_respects_intensity_cap() {
        // with lambda = 0 the Bernoulli thresholds are zero and nothing fires
        let p = quiet_params();
        let lams = JumpIntensities::default();
        let mut rng = RngStream::new(0, 0);
        for n in 0..10_000 {
            rng.seek_step(n);
            let nz = draw_noise(&mut rng, &lams, 0.005);
            assert_eq!(nz.n_down + nz.n_up, 0);
        }
        let _ = p;
    }

    #[test]
    fn simulate_is_deterministic_and_increasing_in_time() {
        let p = default_params();
        let cfg = SimConfig {
            t_end: 30.0,
            ..SimConfig::default()
        };
        let a = simulate_path(&cfg, &p, 5).unwrap();
        let b = simulate_path(&cfg, &p, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.samples.windows(2).all(|w| w[0].t < w[1].t));
        let c = simulate_path(&cfg, &p, 6).unwrap();
        assert_ne!(a.samples.last(), c.samples.last());
    }

    #[test]
    fn recording_grid_covers_the_horizon() {
        let p = default_params();
        let cfg = SimConfig {
            t_end: 1.0,
            dt: 0.01,
            record_stride: 30,
            ..SimConfig::default()
        };
        let tr = simulate_path_with(&cfg, &p, 0, None).unwrap();
        let ts: Vec<f64> = tr.samples.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 5);
        assert!((ts[3] - 0.9).abs() < 1e-12);
        assert!((ts[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_step_names_the_quantity() {
        let p = default_params();
        let (mut s, m) = start();
        s.e = f64::INFINITY;
        let err = step_with_noise(&s, &m, 0.01, StepNoise::default(), &p).unwrap_err();
        assert!(matches!(err, BlowUp::Econ(EconError::NonFinite(_))));
    }

    #[test]
    fn constant_flow_without_noise_relaxes_to_target() {
        let mut p = quiet_params();
        p.lambda_up = 1.0;
        let mu = constant_flow_trend(&p, 0.0, 0.5, 0.01, 4000, 100, 0, 0);
        assert_eq!(mu.len(), 41);
        let target = trend_drift_target(&jump_intensities(0.0, &p), &p);
        assert!((mu[40] - target).abs() < 1e-8);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let p = default_params();
        let cfg = SimConfig {
            dt: -1.0,
            ..SimConfig::default()
        };
        assert!(simulate_path(&cfg, &p, 0).is_err());
    }

    #[test]
    fn non_finite_econ_is_a_blowup_status() {
        // an uncapped, very large lending rate makes the loan ratio overflow
        let mut p = default_params();
        p.rho_1 = 1e6;
        p.r_max = 1e6;
        let cfg = SimConfig {
            t_end: 1.0,
            ..SimConfig::default()
        };
        let tr = simulate_path_with(&cfg, &p, 0, None).unwrap();
        assert!(matches!(tr.status, Status::BlowUp { .. }), "{:?}", tr.status);
    }
}
