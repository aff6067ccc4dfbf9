//! Model constants, simulation controls and their admissible ranges.
//!
//! Every other module reads parameters through [`ModelParams`]. Fields can
//! also be addressed by name ([`ModelParams::get`], [`ModelParams::set`]),
//! which is what the configuration loader and the parameter sweeps use.

use alloc::vec::Vec;
use core::fmt;

use crate::econ::EconState;
use crate::market::MarketState;

/// Allowed interval for a scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Range {
    /// Any finite real.
    Real,
    /// `[lo, hi]`.
    Closed(f64, f64),
    /// `[lo, inf)`.
    AtLeast(f64),
    /// `(lo, inf)`.
    Above(f64),
    /// `(lo, hi)`.
    Open(f64, f64),
    /// `[0, r_max]`, resolved against the current `r_max`.
    UpToRateCap,
}

impl Range {
    fn contains(self, v: f64, r_max: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match self {
            Range::Real => true,
            Range::Closed(lo, hi) => lo <= v && v <= hi,
            Range::AtLeast(lo) => v >= lo,
            Range::Above(lo) => v > lo,
            Range::Open(lo, hi) => lo < v && v < hi,
            Range::UpToRateCap => 0.0 <= v && v <= r_max,
        }
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Range::Real => f.write_str("finite real"),
            Range::Closed(lo, hi) => write!(f, "[{lo}, {hi}]"),
            Range::AtLeast(lo) => write!(f, "[{lo}, inf)"),
            Range::Above(lo) => write!(f, "({lo}, inf)"),
            Range::Open(lo, hi) => write!(f, "({lo}, {hi})"),
            Range::UpToRateCap => f.write_str("[0, r_max]"),
        }
    }
}

macro_rules! model_params {
    ($( $(#[$doc:meta])* $name:ident = $default:expr, $range:expr; )+) => {
        /// Behavioural, market and rate-function constants of the coupled model.
        ///
        /// Rates are per year, `nu`, `psi_1` and `rho_2` are in years, the rest
        /// is dimensionless.
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct ModelParams {
            $( $(#[$doc])* pub $name: f64, )+
        }

        impl ModelParams {
            /// Field names in declaration order.
            pub const FIELDS: &'static [&'static str] = &[$(stringify!($name)),+];

            /// Reads a field by name.
            pub fn get(&self, name: &str) -> Option<f64> {
                match name {
                    $( stringify!($name) => Some(self.$name), )+
                    _ => None,
                }
            }

            /// Writes a field by name. Returns `Err(UnknownField)` for names
            /// that are not parameters; the value itself is not validated.
            pub fn set(&mut self, name: &str, value: f64) -> Result<(), UnknownField> {
                match name {
                    $( stringify!($name) => { self.$name = value; Ok(()) } )+
                    _ => Err(UnknownField),
                }
            }

            /// Admissible range of a field.
            pub fn range_of(name: &str) -> Option<Range> {
                match name {
                    $( stringify!($name) => Some($range), )+
                    _ => None,
                }
            }

            /// Base values of the calibration table.
            pub const fn base() -> Self {
                Self { $( $name: $default, )+ }
            }
        }
    };
}

model_params! {
    /// Capital-to-output ratio.
    nu = 2.7, Range::Above(0.0);
    /// Depreciation rate.
    delta = 0.04, Range::AtLeast(0.0);
    /// Deposit rate.
    r_m = 0.01, Range::AtLeast(0.0);
    kappa_min = 0.0, Range::Closed(-1.0, 0.0);
    kappa_max = 0.3, Range::Closed(0.0, 1.0);
    kappa_0 = 0.0318, Range::Real;
    kappa_1 = 0.575, Range::Real;
    delta_min = 0.0, Range::Closed(-1.0, 0.0);
    delta_max = 0.3, Range::Closed(0.0, 1.0);
    delta_0 = -0.078, Range::Real;
    delta_1 = 0.553, Range::AtLeast(0.0);
    /// Share of net investment financed by new loans.
    zeta = 0.8, Range::Closed(0.0, 1.0);
    /// Loan repayment rate.
    kappa_l = 0.02, Range::Closed(0.0, 1.0);
    psi_min = -0.15, Range::Closed(-1.0, 0.0);
    psi_max = 0.3, Range::Closed(0.0, 1.0);
    psi_0 = -0.075, Range::Real;
    /// Slope of the speculative-flow function, in years.
    psi_1 = 3.75, Range::AtLeast(0.0);
    /// Productivity growth.
    alpha = 0.02, Range::Real;
    /// Workforce growth.
    beta = 0.02, Range::Real;
    /// Degree of money illusion in wage bargaining.
    gamma = 0.9, Range::Closed(0.0, 1.0);
    /// Price adjustment speed.
    eta_p = 0.192, Range::Above(0.0);
    /// Markup.
    xi = 1.875, Range::AtLeast(1.0);
    phi_0 = -0.292, Range::Real;
    phi_1 = 0.469, Range::Real;
    /// Baseline funding rate.
    r_l = 0.02, Range::UpToRateCap;
    /// Diffusion volatility of the asset price.
    sigma = 0.1, Range::AtLeast(0.0);
    /// Proportional size of the price drop that accompanies `lambda_up`.
    j_up = 0.1, Range::Open(0.0, 1.0);
    /// Proportional size of the price rise that accompanies `lambda_down`.
    j_down = 0.1, Range::Above(0.0);
    /// Intensity scale applied to positive speculative flow (price-drop jumps).
    lambda_up = 1.0, Range::AtLeast(0.0);
    /// Intensity scale applied to negative speculative flow (price-rise jumps).
    lambda_down = 1.0, Range::AtLeast(0.0);
    /// Mean-reversion speed of the trend indicator.
    eta_mu = 0.5, Range::Above(0.0);
    /// Cap on the lending rate.
    r_max = 0.2, Range::AtLeast(0.0);
    rho_1 = 0.01, Range::AtLeast(0.0);
    rho_2 = 5.0, Range::AtLeast(0.0);
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::base()
    }
}

/// Base values of the calibration table.
pub fn default_params() -> ModelParams {
    ModelParams::base()
}

/// Returned by [`ModelParams::set`] for a name that is not a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownField;

/// A parameter outside its admissible range, or a broken ordering between
/// a pair of bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub value: f64,
    pub allowed: Allowed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Allowed {
    Range(Range),
    /// The field must not exceed the named field.
    NotAbove(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.allowed {
            Allowed::Range(r) => write!(f, "{} = {} outside {}", self.field, self.value, r),
            Allowed::NotAbove(other) => {
                write!(f, "{} = {} exceeds {}", self.field, self.value, other)
            }
        }
    }
}

const ORDERED_PAIRS: [(&str, &str); 3] = [
    ("kappa_min", "kappa_max"),
    ("delta_min", "delta_max"),
    ("psi_min", "psi_max"),
];

/// Checks every field against its range. An empty list means the set is valid.
pub fn validate(p: &ModelParams) -> Vec<Violation> {
    let mut out = Vec::new();
    for &name in ModelParams::FIELDS {
        let value = p.get(name).unwrap_or(f64::NAN);
        let range = ModelParams::range_of(name).unwrap_or(Range::Real);
        if !range.contains(value, p.r_max) {
            out.push(Violation {
                field: name,
                value,
                allowed: Allowed::Range(range),
            });
        }
    }
    for (lo, hi) in ORDERED_PAIRS {
        let (a, b) = (p.get(lo).unwrap_or(0.0), p.get(hi).unwrap_or(0.0));
        if a > b {
            out.push(Violation {
                field: lo,
                value: a,
                allowed: Allowed::NotAbove(hi),
            });
        }
    }
    out
}

/// Time grid, seed and initial state of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    pub dt: f64,
    pub seed: u64,
    pub init_econ: EconState,
    pub init_s: f64,
    /// Initial trend indicator; `None` starts it at the baseline rate `r_l`.
    pub init_mu: Option<f64>,
    /// Steps between recorded samples.
    pub record_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            t_end: 150.0,
            dt: 0.005,
            seed: 0,
            init_econ: EconState {
                omega: 0.75,
                e: 0.9,
                m: 0.2,
                ell: 0.5,
            },
            init_s: 1.0,
            init_mu: None,
            record_stride: 20,
        }
    }
}

/// Problems with a [`SimConfig`].
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Step { dt: f64, t_end: f64 },
    Stride,
    InitialState(&'static str),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Step { dt, t_end } => {
                write!(f, "need 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}")
            }
            ConfigError::Stride => f.write_str("record_stride must be at least 1"),
            ConfigError::InitialState(what) => write!(f, "invalid initial state: {what}"),
        }
    }
}

impl SimConfig {
    pub fn initial_market(&self, p: &ModelParams) -> MarketState {
        MarketState {
            s: self.init_s,
            mu: self.init_mu.unwrap_or(p.r_l),
        }
    }

    /// Number of steps covering `[0, t_end]`; the last step may end slightly
    /// past `t_end` when `dt` does not divide it.
    pub fn n_steps(&self) -> u64 {
        let n = libm::ceil(self.t_end / self.dt - 1e-9);
        if n < 1.0 {
            1
        } else {
            n as u64
        }
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if !(self.dt > 0.0 && self.dt.is_finite() && self.t_end.is_finite() && self.dt <= self.t_end) {
            return Err(ConfigError::Step {
                dt: self.dt,
                t_end: self.t_end,
            });
        }
        if self.record_stride == 0 {
            return Err(ConfigError::Stride);
        }
        let s = &self.init_econ;
        if !(s.omega > 0.0 && s.omega.is_finite()) {
            return Err(ConfigError::InitialState("omega0 must be positive"));
        }
        if !(s.e > 0.0 && s.e.is_finite()) {
            return Err(ConfigError::InitialState("e0 must be positive"));
        }
        if !(s.m.is_finite() && s.ell.is_finite()) {
            return Err(ConfigError::InitialState("m0 and ell0 must be finite"));
        }
        if !(self.init_s > 0.0 && self.init_s.is_finite()) {
            return Err(ConfigError::InitialState("s0 must be positive"));
        }
        if let Some(mu) = self.init_mu {
            if !mu.is_finite() {
                return Err(ConfigError::InitialState("mu0 must be finite"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_values() {
        let p = default_params();
        assert_eq!(p.kappa_1, 0.575);
        assert_eq!(p.rho_2, 5.0);
        assert_eq!(p.j_up, 0.1);
        assert_eq!(ModelParams::FIELDS.len(), 34);
        assert!(validate(&p).is_empty());
    }

    #[test]
    fn jump_size_one_is_rejected() {
        let mut p = default_params();
        p.j_up = 1.0;
        let v = validate(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "j_up");
        assert_eq!(v[0].value, 1.0);
    }

    #[test]
    fn baseline_rate_above_cap() {
        let mut p = default_params();
        p.r_l = 0.25;
        let v = validate(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "r_l");
        assert_eq!(v[0].allowed, Allowed::Range(Range::UpToRateCap));
    }

    #[test]
    fn non_finite_values_are_violations() {
        let mut p = default_params();
        p.sigma = f64::NAN;
        p.kappa_0 = f64::INFINITY;
        let v = validate(&p);
        assert_eq!(v.len(), 2);
        assert!(v.iter().any(|v| v.field == "sigma"));
        assert!(v.iter().any(|v| v.field == "kappa_0"));
    }

    #[test]
    fn named_access() {
        let mut p = default_params();
        for name in ModelParams::FIELDS {
            let v = p.get(name).unwrap();
            p.set(name, v + 1.0).unwrap();
            assert_eq!(p.get(name), Some(v + 1.0));
        }
        assert_eq!(p.set("sgima", 0.2), Err(UnknownField));
        assert_eq!(p.get("sgima"), None);
    }

    #[test]
    fn sim_config_checks() {
        let mut c = SimConfig::default();
        assert!(c.check().is_ok());
        assert_eq!(c.n_steps(), 30_000);
        c.dt = 0.0;
        assert!(matches!(c.check(), Err(ConfigError::Step { .. })));
        c.dt = 0.005;
        c.record_stride = 0;
        assert_eq!(c.check(), Err(ConfigError::Stride));
        c.record_stride = 1;
        c.init_econ.e = 0.0;
        assert!(c.check().is_err());
    }
}
