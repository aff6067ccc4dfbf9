//! Real-economy block: behavioural functions, the four-dimensional vector
//! field in (wage share, employment, deposits, loans), and the Gronwall-type
//! a-priori bounds that hold for any lending-rate path in `[0, r_cap]`.

use core::fmt;

use crate::magnitude::Magnitude;
use crate::params::ModelParams;

/// Wage share, employment rate, firm deposit ratio and loan ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconState {
    pub omega: f64,
    pub e: f64,
    /// Firm deposits over nominal output, in years.
    pub m: f64,
    /// Loans over nominal output, in years.
    pub ell: f64,
}

impl EconState {
    fn axpy(&self, h: f64, d: &EconState) -> EconState {
        EconState {
            omega: self.omega + h * d.omega,
            e: self.e + h * d.e,
            m: self.m + h * d.m,
            ell: self.ell + h * d.ell,
        }
    }

    /// Net debt ratio `ell - m`.
    pub fn net_debt(&self) -> f64 {
        self.ell - self.m
    }

    fn first_non_finite(&self) -> Option<&'static str> {
        if !self.omega.is_finite() {
            Some("omega")
        } else if !self.e.is_finite() {
            Some("e")
        } else if !self.m.is_finite() {
            Some("m")
        } else if !self.ell.is_finite() {
            Some("ell")
        } else {
            None
        }
    }
}

/// Quantities derived from a state and a lending rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconDerived {
    /// Profit ratio before dividends.
    pub pi: f64,
    /// Investment share of output.
    pub kappa: f64,
    /// Dividend share of output.
    pub divid: f64,
    /// Normalized speculative flow.
    pub f: f64,
    /// Real growth rate.
    pub g: f64,
    pub infl: f64,
    pub phillips: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EconError {
    NonFinite(&'static str),
}

impl fmt::Display for EconError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EconError::NonFinite(c) => write!(f, "non-finite {c}"),
        }
    }
}

/// `min(hi, max(lo, c0 + c1 x))`, the shape shared by the investment,
/// dividend and speculative-flow functions.
#[inline]
pub fn clamped_affine(x: f64, lo: f64, hi: f64, c0: f64, c1: f64) -> f64 {
    let y = c0 + c1 * x;
    if y < lo {
        lo
    } else if y > hi {
        hi
    } else {
        y
    }
}

#[inline]
pub fn investment(pi: f64, p: &ModelParams) -> f64 {
    clamped_affine(pi, p.kappa_min, p.kappa_max, p.kappa_0, p.kappa_1)
}

#[inline]
pub fn dividends(pi: f64, p: &ModelParams) -> f64 {
    clamped_affine(pi, p.delta_min, p.delta_max, p.delta_0, p.delta_1)
}

/// Speculative flow as a function of nominal output growth.
#[inline]
pub fn speculative_flow(nominal_growth: f64, p: &ModelParams) -> f64 {
    clamped_affine(nominal_growth, p.psi_min, p.psi_max, p.psi_0, p.psi_1)
}

#[inline]
pub fn profit_ratio(s: &EconState, r: f64, p: &ModelParams) -> f64 {
    1.0 - s.omega - p.delta * p.nu + p.r_m * s.m - r * s.ell
}

#[inline]
pub fn inflation(omega: f64, p: &ModelParams) -> f64 {
    p.eta_p * (p.xi * omega - 1.0)
}

#[inline]
pub fn growth_rate(kappa: f64, p: &ModelParams) -> f64 {
    kappa / p.nu - p.delta
}

#[inline]
pub fn phillips(e: f64, p: &ModelParams) -> f64 {
    p.phi_0 + p.phi_1 * e
}

/// All derived quantities at `s` under lending rate `r`.
#[inline]
pub fn derived(s: &EconState, r: f64, p: &ModelParams) -> EconDerived {
    let pi = profit_ratio(s, r, p);
    let kappa = investment(pi, p);
    let g = growth_rate(kappa, p);
    let infl = inflation(s.omega, p);
    EconDerived {
        pi,
        kappa,
        divid: dividends(pi, p),
        f: speculative_flow(g + infl, p),
        g,
        infl,
        phillips: phillips(s.e, p),
    }
}

/// Time derivative of the real-economy state at lending rate `r`, together
/// with the derived quantities at `s`.
#[inline]
pub fn econ_vector_field(
    s: &EconState,
    r: f64,
    p: &ModelParams,
) -> Result<(EconState, EconDerived), EconError> {
    if let Some(c) = s.first_non_finite() {
        return Err(EconError::NonFinite(c));
    }
    if !r.is_finite() {
        return Err(EconError::NonFinite("r"));
    }
    let d = derived(s, r, p);
    let nominal = d.g + d.infl;
    let carry = r - p.kappa_l;
    let dot = EconState {
        omega: s.omega * (d.phillips - p.alpha - (1.0 - p.gamma) * d.infl),
        e: s.e * (d.g - p.alpha - p.beta),
        m: d.pi - (1.0 - p.zeta) * p.nu * d.g + carry * s.ell - d.divid + d.f - nominal * s.m,
        ell: p.zeta * (d.kappa - p.delta * p.nu) + carry * s.ell + d.f - nominal * s.ell,
    };
    Ok((dot, d))
}

/// One classical Runge-Kutta step of the real economy with `r` held fixed.
/// Also returns the derived quantities at the start of the step.
pub fn rk4_step(
    s: &EconState,
    r: f64,
    h: f64,
    p: &ModelParams,
) -> Result<(EconState, EconDerived), EconError> {
    let (k1, d0) = econ_vector_field(s, r, p)?;
    let (k2, _) = econ_vector_field(&s.axpy(0.5 * h, &k1), r, p)?;
    let (k3, _) = econ_vector_field(&s.axpy(0.5 * h, &k2), r, p)?;
    let (k4, _) = econ_vector_field(&s.axpy(h, &k3), r, p)?;
    let w = h / 6.0;
    let next = EconState {
        omega: s.omega + w * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega),
        e: s.e + w * (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e),
        m: s.m + w * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m),
        ell: s.ell + w * (k1.ell + 2.0 * k2.ell + 2.0 * k3.ell + k4.ell),
    };
    if let Some(c) = next.first_non_finite() {
        return Err(EconError::NonFinite(c));
    }
    Ok((next, d0))
}

/// Gronwall constants bounding the real economy on `[0, horizon]` for any
/// lending-rate path with `0 <= r_t <= r_cap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriBounds {
    pub horizon: f64,
    pub kappa_abs: f64,
    pub delta_abs: f64,
    pub psi_abs: f64,
    pub g_max: f64,
    pub g_abs: f64,
    pub e_cap: Magnitude,
    pub phi_cap: Magnitude,
    pub omega_cap: Magnitude,
    pub infl_cap: Magnitude,
    pub h_cap: Magnitude,
    pub a_m: Magnitude,
    pub b_m: Magnitude,
    pub a_l: Magnitude,
    pub b_l: Magnitude,
    pub a_total: Magnitude,
    pub b_total: Magnitude,
    /// Bound on `|m_t| + |ell_t|` for `t <= horizon`.
    pub debt_cap: Magnitude,
}

pub fn apriori_bounds(x0: &EconState, horizon: f64, p: &ModelParams, r_cap: f64) -> AprioriBounds {
    let t = horizon;
    let kappa_abs = libm::fmax(libm::fabs(p.kappa_min), p.kappa_max);
    let delta_abs = libm::fmax(libm::fabs(p.delta_min), p.delta_max);
    let psi_abs = libm::fmax(libm::fabs(p.psi_min), p.psi_max);
    let g_max = kappa_abs / p.nu - p.delta;
    let g_abs = libm::fabs(g_max);
    let dnu = p.delta * p.nu;

    // E_T = e0 exp((g_max - alpha - beta) T)
    let e_cap = Magnitude::from_f64((g_max - p.alpha - p.beta) * t)
        .exp()
        .scale(x0.e);
    let phi_cap = e_cap.scale(libm::fabs(p.phi_1)).add_f64(libm::fabs(p.phi_0));
    let omega_rate = phi_cap.add_f64(-p.alpha + (1.0 - p.gamma) * p.eta_p);
    let omega_cap = omega_rate.scale(t).exp().scale(x0.omega);
    let infl_cap = omega_cap.scale(p.xi).add_f64(1.0).scale(p.eta_p);
    let h_cap = infl_cap.add_f64(g_abs);

    let rate_gap = r_cap + libm::fabs(p.kappa_l);
    let a_m = omega_cap.add_f64(
        libm::fabs(1.0 - dnu) + (1.0 - p.zeta) * (kappa_abs + dnu) + delta_abs + psi_abs,
    );
    let b_m = h_cap.add_f64(p.r_m).max(Magnitude::from_f64(r_cap + rate_gap));
    let a_l = Magnitude::from_f64(p.zeta * (kappa_abs + dnu) + psi_abs);
    let b_l = h_cap.add_f64(rate_gap);
    let a_total = a_m.add(a_l);
    let b_total = b_m.add(b_l);

    let u0 = libm::fabs(x0.m) + libm::fabs(x0.ell);
    let debt_cap = if b_total == 0.0 {
        a_total.scale(t).add_f64(u0)
    } else {
        let growth = b_total.scale(t).exp();
        // (A/B)(e^{BT} - 1); the -1 only matters while everything is a plain float
        let tail = if growth.level() == 0 && b_total.level() == 0 && a_total.level() == 0 {
            Magnitude::from_f64(
                a_total.to_f64() / b_total.to_f64() * libm::expm1(b_total.to_f64() * t),
            )
        } else {
            a_total.div(b_total).mul(growth)
        };
        growth.scale(u0).add(tail)
    };

    AprioriBounds {
        horizon,
        kappa_abs,
        delta_abs,
        psi_abs,
        g_max,
        g_abs,
        e_cap,
        phi_cap,
        omega_cap,
        infl_cap,
        h_cap,
        a_m,
        b_m,
        a_l,
        b_l,
        a_total,
        b_total,
        debt_cap,
    }
}

impl AprioriBounds {
    /// Which bound, if any, a state breaks.
    pub fn first_violation(&self, s: &EconState) -> Option<&'static str> {
        if self.e_cap < s.e {
            Some("e")
        } else if self.omega_cap < s.omega {
            Some("omega")
        } else if self.debt_cap < libm::fabs(s.m) + libm::fabs(s.ell) {
            Some("debt")
        } else {
            None
        }
    }
}
