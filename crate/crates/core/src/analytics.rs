//! Closed-form stationary and limiting quantities of the trend indicator and
//! the lending premium.

use core::fmt;

use crate::market::{log_drop, log_rise};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    /// Non-excess kurtosis (3 for a Gaussian).
    pub kurtosis: f64,
}

/// Which jump type is active under a constant speculative flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpDirection {
    /// Positive flow: price drops by `1 - j_up` at rate `lambda_up * f`.
    DownPrice,
    /// Negative flow: price rises by `1 + j_down` at rate `lambda_down * f`.
    UpPrice,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainError {
    NonPositiveReversion(f64),
    NonPositiveFlow(f64),
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainError::NonPositiveReversion(v) => write!(f, "eta_mu must be positive, got {v}"),
            DomainError::NonPositiveFlow(v) => write!(f, "flow magnitude must be positive, got {v}"),
        }
    }
}

fn check_eta(p: &ModelParams) -> Result<(), DomainError> {
    if p.eta_mu > 0.0 {
        Ok(())
    } else {
        Err(DomainError::NonPositiveReversion(p.eta_mu))
    }
}

/// Stationary law of the trend indicator without jumps (Gaussian OU).
pub fn ou_moments(p: &ModelParams) -> Result<StationaryMoments, DomainError> {
    check_eta(p)?;
    Ok(StationaryMoments {
        mean: p.r_l - 0.5 * p.sigma * p.sigma,
        variance: p.sigma * p.sigma / (2.0 * p.eta_mu),
        skewness: 0.0,
        kurtosis: 3.0,
    })
}

/// Log jump size, compensated-drift correction and intensity of the active
/// jump type.
fn jump_terms(direction: JumpDirection, f_const: f64, p: &ModelParams) -> (f64, f64, f64) {
    match direction {
        JumpDirection::DownPrice => (log_drop(p), log_drop(p) + p.j_up, p.lambda_up * f_const),
        JumpDirection::UpPrice => (log_rise(p), log_rise(p) - p.j_down, p.lambda_down * f_const),
    }
}

/// Stationary moments of the trend indicator under a constant flow of
/// magnitude `f_const`, in the published closed form.
///
/// The mean and variance are exact. The skewness and kurtosis expressions
/// are the published ones and differ from the exact cumulant ratios (see
/// [`jump_ou_exact_moments`]): the skewness has the opposite sign and lacks
/// a factor `sqrt(eta_mu)`, and the excess kurtosis is four times larger.
pub fn jump_ou_moments(
    direction: JumpDirection,
    f_const: f64,
    p: &ModelParams,
) -> Result<StationaryMoments, DomainError> {
    if !(f_const > 0.0) {
        return Err(DomainError::NonPositiveFlow(f_const));
    }
    check_eta(p)?;
    let (jt, corr, lam) = jump_terms(direction, f_const, p);
    let s2 = p.sigma * p.sigma;
    let q = s2 + lam * jt * jt;
    Ok(StationaryMoments {
        mean: p.r_l - 0.5 * s2 + corr * lam,
        variance: q / (2.0 * p.eta_mu),
        skewness: -libm::pow(2.0, 1.5) * lam * jt * jt * jt / (3.0 * libm::pow(q, 1.5)),
        kurtosis: 3.0 + 4.0 * p.eta_mu * lam * jt * jt * jt * jt / (q * q),
    })
}

/// Stationary moments of the trend indicator under a constant flow, from
/// the cumulants `k_1 = mean`, `k_2 = (sigma^2 + lam J^2) / (2 eta)` and
/// `k_n = lam J^n / (n eta)` for `n >= 3`.
pub fn jump_ou_exact_moments(
    direction: JumpDirection,
    f_const: f64,
    p: &ModelParams,
) -> Result<StationaryMoments, DomainError> {
    let published = jump_ou_moments(direction, f_const, p)?;
    let (jt, _, lam) = jump_terms(direction, f_const, p);
    let k2 = published.variance;
    let k3 = lam * jt * jt * jt / (3.0 * p.eta_mu);
    let k4 = lam * jt * jt * jt * jt / (4.0 * p.eta_mu);
    Ok(StationaryMoments {
        skewness: k3 / libm::pow(k2, 1.5),
        kurtosis: 3.0 + k4 / (k2 * k2),
        ..published
    })
}

/// Stationary mean of the premium when the trend indicator is the
/// jump-free OU process.
pub fn premium_lognormal_mean(p: &ModelParams) -> f64 {
    let s2 = p.sigma * p.sigma;
    p.rho_1 * libm::exp(p.rho_2 * s2 / 2.0 + p.rho_2 * p.rho_2 * s2 / (4.0 * p.eta_mu))
}

/// Long-run drift of `ln S` and lending rate when `sigma = 0` and there are
/// no jumps.
pub fn deterministic_limits(p: &ModelParams) -> (f64, f64) {
    (p.r_l, libm::fmin(p.r_max, p.r_l + p.rho_1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::default_params;
    use proptest::prelude::*;

    #[test]
    fn ou_values() {
        let mut p = default_params();
        let m = ou_moments(&p).unwrap();
        assert!((m.mean - 0.015).abs() < 1e-15);
        assert!((m.variance - 0.01).abs() < 1e-15);
        assert_eq!((m.skewness, m.kurtosis), (0.0, 3.0));
        p.r_l = 0.15;
        assert!((ou_moments(&p).unwrap().mean - 0.145).abs() < 1e-15);
        p.sigma = 0.0;
        let m = ou_moments(&p).unwrap();
        assert_eq!((m.mean, m.variance), (0.15, 0.0));
        p.eta_mu = 0.0;
        assert!(ou_moments(&p).is_err());
    }

    #[test]
    fn published_jump_values_down() {
        let p = default_params();
        let m = jump_ou_moments(JumpDirection::DownPrice, 0.0566, &p).unwrap();
        let jt = libm::log(0.9);
        assert!((m.mean - 0.014_696_6).abs() < 1e-7);
        assert!((m.variance - (0.01 + 0.0566 * jt * jt)).abs() < 1e-15);
        assert!((m.variance - 0.010_628_3).abs() < 1e-6);
        assert!((m.skewness - 0.0570).abs() < 1e-4);
        // the published kurtosis expression at these values
        assert!((m.kurtosis - 3.1235).abs() < 1e-4);
    }

    #[test]
    fn published_jump_values_up() {
        let mut p = default_params();
        p.r_l = 0.15;
        let m = jump_ou_moments(JumpDirection::UpPrice, 0.15, &p).unwrap();
        assert!((m.mean - (0.145 + (libm::log(1.1) - 0.1) * 0.15)).abs() < 1e-15);
        assert!((m.mean - 0.144_30).abs() < 1e-5);
        assert!(m.skewness < 0.0);
        assert!(m.kurtosis > 3.0);
    }

    #[test]
    fn exact_cumulant_moments() {
        let p = default_params();
        let pub_m = jump_ou_moments(JumpDirection::DownPrice, 0.0566, &p).unwrap();
        let ex = jump_ou_exact_moments(JumpDirection::DownPrice, 0.0566, &p).unwrap();
        assert_eq!((ex.mean, ex.variance), (pub_m.mean, pub_m.variance));
        assert!((ex.skewness + pub_m.skewness * libm::sqrt(p.eta_mu)).abs() < 1e-15);
        assert!(((ex.kurtosis - 3.0) * 4.0 - (pub_m.kurtosis - 3.0)).abs() < 1e-15);
        assert!((ex.skewness + 0.0403).abs() < 1e-4);
        assert!((ex.kurtosis - 3.0309).abs() < 1e-4);
    }

    #[test]
    fn published_shape_breaks_the_moment_inequality() {
        // without diffusion and with rare jumps the published skewness grows
        // faster than the published kurtosis allows
        let mut p = default_params();
        p.sigma = 0.0;
        p.eta_mu = 0.05;
        p.j_up = 0.01;
        let m = jump_ou_moments(JumpDirection::DownPrice, 0.06, &p).unwrap();
        assert!(m.kurtosis < 1.0 + m.skewness * m.skewness);
        let e = jump_ou_exact_moments(JumpDirection::DownPrice, 0.06, &p).unwrap();
        assert!(e.kurtosis >= 1.0 + e.skewness * e.skewness);
    }

    #[test]
    fn flow_must_be_positive() {
        let p = default_params();
        for f in [0.0, -0.1, f64::NAN] {
            assert!(jump_ou_moments(JumpDirection::DownPrice, f, &p).is_err());
        }
    }

    #[test]
    fn premium_mean_values() {
        let mut p = default_params();
        assert!((premium_lognormal_mean(&p) - 0.01 * libm::exp(0.15)).abs() < 1e-15);
        assert!((premium_lognormal_mean(&p) - 0.011_618_3).abs() < 1e-7);
        p.sigma = 0.0;
        assert_eq!(premium_lognormal_mean(&p), p.rho_1);
    }

    #[test]
    fn deterministic_limit_values() {
        let mut p = default_params();
        assert_eq!(deterministic_limits(&p), (0.02, 0.03));
        p.rho_1 = 0.0;
        assert_eq!(deterministic_limits(&p), (0.02, 0.02));
        p.rho_1 = 1.0;
        assert_eq!(deterministic_limits(&p), (0.02, 0.2));
    }

    proptest! {
        #[test]
        fn jumps_lower_the_mean_and_raise_the_variance(
            f in 1e-4..1.0f64,
            sigma in 0.0..0.5f64,
            j in 0.01..0.9f64,
            eta in 0.05..5.0f64,
            up in any::<bool>(),
        ) {
            let mut p = default_params();
            p.sigma = sigma;
            p.j_up = j;
            p.j_down = j;
            p.eta_mu = eta;
            let dir = if up { JumpDirection::UpPrice } else { JumpDirection::DownPrice };
            let base = ou_moments(&p).unwrap();
            for m in [jump_ou_moments(dir, f, &p).unwrap(), jump_ou_exact_moments(dir, f, &p).unwrap()] {
                prop_assert!(m.mean < base.mean);
                prop_assert!(m.variance > base.variance);
                prop_assert!(m.kurtosis > 3.0);
            }
            let exact = jump_ou_exact_moments(dir, f, &p).unwrap();
            prop_assert!(exact.kurtosis >= 1.0 + exact.skewness * exact.skewness);
            let published = jump_ou_moments(dir, f, &p).unwrap();
            prop_assert_eq!(published.skewness > 0.0, !up);
        }

        #[test]
        fn small_flow_recovers_ou(sigma in 0.01..0.5f64) {
            let mut p = default_params();
            p.sigma = sigma;
            let base = ou_moments(&p).unwrap();
            let m = jump_ou_moments(JumpDirection::DownPrice, 1e-12, &p).unwrap();
            prop_assert!((m.mean - base.mean).abs() < 1e-12);
            prop_assert!((m.variance - base.variance).abs() < 1e-12);
            prop_assert!(m.skewness.abs() < 1e-6);
            prop_assert!((m.kurtosis - 3.0).abs() < 1e-6);
        }
    }
}
