//! Extended-range reals for a-priori bound constants.
//!
//! The Gronwall constants are iterated exponentials of the horizon and leave
//! the `f64` range quickly (at the base calibration `Omega_T` is about
//! `exp(6.8e3)` for `T = 150`, and the debt cap is an exponential of that).
//! A [`Magnitude`] stores `x` together with a level `k` and represents
//! `exp(exp(...exp(x)))` with `k` exponentials. Level 0 is an ordinary `f64`
//! of either sign; levels `k >= 1` are reserved for values above `f64::MAX`.
//!
//! Arithmetic is only as precise as the bound computations need: when a
//! result cannot be represented to full precision the returned value is an
//! upper bound of the exact one.

use core::cmp::Ordering;
use core::fmt;

/// `ln(f64::MAX)`, the largest exponent whose exponential is finite.
const LN_MAX: f64 = 709.782_712_893_384;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Magnitude {
    level: u8,
    x: f64,
}

impl Magnitude {
    pub const ZERO: Magnitude = Magnitude { level: 0, x: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Magnitude { level: 0, x }
    }

    /// Number of stacked exponentials.
    pub fn level(&self) -> u8 {
        self.level
    }

    fn normalized(mut self) -> Self {
        while self.level > 0 && self.x <= LN_MAX {
            self.x = libm::exp(self.x);
            self.level -= 1;
        }
        self
    }

    /// Value as `f64`; `+inf` when it exceeds the `f64` range.
    pub fn to_f64(&self) -> f64 {
        if self.level == 0 {
            self.x
        } else {
            f64::INFINITY
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
    }

    pub fn exp(self) -> Self {
        if self.level == 0 {
            if self.x > LN_MAX {
                Magnitude { level: 1, x: self.x }
            } else {
                Magnitude::from_f64(libm::exp(self.x))
            }
        } else {
            Magnitude {
                level: self.level.saturating_add(1),
                x: self.x,
            }
        }
    }

    /// Natural logarithm; the value must be positive.
    pub fn ln(self) -> Self {
        match self.level {
            0 => Magnitude::from_f64(libm::log(self.x)),
            1 => Magnitude::from_f64(self.x),
            k => Magnitude { level: k - 1, x: self.x },
        }
    }

    pub fn add(self, other: Self) -> Self {
        if self.level == 0 && other.level == 0 {
            let s = self.x + other.x;
            if s.is_finite() {
                return Magnitude::from_f64(s);
            }
        }
        let (hi, lo) = if self >= other { (self, other) } else { (other, self) };
        if hi.level >= 2 {
            // `lo` is below the resolution of `hi`.
            return hi;
        }
        // hi is level 1 (or a level-0 pair that overflowed): work with ln(hi).
        let ln_hi = if hi.level == 1 { hi.x } else { libm::log(hi.x) };
        let rel = if lo.level == 0 {
            if lo.x == 0.0 {
                0.0
            } else {
                let r = libm::exp(libm::log(lo.x.abs()) - ln_hi);
                if lo.x < 0.0 {
                    -r
                } else {
                    r
                }
            }
        } else {
            libm::exp(lo.x - ln_hi)
        };
        Magnitude::from_f64(ln_hi + libm::log1p(rel)).exp()
    }

    pub fn add_f64(self, c: f64) -> Self {
        self.add(Magnitude::from_f64(c))
    }

    /// Product of two nonnegative magnitudes.
    pub fn mul(self, other: Self) -> Self {
        if self.level == 0 && other.level == 0 {
            let p = self.x * other.x;
            if p.is_finite() {
                return Magnitude::from_f64(p);
            }
        }
        if self.x == 0.0 && self.level == 0 || other.x == 0.0 && other.level == 0 {
            return Magnitude::ZERO;
        }
        self.ln().add(other.ln()).exp()
    }

    /// Product with a nonnegative constant.
    pub fn scale(self, c: f64) -> Self {
        self.mul(Magnitude::from_f64(c))
    }

    /// Quotient of two positive magnitudes. When both logarithms leave the
    /// `f64` range the quotient cannot be resolved and the numerator is
    /// returned, which bounds the quotient from above whenever the
    /// denominator is at least one.
    pub fn div(self, other: Self) -> Self {
        if self.level == 0 && other.level == 0 {
            let q = self.x / other.x;
            if q.is_finite() {
                return Magnitude::from_f64(q);
            }
        }
        let (la, lb) = (self.ln(), other.ln());
        if la.level == 0 && lb.level == 0 {
            Magnitude::from_f64(la.x - lb.x).exp()
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl From<f64> for Magnitude {
    fn from(x: f64) -> Self {
        Magnitude::from_f64(x)
    }
}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let (a, b) = (self.normalized(), other.normalized());
        match a.level.cmp(&b.level) {
            Ordering::Equal => a.x.partial_cmp(&b.x),
            Ordering::Greater => Some(Ordering::Greater),
            Ordering::Less => Some(Ordering::Less),
        }
    }
}

impl PartialEq<f64> for Magnitude {
    fn eq(&self, other: &f64) -> bool {
        self.level == 0 && self.x == *other
    }
}

impl PartialOrd<f64> for Magnitude {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&Magnitude::from_f64(*other))
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.level {
            0 => write!(f, "{}", self.x),
            1 => write!(f, "exp({})", self.x),
            k => {
                for _ in 0..k {
                    f.write_str("exp(")?;
                }
                write!(f, "{}", self.x)?;
                for _ in 0..k {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values_are_plain_floats() {
        let a = Magnitude::from_f64(2.0);
        let b = Magnitude::from_f64(3.0);
        assert_eq!(a.add(b), 5.0);
        assert_eq!(a.mul(b), 6.0);
        assert_eq!(b.div(a), 1.5);
        assert_eq!(a.exp(), libm::exp(2.0));
        assert_eq!(a.exp().ln(), 2.0);
    }

    #[test]
    fn exp_past_f64_range() {
        let big = Magnitude::from_f64(1000.0).exp();
        assert_eq!(big.level(), 1);
        assert!(big.is_finite());
        assert_eq!(big.to_f64(), f64::INFINITY);
        assert!(big > f64::MAX);
        assert!(big > Magnitude::from_f64(999.0).exp());
        let bigger = big.exp();
        assert_eq!(bigger.level(), 2);
        assert!(bigger > big);
        assert_eq!(bigger.ln(), big);
        assert_eq!(big.ln(), 1000.0);
    }

    #[test]
    fn arithmetic_at_level_one_stays_in_log_space() {
        let a = Magnitude::from_f64(1000.0).exp();
        // e^1000 + e^1000 = e^(1000 + ln 2)
        let s = a.add(a);
        assert!((s.ln().to_f64() - (1000.0 + core::f64::consts::LN_2)).abs() < 1e-9);
        // e^1000 * 3 = e^(1000 + ln 3)
        let m = a.scale(3.0);
        assert!((m.ln().to_f64() - (1000.0 + libm::log(3.0))).abs() < 1e-9);
        // (3 e^1000) / e^1000 = 3
        assert!((m.div(a).to_f64() - 3.0).abs() < 1e-9);
        // adding a negative small number leaves the value unchanged at this scale
        assert_eq!(a.add_f64(-5.0).ln(), a.ln());
    }

    #[test]
    fn overflowing_level_zero_products_promote() {
        let a = Magnitude::from_f64(1e300);
        let p = a.mul(a);
        assert_eq!(p.level(), 1);
        assert!((p.ln().to_f64() - 600.0 * libm::log(10.0)).abs() < 1e-9);
        let s = Magnitude::from_f64(f64::MAX).add(Magnitude::from_f64(f64::MAX));
        assert_eq!(s.level(), 1);
    }

    #[test]
    fn ordering_across_levels() {
        let vals = [
            Magnitude::from_f64(-1.0),
            Magnitude::from_f64(0.0),
            Magnitude::from_f64(5.0),
            Magnitude::from_f64(710.0).exp(),
            Magnitude::from_f64(800.0).exp(),
            Magnitude::from_f64(800.0).exp().exp(),
        ];
        for w in vals.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert_eq!(vals[4].max(vals[3]), vals[4]);
    }
}
