//! Signed log-domain scalar.
//!
//! The §9 construction produces radii whose *logarithms* overflow `f64`
//! (log bᵢ grows like ε₀^(−3·2^(i−1)/2)), so every quantity that can explode
//! is carried as sign·exp(ln). Multiplication is exact up to one rounding;
//! addition goes through log-sum-exp, which keeps full relative precision
//! when the summands have the same sign and degrades only on near-exact
//! cancellation (callers that need exact cancellation use reduced formulas
//! instead of subtracting two near-equal `LogNum`s).

use std::cmp::Ordering;
use std::fmt;

/// A real number stored as `sign * exp(ln)`.
#[derive(Clone, Copy, Debug)]
pub struct LogNum {
    sign: i8,
    ln: f64,
}

impl LogNum {
    pub const ZERO: LogNum = LogNum {
        sign: 0,
        ln: f64::NEG_INFINITY,
    };
    pub const ONE: LogNum = LogNum { sign: 1, ln: 0.0 };

    /// Wrap a finite f64.
    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else if x > 0.0 {
            LogNum { sign: 1, ln: x.ln() }
        } else {
            LogNum {
                sign: -1,
                ln: (-x).ln(),
            }
        }
    }

    /// Positive number `exp(ln)` given its natural log.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogNum { sign: 1, ln }
        }
    }

    /// Signed number `sign * exp(ln)`.
    pub fn from_sign_ln(sign: i8, ln: f64) -> Self {
        if sign == 0 || ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogNum {
                sign: sign.signum(),
                ln,
            }
        }
    }

    /// Saturating conversion (overflow → ±∞, deep underflow → 0).
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            1 => self.ln.exp(),
            _ => -self.ln.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(self) -> bool {
        self.sign > 0
    }

    pub fn is_negative(self) -> bool {
        self.sign < 0
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude (−∞ for zero).
    pub fn ln_abs(self) -> f64 {
        self.ln
    }

    pub fn abs(self) -> Self {
        LogNum {
            sign: self.sign.abs(),
            ln: self.ln,
        }
    }

    pub fn neg(self) -> Self {
        LogNum {
            sign: -self.sign,
            ln: self.ln,
        }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        LogNum {
            sign: self.sign * other.sign,
            ln: self.ln + other.ln,
        }
    }

    pub fn div(self, other: Self) -> Self {
        assert!(other.sign != 0, "division by zero LogNum");
        if self.sign == 0 {
            return Self::ZERO;
        }
        LogNum {
            sign: self.sign * other.sign,
            ln: self.ln - other.ln,
        }
    }

    pub fn recip(self) -> Self {
        Self::ONE.div(self)
    }

    /// Multiply by a plain f64 scale factor.
    pub fn scale(self, c: f64) -> Self {
        self.mul(Self::from_f64(c))
    }

    /// Raise a nonnegative number to a real power.
    pub fn powf(self, p: f64) -> Self {
        if self.sign == 0 {
            return if p > 0.0 {
                Self::ZERO
            } else {
                panic!("0^p with p <= 0")
            };
        }
        assert!(self.sign > 0, "powf of negative LogNum");
        LogNum {
            sign: 1,
            ln: self.ln * p,
        }
    }

    pub fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        if self.sign == other.sign {
            let (hi, lo) = if self.ln >= other.ln {
                (self.ln, other.ln)
            } else {
                (other.ln, self.ln)
            };
            let ln = if lo == f64::NEG_INFINITY {
                hi
            } else {
                hi + (lo - hi).exp().ln_1p()
            };
            LogNum { sign: self.sign, ln }
        } else {
            // Opposite signs: exact cancellation yields zero.
            match self.ln.partial_cmp(&other.ln) {
                Some(Ordering::Equal) => Self::ZERO,
                Some(Ordering::Greater) => LogNum {
                    sign: self.sign,
                    ln: self.ln + (-((other.ln - self.ln).exp())).ln_1p(),
                },
                Some(Ordering::Less) => LogNum {
                    sign: other.sign,
                    ln: other.ln + (-((self.ln - other.ln).exp())).ln_1p(),
                },
                None => panic!("NaN in LogNum addition"),
            }
        }
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(other.neg())
    }

    /// Sum of a slice.
    pub fn sum(terms: &[LogNum]) -> Self {
        let mut acc = Self::ZERO;
        for t in terms {
            acc = acc.add(*t);
        }
        acc
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Decimal scientific rendering that survives values far outside f64
    /// range, e.g. `8.123e+384`.
    pub fn to_sci_string(self) -> String {
        if self.sign == 0 {
            return "0.0e0".to_string();
        }
        let log10 = self.ln / std::f64::consts::LN_10;
        let mut e = log10.floor();
        let mut mant = 10f64.powf(log10 - e);
        // Rounding can push the mantissa to 10.0.
        if mant >= 9.999_999_999_999_999e0 {
            mant /= 10.0;
            e += 1.0;
        }
        let s = if self.sign < 0 { "-" } else { "" };
        if e.abs() < 1e15 {
            format!("{s}{mant:.15}e{e:+}", e = e as i64)
        } else {
            format!("{s}{mant:.15}e{e:+.0}")
        }
    }
}

impl PartialEq for LogNum {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && (self.sign == 0 || self.ln == other.ln)
    }
}

impl PartialOrd for LogNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.ln.partial_cmp(&other.ln),
                _ => other.ln.partial_cmp(&self.ln),
            },
            ord => Some(ord),
        }
    }
}

impl fmt::Display for LogNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn roundtrip_and_ops() {
        let a = LogNum::from_f64(3.5);
        let b = LogNum::from_f64(-1.25);
        assert_relative_eq!(a.add(b).to_f64(), 2.25, max_relative = 1e-15);
        assert_relative_eq!(a.mul(b).to_f64(), -4.375, max_relative = 1e-15);
        assert_relative_eq!(a.sub(b).to_f64(), 4.75, max_relative = 1e-15);
        assert_relative_eq!(a.div(b).to_f64(), -2.8, max_relative = 1e-15);
    }

    #[test]
    fn exact_cancellation_gives_zero() {
        let a = LogNum::from_ln(1e300);
        assert!(a.sub(a).is_zero());
    }

    #[test]
    fn huge_magnitudes_survive() {
        // Numbers like exp(1e10) are far outside f64 but their logs are not.
        let a = LogNum::from_ln(1e10);
        let b = LogNum::from_ln(1e10 - 5.0);
        let r = a.div(b);
        assert_relative_eq!(r.to_f64(), 5f64.exp(), max_relative = 1e-9);
        // Dominated addition keeps the large term.
        let s = a.add(LogNum::from_ln(10.0));
        assert_eq!(s.ln_abs(), 1e10);
    }

    #[test]
    fn ordering() {
        let xs = [-2.0, -0.5, 0.0, 1e-9, 3.0];
        for &x in &xs {
            for &y in &xs {
                let lx = LogNum::from_f64(x);
                let ly = LogNum::from_f64(y);
                assert_eq!(x.partial_cmp(&y), lx.partial_cmp(&ly), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn sci_string_matches_f64_formatting_in_range() {
        let v = LogNum::from_f64(0.0940316);
        let s = v.to_sci_string();
        assert!(s.starts_with("9.4031"), "{s}");
        assert!(s.ends_with("e-2"), "{s}");
        let w = LogNum::from_ln(1e280);
        let s = w.to_sci_string();
        assert!(s.contains("e+"), "{s}");
    }

    proptest! {
        #[test]
        fn add_agrees_with_f64(x in -1e6f64..1e6, y in -1e6f64..1e6) {
            let got = LogNum::from_f64(x).add(LogNum::from_f64(y)).to_f64();
            let want = x + y;
            // Cancellation error scales with the inputs, not the result.
            prop_assert!((got - want).abs() <= 1e-13 * (x.abs() + y.abs()) + 1e-12 * want.abs());
        }

        #[test]
        fn mul_agrees_with_f64(x in -1e100f64..1e100, y in -1e100f64..1e100) {
            let got = LogNum::from_f64(x).mul(LogNum::from_f64(y)).to_f64();
            let want = x * y;
            if want != 0.0 {
                prop_assert!((got - want).abs() <= 1e-12 * want.abs());
            }
        }
    }
}
