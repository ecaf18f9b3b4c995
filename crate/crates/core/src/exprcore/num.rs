use std::fmt;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

/// Numeric constant: exact rational while it fits in `i64/i64`, double otherwise.
#[derive(Debug, Clone, Copy)]
pub enum Num {
    Rational(Rational64),
    Float(f64),
}

impl Num {
    pub fn int(n: i64) -> Self {
        Num::Rational(Rational64::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Num::Rational(Rational64::new(n, d))
    }

    /// Floats with an exact small-integer value are demoted back to rationals.
    pub fn float(x: f64) -> Self {
        if x.fract() == 0.0 && x.abs() < 1e15 {
            Num::int(x as i64)
        } else {
            Num::Float(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Num::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Num::Float(x) => x,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Num::Rational(r) => r.is_zero(),
            Num::Float(x) => x == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Num::Rational(r) => r.is_one(),
            Num::Float(x) => x == 1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Num::Rational(r) => r.is_negative(),
            Num::Float(x) => x < 0.0,
        }
    }

    pub fn as_integer(self) -> Option<i64> {
        match self {
            Num::Rational(r) if r.is_integer() => Some(*r.numer()),
            _ => None,
        }
    }


    fn binary(
        self,
        rhs: Num,
        exact: impl Fn(&Rational64, &Rational64) -> Option<Rational64>,
        approx: impl Fn(f64, f64) -> f64,
    ) -> Num {
        if let (Num::Rational(a), Num::Rational(b)) = (self, rhs) {
            if let Some(r) = exact(&a, &b) {
                return Num::Rational(r);
            }
        }
        Num::Float(approx(self.to_f64(), rhs.to_f64()))
    }

    pub fn add(self, rhs: Num) -> Num {
        self.binary(rhs, |a, b| a.checked_add(b), |a, b| a + b)
    }

    pub fn sub(self, rhs: Num) -> Num {
        self.binary(rhs, |a, b| a.checked_sub(b), |a, b| a - b)
    }

    pub fn mul(self, rhs: Num) -> Num {
        self.binary(rhs, |a, b| a.checked_mul(b), |a, b| a * b)
    }

    /// `None` on division by zero.
    pub fn div(self, rhs: Num) -> Option<Num> {
        if rhs.is_zero() {
            return None;
        }
        Some(self.binary(rhs, |a, b| a.checked_div(b), |a, b| a / b))
    }

    pub fn neg(self) -> Num {
        match self {
            Num::Rational(r) => match Rational64::zero().checked_sub(&r) {
                Some(n) => Num::Rational(n),
                None => Num::Float(-self.to_f64()),
            },
            Num::Float(x) => Num::Float(-x),
        }
    }

    /// Exact for rational bases raised to small integer powers. `None` when the
    /// result is undefined (0 to a negative power, negative base to a fractional power).
    pub fn pow(self, exp: Num) -> Option<Num> {
        if let (Num::Rational(base), Some(k)) = (self, exp.as_integer()) {
            if base.is_zero() && k < 0 {
                return None;
            }
            if k.abs() <= 64 {
                let mut acc = Some(Rational64::one());
                for _ in 0..k.abs() {
                    acc = acc.and_then(|a| a.checked_mul(&base));
                }
                if let Some(a) = acc {
                    let r = if k < 0 { a.recip() } else { a };
                    return Some(Num::Rational(r));
                }
            }
        }
        let (b, e) = (self.to_f64(), exp.to_f64());
        if b < 0.0 && e.fract() != 0.0 {
            return None;
        }
        if b == 0.0 && e < 0.0 {
            return None;
        }
        let v = b.powf(e);
        v.is_finite().then_some(Num::Float(v))
    }

    /// Exact square root of a rational perfect square.
    pub fn exact_sqrt(self) -> Option<Num> {
        let Num::Rational(r) = self else { return None };
        if r.is_negative() {
            return None;
        }
        let root = |n: i64| -> Option<i64> {
            let s = (n as f64).sqrt().round() as i64;
            (s.checked_mul(s) == Some(n)).then_some(s)
        };
        Some(Num::Rational(Rational64::new(root(*r.numer())?, root(*r.denom())?)))
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Num::Rational(a), Num::Rational(b)) => a == b,
            (Num::Float(a), Num::Float(b)) => a.to_bits() == b.to_bits(),
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl From<i64> for Num {
    fn from(n: i64) -> Self {
        Num::int(n)
    }
}

/// Prints the magnitude in grammar-compatible form; callers handle the sign.
pub(crate) fn fmt_magnitude(n: Num, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match n {
        Num::Rational(r) => {
            let r = r.abs();
            if r.is_integer() {
                write!(f, "{}", r.numer())
            } else {
                write!(f, "{}/{}", r.numer(), r.denom())
            }
        }
        Num::Float(x) => {
            let s = format!("{:?}", x.abs());
            f.write_str(&s)
        }
    }
}

/// Parses a decimal literal, exact when the value fits a rational with `i64` parts.
pub(crate) fn parse_literal(text: &str) -> Option<Num> {
    let value: f64 = text.parse().ok()?;
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    // Seventeen-digit mantissas are printed doubles; keep them as doubles.
    if digits.trim_start_matches('0').len() > 15 {
        return Some(Num::Float(value));
    }
    let scale = exponent - frac_part.len() as i32;
    let exact = (|| {
        let n: i64 = digits.trim_start_matches('0').parse().or_else(|_| {
            if digits.chars().all(|c| c == '0') {
                Ok(0)
            } else {
                Err(())
            }
        }).ok()?;
        if scale.unsigned_abs() > 18 {
            return None;
        }
        let p = 10i64.checked_pow(scale.unsigned_abs())?;
        if scale >= 0 {
            Some(Rational64::from_integer(n.checked_mul(p)?))
        } else {
            Some(Rational64::new(n, p))
        }
    })();
    Some(match exact {
        Some(r) => Num::Rational(r),
        None => Num::Float(value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_are_exact_when_representable() {
        assert_eq!(parse_literal("0.5"), Some(Num::ratio(1, 2)));
        assert_eq!(parse_literal("12"), Some(Num::int(12)));
        assert_eq!(parse_literal("1e3"), Some(Num::int(1000)));
        assert_eq!(parse_literal("2.5e-1"), Some(Num::ratio(1, 4)));
        assert!(matches!(parse_literal("1e-300"), Some(Num::Float(_))));
    }

    #[test]
    fn overflow_falls_back_to_float() {
        let big = Num::int(i64::MAX / 2);
        assert!(matches!(big.mul(Num::int(4)), Num::Float(_)));
        assert_eq!(Num::int(3).pow(Num::int(2)), Some(Num::int(9)));
        assert_eq!(Num::int(2).pow(Num::int(-1)), Some(Num::ratio(1, 2)));
        assert_eq!(Num::int(0).pow(Num::int(-1)), None);
        assert_eq!(Num::int(-4).pow(Num::ratio(1, 2)), None);
    }

    #[test]
    fn exact_sqrt_of_perfect_squares() {
        assert_eq!(Num::ratio(9, 4).exact_sqrt(), Some(Num::ratio(3, 2)));
        assert_eq!(Num::int(2).exact_sqrt(), None);
    }
}
