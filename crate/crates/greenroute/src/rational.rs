//! Exact rational arithmetic for model parameters and derived quantities.
//!
//! Every capacity, power coefficient, volume and objective value is kept as
//! an exact rational. Parameters enter as decimal strings (or JSON numbers,
//! read verbatim), so feasibility decisions and LP export never see
//! floating-point rounding.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

/// Largest decimal exponent accepted when parsing (`1e4096` parses, `1e5000`
/// does not). Keeps hostile inputs from allocating huge integers.
const MAX_EXPONENT: i64 = 4096;

/// Exact rational number.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rat(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct ParseRatError {
    pub literal: String,
    pub reason: String,
}

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    /// p/q with q != 0.
    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    /// Exact decimal rendering if the denominator is of the form 2^a·5^b,
    /// otherwise `None`.
    pub fn to_decimal_string(&self) -> Option<String> {
        let (num, den) = (self.0.numer(), self.0.denom());
        let mut d = den.clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let mut twos = 0u32;
        let mut fives = 0u32;
        while (&d % &two).is_zero() {
            d /= &two;
            twos += 1;
        }
        while (&d % &five).is_zero() {
            d /= &five;
            fives += 1;
        }
        if !d.is_one() {
            return None;
        }
        let scale = twos.max(fives);
        let factor = two.pow(scale - twos) * five.pow(scale - fives);
        let scaled = num * factor;
        Some(place_decimal_point(&scaled, scale as usize))
    }

    /// Decimal approximation with `sig` significant digits, rounded half away
    /// from zero. Used only for coefficients whose exact decimal does not
    /// terminate.
    pub fn to_approx_string(&self, sig: usize) -> String {
        assert!(sig >= 1);
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.is_negative();
        let a = self.0.numer().abs();
        let b = self.0.denom().clone();
        // Pick k so that round(a·10^k / b) has exactly `sig` digits.
        let mut k: i64 = sig as i64 + digit_count(&b) as i64 - digit_count(&a) as i64;
        let ten = BigInt::from(10);
        loop {
            let scaled = round_div(&(&a * pow10(k)), &b);
            let n = digit_count(&scaled);
            match n.cmp(&sig) {
                Ordering::Greater => k -= 1,
                Ordering::Less => k += 1,
                Ordering::Equal => {
                    let _ = &ten;
                    let digits = scaled.to_string();
                    let text = if k <= 0 {
                        // Integer with -k trailing zeros.
                        format!("{}{}", digits, "0".repeat((-k) as usize))
                    } else if (k as usize) < digits.len() {
                        let point = digits.len() - k as usize;
                        trim_fraction(&format!("{}.{}", &digits[..point], &digits[point..]))
                    } else {
                        let zeros = k as usize - digits.len();
                        trim_fraction(&format!("0.{}{}", "0".repeat(zeros), digits))
                    };
                    return if neg { format!("-{text}") } else { text };
                }
            }
        }
    }

    pub fn numer_denom_strings(&self) -> (String, String) {
        (self.0.numer().to_string(), self.0.denom().to_string())
    }
}

fn pow10(k: i64) -> BigInt {
    assert!(k >= 0);
    BigInt::from(10).pow(k as u32)
}

fn digit_count(n: &BigInt) -> usize {
    let s = n.abs().to_string();
    s.len()
}

/// round(a / b) half away from zero, for a ≥ 0, b > 0.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    (a * 2 + b) / (b * 2)
}

fn trim_fraction(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

/// Renders `scaled / 10^scale` exactly.
fn place_decimal_point(scaled: &BigInt, scale: usize) -> String {
    let neg = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let body = if scale == 0 {
        digits
    } else if digits.len() > scale {
        let point = digits.len() - scale;
        trim_fraction(&format!("{}.{}", &digits[..point], &digits[point..]))
    } else {
        trim_fraction(&format!("0.{}{}", "0".repeat(scale - digits.len()), digits))
    };
    if neg && body != "0" {
        format!("-{body}")
    } else {
        body
    }
}

impl fmt::Display for Rat {
    /// Exact decimal when it terminates, `p/q` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_decimal_string() {
            Some(d) => f.write_str(&d),
            None => write!(f, "{}/{}", self.0.numer(), self.0.denom()),
        }
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Accepts decimal literals (`42`, `-1.5`, `2.5e3`) and exact fractions
    /// (`1/3`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| ParseRatError {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        let t = s.trim();
        if t.is_empty() {
            return Err(err("empty"));
        }
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err("bad numerator"))?;
            let q: BigInt = q.trim().parse().map_err(|_| err("bad denominator"))?;
            if q.is_zero() {
                return Err(err("zero denominator"));
            }
            return Ok(Rat(BigRational::new(p, q)));
        }
        let (mantissa, exp) = match t.split_once(['e', 'E']) {
            Some((m, e)) => {
                let exp: i64 = e.parse().map_err(|_| err("bad exponent"))?;
                (m, exp)
            }
            None => (t, 0),
        };
        if exp.abs() > MAX_EXPONENT {
            return Err(err("exponent out of range"));
        }
        let (sign, rest) = match mantissa.as_bytes().first() {
            Some(b'-') => (-1, &mantissa[1..]),
            Some(b'+') => (1, &mantissa[1..]),
            _ => (1, mantissa),
        };
        let (int_part, frac_part) = match rest.split_once('.') {
            Some((i, f)) => (i, f),
            None => (rest, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err("no digits"));
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(err("non-digit in mantissa"));
        }
        let digits = format!("{int_part}{frac_part}");
        let unsigned: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| err("bad digits"))?
        };
        let numer = unsigned * sign;
        let scale = frac_part.len() as i64 - exp;
        let value = if scale >= 0 {
            BigRational::new(numer, pow10(scale))
        } else {
            BigRational::from_integer(numer * pow10(-scale))
        };
        Ok(Rat(value))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, rhs: Rat) -> Rat {
        Rat(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Rat> for Rat {
    type Output = Rat;
    fn add(self, rhs: &'a Rat) -> Rat {
        Rat(self.0 + &rhs.0)
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl Sub for Rat {
    type Output = Rat;
    fn sub(self, rhs: Rat) -> Rat {
        Rat(self.0 - rhs.0)
    }
}

impl<'a> Sub<&'a Rat> for Rat {
    type Output = Rat;
    fn sub(self, rhs: &'a Rat) -> Rat {
        Rat(self.0 - &rhs.0)
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl Mul for Rat {
    type Output = Rat;
    fn mul(self, rhs: Rat) -> Rat {
        Rat(self.0 * rhs.0)
    }
}

impl<'a> Mul<&'a Rat> for &Rat {
    type Output = Rat;
    fn mul(self, rhs: &'a Rat) -> Rat {
        Rat(&self.0 * &rhs.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0.clone())
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn parses_decimal_forms() {
        assert_eq!(rat("5"), Rat::from_int(5));
        assert_eq!(rat("-1.5"), Rat::from_ratio(-3, 2));
        assert_eq!(rat("0.1"), Rat::from_ratio(1, 10));
        assert_eq!(rat("2.5e2"), Rat::from_int(250));
        assert_eq!(rat("25e-1"), Rat::from_ratio(5, 2));
        assert_eq!(rat(".5"), Rat::from_ratio(1, 2));
        assert_eq!(rat("1/3"), Rat::from_ratio(1, 3));
        assert_eq!(rat("-2/6"), Rat::from_ratio(-1, 3));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1.2.3", "1/0", "1e99999", "--2"] {
            assert!(bad.parse::<Rat>().is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn terminating_display_is_exact_decimal() {
        assert_eq!(rat("10").to_string(), "10");
        assert_eq!(rat("2.50").to_string(), "2.5");
        assert_eq!(rat("-0.125").to_string(), "-0.125");
        assert_eq!(rat("1/4").to_string(), "0.25");
        assert_eq!(rat("0").to_string(), "0");
    }

    #[test]
    fn nonterminating_display_is_fraction() {
        assert_eq!(rat("1/3").to_string(), "1/3");
        assert_eq!(rat("-5/6").to_string(), "-5/6");
    }

    #[test]
    fn display_round_trips() {
        for s in ["7", "-3.25", "1/3", "0", "1000", "0.0001"] {
            let r = rat(s);
            assert_eq!(rat(&r.to_string()), r);
        }
    }

    #[test]
    fn approx_twelve_significant_digits() {
        assert_eq!(rat("1/3").to_approx_string(12), "0.333333333333");
        assert_eq!(rat("2/3").to_approx_string(12), "0.666666666667");
        assert_eq!(rat("-1/3").to_approx_string(12), "-0.333333333333");
        assert_eq!(rat("100/3").to_approx_string(12), "33.3333333333");
        assert_eq!(rat("0").to_approx_string(12), "0");
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = rat("0.1");
        let b = rat("0.2");
        assert_eq!(a + b, rat("0.3"));
        let sum: Rat = (0..10).map(|_| rat("0.1")).sum();
        assert_eq!(sum, Rat::one());
    }
}
