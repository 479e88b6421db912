use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational; always stored reduced with a positive denominator.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Accepts `"p/q"`, integers and plain decimals such as `"0.83"` or `"-1.5e-3"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::parse("empty rational"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| Error::parse(format!("bad numerator in {s:?}")))?;
        let q: BigInt = q.trim().parse().map_err(|_| Error::parse(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| Error::parse(format!("bad exponent in {s:?}")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::parse(format!("not a number: {s:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(Error::parse(format!("not a number: {s:?}")));
    }
    let mut num: BigInt = digits.parse().map_err(|_| Error::parse(format!("not a number: {s:?}")))?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Ok(if scale >= 0 { Rational::from_integer(num * pow) } else { Rational::new(num, pow) })
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Huge operands: shift both down to keep the quotient representable.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 900).max(0) as usize;
    let shift_d = (db - 900).max(0) as usize;
    let n = (r.numer() >> shift_n).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi(shift_n as i32 - shift_d as i32)
}

/// Nearest rational with the given denominator (ties away from zero).
pub fn rat_from_f64_rounded(x: f64, den: u64) -> Rational {
    let exact = Rational::from_float(x).unwrap_or_else(Rational::zero);
    let d = BigInt::from(den);
    let scaled = &exact * Rational::from_integer(d.clone());
    let floor = scaled.floor();
    let frac = &scaled - &floor;
    let half = rat(1, 2);
    let n =
        if frac > half || (frac == half && scaled.is_positive()) { floor.to_integer() + 1 } else { floor.to_integer() };
    Rational::new(n, d)
}

pub(crate) fn lcm_of_denominators<'a>(it: impl Iterator<Item = &'a Rational>) -> BigInt {
    it.fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-0.83").unwrap(), rat(-83, 100));
        assert_eq!(parse_rational("1.5e-3").unwrap(), rat(3, 2000));
        assert_eq!(parse_rational("12").unwrap(), rat(12, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn rounding_to_denominator() {
        assert_eq!(rat_from_f64_rounded(0.3145, 10), rat(3, 10));
        assert_eq!(rat_from_f64_rounded(-8.697, 10), rat(-87, 10));
        assert_eq!(rat_from_f64_rounded(-4.31585, 10000), rat(-43159, 10000));
    }

    #[test]
    fn display() {
        assert_eq!(rational_to_string(&rat(-6, 4)), "-3/2");
        assert_eq!(rational_to_string(&rat(4, 2)), "2");
    }

    #[test]
    fn huge_to_f64() {
        let big = Rational::new(num_traits::pow(BigInt::from(10), 400), num_traits::pow(BigInt::from(10), 399));
        assert!((rat_to_f64(&big) - 10.0).abs() < 1e-12);
    }
}
