//! Exact rational arithmetic helpers shared by every stage of the pipeline.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses a decimal literal (`12`, `-0.25`, `3.`) or a fraction (`1/3`) exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    if body.is_empty() {
        return None;
    }
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let numerator: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denominator = num_traits::pow(BigInt::from(10), frac.len());
    let value = Rational::new(numerator, denominator);
    Some(if negative { -value } else { value })
}

/// Renders a rational as an exact decimal when its denominator divides a power
/// of ten, and as `p/q` otherwise. Integers always carry a `.0` suffix.
pub fn format_rational(q: &Rational) -> String {
    let mut den = q.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", q.numer(), q.denom());
    }
    let places = twos.max(fives);
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = (q * Rational::from_integer(scale.clone())).to_integer();
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let (whole, frac) = if places == 0 {
        (digits, "0".to_string())
    } else if digits.len() > places {
        let (w, f) = digits.split_at(digits.len() - places);
        (w.to_string(), f.to_string())
    } else {
        ("0".to_string(), format!("{}{}", "0".repeat(places - digits.len()), digits))
    };
    format!("{}{}.{}", if negative { "-" } else { "" }, whole, frac)
}

/// Minimal decimal rendering used by the surface pretty-printer: integers have
/// no fractional part.
pub fn format_rational_plain(q: &Rational) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format_rational(q)
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}
