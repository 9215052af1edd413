//! Exact time and size arithmetic.
//!
//! Link weights, file sizes and every derived time value are kept as exact
//! rationals. Documents carry them as decimal strings (`"2.5"`), plain
//! integers, or fractions (`"7/3"`).

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};
use serde::{de, Deserializer, Serializer};
use thiserror::Error;

/// Exact rational used for weights, sizes and times.
pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid number {text:?}: {reason}")]
pub struct ParseRationalError {
    pub text: String,
    pub reason: &'static str,
}

fn parse_err(text: &str, reason: &'static str) -> ParseRationalError {
    ParseRationalError {
        text: text.to_string(),
        reason,
    }
}

/// Parses `"12"`, `"-0.25"`, `"1.5e2"` or `"7/3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(parse_err(text, "empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num
            .trim()
            .parse()
            .map_err(|_| parse_err(text, "bad numerator"))?;
        let den: i64 = den
            .trim()
            .parse()
            .map_err(|_| parse_err(text, "bad denominator"))?;
        if den == 0 {
            return Err(parse_err(text, "zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..]
                .parse()
                .map_err(|_| parse_err(text, "bad exponent"))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(parse_err(text, "no digits"));
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(parse_err(text, "unexpected character"));
    }

    let mut numer: i64 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        numer = numer
            .checked_mul(10)
            .and_then(|n| n.checked_add(i64::from(b - b'0')))
            .ok_or_else(|| parse_err(text, "too many digits"))?;
    }
    let scale = exponent - frac_part.len() as i32;
    let pow = |e: u32| {
        10i64
            .checked_pow(e)
            .ok_or_else(|| parse_err(text, "exponent out of range"))
    };
    let mut value = if scale >= 0 {
        let factor = pow(scale as u32)?;
        Rational::from_integer(
            numer
                .checked_mul(factor)
                .ok_or_else(|| parse_err(text, "value out of range"))?,
        )
    } else {
        Rational::new(numer, pow((-scale) as u32)?)
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Renders a rational exactly: integers plainly, terminating decimals in
/// positional notation, anything else as `numer/denom`.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    let mut den = *value.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let places = twos.max(fives);
    let Some(shift) = 10i64.checked_pow(places) else {
        return format!("{}/{}", value.numer(), value.denom());
    };
    let Some(scaled) = (value * Rational::from_integer(shift))
        .to_integer()
        .checked_abs()
    else {
        return format!("{}/{}", value.numer(), value.denom());
    };
    let sign = if value.is_negative() { "-" } else { "" };
    let int = scaled / shift;
    let frac = scaled % shift;
    format!("{sign}{int}.{frac:0width$}", width = places as usize)
}

/// `value` as the smallest integer count of `1/scale` ticks that is not below it.
pub(crate) fn ceil_ticks(value: &Rational, scale: i64) -> i64 {
    (value * Rational::from_integer(scale)).ceil().to_integer()
}

/// `value` as an exact count of `1/scale` ticks. Panics if not representable.
pub(crate) fn exact_ticks(value: &Rational, scale: i64) -> i64 {
    let scaled = value * Rational::from_integer(scale);
    assert!(
        scaled.is_integer(),
        "{value} is not a multiple of 1/{scale}"
    );
    scaled.to_integer()
}

pub(crate) fn lcm_of_denoms<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i64 {
    values.into_iter().fold(1i64, |acc, v| acc.lcm(v.denom()))
}

pub(crate) fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter: rationals travel as exact strings and are accepted as
/// strings or JSON numbers.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rational, D::Error> {
        de.deserialize_any(RationalVisitor)
    }

    struct RationalVisitor;

    impl<'de> de::Visitor<'de> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or a decimal string")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
            Ok(Rational::from_integer(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
            i64::try_from(v)
                .map(Rational::from_integer)
                .map_err(|_| E::custom("integer out of range"))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
            // Shortest round-trip repr, so 0.1 stays 1/10.
            parse_rational(&format!("{v}")).map_err(E::custom)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
            parse_rational(v).map_err(E::custom)
        }
    }
}

/// Same as [`serde_rational`] for optional fields.
pub mod serde_opt_rational {
    use super::*;
    use serde::Deserialize;

    pub fn serialize<S: Serializer>(value: &Option<Rational>, ser: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => ser.serialize_str(&format_rational(v)),
            None => ser.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Rational>, D::Error> {
        #[derive(Deserialize)]
        struct Wrapper(#[serde(with = "super::serde_rational")] Rational);
        Ok(Option::<Wrapper>::deserialize(de)?.map(|w| w.0))
    }
}
