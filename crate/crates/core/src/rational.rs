//! Exact rational helpers.
//!
//! All values in the toolkit are [`Rat`]s. The canonical text form is `"p/q"` in
//! lowest terms, or `"p"` when the denominator is one. Decimal rendering exists
//! only for human-facing reports.

use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn render(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
    let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rat::new(n, d))
}

/// Least common multiple of the denominators (1 for an empty iterator).
pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Renders `r` with `digits` significant digits, rounding half to even.
///
/// Trailing zeros after the decimal point are trimmed. This is display-only.
pub fn to_decimal(r: &Rat, digits: u32) -> String {
    assert!(digits >= 1);
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    let ten = BigInt::from(10);
    let lo = ten.pow(digits - 1);
    let hi = ten.pow(digits);

    // Find `shift` with lo <= a * 10^shift < hi.
    let mut shift: i64 = digits as i64 - 1 - magnitude(&a);
    let scaled = |shift: i64| -> Rat {
        if shift >= 0 {
            &a * Rat::from_integer(ten.pow(shift as u32))
        } else {
            &a / Rat::from_integer(ten.pow((-shift) as u32))
        }
    };
    let mut x = scaled(shift);
    while x >= Rat::from_integer(hi.clone()) {
        shift -= 1;
        x = scaled(shift);
    }
    while x < Rat::from_integer(lo.clone()) {
        shift += 1;
        x = scaled(shift);
    }
    let mut q = round_half_even(&x);
    if q == hi {
        q = lo.clone();
        shift -= 1;
    }

    let mut body = q.to_string();
    // value = q * 10^-shift
    if shift <= 0 {
        body.push_str(&"0".repeat((-shift) as usize));
    } else {
        let shift = shift as usize;
        if body.len() <= shift {
            body = format!("0.{}{}", "0".repeat(shift - body.len()), body);
        } else {
            body.insert(body.len() - shift, '.');
        }
        let trimmed = body.trim_end_matches('0').trim_end_matches('.');
        body = trimmed.to_string();
    }
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

// Approximate floor(log10(a)) from digit counts; corrected by the caller's loops.
fn magnitude(a: &Rat) -> i64 {
    let n = a.numer().to_str_radix(10).len() as i64;
    let d = a.denom().to_str_radix(10).len() as i64;
    n - d
}

fn round_half_even(x: &Rat) -> BigInt {
    let (q, r) = x.numer().div_mod_floor(x.denom());
    let twice: BigInt = &r * 2;
    match twice.cmp(x.denom()) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}

/// Lossy conversion for display and plotting only.
pub fn approx_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_nonnegative(r: &Rat) -> bool {
    r.numer().sign() != Sign::Minus
}

/// Serde adapter storing a [`Rat`] as its `"p/q"` string.
pub mod serde_rat {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&render(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rat_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(render))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod serde_opt_rat {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&render(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rat>, D::Error> {
        let v = Option::<String>::deserialize(d)?;
        v.map(|s| parse(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn render_forms() {
        assert_eq!(render(&rat(15, 2)), "15/2");
        assert_eq!(render(&rat(4, 2)), "2");
        assert_eq!(render(&rat(-3, 6)), "-1/2");
        assert_eq!(render(&int(0)), "0");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
        assert!(parse("").is_err());
        assert_eq!(parse(" 6/4 ").unwrap(), rat(3, 2));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&rat(15, 2), 20), "7.5");
        assert_eq!(to_decimal(&rat(1, 3), 20), "0.33333333333333333333");
        assert_eq!(to_decimal(&rat(2, 3), 20), "0.66666666666666666667");
        assert_eq!(to_decimal(&int(123), 20), "123");
        assert_eq!(to_decimal(&rat(-6, 5), 20), "-1.2");
        assert_eq!(to_decimal(&rat(1, 1000), 3), "0.001");
        // Ties go to even.
        assert_eq!(to_decimal(&rat(125, 100), 2), "1.2");
        assert_eq!(to_decimal(&rat(135, 100), 2), "1.4");
        assert_eq!(to_decimal(&rat(995, 1), 2), "1000");
        assert_eq!(to_decimal(&rat(99999, 1000), 3), "100");
    }

    #[test]
    fn lcm_of_denominators() {
        let v = [rat(1, 2), rat(1, 2), rat(1, 3), rat(2, 3)];
        assert_eq!(lcm_denominators(&v), BigInt::from(6));
        assert_eq!(lcm_denominators(std::iter::empty()), BigInt::from(1));
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
            let r = rat(n, d);
            prop_assert_eq!(parse(&render(&r)).unwrap(), r);
        }
    }
}
