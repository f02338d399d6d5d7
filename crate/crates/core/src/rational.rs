//! Exact rational helpers: decimal formatting/parsing and rank computations.

use std::fmt;

use num_bigint::{BigInt, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Failure to parse an exact number.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as an exact rational")]
pub struct ParseRationalError(pub String);

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Formats a rational as a terminating decimal when possible (`"129"`, `"-0.5"`),
/// otherwise as `"p/q"`.
pub fn to_exact_string(q: &BigRational) -> String {
    if q.is_integer() {
        return q.numer().to_string();
    }
    let mut den = q.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
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
    let digits = twos.max(fives);
    let scaled = q * BigRational::from_integer(BigInt::from(10).pow(digits));
    debug_assert!(scaled.is_integer());
    let mag = scaled.numer().abs().to_string();
    let width = digits as usize + 1;
    let padded = format!("{mag:0>width$}");
    let (whole, fractional) = padded.split_at(padded.len() - digits as usize);
    let sign = if q.is_negative() { "-" } else { "" };
    format!("{sign}{whole}.{fractional}")
}

/// Parses integers, terminating decimals (optionally with exponent) and `p/q`.
pub fn parse_exact(s: &str) -> Result<BigRational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (negative, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, fractional) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && fractional.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(fractional.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits: BigInt = format!("0{whole}{fractional}").parse().map_err(|_| err())?;
    let scale = exponent - fractional.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * ten.pow(scale as u32))
    } else {
        BigRational::new(digits, ten.pow((-scale) as u32))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Wrapper whose `Display` is [`to_exact_string`].
pub struct Exact<'a>(pub &'a BigRational);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_exact_string(self.0))
    }
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // to_f64 only fails on overflow of the ratio of huge integers
        let sign = if q.numer().sign() == BigSign::Minus { -1.0 } else { 1.0 };
        sign * f64::INFINITY
    })
}

/// Exact conversion of a finite `f64`.
pub fn from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Rank of a set of integer row vectors, computed over the rationals by
/// fraction-free Gaussian elimination.
pub fn rank<const D: usize>(rows: &[[BigInt; D]]) -> usize {
    let mut m: Vec<[BigInt; D]> = rows.to_vec();
    let mut rank = 0;
    for col in 0..D {
        let Some(pivot) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for j in 0..D {
                row[j] = &row[j] * &pivot_row[col] - &pivot_row[j] * &factor;
            }
            let g = row.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            if !g.is_zero() && !g.is_one() {
                for x in row.iter_mut() {
                    *x /= &g;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Dimension of the affine hull of a point set (`-1` style emptiness is reported as 0).
pub fn affine_rank<const D: usize>(points: &[[BigInt; D]]) -> usize {
    let Some(origin) = points.first() else {
        return 0;
    };
    let diffs: Vec<[BigInt; D]> = points[1..]
        .iter()
        .map(|p| std::array::from_fn(|j| &p[j] - &origin[j]))
        .collect();
    rank(&diffs)
}
