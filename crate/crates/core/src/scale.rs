//! The scale parameter `delta` as an exact rational.
//!
//! Every radius used by the construction has the form `delta^k * q` for a
//! small rational `q`. Keeping `delta` rational lets those radii be evaluated
//! as a single correctly rounded division, so comparisons such as
//! `r_k >= delta^k / 4` never fail by an ulp.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// `delta = num / den` in lowest terms, with `0 < delta < 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Delta {
    num: u64,
    den: u64,
}

impl Delta {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidParameter(format!("delta = {num}/{den} must be positive")));
        }
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        if 2 * (num as u128) >= den as u128 {
            return Err(Error::InvalidParameter(format!(
                "delta = {num}/{den} must lie in (0, 1/2)"
            )));
        }
        Ok(Delta { num, den })
    }

    /// Accepts `"0.1"`, `"1/60"`, `"2.5e-2"`.
    pub fn parse(text: &str) -> Result<Self> {
        let q = parse_rational(text)?;
        if q <= Rational::zero() {
            return Err(Error::InvalidParameter(format!("delta {text} must be positive")));
        }
        let (n, d) = (*q.numer(), *q.denom());
        if n > u64::MAX as i128 || d > u64::MAX as i128 {
            return Err(Error::InvalidParameter(format!("delta {text} has too large a denominator")));
        }
        Delta::new(n as u64, d as u64)
    }

    /// Recovers the simplest rational that rounds to `x`.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(x > 0.0 && x < 0.5) {
            return Err(Error::InvalidParameter(format!("delta {x} must lie in (0, 1/2)")));
        }
        let (n, d) = simplest_rational(x, 1 << 40)
            .ok_or_else(|| Error::InvalidParameter(format!("delta {x} has no short rational form")))?;
        Delta::new(n, d)
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn as_rational(&self) -> Rational {
        Rational::new(self.num as i128, self.den as i128)
    }

    /// `floor(1/delta)`, the largest radius draw.
    pub fn max_draw(&self) -> u32 {
        (self.den / self.num) as u32
    }

    /// Number of equally likely radius draws, `floor(1/delta) + 1`.
    pub fn support_size(&self) -> u32 {
        self.max_draw() + 1
    }

    /// `delta^k` for any integer `k`.
    pub fn pow(&self, k: i32) -> f64 {
        self.scaled_pow(k, 1, 1)
    }

    /// `delta^k * (p / q)` as one rounding.
    pub fn scaled_pow(&self, k: i32, p: u64, q: u64) -> f64 {
        let (top, bottom) = if k >= 0 { (self.num, self.den) } else { (self.den, self.num) };
        let e = k.unsigned_abs();
        match (checked_pow(top, e), checked_pow(bottom, e)) {
            (Some(t), Some(b)) => match (t.checked_mul(p as u128), b.checked_mul(q as u128)) {
                (Some(n), Some(d)) => ratio_to_f64(n, d),
                _ => self.value().powi(k) * (p as f64 / q as f64),
            },
            _ => self.value().powi(k) * (p as f64 / q as f64),
        }
    }

    /// Exact `delta^k`.
    pub fn pow_exact(&self, k: i32) -> Rational {
        let base = self.as_rational();
        if k >= 0 {
            num_traits::pow(base, k as usize)
        } else {
            num_traits::pow(Rational::one() / base, k.unsigned_abs() as usize)
        }
    }

    /// Inner radius `(delta^k + a * delta^(k+1)) / 4 = delta^k (den + a num) / (4 den)`.
    pub fn inner_radius(&self, k: i32, draw: u32) -> f64 {
        self.scaled_pow(k, self.den + draw as u64 * self.num, 4 * self.den)
    }

    /// Whether `delta <= 1/60`, the range in which the cube inclusion constants are proved.
    pub fn satisfies_cube_hypothesis(&self) -> bool {
        60 * self.num as u128 <= self.den as u128
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn checked_pow(base: u64, e: u32) -> Option<u128> {
    (base as u128).checked_pow(e)
}

/// Correctly rounded when both operands are below 2^53.
fn ratio_to_f64(n: u128, d: u128) -> f64 {
    const LIMIT: u128 = 1 << 53;
    if n < LIMIT && d < LIMIT {
        n as f64 / d as f64
    } else {
        let g = n.gcd(&d);
        (n / g) as f64 / (d / g) as f64
    }
}

/// Parses a decimal, scientific or `p/q` literal into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse {text:?} as a rational number"));
    if let Some((p, q)) = text.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let value: i128 = all.parse().map_err(|_| bad())?;
    let scale = 10i128.checked_pow(frac_part.len() as u32).ok_or_else(bad)?;
    let mut q = Rational::new(value, scale);
    let ten = Rational::from_integer(10);
    if exponent >= 0 {
        q *= num_traits::pow(ten, exponent as usize);
    } else {
        q /= num_traits::pow(ten, exponent.unsigned_abs() as usize);
    }
    Ok(if negative { -q } else { q })
}

/// Smallest-denominator fraction `p/q` (q <= max_den) with `p as f64 / q as f64 == x`.
fn simplest_rational(x: f64, max_den: u64) -> Option<(u64, u64)> {
    // Continued-fraction convergents and their semiconvergents.
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a > u32::MAX as f64 {
            break;
        }
        let a = a as u64;
        for t in 1..=a {
            let (p, q) = (t.checked_mul(p1)?.checked_add(p0)?, t.checked_mul(q1)?.checked_add(q0)?);
            if q > max_den {
                return None;
            }
            if p as f64 / q as f64 == x {
                return Some((p, q));
            }
        }
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = rest - rest.floor();
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    if q1 > 0 && q1 <= max_den && p1 as f64 / q1 as f64 == x {
        Some((p1, q1))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        assert_eq!(Delta::parse("0.1").unwrap(), Delta::new(1, 10).unwrap());
        assert_eq!(Delta::parse("1/60").unwrap(), Delta::new(1, 60).unwrap());
        assert_eq!(Delta::parse("2.5e-2").unwrap(), Delta::new(1, 40).unwrap());
        assert!(Delta::parse("0.5").is_err());
        assert!(Delta::parse("abc").is_err());
        assert_eq!(parse_rational("1.53").unwrap(), Rational::new(153, 100));
        assert_eq!(parse_rational("-0.04").unwrap(), Rational::new(-1, 25));
    }

    #[test]
    fn recovers_from_floats() {
        assert_eq!(Delta::from_f64(0.1).unwrap(), Delta::new(1, 10).unwrap());
        assert_eq!(Delta::from_f64(1.0 / 60.0).unwrap(), Delta::new(1, 60).unwrap());
        assert_eq!(Delta::from_f64(0.25).unwrap(), Delta::new(1, 4).unwrap());
    }

    #[test]
    fn powers_are_exact_on_small_ratios() {
        let d = Delta::new(1, 10).unwrap();
        assert_eq!(d.pow(-2), 100.0);
        assert_eq!(d.pow(0), 1.0);
        assert_eq!(d.pow(2), 0.01);
        assert_eq!(d.support_size(), 11);
        assert_eq!(d.inner_radius(0, 0), 0.25);
        assert_eq!(d.inner_radius(0, 10), 0.5);
        assert_eq!(d.inner_radius(0, 5), 0.375);
        assert!(!d.satisfies_cube_hypothesis());
        assert!(Delta::new(1, 60).unwrap().satisfies_cube_hypothesis());
    }

    #[test]
    fn radii_respect_lemma_window() {
        for delta in [Delta::new(1, 10).unwrap(), Delta::new(1, 60).unwrap(), Delta::new(3, 7).unwrap()] {
            for k in -4..6 {
                for a in 0..=delta.max_draw() {
                    let r = delta.inner_radius(k, a);
                    assert!(r >= delta.pow(k) / 4.0 && r <= delta.pow(k) / 2.0, "{delta} {k} {a}");
                }
            }
        }
    }
}
