//! Scalar fields used by the solvers.
//!
//! Three fields are supported: exact rationals ([`Rational`]), binary64
//! (`f64`) and double-double ([`Dd`], roughly 32 significant digits).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Field operations needed by the moment solvers and kernel evaluation.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact.
    const EXACT: bool;
    /// Unit roundoff (zero for exact fields).
    const EPSILON: f64;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// Exact for every field (a binary64 value is a dyadic rational).
    fn from_f64(v: f64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_dd(d: Dd) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    /// `None` when the field cannot represent transcendental values.
    fn exp(&self) -> Option<Self>;

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    /// JSON form: a number for floating fields, `"p/q"` for rationals.
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(self.to_f64())
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const EPSILON: f64 = f64::EPSILON;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn from_dd(d: Dd) -> Self {
        d.hi + d.lo
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn exp(&self) -> Option<Self> {
        Some(f64::exp(*self))
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const EPSILON: f64 = 0.0;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_f64(v: f64) -> Self {
        Rational::from_float(v).expect("finite value")
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_dd(d: Dd) -> Self {
        Self::from_f64(d.hi) + Self::from_f64(d.lo)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }
    fn exp(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            Some(Self::one())
        } else {
            None
        }
    }
}

/// Nearest-ish binary64 value of a rational, robust to huge numerators and
/// denominators.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() {
            return v;
        }
    }
    let num = r.numer();
    let den = r.denom();
    let shift = num.bits() as i64 - den.bits() as i64;
    let (n, d) = if shift > 0 {
        (num.clone(), den.clone() << (shift as u64))
    } else {
        (num.clone() << ((-shift) as u64), den.clone())
    };
    let q = ToPrimitive::to_f64(&Rational::new(n, d)).unwrap_or(0.0);
    q * 2f64.powi(shift as i32)
}

/// Parse `"p/q"`, `"p"` or a decimal string into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Ok(p) = s.parse::<BigInt>() {
        return Some(Rational::from_integer(p));
    }
    // decimal notation, e.g. "0.25" or "-1.5e-3"
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let value: BigInt = digits.parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        Rational::from_integer(value * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(value, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Render a rational as `"p/q"` (or `"p"` for integers).
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Double-double number: unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const DD_LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

pub const DD_PI: Dd = Dd {
    hi: std::f64::consts::PI,
    lo: 1.224_646_799_147_353_2e-16,
};

pub const DD_SQRT_2PI: Dd = Dd {
    hi: 2.506_628_274_631_000_7,
    lo: -1.832_857_998_045_916_7e-16,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    fn from_parts(a: f64, b: f64) -> Self {
        let (hi, lo) = quick_two_sum(a, b);
        Dd { hi, lo }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Dd::from_parts(p, e + self.lo * b)
    }

    fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::default();
        }
        let y = self.hi.sqrt();
        let y = Dd::from(y);
        // one Newton step doubles the number of correct digits
        y + (self - y * y) / y.mul_f64(2.0)
    }

    fn exp_dd(self) -> Self {
        if self.hi > 709.0 {
            return Dd::new(f64::INFINITY, 0.0);
        }
        if self.hi < -745.0 {
            return Dd::default();
        }
        let k = (self.hi / DD_LN2.hi).round();
        let r = self - DD_LN2.mul_f64(k);
        // argument reduction by 2^-10, Taylor series, then repeated squaring
        let r = r.ldexp(-10);
        // work with s = e^r - 1 so squaring keeps the small part accurate
        let mut term = r;
        let mut s = r;
        for i in 2..=14 {
            term = term * r / Dd::from(i as f64);
            s = s + term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        let two = Dd::from(2.0);
        for _ in 0..10 {
            s = s * (s + two);
        }
        (s + Dd::from(1.0)).ldexp(k as i32)
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::from_parts(s, e + f)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::from_parts(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o.mul_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o.mul_f64(q2);
        let q3 = r.hi / o.hi;
        Dd::from_parts(q1, q2) + Dd::from(q3)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hi + self.lo)
    }
}

impl Scalar for Dd {
    const EXACT: bool = false;
    const EPSILON: f64 = 4.93e-32;

    fn zero() -> Self {
        Dd::default()
    }
    fn one() -> Self {
        Dd::from(1.0)
    }
    fn from_i64(v: i64) -> Self {
        let hi = v as f64;
        let lo = (v - hi as i64) as f64;
        Dd::from_parts(hi, lo)
    }
    fn from_f64(v: f64) -> Self {
        Dd::from(v)
    }
    fn from_rational(r: &Rational) -> Self {
        let hi = rational_to_f64(r);
        if !hi.is_finite() || hi == 0.0 {
            return Dd::from(hi);
        }
        let rest = r - Rational::from_float(hi).expect("finite");
        Dd::from_parts(hi, rational_to_f64(&rest))
    }
    fn from_dd(d: Dd) -> Self {
        d
    }
    fn to_f64(&self) -> f64 {
        self.hi + self.lo
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
    fn abs(&self) -> Self {
        if self.hi < 0.0 {
            -*self
        } else {
            *self
        }
    }
    fn exp(&self) -> Option<Self> {
        Some(self.exp_dd())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn to_rational(d: Dd) -> Rational {
        Rational::from_float(d.hi).unwrap() + Rational::from_float(d.lo).unwrap()
    }

    #[test]
    fn dd_division_is_accurate() {
        let third = Dd::from(1.0) / Dd::from(3.0);
        let err = to_rational(third) - Rational::new(1.into(), 3.into());
        assert!(Scalar::to_f64(&err).abs() < 1e-32);
    }

    #[test]
    fn dd_exp_matches_known_values() {
        let e = Dd::from(1.0).exp().unwrap();
        // e = 2.718281828459045 + 1.4456468917292502e-16
        assert_eq!(e.hi, std::f64::consts::E);
        assert!((e.lo - 1.445_646_891_729_250_2e-16).abs() < 1e-31);
        let x = Dd::from(-12.5).exp().unwrap();
        assert!(((x.to_f64() - (-12.5f64).exp()) / (-12.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn dd_sqrt_of_two_pi() {
        let s = (DD_PI.mul_f64(2.0)).sqrt();
        assert!((s - DD_SQRT_2PI).abs().hi < 1e-31);
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("4/9").unwrap(), Rational::new(4.into(), 9.into()));
        assert_eq!(parse_rational("-19/9").unwrap().to_string(), "-19/9");
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("1.5e-1").unwrap(), Rational::new(3.into(), 20.into()));
        assert!(parse_rational("1/0").is_none());
        assert_eq!(format_rational(&parse_rational("2/1").unwrap()), "2");
    }

    #[test]
    fn huge_rationals_convert() {
        let big = Rational::new(BigInt::from(1) << 2000u32, (BigInt::from(1) << 1999u32) + 1);
        assert!((rational_to_f64(&big) - 2.0).abs() < 1e-12);
    }
}
