//! Coefficient types: exact rationals, reals and complex numbers.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

pub type C64 = Complex64;

pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// Whether arithmetic is exact, i.e. residuals are expected to be literally zero.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    /// Exact rationals accept any finite float (as its binary value).
    fn from_f64(v: f64) -> Option<Self>;
    fn from_rational(q: &BigRational) -> Self;
    /// `None` for a non-real value in a real type.
    fn from_c64(z: C64) -> Option<Self>;
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> C64;

    fn is_negligible(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= tol
        }
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v)
    }

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn from_c64(z: C64) -> Option<Self> {
        if z.im == 0.0 {
            BigRational::from_float(z.re)
        } else {
            None
        }
    }

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn to_c64(&self) -> C64 {
        C64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn from_rational(q: &BigRational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }

    fn from_c64(z: C64) -> Option<Self> {
        (z.im == 0.0 && z.re.is_finite()).then_some(z.re)
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn to_c64(&self) -> C64 {
        C64::new(*self, 0.0)
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then(|| C64::new(v, 0.0))
    }

    fn from_rational(q: &BigRational) -> Self {
        C64::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn from_c64(z: C64) -> Option<Self> {
        (z.re.is_finite() && z.im.is_finite()).then_some(z)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn to_c64(&self) -> C64 {
        *self
    }
}

/// Parses `"p/q"`, `"p"` or a decimal string into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Ok(p) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(p));
    }
    // decimal: a.b with optional exponent
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut r = BigRational::from_integer(num);
    for _ in 0..scale.unsigned_abs() {
        r = if scale > 0 { r * ten.clone() } else { r / ten.clone() };
    }
    Some(r)
}

pub fn factorial<S: Scalar>(k: usize) -> S {
    (1..=k).fold(S::one(), |acc, i| acc * S::from_i64(i as i64))
}

pub fn rational_from_usize(v: usize) -> BigRational {
    BigRational::from_usize(v).expect("usize fits")
}
