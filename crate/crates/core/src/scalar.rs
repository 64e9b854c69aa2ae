//! Scalar carriers: exact big rationals and tolerance-compared floats.
//!
//! All algorithms are generic over [`Scalar`]. `Rational` never rounds; `Approx`
//! compares with an absolute tolerance that is process-global.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Order of a Wasserstein cost, always `>= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rho(f64);

impl Rho {
    pub const ONE: Rho = Rho(1.0);
    pub const TWO: Rho = Rho(2.0);

    pub fn new(r: f64) -> Result<Rho> {
        if !r.is_finite() || r < 1.0 {
            return Err(Error::Parameter(format!("rho must be >= 1, got {r}")));
        }
        Ok(Rho(r))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn as_int(self) -> Option<u32> {
        if self.0.fract() == 0.0 && self.0 <= u32::MAX as f64 {
            Some(self.0 as u32)
        } else {
            None
        }
    }
}

impl fmt::Display for Rho {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_ratio(n: i64, d: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Conversion of a finite float (exact for rationals).
    fn from_f64(x: f64) -> Option<Self>;
    /// Parses `"p/q"`, integers and decimals (with optional exponent).
    fn parse(s: &str) -> Result<Self>;
    /// `|self|^rho`; exact types reject non-integer `rho`.
    fn abs_pow(&self, rho: Rho) -> Result<Self>;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn pos_part(&self) -> Self {
        if self.is_positive() {
            self.clone()
        } else {
            Self::zero()
        }
    }
    fn neg_part(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            Self::zero()
        }
    }
    fn max_of(&self, other: &Self) -> Self {
        if other > self {
            other.clone()
        } else {
            self.clone()
        }
    }
    fn min_of(&self, other: &Self) -> Self {
        if other < self {
            other.clone()
        } else {
            self.clone()
        }
    }
    /// `(self)^(1/rho)` as a float.
    fn root(&self, rho: Rho) -> f64 {
        if rho.value() == 1.0 {
            self.to_f64()
        } else {
            self.to_f64().max(0.0).powf(1.0 / rho.value())
        }
    }
}

/// Sum of an iterator of scalars.
pub fn sum<S: Scalar, I: IntoIterator<Item = S>>(it: I) -> S {
    it.into_iter().fold(S::zero(), |a, b| a + b)
}

// ---------------------------------------------------------------- rationals

fn parse_int(s: &str) -> Result<BigInt> {
    BigInt::from_str(s).map_err(|_| Error::Parse(format!("invalid integer `{s}`")))
}

/// Exact parse of `p/q`, integers and terminating decimals like `-1.25e-3`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty scalar".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_int(p.trim())?;
        let q = parse_int(q.trim())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("invalid exponent in `{s}`")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if (int_part.is_empty() && frac_part.is_empty())
        || !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::Parse(format!("invalid number `{s}`")));
    }
    let all = format!("{int_part}{frac_part}");
    let num = parse_int(if all.is_empty() { "0" } else { &all })?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut r = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
    fn from_ratio(n: i64, d: i64) -> Self {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_f64(x: f64) -> Option<Self> {
        Rational::from_float(x)
    }
    fn parse(s: &str) -> Result<Self> {
        parse_rational(s)
    }
    fn abs_pow(&self, rho: Rho) -> Result<Self> {
        let n = rho.as_int().ok_or_else(|| {
            Error::Parameter(format!("exact scalars need an integer rho, got {rho}"))
        })?;
        Ok(num_traits::pow(Signed::abs(self), n as usize))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

// ---------------------------------------------------------------- floats

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3D71_9799_812D_EA11); // 1e-12

/// Absolute tolerance used by every `Approx` comparison.
pub fn tolerance() -> f64 {
    f64::from_bits(TOLERANCE_BITS.load(AtomicOrdering::Relaxed))
}

pub fn set_tolerance(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tau}")));
    }
    TOLERANCE_BITS.store(tau.to_bits(), AtomicOrdering::Relaxed);
    Ok(())
}

/// Float with tolerance-aware equality and ordering.
#[derive(Clone, Copy, Debug, Default)]
pub struct Approx(pub f64);

impl PartialEq for Approx {
    fn eq(&self, other: &Self) -> bool {
        (self.0 - other.0).abs() <= tolerance()
    }
}

impl PartialOrd for Approx {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        if self == other {
            Some(std::cmp::Ordering::Equal)
        } else {
            self.0.partial_cmp(&other.0)
        }
    }
}

impl fmt::Display for Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! approx_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Approx {
            type Output = Approx;
            fn $m(self, rhs: Approx) -> Approx {
                Approx(self.0 $op rhs.0)
            }
        }
    };
}
approx_op!(Add, add, +);
approx_op!(Sub, sub, -);
approx_op!(Mul, mul, *);
approx_op!(Div, div, /);

impl Neg for Approx {
    type Output = Approx;
    fn neg(self) -> Approx {
        Approx(-self.0)
    }
}

impl Scalar for Approx {
    const EXACT: bool = false;

    fn zero() -> Self {
        Approx(0.0)
    }
    fn one() -> Self {
        Approx(1.0)
    }
    fn from_i64(n: i64) -> Self {
        Approx(n as f64)
    }
    fn from_ratio(n: i64, d: i64) -> Self {
        Approx(n as f64 / d as f64)
    }
    fn to_f64(&self) -> f64 {
        self.0
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(Approx(x))
    }
    fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let v = match s.split_once('/') {
            Some((p, q)) => {
                let p: f64 = p.trim().parse().map_err(|_| Error::Parse(format!("invalid number `{s}`")))?;
                let q: f64 = q.trim().parse().map_err(|_| Error::Parse(format!("invalid number `{s}`")))?;
                p / q
            }
            None => s.parse().map_err(|_| Error::Parse(format!("invalid number `{s}`")))?,
        };
        if !v.is_finite() {
            return Err(Error::Parse(format!("non-finite scalar `{s}`")));
        }
        Ok(Approx(v))
    }
    fn abs_pow(&self, rho: Rho) -> Result<Self> {
        Ok(Approx(match rho.as_int() {
            Some(n) => self.0.abs().powi(n as i32),
            None => self.0.abs().powf(rho.value()),
        }))
    }
}
