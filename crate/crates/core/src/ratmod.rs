//! Rationals modulo the integers.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Neg, Sub};
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::gcd;
use crate::error::{Error, Result};

/// An element of Q/Z in canonical form `num/den` with `0 <= num < den` and `gcd(num, den) = 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct RationalModZ {
    num: u64,
    den: u64,
}

impl RationalModZ {
    pub const ZERO: RationalModZ = RationalModZ { num: 0, den: 1 };
    pub const HALF: RationalModZ = RationalModZ { num: 1, den: 2 };

    /// Reduces `num/den` modulo 1. Panics when `den == 0`.
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let r = num.rem_euclid(den);
        let g = gcd(r, den);
        let (n, d) = (r / g, den / g);
        RationalModZ {
            num: n as u64,
            den: d as u64,
        }
    }

    pub fn from_big(x: &BigRational) -> Result<Self> {
        let den = x.denom();
        let num = x.numer().mod_floor_big(den);
        let d = den.to_i128().ok_or(Error::Overflow)?;
        let n = num.to_i128().ok_or(Error::Overflow)?;
        if d > u64::MAX as i128 {
            return Err(Error::Overflow);
        }
        Ok(Self::new(n, d))
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn mul_int(&self, k: i128) -> Self {
        let n = (self.num as i128 % self.den as i128) * (k.rem_euclid(self.den as i128));
        Self::new(n, self.den as i128)
    }

    /// Multiplies by a rational `k/m` that is assumed to give a well-defined result.
    pub fn scale(&self, k: i128, m: i128) -> Self {
        Self::new(self.num as i128 * k, self.den as i128 * m)
    }

    /// Numerator over a fixed denominator `d`, which must be a multiple of `self.den`.
    pub fn over(&self, d: u64) -> u64 {
        debug_assert!(d.is_multiple_of(self.den));
        self.num * (d / self.den)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    /// Additive order of the element.
    pub fn order(&self) -> u64 {
        self.den
    }
}

trait ModFloorBig {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt;
}

impl ModFloorBig for BigInt {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }
}

impl Default for RationalModZ {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Add for RationalModZ {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let d = self.den as i128 * o.den as i128;
        Self::new(self.num as i128 * o.den as i128 + o.num as i128 * self.den as i128, d)
    }
}

impl AddAssign for RationalModZ {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for RationalModZ {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for RationalModZ {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-(self.num as i128), self.den as i128)
    }
}

impl core::iter::Sum for RationalModZ {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for RationalModZ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by the representative in `[0, 1)`.
impl Ord for RationalModZ {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for RationalModZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for RationalModZ {
    type Err = Error;

    /// Accepts `p/q` or a bare integer; signs and unreduced fractions are normalized.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Invalid(alloc::format!("not a rational: {s:?}"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p: i128 = p.trim().parse().map_err(|_| bad())?;
                let q: i128 = q.trim().parse().map_err(|_| bad())?;
                if q == 0 {
                    return Err(bad());
                }
                Ok(Self::new(p, q))
            }
            None => {
                let p: i128 = s.parse().map_err(|_| bad())?;
                Ok(Self::new(p, 1))
            }
        }
    }
}

/// Exact rational helper: the value of `x` reduced into Q/Z.
pub fn mod_one(x: &BigRational) -> Result<RationalModZ> {
    if x.is_zero() {
        return Ok(RationalModZ::ZERO);
    }
    RationalModZ::from_big(x)
}
