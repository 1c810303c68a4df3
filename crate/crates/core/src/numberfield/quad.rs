//! Elements `x + y·√D` of a real quadratic field.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::{int, BigRat};
use crate::error::{Error, Result};

/// `x + y·√d` with exact rational coordinates. `d` is carried so that the
/// arithmetic operators can be implemented directly.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuadElem {
    pub d: i64,
    pub x: BigRat,
    pub y: BigRat,
}

impl QuadElem {
    pub fn new(d: i64, x: BigRat, y: BigRat) -> Self {
        Self { d, x, y }
    }

    pub fn from_rat(d: i64, x: BigRat) -> Self {
        Self::new(d, x, BigRat::zero())
    }

    pub fn from_int(d: i64, n: i64) -> Self {
        Self::from_rat(d, int(n))
    }

    pub fn one(d: i64) -> Self {
        Self::from_int(d, 1)
    }

    /// `√d` itself.
    pub fn sqrt_d(d: i64) -> Self {
        Self::new(d, BigRat::zero(), BigRat::one())
    }

    /// `(u + v√d)/w`.
    pub fn from_ints(d: i64, u: i64, v: i64, w: i64) -> Self {
        let w = BigInt::from(w);
        Self::new(
            d,
            BigRat::new(BigInt::from(u), w.clone()),
            BigRat::new(BigInt::from(v), w),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.y.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.d, self.x.clone(), -self.y.clone())
    }

    pub fn norm(&self) -> BigRat {
        &self.x * &self.x - int(self.d) * &self.y * &self.y
    }

    pub fn trace(&self) -> BigRat {
        &self.x + &self.x
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        let n = self.norm();
        Ok(Self::new(self.d, &self.x / &n, -(&self.y / &n)))
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(self.d);
        let mut b = base;
        let mut e = e.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Writes the element as `(X + Y√d)/den` with `X, Y, den` integers,
    /// `den > 0` and `gcd(X, Y, den) = 1`.
    pub fn integral_parts(&self) -> (BigInt, BigInt, BigInt) {
        let den = self.x.denom().lcm(self.y.denom());
        let xx = self.x.numer() * (&den / self.x.denom());
        let yy = self.y.numer() * (&den / self.y.denom());
        (xx, yy, den)
    }

    /// Sign under the real embedding `place` (1 sends √d to the positive root,
    /// 2 to the negative one). Exact.
    pub fn sign_at(&self, place: u8) -> Ordering {
        let y = if place == 1 { self.y.clone() } else { -self.y.clone() };
        let sx = self.x.cmp(&BigRat::zero());
        let sy = y.cmp(&BigRat::zero());
        match (sx, sy) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (a, b) if a == b => a,
            (a, _) => {
                // opposite signs: compare x^2 with d*y^2
                let lhs = &self.x * &self.x;
                let rhs = int(self.d) * &y * &y;
                match lhs.cmp(&rhs) {
                    Ordering::Greater => a,
                    Ordering::Less => a.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn is_totally_positive(&self) -> bool {
        self.sign_at(1) == Ordering::Greater && self.sign_at(2) == Ordering::Greater
    }

    /// Floating-point value under the real embedding `place`.
    pub fn embed(&self, place: u8) -> f64 {
        let s = (self.d as f64).sqrt();
        let y = super::rational::to_f64(&self.y);
        let x = super::rational::to_f64(&self.x);
        if place == 1 {
            x + y * s
        } else {
            x - y * s
        }
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.x.is_zero(), self.y.is_zero()) {
            (_, true) => write!(f, "{}", self.x),
            (true, false) => write!(f, "{}*sqrt({})", self.y, self.d),
            (false, false) => {
                if self.y.is_negative() {
                    write!(f, "{} - {}*sqrt({})", self.x, -self.y.clone(), self.d)
                } else {
                    write!(f, "{} + {}*sqrt({})", self.x, self.y, self.d)
                }
            }
        }
    }
}

impl<'a> Add<&'a QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn add(self, o: &QuadElem) -> QuadElem {
        debug_assert_eq!(self.d, o.d);
        QuadElem::new(self.d, &self.x + &o.x, &self.y + &o.y)
    }
}

impl<'a> Sub<&'a QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn sub(self, o: &QuadElem) -> QuadElem {
        debug_assert_eq!(self.d, o.d);
        QuadElem::new(self.d, &self.x - &o.x, &self.y - &o.y)
    }
}

impl<'a> Mul<&'a QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn mul(self, o: &QuadElem) -> QuadElem {
        debug_assert_eq!(self.d, o.d);
        QuadElem::new(
            self.d,
            &self.x * &o.x + int(self.d) * &self.y * &o.y,
            &self.x * &o.y + &self.y * &o.x,
        )
    }
}

impl Mul for QuadElem {
    type Output = QuadElem;
    fn mul(self, o: QuadElem) -> QuadElem {
        &self * &o
    }
}

impl Add for QuadElem {
    type Output = QuadElem;
    fn add(self, o: QuadElem) -> QuadElem {
        &self + &o
    }
}

impl Sub for QuadElem {
    type Output = QuadElem;
    fn sub(self, o: QuadElem) -> QuadElem {
        &self - &o
    }
}

/// Panics on division by zero, like the rational types it wraps.
#[allow(clippy::suspicious_arithmetic_impl)]
impl<'a> Div<&'a QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn div(self, o: &QuadElem) -> QuadElem {
        self * &o.inv().expect("division by zero QuadElem")
    }
}

impl Neg for QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        QuadElem::new(self.d, -self.x, -self.y)
    }
}

impl Neg for &QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        -self.clone()
    }
}
