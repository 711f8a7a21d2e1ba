//! Exact real numbers of the form (a + b√2)/2^e.
//!
//! Every gate used here has entries in ℤ[1/√2], so amplitudes, overlaps
//! and the scale factors √2ⁿ and 1/√2 stay exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// (a + b√2)/2^e in canonical form: e is minimal, and zero is (0, 0, 0).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ExactAmplitude {
    a: BigInt,
    b: BigInt,
    e: u32,
}

impl ExactAmplitude {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, e: u32) -> Self {
        let mut x = Self {
            a: a.into(),
            b: b.into(),
            e,
        };
        x.reduce();
        x
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::new(1, 0, 0)
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Self::new(n, 0, 0)
    }

    /// 1/√2 = √2/2.
    pub fn inv_sqrt2() -> Self {
        Self::new(0, 1, 1)
    }

    pub fn sqrt2() -> Self {
        Self::new(0, 1, 0)
    }

    /// √2ⁿ.
    pub fn sqrt2_pow(n: u32) -> Self {
        let half = BigInt::one() << (n / 2);
        if n % 2 == 0 {
            Self::new(half, 0, 0)
        } else {
            Self::new(0, half, 0)
        }
    }

    pub fn parts(&self) -> (&BigInt, &BigInt, u32) {
        (&self.a, &self.b, self.e)
    }

    fn reduce(&mut self) {
        if self.a.is_zero() && self.b.is_zero() {
            self.e = 0;
            return;
        }
        while self.e > 0 && self.a.is_even() && self.b.is_even() {
            self.a >>= 1;
            self.b >>= 1;
            self.e -= 1;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// The value as an integer, if it is one.
    pub fn as_integer(&self) -> Option<&BigInt> {
        (self.b.is_zero() && self.e == 0).then_some(&self.a)
    }

    /// −1, 0 or 1.
    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sa == sb || sb == 0 {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        // Opposite signs: compare a² with 2b². Equality is impossible
        // since √2 is irrational.
        let a2 = &self.a * &self.a;
        let b2 = (&self.b * &self.b) << 1;
        if a2 > b2 {
            sa
        } else {
            sb
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Multiplies by √2ᵏ.
    pub fn mul_sqrt2_pow(&self, k: u32) -> Self {
        let mut out = self.clone();
        if k % 2 == 1 {
            // (a + b√2)√2 = 2b + a√2
            out = Self {
                a: &out.b << 1,
                b: out.a,
                e: out.e,
            };
        }
        out.a <<= k / 2;
        out.b <<= k / 2;
        out.reduce();
        out
    }

    /// Divides by √2.
    pub fn div_sqrt2(&self) -> Self {
        // (a + b√2)/√2 = (a√2 + 2b)/2
        Self::new(&self.b << 1, self.a.clone(), self.e + 1)
    }

    pub fn to_f64(&self) -> f64 {
        let sqrt2 = std::f64::consts::SQRT_2;
        let (a, ea) = scaled(&self.a);
        let (b, eb) = scaled(&self.b);
        let exp = ea.max(eb);
        let value = a * 2f64.powi(ea - exp) + b * sqrt2 * 2f64.powi(eb - exp);
        value * 2f64.powi(exp - self.e as i32)
    }
}

fn sign_of(x: &BigInt) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Splits a big integer into a float mantissa and a power of two so
/// that large values convert without overflow.
fn scaled(x: &BigInt) -> (f64, i32) {
    let bits = x.bits();
    if bits <= 1000 {
        return (x.to_f64().unwrap_or(0.0), 0);
    }
    let shift = bits - 900;
    ((x >> shift).to_f64().unwrap_or(0.0), shift as i32)
}

fn align(x: &ExactAmplitude, e: u32) -> (BigInt, BigInt) {
    let shift = e - x.e;
    (&x.a << shift, &x.b << shift)
}

impl Add for &ExactAmplitude {
    type Output = ExactAmplitude;

    fn add(self, rhs: &ExactAmplitude) -> ExactAmplitude {
        let e = self.e.max(rhs.e);
        let (a1, b1) = align(self, e);
        let (a2, b2) = align(rhs, e);
        ExactAmplitude::new(a1 + a2, b1 + b2, e)
    }
}

impl Add for ExactAmplitude {
    type Output = ExactAmplitude;

    fn add(self, rhs: ExactAmplitude) -> ExactAmplitude {
        &self + &rhs
    }
}

impl AddAssign<&ExactAmplitude> for ExactAmplitude {
    fn add_assign(&mut self, rhs: &ExactAmplitude) {
        *self = &*self + rhs;
    }
}

impl Neg for ExactAmplitude {
    type Output = ExactAmplitude;

    fn neg(self) -> ExactAmplitude {
        ExactAmplitude {
            a: -self.a,
            b: -self.b,
            e: self.e,
        }
    }
}

impl Sub for &ExactAmplitude {
    type Output = ExactAmplitude;

    fn sub(self, rhs: &ExactAmplitude) -> ExactAmplitude {
        self + &(-rhs.clone())
    }
}

impl Sub for ExactAmplitude {
    type Output = ExactAmplitude;

    fn sub(self, rhs: ExactAmplitude) -> ExactAmplitude {
        &self - &rhs
    }
}

impl Mul for &ExactAmplitude {
    type Output = ExactAmplitude;

    fn mul(self, rhs: &ExactAmplitude) -> ExactAmplitude {
        // (a1 + b1√2)(a2 + b2√2) = a1a2 + 2b1b2 + (a1b2 + a2b1)√2
        let a = &self.a * &rhs.a + ((&self.b * &rhs.b) << 1);
        let b = &self.a * &rhs.b + &rhs.a * &self.b;
        ExactAmplitude::new(a, b, self.e + rhs.e)
    }
}

impl Mul for ExactAmplitude {
    type Output = ExactAmplitude;

    fn mul(self, rhs: ExactAmplitude) -> ExactAmplitude {
        &self * &rhs
    }
}

impl Zero for ExactAmplitude {
    fn zero() -> Self {
        ExactAmplitude::zero()
    }

    fn is_zero(&self) -> bool {
        ExactAmplitude::is_zero(self)
    }
}

impl One for ExactAmplitude {
    fn one() -> Self {
        ExactAmplitude::one()
    }
}

impl PartialOrd for ExactAmplitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactAmplitude {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl From<i64> for ExactAmplitude {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<BigInt> for ExactAmplitude {
    fn from(n: BigInt) -> Self {
        Self::from_int(n)
    }
}

impl fmt::Display for ExactAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)?;
        } else if self.a.is_zero() {
            write!(f, "{}√2", self.b)?;
        } else {
            write!(f, "({} + {}√2)", self.a, self.b)?;
        }
        if self.e > 0 {
            write!(f, "/2^{}", self.e)?;
        }
        Ok(())
    }
}

impl fmt::Debug for ExactAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
