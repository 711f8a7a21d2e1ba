//! Small conveniences over `astro_float::BigFloat`.

use astro_float::{BigFloat, Consts, Exponent, RoundingMode, Sign};
use num_bigint::BigInt;
use num_traits::Zero;

pub const RM: RoundingMode = RoundingMode::ToEven;

/// Working precision in bits, rounded up to whole words.
pub fn precision(bits: usize) -> usize {
    bits.div_ceil(64).max(2) * 64
}

pub fn consts() -> Consts {
    Consts::new().expect("astro-float constant cache")
}

/// Exact conversion of an integer.
pub fn from_bigint(x: &BigInt) -> BigFloat {
    if x.is_zero() {
        return BigFloat::from_word(0, 128);
    }
    let (sign, digits) = x.to_u64_digits();
    let bits = digits.len() * 64;
    let s = if sign == num_bigint::Sign::Minus {
        Sign::Neg
    } else {
        Sign::Pos
    };
    BigFloat::from_words(&digits, s, bits as Exponent)
}

/// Nearest f64 (saturating to ±inf beyond the f64 range).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    // Value is 0.m × 2^exp with the top bit of the last word set.
    let n = words.len();
    let hi = words[n - 1] as f64;
    let lo = if n > 1 { words[n - 2] as f64 } else { 0.0 };
    let mantissa = (hi + lo * 2f64.powi(-64)) * 2f64.powi(-64);
    let e = exp as i64;
    let value = if e > 1100 {
        f64::INFINITY
    } else if e < -1200 {
        0.0
    } else {
        // Split the scaling so intermediate powers stay finite.
        let half = (e / 2) as i32;
        mantissa * 2f64.powi(half) * 2f64.powi(e as i32 - half)
    };
    if sign == Sign::Neg {
        -value
    } else {
        value
    }
}

/// log₂|x|, finite for nonzero x of any magnitude.
pub fn log2_abs(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _, _, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let hi = words[words.len() - 1] as f64 * 2f64.powi(-64);
    hi.log2() + exp as f64
}

pub fn abs(x: &BigFloat) -> BigFloat {
    let mut y = x.clone();
    if y.is_negative() {
        y.inv_sign();
    }
    y
}
