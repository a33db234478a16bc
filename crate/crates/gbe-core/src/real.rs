//! Arbitrary-precision real numbers.
//!
//! `Real` wraps an `astro_float::BigFloat` and remembers its own precision.
//! Binary operations run at the larger precision of the two operands, so a
//! value computed at a raised precision keeps that precision downstream.

use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

const RM: RoundingMode = RoundingMode::ToEven;

/// An arbitrary-precision real number with an attached binary precision.
#[derive(Clone)]
pub struct Real {
    v: BigFloat,
    p: usize,
}

impl Real {
    pub fn zero(bits: usize) -> Self {
        Real { v: BigFloat::from_word(0, bits), p: bits }
    }

    pub fn one(bits: usize) -> Self {
        Real { v: BigFloat::from_word(1, bits), p: bits }
    }

    pub fn from_f64(x: f64, bits: usize) -> Self {
        debug_assert!(x.is_finite());
        Real { v: BigFloat::from_f64(x, bits), p: bits }
    }

    pub fn from_i64(x: i64, bits: usize) -> Self {
        Real { v: BigFloat::from_i64(x, bits), p: bits }
    }

    pub fn from_u64(x: u64, bits: usize) -> Self {
        Real { v: BigFloat::from_u64(x, bits), p: bits }
    }

    /// `num / den`, rounded once.
    pub fn ratio(num: i64, den: i64, bits: usize) -> Self {
        Real::from_i64(num, bits) / Real::from_i64(den, bits)
    }

    /// Parses a decimal literal such as `"-1.25e-3"`.
    pub fn parse(s: &str, bits: usize) -> Option<Self> {
        let mut cc = Consts::new().ok()?;
        let v = BigFloat::parse(s, Radix::Dec, bits, RM, &mut cc);
        if v.is_nan() || v.is_inf() {
            None
        } else {
            Some(Real { v, p: bits })
        }
    }

    pub fn bits(&self) -> usize {
        self.p
    }

    /// Rounds or widens to the given precision.
    pub fn with_bits(&self, bits: usize) -> Self {
        let mut v = self.v.clone();
        // Zero and finite values always accept a new precision.
        let _ = v.set_precision(bits, RM);
        Real { v, p: bits }
    }

    pub fn inner(&self) -> &BigFloat {
        &self.v
    }

    pub fn from_inner(v: BigFloat) -> Self {
        let p = v.precision().filter(|&p| p > 0).unwrap_or(64);
        Real { v, p }
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.v.is_zero() && self.v.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        !self.v.is_zero() && self.v.is_positive()
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    pub fn abs(&self) -> Self {
        Real { v: self.v.abs(), p: self.p }
    }

    pub fn sqrt(&self) -> Self {
        Real { v: self.v.sqrt(self.p, RM), p: self.p }
    }

    pub fn recip(&self) -> Self {
        Real { v: self.v.reciprocal(self.p, RM), p: self.p }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Integer power by repeated squaring; negative exponents invert.
    pub fn powi(&self, n: i32) -> Self {
        let p = self.bits();
        let v = Real { v: self.v.powi(n.unsigned_abs() as usize, p + 32, RM), p: p + 32 }.with_bits(p);
        if n < 0 {
            v.recip()
        } else {
            v
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let mut v = self.v.clone();
        let e = v.exponent().unwrap_or(0) as i64 + k;
        v.set_exponent(e as astro_float::Exponent);
        Real { v, p: self.p }
    }

    /// Binary exponent `e` with `|self| = f·2^e`, `f ∈ [1/2, 1)`. Zero maps to `i64::MIN`.
    pub fn exponent(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.v.exponent().unwrap_or(0) as i64
        }
    }

    /// Largest integer not above `self`.
    pub fn floor(&self) -> Self {
        Real { v: self.v.floor(), p: self.p }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Nearest double (ties broken by truncation of the tail beyond 128 bits).
    pub fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf() {
            return if self.v.is_inf_pos() { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        let Some((words, _, sign, e, _)) = self.v.as_raw_parts() else {
            return 0.0;
        };
        let n = words.len();
        if n == 0 || words[n - 1] == 0 {
            return 0.0;
        }
        let hi = words[n - 1];
        let lo = if n >= 2 { words[n - 2] } else { 0 };
        // Keep 64 + 11 leading bits so the conversion below rounds correctly.
        let m = hi as f64 + libm::ldexp((lo >> 53) as f64, -11);
        let v = libm::ldexp(m, e - 64);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    /// Decimal scientific notation with `digits` significant digits.
    pub fn to_sci_string(&self, digits: usize) -> String {
        format_sci(self, digits.max(1))
    }
}

fn format_sci(x: &Real, digits: usize) -> String {
    use alloc::format;
    use alloc::vec::Vec;

    if x.is_zero() {
        return format!("{:.*}e0", digits - 1, 0.0);
    }
    let neg = x.is_negative();
    let a = x.abs();
    let bits = a.bits().max(64 + 4 * digits);
    let a = a.with_bits(bits);
    // Estimate the decimal exponent from the binary one, then correct.
    let mut k = ((a.exponent() - 1) as f64 * core::f64::consts::LOG10_2).floor() as i64;
    let ten = Real::from_u64(10, bits);
    let scaled = |k: i64| -> Real {
        let s = ten.powi((digits as i64 - 1 - k) as i32);
        &a * &s
    };
    let lo = ten.powi(digits as i32 - 1);
    let hi = ten.powi(digits as i32);
    let mut v = scaled(k);
    for _ in 0..4 {
        if v < lo {
            k -= 1;
        } else if v >= hi {
            k += 1;
        } else {
            break;
        }
        v = scaled(k);
    }
    let half = Real::ratio(1, 2, bits);
    let mut r = (&v + &half).floor();
    if r >= hi {
        r = &r / &ten;
        k += 1;
    }
    let mut ds: Vec<u8> = Vec::with_capacity(digits);
    let mut t = r;
    for _ in 0..digits {
        let q = (&t / &ten).floor();
        let d = &t - &(&q * &ten);
        ds.push(b'0' + d.to_f64().round_ties_even_nostd() as u8);
        t = q;
    }
    ds.reverse();
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    s.push(ds[0] as char);
    if digits > 1 {
        s.push('.');
        for &d in &ds[1..] {
            s.push(d as char);
        }
    }
    s.push_str(&format!("e{}", k));
    s
}

trait RoundNoStd {
    fn round_ties_even_nostd(self) -> f64;
}

impl RoundNoStd for f64 {
    fn round_ties_even_nostd(self) -> f64 {
        libm::rint(self)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(20))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().map(|p| p + 1).unwrap_or(17);
        f.pad(&self.to_sci_string(digits))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        *self == Real::from_f64(*other, 64)
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&Real::from_f64(*other, 64))
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { v: BigFloat::neg(&self.v), p: self.p }
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { v: BigFloat::neg(&self.v), p: self.p }
    }
}

macro_rules! real_binop {
    ($tr:ident, $method:ident, $op:ident, $atr:ident, $amethod:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.bits().max(rhs.bits());
                Real { v: self.v.$op(&rhs.v, p, RM), p }
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
        impl $tr<f64> for &Real {
            type Output = Real;
            fn $method(self, rhs: f64) -> Real {
                let p = self.bits();
                Real { v: self.v.$op(&BigFloat::from_f64(rhs, 64), p, RM), p }
            }
        }
        impl $tr<f64> for Real {
            type Output = Real;
            fn $method(self, rhs: f64) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $tr<&Real> for f64 {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = rhs.bits();
                Real { v: BigFloat::from_f64(self, 64).$op(&rhs.v, p, RM), p }
            }
        }
        impl $tr<Real> for f64 {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
        impl $atr<&Real> for Real {
            fn $amethod(&mut self, rhs: &Real) {
                *self = (&*self).$method(rhs);
            }
        }
        impl $atr<Real> for Real {
            fn $amethod(&mut self, rhs: Real) {
                *self = (&*self).$method(&rhs);
            }
        }
        impl $atr<f64> for Real {
            fn $amethod(&mut self, rhs: f64) {
                *self = (&*self).$method(rhs);
            }
        }
    };
}

real_binop!(Add, add, add, AddAssign, add_assign);
real_binop!(Sub, sub, sub, SubAssign, sub_assign);
real_binop!(Mul, mul, mul, MulAssign, mul_assign);
real_binop!(Div, div, div, DivAssign, div_assign);

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn round_trip_f64() {
        for &x in &[1.0, -2.5, 1e-300, 3.0e300, core::f64::consts::PI, -1.0 / 3.0] {
            assert_eq!(Real::from_f64(x, 256).to_f64(), x);
        }
        assert_eq!(Real::zero(128).to_f64(), 0.0);
    }

    #[test]
    fn precision_follows_wider_operand() {
        let a = Real::one(128);
        let b = Real::one(512);
        assert!((&a + &b).bits() >= 512);
        let third = Real::one(512) / Real::from_i64(3, 512);
        let back = &third * 3.0;
        assert!((&back - &Real::one(512)).abs() < Real::from_f64(1e-150, 64));
    }

    #[test]
    fn sci_formatting() {
        assert_eq!(Real::ratio(1, 3, 256).to_sci_string(5), "3.3333e-1");
        assert_eq!(Real::from_i64(-125, 128).to_sci_string(2), "-1.3e2");
        assert_eq!(Real::from_f64(9.9996, 128).to_sci_string(4), "1.000e1");
        assert_eq!(Real::zero(64).to_string(), "0.0000000000000000e0");
    }

    #[test]
    fn parse_decimal() {
        let x = Real::parse("0.1", 256).unwrap();
        let err = (&x * 10.0 - 1.0).abs();
        assert!(err < Real::from_f64(1e-70, 64));
    }

    #[test]
    fn pow2_scaling_is_exact() {
        let x = Real::ratio(7, 3, 200);
        assert_eq!(x.mul_pow2(5).mul_pow2(-5), x);
        assert_eq!(x.mul_pow2(3).exponent(), x.exponent() + 3);
    }
}
