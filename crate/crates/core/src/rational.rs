//! Exact rational numbers backed by libgmp's `mpq_t`.
//!
//! The constructions in this crate square their domain at every step, so
//! numerators reach millions of bits. GMP's subquadratic multiplication is
//! what keeps those runs interactive.

use std::cmp::Ordering;
use std::fmt;
use std::mem::MaybeUninit;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::os::raw::{c_char, c_long, c_ulong, c_void};
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gmp::*;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub struct Rational {
    q: mpq_t,
}

// SAFETY: the limb buffers are owned exclusively by this value and GMP's
// read-only entry points never mutate their inputs.
unsafe impl Send for Rational {}
unsafe impl Sync for Rational {}

struct Integer {
    z: mpz_t,
}

impl Integer {
    fn new() -> Self {
        unsafe {
            let mut z = MaybeUninit::<mpz_t>::uninit();
            __gmpz_init(z.as_mut_ptr());
            Integer { z: z.assume_init() }
        }
    }

    fn to_decimal(&self) -> String {
        unsafe {
            let len = __gmpz_sizeinbase(&self.z, 10) + 2;
            let mut buf = vec![0u8; len];
            __gmpz_get_str(buf.as_mut_ptr() as *mut c_char, 10, &self.z);
            let end = buf.iter().position(|&b| b == 0).unwrap_or(len);
            buf.truncate(end);
            String::from_utf8(buf).expect("gmp emits ascii digits")
        }
    }
}

impl Drop for Integer {
    fn drop(&mut self) {
        unsafe { __gmpz_clear(&mut self.z) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{input}` as a rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

impl Rational {
    fn raw() -> Self {
        unsafe {
            let mut q = MaybeUninit::<mpq_t>::uninit();
            __gmpq_init(q.as_mut_ptr());
            Rational { q: q.assume_init() }
        }
    }

    pub fn zero() -> Self {
        Self::raw()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        let mut r = Self::raw();
        unsafe { __gmpq_set_si(&mut r.q, n as c_long, 1) };
        r
    }

    /// `n/d` reduced to lowest terms. Panics if `d == 0`.
    pub fn new(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        let (n, d) = if d < 0 { (-(n as i128), -(d as i128)) } else { (n as i128, d as i128) };
        if let (Ok(n), Ok(d)) = (i64::try_from(n), u64::try_from(d)) {
            let mut r = Self::raw();
            unsafe {
                __gmpq_set_si(&mut r.q, n as c_long, d as c_ulong);
                __gmpq_canonicalize(&mut r.q);
            }
            r
        } else {
            Self::from_int_str(&n.to_string()) / Self::from_int_str(&d.to_string())
        }
    }

    fn from_int_str(s: &str) -> Self {
        let mut z = Integer::new();
        let c = std::ffi::CString::new(s).expect("no interior nul");
        let rc = unsafe { __gmpz_set_str(&mut z.z, c.as_ptr(), 10) };
        assert_eq!(rc, 0, "invalid integer literal {s}");
        let mut r = Self::raw();
        unsafe { __gmpq_set_z(&mut r.q, &z.z) };
        r
    }

    /// `2^e` for any signed exponent.
    pub fn pow2(e: i64) -> Self {
        let two = Self::from_int(2);
        if e >= 0 {
            two.pow(e as u64)
        } else {
            two.pow(e.unsigned_abs()).recip()
        }
    }

    pub fn from_biguint(n: &BigUint) -> Self {
        let digits = n.to_u64_digits();
        let mut z = Integer::new();
        if !digits.is_empty() {
            unsafe {
                __gmpz_import(&mut z.z, digits.len(), -1, 8, 0, 0, digits.as_ptr() as *const c_void);
            }
        }
        let mut r = Self::raw();
        unsafe { __gmpq_set_z(&mut r.q, &z.z) };
        r
    }

    /// The value as a `BigUint`, when it is a nonnegative integer.
    pub fn to_biguint(&self) -> Option<BigUint> {
        if !self.is_integer() || self.is_negative() {
            return None;
        }
        let num = &self.q.num;
        let bits = unsafe { __gmpz_sizeinbase(num, 2) };
        let mut out = vec![0u64; bits.div_ceil(64).max(1)];
        let mut count = 0usize;
        unsafe {
            __gmpz_export(out.as_mut_ptr() as *mut c_void, &mut count, -1, 8, 0, 0, num);
        }
        out.truncate(count);
        Some(BigUint::new(
            out.iter().flat_map(|&w| [w as u32, (w >> 32) as u32]).collect(),
        ))
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.to_biguint().and_then(|b| u64::try_from(b).ok())
    }

    pub fn numer(&self) -> Rational {
        let mut z = Integer::new();
        let mut r = Self::raw();
        unsafe {
            __gmpq_get_num(&mut z.z, &self.q);
            __gmpq_set_z(&mut r.q, &z.z);
        }
        r
    }

    pub fn denom(&self) -> Rational {
        let mut z = Integer::new();
        let mut r = Self::raw();
        unsafe {
            __gmpq_get_den(&mut z.z, &self.q);
            __gmpq_set_z(&mut r.q, &z.z);
        }
        r
    }

    pub fn signum(&self) -> i32 {
        self.q.num.size.signum()
    }

    pub fn is_zero(&self) -> bool {
        self.q.num.size == 0
    }

    pub fn is_positive(&self) -> bool {
        self.q.num.size > 0
    }

    pub fn is_negative(&self) -> bool {
        self.q.num.size < 0
    }

    pub fn is_integer(&self) -> bool {
        unsafe { __gmpz_cmp_ui(&self.q.den, 1) == 0 }
    }

    /// Bit length of the numerator's magnitude.
    pub fn numer_bits(&self) -> u64 {
        if self.is_zero() {
            0
        } else {
            unsafe { __gmpz_sizeinbase(&self.q.num, 2) as u64 }
        }
    }

    pub fn denom_bits(&self) -> u64 {
        unsafe { __gmpz_sizeinbase(&self.q.den, 2) as u64 }
    }

    /// Storage size in bits (numerator plus denominator).
    pub fn bits(&self) -> u64 {
        self.numer_bits() + self.denom_bits()
    }

    pub fn abs(&self) -> Rational {
        let mut r = Self::raw();
        unsafe { __gmpq_abs(&mut r.q, &self.q) };
        r
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Rational {
        assert!(!self.is_zero(), "reciprocal of zero");
        let mut r = Self::raw();
        unsafe { __gmpq_inv(&mut r.q, &self.q) };
        r
    }

    pub fn pow(&self, e: u64) -> Rational {
        let mut n = Integer::new();
        let mut d = Integer::new();
        let mut r = Self::raw();
        unsafe {
            __gmpq_get_num(&mut n.z, &self.q);
            __gmpq_get_den(&mut d.z, &self.q);
            let mut pn = Integer::new();
            let mut pd = Integer::new();
            __gmpz_pow_ui(&mut pn.z, &n.z, e as c_ulong);
            __gmpz_pow_ui(&mut pd.z, &d.z, e as c_ulong);
            __gmpq_set_num(&mut r.q, &pn.z);
            __gmpq_set_den(&mut r.q, &pd.z);
        }
        r
    }

    pub fn floor(&self) -> Rational {
        let mut z = Integer::new();
        let mut r = Self::raw();
        unsafe {
            __gmpz_fdiv_q(&mut z.z, &self.q.num, &self.q.den);
            __gmpq_set_z(&mut r.q, &z.z);
        }
        r
    }

    pub fn ceil(&self) -> Rational {
        let mut z = Integer::new();
        let mut r = Self::raw();
        unsafe {
            __gmpz_cdiv_q(&mut z.z, &self.q.num, &self.q.den);
            __gmpq_set_z(&mut r.q, &z.z);
        }
        r
    }

    /// Nearest `f64`, accurate to a few ulps even when numerator and
    /// denominator are far outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (mn, en) = mantissa_exp(&self.q.num);
        let (md, ed) = mantissa_exp(&self.q.den);
        scale(mn / md, en - ed)
    }

    /// `log2(|self|)` in floating point; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (mn, en) = mantissa_exp(&self.q.num);
        let (md, ed) = mantissa_exp(&self.q.den);
        (mn.abs() / md).log2() + (en - ed) as f64
    }

    /// Closest dyadic rational `m / 2^frac_bits` to a finite float.
    pub fn from_f64_dyadic(x: f64, frac_bits: u32) -> Option<Rational> {
        if !x.is_finite() {
            return None;
        }
        let scaled = (x * (frac_bits as f64).exp2()).round();
        if scaled.abs() >= 9.0e18 {
            return None;
        }
        Some(Rational::new(scaled as i64, 1) / Rational::pow2(frac_bits as i64))
    }

    /// Always renders as `p/q`, including integers (`3/1`).
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.numer_string(), self.denom_string())
    }

    fn numer_string(&self) -> String {
        let mut z = Integer::new();
        unsafe { __gmpq_get_num(&mut z.z, &self.q) };
        z.to_decimal()
    }

    fn denom_string(&self) -> String {
        let mut z = Integer::new();
        unsafe { __gmpq_get_den(&mut z.z, &self.q) };
        z.to_decimal()
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if other > self {
            other
        } else {
            self
        }
    }
}

fn mantissa_exp(z: &mpz_t) -> (f64, i64) {
    let mut e: c_long = 0;
    let m = unsafe { __gmpz_get_d_2exp(&mut e, z) };
    (m, e as i64)
}

fn scale(m: f64, e: i64) -> f64 {
    let e = e.clamp(-4000, 4000) as i32;
    // two halves keep intermediate powers finite near the range limits
    let h = e / 2;
    m * 2f64.powi(h) * 2f64.powi(e - h)
}

impl Drop for Rational {
    fn drop(&mut self) {
        unsafe { __gmpq_clear(&mut self.q) }
    }
}

impl Clone for Rational {
    fn clone(&self) -> Self {
        let mut r = Self::raw();
        unsafe { __gmpq_set(&mut r.q, &self.q) };
        r
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        unsafe { __gmpq_equal(&self.q, &other.q) != 0 }
    }
}

impl Eq for Rational {}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let Some(o) = cmp_by_magnitude(self, other) {
            return o;
        }
        unsafe { __gmpq_cmp(&self.q, &other.q) }.cmp(&0)
    }
}

/// Operands at least this many limbs wide are first compared through their
/// binary logarithms.
const WIDE_LIMBS: i32 = 64;

/// Decides the order from truncated mantissas when the log2 gap is far above
/// their error (a few ulp per term); `None` leaves it to the exact comparison.
fn cmp_by_magnitude(a: &Rational, b: &Rational) -> Option<Ordering> {
    let wide = |q: &mpq_t| q.num.size.abs() >= WIDE_LIMBS || q.den.size >= WIDE_LIMBS;
    if !wide(&a.q) && !wide(&b.q) {
        return None;
    }
    let (sa, sb) = (a.signum(), b.signum());
    if sa != sb || sa == 0 {
        return Some(sa.cmp(&sb));
    }
    let (ma, ea) = mantissa_exp(&a.q.num);
    let (da, fa) = mantissa_exp(&a.q.den);
    let (mb, eb) = mantissa_exp(&b.q.num);
    let (db, fb) = mantissa_exp(&b.q.den);
    let whole = (ea - fa) - (eb - fb);
    if whole.unsigned_abs() > 4 {
        let mag = whole.cmp(&0);
        return Some(if sa > 0 { mag } else { mag.reverse() });
    }
    let gap = whole as f64 + (ma.abs().log2() - da.log2()) - (mb.abs().log2() - db.log2());
    if gap.abs() < 1e-9 {
        return None;
    }
    let mag = if gap > 0.0 { Ordering::Greater } else { Ordering::Less };
    Some(if sa > 0 { mag } else { mag.reverse() })
}

impl std::hash::Hash for Rational {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.to_fraction_string().hash(state)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            f.write_str(&self.numer_string())
        } else {
            write!(f, "{}/{}", self.numer_string(), self.denom_string())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits() > 256 {
            write!(f, "Rational(~2^{:.3}, {} bits)", self.log2_abs(), self.bits())
        } else {
            write!(f, "{self}")
        }
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `p`, `p/q`, optionally signed, and finite decimals like `2.25`.
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let err = |reason| ParseRationalError { input: input.to_string(), reason };
        let s = input.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        let value = if let Some((n, d)) = body.split_once('/') {
            if !digits(n) || !digits(d) {
                return Err(err("expected digits on both sides of `/`"));
            }
            let den = Rational::from_int_str(d);
            if den.is_zero() {
                return Err(err("zero denominator"));
            }
            Rational::from_int_str(n) / den
        } else if let Some((i, frac)) = body.split_once('.') {
            if !(digits(i) || i.is_empty()) || !digits(frac) {
                return Err(err("malformed decimal"));
            }
            let whole = if i.is_empty() { Rational::zero() } else { Rational::from_int_str(i) };
            let ten = Rational::from_int(10).pow(frac.len() as u64);
            whole + Rational::from_int_str(frac) / ten
        } else {
            if !digits(body) {
                return Err(err("expected an integer or p/q"));
            }
            Rational::from_int_str(body)
        };
        Ok(if neg { -value } else { value })
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::from_int(n as i64)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_biguint(&BigUint::from(n))
    }
}

impl From<usize> for Rational {
    fn from(n: usize) -> Self {
        Rational::from(n as u64)
    }
}

impl From<&BigUint> for Rational {
    fn from(n: &BigUint) -> Self {
        Rational::from_biguint(n)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $ffi:ident, $atr:ident, $amethod:ident, $check:expr) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $check(rhs);
                let mut r = Rational::raw();
                unsafe { $ffi(&mut r.q, &self.q, &rhs.q) };
                r
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(mut self, rhs: &Rational) -> Rational {
                $check(rhs);
                let p: *mut mpq_t = &mut self.q;
                unsafe { $ffi(p, p, &rhs.q) };
                self
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
        impl $atr<&Rational> for Rational {
            fn $amethod(&mut self, rhs: &Rational) {
                $check(rhs);
                let p: *mut mpq_t = &mut self.q;
                unsafe { $ffi(p, p, &rhs.q) };
            }
        }
        impl $atr<Rational> for Rational {
            fn $amethod(&mut self, rhs: Rational) {
                self.$amethod(&rhs)
            }
        }
    };
}

fn no_check(_: &Rational) {}

fn nonzero_divisor(r: &Rational) {
    assert!(!r.is_zero(), "division by zero");
}

binop!(Add, add, __gmpq_add, AddAssign, add_assign, no_check);
binop!(Sub, sub, __gmpq_sub, SubAssign, sub_assign, no_check);
binop!(Mul, mul, __gmpq_mul, MulAssign, mul_assign, no_check);
binop!(Div, div, __gmpq_div, DivAssign, div_assign, nonzero_divisor);

impl Neg for Rational {
    type Output = Rational;
    fn neg(mut self) -> Rational {
        let p: *mut mpq_t = &mut self.q;
        unsafe { __gmpq_neg(p, p) };
        self
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -self.clone()
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Shorthand for `Rational::new(n, d)`.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_comparison_agrees_with_exact() {
        let exact = |a: &Rational, b: &Rational| unsafe { __gmpq_cmp(&a.q, &b.q) }.cmp(&0);
        let base = [q(7, 5), q(-7, 5), q(3, 2), q(22, 15), q(1, 1), q(0, 1)];
        for x in &base {
            for y in &base {
                for e in [1u64, 200, 5000] {
                    let a = x.pow(e) + q(1, 3).pow(e);
                    let b = y.pow(e) * q(2, 1);
                    assert_eq!(a.cmp(&b), exact(&a, &b));
                    assert_eq!(a.cmp(&a.clone()), Ordering::Equal);
                    let c = &a + &q(1, 1).pow(1) / (q(3, 1).pow(e));
                    assert_eq!(a.cmp(&c), exact(&a, &c));
                }
            }
        }
    }

    #[test]
    fn arithmetic_reduces() {
        let a = q(1, 2) + q(1, 3);
        assert_eq!(a, q(5, 6));
        assert_eq!(q(4, 8), q(1, 2));
        assert_eq!(q(3, -6), q(-1, 2));
        assert_eq!((q(2, 3) * q(9, 4)).to_string(), "3/2");
        assert_eq!((q(1, 2) / q(1, 4)).to_string(), "2");
        assert_eq!(q(5, 1).to_fraction_string(), "5/1");
    }

    #[test]
    fn parse_forms() {
        assert_eq!("7/21".parse::<Rational>().unwrap(), q(1, 3));
        assert_eq!("-3".parse::<Rational>().unwrap(), q(-3, 1));
        assert_eq!("2.25".parse::<Rational>().unwrap(), q(9, 4));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
        assert!("1/-2".parse::<Rational>().is_err());
    }

    #[test]
    fn floor_ceil_and_pow() {
        assert_eq!(q(7, 2).floor(), q(3, 1));
        assert_eq!(q(7, 2).ceil(), q(4, 1));
        assert_eq!(q(-7, 2).floor(), q(-4, 1));
        assert_eq!(q(2, 3).pow(3), q(8, 27));
        assert_eq!(Rational::pow2(-3), q(1, 8));
    }

    #[test]
    fn biguint_roundtrip() {
        let big = BigUint::from(3u32).pow(200);
        let r = Rational::from_biguint(&big);
        assert_eq!(r.to_biguint().unwrap(), big);
        assert_eq!(Rational::zero().to_biguint().unwrap(), BigUint::from(0u32));
        assert!(q(1, 2).to_biguint().is_none());
    }

    #[test]
    fn float_conversion_handles_huge_operands() {
        let huge = Rational::pow2(5000) + Rational::one();
        let ratio = &huge / (Rational::pow2(5000) * Rational::from_int(4));
        assert!((ratio.to_f64() - 0.25).abs() < 1e-15);
        assert!((q(1, 3).to_f64() - 1.0 / 3.0).abs() < 1e-16);
        assert!((Rational::pow2(5000).log2_abs() - 5000.0).abs() < 1e-9);
    }

    #[test]
    #[should_panic(expected = "division by zero")]
    fn division_by_zero_panics() {
        let _ = q(1, 2) / Rational::zero();
    }
}
