//! Exact rationals and numbers of the form `q·√n`.
//!
//! Every Seshadri constant produced by this crate is either rational or the
//! square root of a positive integer, and every coordinate in the standardized
//! cross-section is a rational multiple of a square root. [`QuadValue`] keeps
//! these values exact; comparisons go through sign analysis and squaring.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Mul, Neg};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int<T: Into<BigInt>>(n: T) -> Rational {
    Rational::from_integer(n.into())
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = match int.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            digits => digits.parse().map_err(|_| bad())?,
        };
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Rational::new(int_part * &den + frac_part, den);
        return Ok(if negative { -mag } else { mag });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

/// `"p/q"`, or `"p"` for integers.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => {
            // Shift both sides down to keep the quotient representable.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// Exact conversion of a finite `f64` into a rational.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

pub fn floor_int(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

pub fn ceil_int(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

/// `⌊√x⌋` for `x ≥ 0`.
pub fn isqrt(x: &BigInt) -> BigInt {
    debug_assert!(!x.is_negative());
    x.sqrt()
}

/// `⌈√x⌉` for `x ≥ 0`.
pub fn isqrt_ceil(x: &BigInt) -> BigInt {
    let r = x.sqrt();
    if &(&r * &r) == x {
        r
    } else {
        r + 1
    }
}

pub fn is_square(x: &BigInt) -> bool {
    if x.is_negative() {
        return false;
    }
    let r = x.sqrt();
    &(&r * &r) == x
}

pub fn is_square_rational(x: &Rational) -> bool {
    is_square(x.numer()) && is_square(x.denom())
}

/// Exact square root of a rational square, if it is one.
pub fn sqrt_exact(x: &Rational) -> Option<Rational> {
    if x.is_negative() || !is_square_rational(x) {
        return None;
    }
    Some(Rational::new(x.numer().sqrt(), x.denom().sqrt()))
}

/// Largest `p/den ≤ √x`.
pub fn sqrt_lower(x: &Rational, den: &BigInt) -> Rational {
    if !x.is_positive() {
        return Rational::zero();
    }
    if let Some(r) = sqrt_exact(x) {
        return r;
    }
    let scaled = floor_int(&(x * Rational::from_integer(den * den)));
    Rational::new(isqrt(&scaled), den.clone())
}

/// Some `p/den ≥ √x`.
pub fn sqrt_upper(x: &Rational, den: &BigInt) -> Rational {
    if !x.is_positive() {
        return Rational::zero();
    }
    if let Some(r) = sqrt_exact(x) {
        return r;
    }
    let scaled = ceil_int(&(x * Rational::from_integer(den * den)));
    Rational::new(isqrt_ceil(&scaled), den.clone())
}

/// Some `p/den ≥ x^(1/k)` (`k ≥ 1`, `x ≥ 0`).
pub fn root_upper(x: &Rational, k: u32, den: &BigInt) -> Rational {
    if !x.is_positive() {
        return Rational::zero();
    }
    let scaled = ceil_int(&(x * Rational::from_integer(num_traits::pow(den.clone(), k as usize))));
    let r = scaled.nth_root(k);
    let r = if num_traits::pow(r.clone(), k as usize) == scaled { r } else { r + 1 };
    Rational::new(r, den.clone())
}

/// The rational of least denominator (then least absolute value) in
/// `[lo, hi]`.
pub fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi, "empty interval");
    if !lo.is_positive() && !hi.is_negative() {
        return Rational::zero();
    }
    if hi.is_negative() {
        return -simplest_between(&-hi, &-lo);
    }
    let c = ceil_int(lo);
    if Rational::from_integer(c.clone()) <= *hi {
        return Rational::from_integer(c);
    }
    let f = Rational::from_integer(floor_int(lo));
    let inner = simplest_between(&(hi - &f).recip(), &(lo - &f).recip());
    f + inner.recip()
}

/// Splits `m = s²·f` with `f` squarefree. Trial division runs up to `∛m`;
/// whatever remains has at most two prime factors, so it is either a
/// square or squarefree.
pub fn squarefree_decompose(m: u128) -> (u128, u128) {
    if m == 0 {
        return (0, 1);
    }
    let mut rest = m;
    let mut square = 1u128;
    let mut free = 1u128;
    let mut p = 2u128;
    while p * p * p <= rest {
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            square *= p.pow(e / 2);
            if e % 2 == 1 {
                free *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let r = BigInt::from(rest).sqrt().to_u128().unwrap_or(0);
    if r * r == rest {
        square *= r;
    } else {
        free *= rest;
    }
    (square, free)
}

/// An exact number `q·√n` with `n` squarefree; zero is `0·√1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadValue {
    q: Rational,
    n: u64,
}

impl QuadValue {
    pub fn new(q: Rational, n: u64) -> Self {
        if q.is_zero() || n == 0 {
            return Self::zero();
        }
        let (s, f) = squarefree_decompose(n as u128);
        QuadValue { q: q * rat_int(BigInt::from(s)), n: f as u64 }
    }

    pub fn zero() -> Self {
        QuadValue { q: Rational::zero(), n: 1 }
    }

    pub fn from_rational(q: Rational) -> Self {
        QuadValue { q, n: 1 }
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Self::from_rational(rat_int(v))
    }

    /// `√x` for a non-negative rational `x`.
    pub fn sqrt_of(x: &Rational) -> Self {
        assert!(!x.is_negative(), "square root of negative rational");
        if x.is_zero() {
            return Self::zero();
        }
        // √(a/b) = √(ab)/b
        let ab = x.numer() * x.denom();
        let ab = ab.to_u128().expect("radicand exceeds 128 bits");
        let (s, f) = squarefree_decompose(ab);
        let q = Rational::new(BigInt::from(s), x.denom().clone());
        QuadValue { q, n: u64::try_from(f).expect("squarefree radicand exceeds 64 bits") }
    }

    pub fn sqrt_of_int(x: i128) -> Self {
        Self::sqrt_of(&rat_int(BigInt::from(x)))
    }

    pub fn coefficient(&self) -> &Rational {
        &self.q
    }

    pub fn radicand(&self) -> u64 {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.q.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.n == 1
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.q)
    }

    pub fn signum(&self) -> i32 {
        match self.q.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    /// The exact square `q²·n`.
    pub fn square(&self) -> Rational {
        &self.q * &self.q * rat_int(BigInt::from(self.n))
    }

    pub fn abs(&self) -> Self {
        QuadValue { q: self.q.abs(), n: self.n }
    }

    /// Sum when both terms share a radicand (or one of them is zero).
    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        if self.is_zero() {
            return Some(other.clone());
        }
        if other.is_zero() {
            return Some(self.clone());
        }
        (self.n == other.n).then(|| QuadValue::new(&self.q + &other.q, self.n))
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        self.checked_add(&-other.clone())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        QuadValue::new(&self.q * r, self.n)
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        // 1/(q√n) = √n/(q n)
        QuadValue { q: (&self.q * rat_int(BigInt::from(self.n))).recip(), n: self.n }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.q) * (self.n as f64).sqrt()
    }

    /// A rational `r ≤ self` on the grid `1/den` (exact when rational).
    pub fn lower_rational(&self, den: &BigInt) -> Rational {
        if self.is_rational() {
            return self.q.clone();
        }
        let mag = sqrt_lower(&self.square(), den);
        if self.is_positive() {
            mag
        } else {
            -sqrt_upper(&self.square(), den)
        }
    }

    /// A rational `r ≥ self` on the grid `1/den` (exact when rational).
    pub fn upper_rational(&self, den: &BigInt) -> Rational {
        -(-self.clone()).lower_rational(den)
    }

    /// `⌊self⌋`.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return floor_int(&self.q);
        }
        let sq = self.square();
        if self.is_positive() {
            isqrt(&floor_int(&sq))
        } else {
            -isqrt_ceil(&ceil_int(&sq))
        }
    }

    /// `⌈self⌉`.
    pub fn ceil(&self) -> BigInt {
        -(-self.clone()).floor()
    }
}

impl Default for QuadValue {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<Rational> for QuadValue {
    fn from(q: Rational) -> Self {
        Self::from_rational(q)
    }
}

impl Neg for QuadValue {
    type Output = QuadValue;
    fn neg(self) -> QuadValue {
        QuadValue { q: -self.q, n: self.n }
    }
}

impl Mul for &QuadValue {
    type Output = QuadValue;
    fn mul(self, rhs: &QuadValue) -> QuadValue {
        let n = (self.n as u128) * (rhs.n as u128);
        let (s, f) = squarefree_decompose(n);
        QuadValue::new(&self.q * &rhs.q * rat_int(BigInt::from(s)), f as u64)
    }
}

impl Ord for QuadValue {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.signum(), other.signum());
        if a != b {
            return a.cmp(&b);
        }
        if a == 0 {
            return Ordering::Equal;
        }
        if self.n == other.n {
            return self.q.cmp(&other.q);
        }
        let mag = self.square().cmp(&other.square());
        if a > 0 {
            mag
        } else {
            mag.reverse()
        }
    }
}

impl PartialOrd for QuadValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for QuadValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 1 {
            write!(f, "{}", fmt_rational(&self.q))
        } else if self.q.is_one() {
            write!(f, "√{}", self.n)
        } else {
            write!(f, "{}·√{}", fmt_rational(&self.q), self.n)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct QuadRepr {
    q: String,
    n: u64,
}

impl Serialize for QuadValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuadRepr { q: fmt_rational(&self.q), n: self.n }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = QuadRepr::deserialize(d)?;
        let q = parse_rational(&repr.q).map_err(serde::de::Error::custom)?;
        Ok(QuadValue::new(q, repr.n))
    }
}

/// Serde adapter storing a rational as `"p/q"`.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a list of rationals.
pub mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(fmt_rational).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| parse_rational(s).map_err(serde::de::Error::custom)).collect()
    }
}

/// Serde adapter storing a big integer as a decimal string.
pub mod serde_bigint {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for an optional big integer (string or `null`).
pub mod serde_opt_bigint {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref().map(BigInt::to_string).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<BigInt>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub(crate) fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}
