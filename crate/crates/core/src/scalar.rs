//! Exact arithmetic in a real quadratic field `Q(sqrt(m))`.
//!
//! A [`QuadScalar`] is `rat + irr * sqrt(m)` with rational parts. Values whose
//! irrational part is zero are plain rationals and combine with scalars of any
//! radicand; two scalars that both carry a nonzero irrational part must agree
//! on `m`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("radicand mismatch: sqrt({0}) combined with sqrt({1})")]
    RadicandMismatch(u32, u32),
    #[error("radicand {0} is not a square-free integer >= 2")]
    BadRadicand(u64),
}

/// Sign of a real number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    fn of_rational(r: &Rational) -> Sign {
        match r.cmp(&Rational::zero()) {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }
}

/// Returns true when `m` has no repeated prime factor.
pub fn is_square_free(m: u64) -> bool {
    if m == 0 {
        return false;
    }
    let mut n = m;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Splits `n` as `s^2 * k` with `k` square-free; returns `(s, k)`.
pub fn split_square(n: u64) -> (u64, u64) {
    let mut s = 1u64;
    let mut k = n;
    let mut p = 2u64;
    while p * p <= k {
        while k.is_multiple_of(p * p) {
            k /= p * p;
            s *= p;
        }
        p += 1;
    }
    (s, k)
}

/// Exact element `rat + irr * sqrt(radicand)` of a real quadratic field.
///
/// Canonical form: when `irr == 0` the radicand is stored as 0, so rational
/// values compare equal regardless of the field they were produced in.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadScalar {
    rat: Rational,
    irr: Rational,
    radicand: u32,
}

impl QuadScalar {
    pub fn new(rat: Rational, irr: Rational, radicand: u32) -> Result<Self, ScalarError> {
        if !irr.is_zero() && (radicand < 2 || !is_square_free(radicand as u64)) {
            return Err(ScalarError::BadRadicand(radicand as u64));
        }
        Ok(Self::canonical(rat, irr, radicand))
    }

    fn canonical(rat: Rational, irr: Rational, radicand: u32) -> Self {
        let radicand = if irr.is_zero() { 0 } else { radicand };
        QuadScalar { rat, irr, radicand }
    }

    pub fn from_rational(r: Rational) -> Self {
        Self::canonical(r, Rational::zero(), 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        Self::from_rational(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// `coeff * sqrt(m)` for a square-free `m >= 2`.
    pub fn sqrt_of(m: u32) -> Result<Self, ScalarError> {
        Self::new(Rational::zero(), Rational::one(), m)
    }

    pub fn rat(&self) -> &Rational {
        &self.rat
    }

    pub fn irr(&self) -> &Rational {
        &self.irr
    }

    /// The radicand, or `None` for a rational value.
    pub fn radicand(&self) -> Option<u32> {
        (self.radicand != 0).then_some(self.radicand)
    }

    pub fn is_rational(&self) -> bool {
        self.irr.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.rat)
    }

    fn joint_radicand(&self, other: &Self) -> Result<u32, ScalarError> {
        match (self.radicand, other.radicand) {
            (0, m) | (m, 0) => Ok(m),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(ScalarError::RadicandMismatch(a, b)),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ScalarError> {
        let m = self.joint_radicand(other)?;
        Ok(Self::canonical(&self.rat + &other.rat, &self.irr + &other.irr, m))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, ScalarError> {
        let m = self.joint_radicand(other)?;
        Ok(Self::canonical(&self.rat - &other.rat, &self.irr - &other.irr, m))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, ScalarError> {
        let m = self.joint_radicand(other)?;
        let mr = Rational::from_integer(BigInt::from(m));
        // (a + b√m)(c + d√m) = (ac + bdm) + (ad + bc)√m
        let rat = &self.rat * &other.rat + &self.irr * &other.irr * mr;
        let irr = &self.rat * &other.irr + &self.irr * &other.rat;
        Ok(Self::canonical(rat, irr, m))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ScalarError> {
        let inv = other.inv().ok_or(ScalarError::DivisionByZero)?;
        self.checked_mul(&inv)
    }

    /// Field norm `rat^2 - irr^2 * m`.
    pub fn norm(&self) -> Rational {
        let m = Rational::from_integer(BigInt::from(self.radicand));
        &self.rat * &self.rat - &self.irr * &self.irr * m
    }

    pub fn conjugate(&self) -> Self {
        Self::canonical(self.rat.clone(), -&self.irr, self.radicand)
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        let c = self.conjugate();
        Some(Self::canonical(&c.rat / &n, &c.irr / &n, c.radicand))
    }

    /// Exact sign, decided by comparing `rat^2` against `irr^2 * m`.
    pub fn sign(&self) -> Sign {
        let sa = Sign::of_rational(&self.rat);
        let sb = Sign::of_rational(&self.irr);
        match (sa, sb) {
            (_, Sign::Zero) => sa,
            (Sign::Zero, _) => sb,
            _ if sa == sb => sa,
            _ => {
                let m = Rational::from_integer(BigInt::from(self.radicand));
                let a2 = &self.rat * &self.rat;
                let b2m = &self.irr * &self.irr * m;
                // a^2 == b^2 m is impossible for irrational sqrt(m) with b != 0
                if a2 > b2m {
                    sa
                } else {
                    sb
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Sign::Positive
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Sign::Negative
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact ordering of the two real numbers.
    pub fn cmp_value(&self, other: &Self) -> Result<Ordering, ScalarError> {
        Ok(match self.checked_sub(other)?.sign() {
            Sign::Negative => Ordering::Less,
            Sign::Zero => Ordering::Equal,
            Sign::Positive => Ordering::Greater,
        })
    }

    /// A rational number `>= |self|`.
    pub fn abs_upper_bound(&self) -> Rational {
        let root_ceiling = if self.radicand == 0 {
            0
        } else {
            (self.radicand as f64).sqrt().ceil() as i64 + 1
        };
        self.rat.abs() + self.irr.abs() * Rational::from_integer(BigInt::from(root_ceiling))
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.rat.to_f64().unwrap_or(f64::NAN);
        if self.irr.is_zero() {
            return a;
        }
        let b = self.irr.to_f64().unwrap_or(f64::NAN);
        a + b * (self.radicand as f64).sqrt()
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// True when the value needs parentheses as a product factor.
    pub fn is_compound(&self) -> bool {
        !self.rat.is_zero() && !self.irr.is_zero()
    }
}

impl Zero for QuadScalar {
    fn zero() -> Self {
        Self::from_int(0)
    }

    fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.irr.is_zero()
    }
}

impl One for QuadScalar {
    fn one() -> Self {
        Self::from_int(1)
    }
}

impl Default for QuadScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for QuadScalar {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<Rational> for QuadScalar {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

// Operator impls panic on radicand mismatch; use the `checked_*` methods
// where operands come from different problems.
macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a> $tr<&'a QuadScalar> for &'a QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: &'a QuadScalar) -> QuadScalar {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<QuadScalar> for QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: QuadScalar) -> QuadScalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a QuadScalar> for QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: &'a QuadScalar) -> QuadScalar {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Neg for &QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        QuadScalar::canonical(-&self.rat, -&self.irr, self.radicand)
    }
}

impl Neg for QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        -&self
    }
}

fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Renders in the parser's scalar syntax, e.g. `3 - 2*sqrt(2)`, `-1/2*sqrt(2)`.
impl fmt::Display for QuadScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.irr.is_zero() {
            return fmt_rational(&self.rat, f);
        }
        let irr_abs = self.irr.abs();
        if !self.rat.is_zero() {
            fmt_rational(&self.rat, f)?;
            f.write_str(if self.irr.is_negative() { " - " } else { " + " })?;
        } else if self.irr.is_negative() {
            f.write_str("-")?;
        }
        if !irr_abs.is_one() {
            fmt_rational(&irr_abs, f)?;
            f.write_str("*")?;
        }
        write!(f, "sqrt({})", self.radicand)
    }
}

impl fmt::Debug for QuadScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadScalar({self})")
    }
}

/// JSON form `{ "rat": "p/q", "irr": "p/q", "m": m | null }`.
#[derive(Serialize, Deserialize)]
struct ScalarRepr {
    rat: String,
    irr: String,
    m: Option<u32>,
}

fn rational_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            (!d.is_zero()).then(|| Rational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

impl Serialize for QuadScalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ScalarRepr {
            rat: rational_string(&self.rat),
            irr: rational_string(&self.irr),
            m: self.radicand(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuadScalar {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = ScalarRepr::deserialize(deserializer)?;
        let rat = parse_rational(&repr.rat).ok_or_else(|| D::Error::custom("bad rational"))?;
        let irr = parse_rational(&repr.irr).ok_or_else(|| D::Error::custom("bad rational"))?;
        QuadScalar::new(rat, irr, repr.m.unwrap_or(0)).map_err(D::Error::custom)
    }
}
