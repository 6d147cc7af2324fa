//! Exact rational scalars.
//!
//! [`Rat`] wraps an arbitrary-precision rational that is always kept in
//! canonical form: `gcd(|num|, den) = 1`, `den >= 1`, and zero is `0/1`.
//! The textual form is an optional-sign decimal integer, or `p/q` in lowest
//! terms with the sign carried on `p` (e.g. `-3/2`).

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Rat(BigRational::from_integer(n.into()))
    }

    /// Builds `num/den`, reducing to canonical form.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rat(BigRational::new(num.into(), den)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn signum(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn checked_div(&self, rhs: &Rat) -> Result<Rat> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rat(&self.0 / &rhs.0))
    }

    pub fn recip(&self) -> Result<Rat> {
        Rat::one().checked_div(self)
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

pub(crate) fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

pub(crate) fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

impl From<i32> for Rat {
    fn from(n: i32) -> Self {
        Rat::from_int(n)
    }
}

impl From<BigInt> for Rat {
    fn from(n: BigInt) -> Self {
        Rat::from_int(n)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseRational(s.to_string());
        let t = s.trim();
        match t.split_once('/') {
            None => parse_int(t).map(Rat::from_int).ok_or_else(bad),
            Some((p, q)) => {
                let num = parse_int(p).ok_or_else(bad)?;
                // denominators carry no sign
                if q.starts_with(['-', '+']) {
                    return Err(bad());
                }
                let den = parse_int(q).ok_or_else(bad)?;
                Rat::new(num, den)
            }
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat(&self.0 $op &rhs.0)
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self.0 $op rhs.0)
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat(self.0 $op &rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);

/// Panics on a zero divisor; use [`Rat::checked_div`] for fallible division.
impl Div<&Rat> for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        self.checked_div(rhs).expect("division by zero")
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::one(), |acc, x| acc * x)
    }
}

/// Arithmetic selector for [`rat_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatOp {
    Add,
    Sub,
    Mul,
    Div,
    Cmp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RatOutcome {
    Value(Rat),
    Order(Ordering),
}

pub fn rat_arith(a: &Rat, b: &Rat, op: RatOp) -> Result<RatOutcome> {
    Ok(match op {
        RatOp::Add => RatOutcome::Value(a + b),
        RatOp::Sub => RatOutcome::Value(a - b),
        RatOp::Mul => RatOutcome::Value(a * b),
        RatOp::Div => RatOutcome::Value(a.checked_div(b)?),
        RatOp::Cmp => RatOutcome::Order(a.cmp(b)),
    })
}

// JSON: integers that fit in i64 are emitted as numbers, everything else as
// the canonical string. Both forms are accepted on input.
impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.to_i64() {
            Some(n) => s.serialize_i64(n),
            None => s.serialize_str(&self.to_string()),
        }
    }
}

struct RatVisitor;

impl<'de> Visitor<'de> for RatVisitor {
    type Value = Rat;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("an integer or a rational string like \"-3/2\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rat, E> {
        Ok(Rat::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rat, E> {
        Ok(Rat::from_int(v))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rat, E> {
        Err(E::custom(format!(
            "floating-point value {v} is not an exact rational; write it as \"p/q\""
        )))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rat, E> {
        v.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        d.deserialize_any(RatVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_arithmetic() {
        assert_eq!(&r("1/2") + &r("1"), r("3/2"));
        assert_eq!(&r("3/2") * &r("2/3"), Rat::one());
        assert_eq!(r("-1/2").cmp(&r("-3/2")), Ordering::Greater);
        assert_eq!(
            rat_arith(&r("-1/2"), &r("-3/2"), RatOp::Cmp).unwrap(),
            RatOutcome::Order(Ordering::Greater)
        );
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(matches!(
            rat_arith(&Rat::one(), &Rat::zero(), RatOp::Div),
            Err(Error::DivisionByZero)
        ));
        assert!(Rat::new(1, 0).is_err());
    }

    #[test]
    fn canonical_form_and_text() {
        let x = Rat::new(6, -4).unwrap();
        assert_eq!(x.to_string(), "-3/2");
        assert_eq!(x.denom(), &BigInt::from(2));
        assert_eq!(Rat::new(0, -7).unwrap().to_string(), "0");
        assert_eq!(r("4/2").to_string(), "2");
        assert_eq!(r("+5").to_string(), "5");
    }

    #[test]
    fn rejects_malformed_text() {
        for s in ["", "1/", "/2", "1/-2", "1.5", "a", "1/2/3", "--1"] {
            assert!(s.parse::<Rat>().is_err(), "{s:?} should not parse");
        }
    }

    #[test]
    fn json_forms() {
        let v: Vec<Rat> = serde_json::from_str(r#"[3, "-3/2", "7"]"#).unwrap();
        assert_eq!(v, vec![r("3"), r("-3/2"), r("7")]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[3,"-3/2",7]"#);
        assert!(serde_json::from_str::<Rat>("1.5").is_err());
    }

    #[test]
    fn beyond_64_bits() {
        let big = r("123456789012345678901234567890/7");
        let sq = &big * &big;
        assert_eq!(sq.to_string().parse::<Rat>().unwrap(), sq);
        let json = serde_json::to_string(&sq).unwrap();
        assert_eq!(serde_json::from_str::<Rat>(&json).unwrap(), sq);
    }

    proptest! {
        #[test]
        fn text_round_trip(n in -10_000i64..10_000, d in 1i64..500, m in -10_000i64..10_000, e in 1i64..500) {
            let a = Rat::new(n, d).unwrap();
            let b = Rat::new(m, e).unwrap();
            for x in [&a + &b, &a - &b, &a * &b] {
                let s = x.to_string();
                prop_assert_eq!(s.parse::<Rat>().unwrap().to_string(), s.clone());
                prop_assert_eq!(s.parse::<Rat>().unwrap(), x);
            }
            if !b.is_zero() {
                let q = a.checked_div(&b).unwrap();
                prop_assert_eq!(q.to_string().parse::<Rat>().unwrap(), q);
            }
        }

        #[test]
        fn order_matches_cross_multiplication(n in -1000i64..1000, d in 1i64..100, m in -1000i64..1000, e in 1i64..100) {
            let a = Rat::new(n, d).unwrap();
            let b = Rat::new(m, e).unwrap();
            prop_assert_eq!(a.cmp(&b), (n * e).cmp(&(m * d)));
        }
    }
}
