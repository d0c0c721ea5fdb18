//! Exact half-integer arithmetic.
//!
//! Every half-integral quantity is stored as twice its value in a signed
//! 64-bit integer, so sums, differences, comparisons and clamping never round.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;

/// A half-integer `v`, stored as the integer `2v`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Half {
    doubled: i64,
}

impl Half {
    pub const ZERO: Half = Half { doubled: 0 };
    pub const HALF: Half = Half { doubled: 1 };
    pub const ONE: Half = Half { doubled: 2 };

    pub const fn from_doubled(doubled: i64) -> Self {
        Half { doubled }
    }

    pub const fn from_int(v: i64) -> Self {
        Half { doubled: 2 * v }
    }

    pub const fn doubled(self) -> i64 {
        self.doubled
    }

    pub const fn is_integral(self) -> bool {
        self.doubled % 2 == 0
    }

    /// The integer value, if integral.
    pub fn to_int(self) -> Option<i64> {
        self.is_integral().then_some(self.doubled / 2)
    }

    /// `(a)^+ = max(a, 0)`.
    pub fn pos(self) -> Self {
        if self.doubled > 0 {
            self
        } else {
            Half::ZERO
        }
    }

    pub fn abs(self) -> Self {
        Half { doubled: self.doubled.abs() }
    }

    pub fn is_positive(self) -> bool {
        self.doubled > 0
    }

    pub fn is_negative(self) -> bool {
        self.doubled < 0
    }

    pub fn is_zero(self) -> bool {
        self.doubled == 0
    }

    /// Twice the value, as a `Half` (always integral).
    pub fn twice(self) -> Self {
        Half { doubled: 2 * self.doubled }
    }
}

/// `(a)^+`.
pub fn half_pos(a: Half) -> Half {
    a.pos()
}

impl Add for Half {
    type Output = Half;
    fn add(self, rhs: Half) -> Half {
        Half { doubled: self.doubled + rhs.doubled }
    }
}

impl Sub for Half {
    type Output = Half;
    fn sub(self, rhs: Half) -> Half {
        Half { doubled: self.doubled - rhs.doubled }
    }
}

impl Neg for Half {
    type Output = Half;
    fn neg(self) -> Half {
        Half { doubled: -self.doubled }
    }
}

impl AddAssign for Half {
    fn add_assign(&mut self, rhs: Half) {
        self.doubled += rhs.doubled;
    }
}

impl SubAssign for Half {
    fn sub_assign(&mut self, rhs: Half) {
        self.doubled -= rhs.doubled;
    }
}

impl Mul<i64> for Half {
    type Output = Half;
    fn mul(self, rhs: i64) -> Half {
        Half { doubled: self.doubled * rhs }
    }
}

impl Mul<Half> for i64 {
    type Output = Half;
    fn mul(self, rhs: Half) -> Half {
        rhs * self
    }
}

impl Sum for Half {
    fn sum<I: Iterator<Item = Half>>(iter: I) -> Half {
        iter.fold(Half::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Half> for Half {
    fn sum<I: Iterator<Item = &'a Half>>(iter: I) -> Half {
        iter.copied().sum()
    }
}

impl From<i64> for Half {
    fn from(v: i64) -> Half {
        Half::from_int(v)
    }
}

/// Decimal form: `3`, `-2`, `1.5`, `-0.5`.
impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.doubled;
        if d % 2 == 0 {
            write!(f, "{}", d / 2)
        } else {
            let sign = if d < 0 { "-" } else { "" };
            write!(f, "{}{}.5", sign, d.abs() / 2)
        }
    }
}

impl FromStr for Half {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::Number(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: i64 = int_part.parse().map_err(|_| bad())?;
        let half = match frac {
            None => 0,
            Some(f) if !f.is_empty() && f.bytes().all(|b| b == b'0') => 0,
            Some(f) if f.starts_with('5') && f[1..].bytes().all(|b| b == b'0') => 1,
            Some(_) => return Err(bad()),
        };
        let doubled = whole
            .checked_mul(2)
            .and_then(|w| w.checked_add(half))
            .ok_or_else(bad)?;
        Ok(Half::from_doubled(if neg { -doubled } else { doubled }))
    }
}

/// A half-integer extended by symbolic `±∞`, used only as a capacity bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtHalf {
    NegInf,
    Finite(Half),
    PosInf,
}

impl ExtHalf {
    pub fn finite(self) -> Option<Half> {
        match self {
            ExtHalf::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtHalf::Finite(_))
    }

    pub fn int(v: i64) -> Self {
        ExtHalf::Finite(Half::from_int(v))
    }

    /// Sum that treats `+∞ + −∞` as a caller bug.
    pub fn checked_add(self, rhs: ExtHalf) -> Option<ExtHalf> {
        use ExtHalf::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Some(Finite(a + b)),
            (NegInf, PosInf) | (PosInf, NegInf) => None,
            (NegInf, _) | (_, NegInf) => Some(NegInf),
            (PosInf, _) | (_, PosInf) => Some(PosInf),
        }
    }

    /// Multiplication by a nonnegative integer coefficient; `0 · ∞ = 0`.
    pub fn scale(self, coef: i64) -> ExtHalf {
        debug_assert!(coef >= 0);
        if coef == 0 {
            return ExtHalf::Finite(Half::ZERO);
        }
        match self {
            ExtHalf::Finite(v) => ExtHalf::Finite(v * coef),
            other => other,
        }
    }
}

impl Neg for ExtHalf {
    type Output = ExtHalf;
    fn neg(self) -> ExtHalf {
        match self {
            ExtHalf::NegInf => ExtHalf::PosInf,
            ExtHalf::PosInf => ExtHalf::NegInf,
            ExtHalf::Finite(v) => ExtHalf::Finite(-v),
        }
    }
}

impl From<Half> for ExtHalf {
    fn from(v: Half) -> Self {
        ExtHalf::Finite(v)
    }
}

impl PartialOrd for ExtHalf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtHalf {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtHalf::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
        }
    }
}

impl fmt::Display for ExtHalf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtHalf::NegInf => f.write_str("-inf"),
            ExtHalf::PosInf => f.write_str("inf"),
            ExtHalf::Finite(v) => v.fmt(f),
        }
    }
}

impl FromStr for ExtHalf {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "+inf" => Ok(ExtHalf::PosInf),
            "-inf" => Ok(ExtHalf::NegInf),
            _ => s.parse().map(ExtHalf::Finite),
        }
    }
}

/// JSON form of a `Half` is its doubled integer (fields suffixed `_x2`).
impl Serialize for Half {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i64(self.doubled)
    }
}

impl<'de> Deserialize<'de> for Half {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        i64::deserialize(deserializer).map(Half::from_doubled)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(d: i64) -> Half {
        Half::from_doubled(d)
    }

    #[test]
    fn positive_part() {
        assert_eq!(half_pos(h(3)), h(3));
        assert_eq!(half_pos(h(-1)), Half::ZERO);
        assert_eq!(half_pos(Half::ZERO), Half::ZERO);
    }

    #[test]
    fn decimal_forms() {
        assert_eq!(h(3).to_string(), "1.5");
        assert_eq!(h(-1).to_string(), "-0.5");
        assert_eq!(h(-4).to_string(), "-2");
        assert_eq!("1.5".parse::<Half>().unwrap(), h(3));
        assert_eq!("-0.5".parse::<Half>().unwrap(), h(-1));
        assert_eq!("7".parse::<Half>().unwrap(), h(14));
        assert_eq!("2.0".parse::<Half>().unwrap(), h(4));
        assert!("0.25".parse::<Half>().is_err());
        assert!("abc".parse::<Half>().is_err());
        assert!(".5".parse::<Half>().is_err());
    }

    #[test]
    fn ext_order_and_infinities() {
        assert!(ExtHalf::NegInf < ExtHalf::int(-100));
        assert!(ExtHalf::int(100) < ExtHalf::PosInf);
        assert_eq!(ExtHalf::PosInf.scale(0), ExtHalf::int(0));
        assert_eq!(ExtHalf::NegInf.checked_add(ExtHalf::int(3)), Some(ExtHalf::NegInf));
        assert_eq!(ExtHalf::NegInf.checked_add(ExtHalf::PosInf), None);
        assert_eq!("-inf".parse::<ExtHalf>().unwrap(), ExtHalf::NegInf);
        assert_eq!("inf".parse::<ExtHalf>().unwrap(), ExtHalf::PosInf);
    }

    proptest! {
        #[test]
        fn pos_parts_sum_to_abs(d in -1_000_000i64..1_000_000) {
            let a = h(d);
            prop_assert_eq!(a.pos() + (-a).pos(), a.abs());
        }

        #[test]
        fn decimal_round_trip(d in -1_000_000i64..1_000_000) {
            let a = h(d);
            prop_assert_eq!(a.to_string().parse::<Half>().unwrap(), a);
            let json = serde_json::to_string(&a).unwrap();
            prop_assert_eq!(serde_json::from_str::<Half>(&json).unwrap(), a);
        }

        #[test]
        fn addition_is_exact(a in -1_000_000i64..1_000_000, b in -1_000_000i64..1_000_000) {
            prop_assert_eq!((h(a) + h(b)).doubled(), a + b);
            prop_assert_eq!((h(a) - h(b)).doubled(), a - b);
        }
    }
}
