use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Floating point type the library is generic over.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Total order for sorting; NaN sorts last.
pub fn total_cmp<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or_else(|| match (a.is_nan(), b.is_nan()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        _ => Ordering::Less,
    })
}

pub fn max_of<T: Scalar>(xs: impl IntoIterator<Item = T>) -> Option<T> {
    xs.into_iter().fold(None, |acc, x| match acc {
        None => Some(x),
        Some(m) => Some(if x > m { x } else { m }),
    })
}

pub fn min_of<T: Scalar>(xs: impl IntoIterator<Item = T>) -> Option<T> {
    xs.into_iter().fold(None, |acc, x| match acc {
        None => Some(x),
        Some(m) => Some(if x < m { x } else { m }),
    })
}

/// A value in ℝ ∪ {−∞, +∞}. Variant order gives the order of the extended line.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExtendedReal<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Scalar> ExtendedReal<T> {
    pub fn from_scalar(x: T) -> Self {
        if x == T::infinity() {
            ExtendedReal::PosInf
        } else if x == T::neg_infinity() {
            ExtendedReal::NegInf
        } else {
            ExtendedReal::Finite(x)
        }
    }

    pub fn finite(self) -> Option<T> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn to_scalar(self) -> T {
        match self {
            ExtendedReal::NegInf => T::neg_infinity(),
            ExtendedReal::Finite(x) => x,
            ExtendedReal::PosInf => T::infinity(),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn neg(self) -> Self {
        match self {
            ExtendedReal::NegInf => ExtendedReal::PosInf,
            ExtendedReal::Finite(x) => ExtendedReal::Finite(-x),
            ExtendedReal::PosInf => ExtendedReal::NegInf,
        }
    }
}

/// A value in [0, ∞] carrying the generalized metric d(a,∞) = d(∞,a) = ∞, d(∞,∞) = 0.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExtendedNonneg<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> ExtendedNonneg<T> {
    pub fn zero() -> Self {
        ExtendedNonneg::Finite(T::zero())
    }

    /// Negative inputs are clamped to 0; ∞ and NaN map to `Infinite`.
    pub fn from_scalar(x: T) -> Self {
        if x.is_infinite() || x.is_nan() {
            ExtendedNonneg::Infinite
        } else if x < T::zero() {
            ExtendedNonneg::Finite(T::zero())
        } else {
            ExtendedNonneg::Finite(x)
        }
    }

    pub fn finite(self) -> Option<T> {
        match self {
            ExtendedNonneg::Finite(x) => Some(x),
            ExtendedNonneg::Infinite => None,
        }
    }

    pub fn to_scalar(self) -> T {
        match self {
            ExtendedNonneg::Finite(x) => x,
            ExtendedNonneg::Infinite => T::infinity(),
        }
    }

    pub fn add(self, other: Self) -> Self {
        match (self, other) {
            (ExtendedNonneg::Finite(a), ExtendedNonneg::Finite(b)) => ExtendedNonneg::from_scalar(a + b),
            _ => ExtendedNonneg::Infinite,
        }
    }

    pub fn scale(self, c: T) -> Self {
        match self {
            ExtendedNonneg::Finite(a) => ExtendedNonneg::from_scalar(a * c),
            ExtendedNonneg::Infinite if c == T::zero() => ExtendedNonneg::zero(),
            ExtendedNonneg::Infinite => ExtendedNonneg::Infinite,
        }
    }

    pub fn dist(self, other: Self) -> Self {
        match (self, other) {
            (ExtendedNonneg::Finite(a), ExtendedNonneg::Finite(b)) => ExtendedNonneg::Finite((a - b).abs()),
            (ExtendedNonneg::Infinite, ExtendedNonneg::Infinite) => ExtendedNonneg::zero(),
            _ => ExtendedNonneg::Infinite,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_real_order() {
        let a: ExtendedReal<f64> = ExtendedReal::NegInf;
        let b = ExtendedReal::Finite(-1e300);
        let c = ExtendedReal::Finite(1e300);
        let d = ExtendedReal::PosInf;
        assert!(a < b && b < c && c < d);
        assert_eq!(ExtendedReal::from_scalar(f64::INFINITY), d);
        assert_eq!(d.neg(), a);
    }

    #[test]
    fn footnote_metric() {
        let inf = ExtendedNonneg::<f64>::Infinite;
        let two = ExtendedNonneg::Finite(2.0);
        assert_eq!(inf.dist(two), inf);
        assert_eq!(two.dist(inf), inf);
        assert_eq!(inf.dist(inf), ExtendedNonneg::zero());
        assert_eq!(two.dist(ExtendedNonneg::Finite(5.0)), ExtendedNonneg::Finite(3.0));
        assert_eq!(two.add(inf), inf);
    }

    #[test]
    fn scalar_helpers_f32() {
        assert_eq!(f32::of(0.5), 0.5f32);
        assert_eq!(f32::of_usize(3), 3.0f32);
        assert_eq!(max_of([1.0f32, 3.0, 2.0]), Some(3.0));
        assert_eq!(min_of(Vec::<f64>::new()), None);
    }
}
