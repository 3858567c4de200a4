//! Exact ordered-field scalars.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed};

use crate::error::ParseError;

/// Ordered field used for every utility, probability and slack value.
///
/// Only exact types implement this; comparisons decide strict inequalities
/// and must never round.
pub trait Scalar:
    Clone + Ord + Hash + Debug + Display + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    /// Parses `"p"` or `"p/q"` with `q != 0`.
    fn parse_ratio(text: &str) -> Result<Self, ParseError>;

    /// Canonical `"p/q"` rendering (denominator always printed).
    fn to_ratio_string(&self) -> String;

    fn int(v: i64) -> Self {
        <Self as FromPrimitive>::from_i64(v).expect("i64 fits every scalar")
    }

    fn frac(num: i64, den: i64) -> Self {
        Self::int(num) / Self::int(den)
    }
}

impl<I> Scalar for Ratio<I>
where
    I: Integer
        + Clone
        + Signed
        + Hash
        + Debug
        + Display
        + FromStr
        + FromPrimitive
        + Send
        + Sync
        + 'static,
    Ratio<I>: FromPrimitive,
{
    fn parse_ratio(text: &str) -> Result<Self, ParseError> {
        let bad = || ParseError::InvalidRational(text.to_string());
        let t = text.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: I = n.parse().map_err(|_| bad())?;
        let d: I = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Ratio::new(n, d))
    }

    fn to_ratio_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

/// Sum of a slice.
pub fn sum<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, x| acc + x.clone())
}

pub(crate) fn recip_usize<T: Scalar>(n: usize) -> T {
    T::one() / T::int(n as i64)
}
