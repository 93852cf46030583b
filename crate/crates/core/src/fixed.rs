//! Exact fixed-point values and the rounding operators the summing sketches share.
//!
//! Every sketch keeps its state as integer counts of a granule (`2^-v`, `1/k`
//! or `1/block_size`), so additions and subtractions never lose precision.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported `v` for `2^-v` granules.
pub const MAX_POW2_GRANULE: u32 = 62;

/// The unit a [`FixedPoint`] counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Granule {
    /// `2^-v`
    Pow2(u32),
    /// `1/k`
    Recip(u64),
}

impl Granule {
    pub fn denominator(&self) -> i128 {
        match *self {
            Granule::Pow2(v) => 1i128 << v,
            Granule::Recip(k) => k as i128,
        }
    }
}

/// `units * granule`, exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FixedPoint {
    units: i128,
    granule: Granule,
}

impl FixedPoint {
    pub fn new(units: i128, granule: Granule) -> Self {
        FixedPoint { units, granule }
    }

    pub fn zero(granule: Granule) -> Self {
        FixedPoint { units: 0, granule }
    }

    pub fn units(&self) -> i128 {
        self.units
    }

    pub fn granule(&self) -> Granule {
        self.granule
    }

    pub fn value(&self) -> Ratio<i128> {
        Ratio::new(self.units, self.granule.denominator())
    }

    pub fn to_f64(&self) -> f64 {
        self.units as f64 / self.granule.denominator() as f64
    }

    pub fn checked_add(self, rhs: FixedPoint) -> Result<FixedPoint> {
        if self.granule != rhs.granule {
            return Err(Error::GranuleMismatch);
        }
        let units = self.units.checked_add(rhs.units).ok_or(Error::Overflow)?;
        Ok(FixedPoint { units, granule: self.granule })
    }

    pub fn checked_sub(self, rhs: FixedPoint) -> Result<FixedPoint> {
        if self.granule != rhs.granule {
            return Err(Error::GranuleMismatch);
        }
        let units = self.units.checked_sub(rhs.units).ok_or(Error::Overflow)?;
        Ok(FixedPoint { units, granule: self.granule })
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// A value extended with a distinguished negative infinity.
///
/// `NegInf` orders below every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Ext<T> {
    NegInf,
    Fin(T),
}

impl<T> Ext<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Ext::NegInf => None,
            Ext::Fin(v) => Some(v),
        }
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, Ext::NegInf)
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Ext<U> {
        match self {
            Ext::NegInf => Ext::NegInf,
            Ext::Fin(v) => Ext::Fin(f(v)),
        }
    }
}

impl<T> From<Option<T>> for Ext<T> {
    fn from(v: Option<T>) -> Self {
        match v {
            None => Ext::NegInf,
            Some(v) => Ext::Fin(v),
        }
    }
}

/// `num / den` rounded to the nearest integer, ties toward +inf. `den` must be positive.
pub(crate) fn div_round_half_up(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    (2 * num + den).div_euclid(2 * den)
}

/// Rounds `z` to the nearest multiple of `2^-v`; ties round up.
pub fn round_frac(z: Ratio<i128>, v: u32) -> Result<FixedPoint> {
    if v > MAX_POW2_GRANULE {
        return Err(Error::Config(format!("granule exponent {v} exceeds {MAX_POW2_GRANULE}")));
    }
    let scaled = z.numer().checked_mul(1i128 << v).ok_or(Error::Overflow)?;
    scaled.checked_mul(2).and_then(|s| s.checked_add(*z.denom())).ok_or(Error::Overflow)?;
    let units = div_round_half_up(scaled, *z.denom());
    Ok(FixedPoint::new(units, Granule::Pow2(v)))
}

/// `floor(x * k) / k` for `x >= 0`.
pub fn round_down_k(x: Ratio<i128>, k: u64) -> Result<FixedPoint> {
    if k == 0 {
        return Err(Error::Config("granule 1/k needs k > 0".into()));
    }
    if *x.numer() < 0 {
        return Err(Error::OutOfRange { value: -1, min: 0, max: i64::MAX });
    }
    let units = x.numer().checked_mul(k as i128).ok_or(Error::Overflow)?.div_euclid(*x.denom());
    Ok(FixedPoint::new(units, Granule::Recip(k)))
}

/// `floor(x * block_size) / block_size`, with `-inf` mapped to itself.
pub fn rem_round_down(x: Ext<Ratio<i128>>, block_size: u64) -> Result<Ext<FixedPoint>> {
    if block_size == 0 {
        return Err(Error::Config("block size must be positive".into()));
    }
    match x {
        Ext::NegInf => Ok(Ext::NegInf),
        Ext::Fin(x) => {
            let units = x
                .numer()
                .checked_mul(block_size as i128)
                .ok_or(Error::Overflow)?
                .div_euclid(*x.denom());
            Ok(Ext::Fin(FixedPoint::new(units, Granule::Recip(block_size))))
        }
    }
}

impl PartialOrd for FixedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.value().cmp(&other.value()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use num_traits::Signed;

    fn r(n: i128, d: i128) -> Ratio<i128> {
        Ratio::new(n, d)
    }

    #[test]
    fn round_frac_examples() {
        assert_eq!(round_frac(r(0, 1), 7).unwrap().units(), 0);
        let q = round_frac(r(3, 10), 2).unwrap();
        assert_eq!((q.units(), q.value()), (1, r(1, 4)));
        // 1/8 sits exactly between 0 and 1/4; both are 1/8 away.
        let tie = round_frac(r(1, 8), 2).unwrap();
        assert_eq!((r(1, 8) - r(0, 1)), (r(1, 4) - r(1, 8)));
        assert_eq!(tie.value(), r(1, 4));
        assert_eq!(round_frac(r(-1, 8), 2).unwrap().value(), r(0, 1));
        assert!(round_frac(r(1, 2), 63).is_err());
    }

    #[test]
    fn round_down_k_examples() {
        assert_eq!(round_down_k(r(13, 10), 8).unwrap().value(), r(5, 4));
        assert_eq!(round_down_k(r(2, 1), 8).unwrap().value(), r(2, 1));
        // (5/4)^3 = 125/64 = 1.953125
        let cube = r(5, 4) * r(5, 4) * r(5, 4);
        assert_eq!(cube, r(1953125, 1000000));
        assert_eq!(round_down_k(cube, 8).unwrap().value(), r(15, 8));
    }

    #[test]
    fn rem_round_down_examples() {
        assert_eq!(rem_round_down(Ext::NegInf, 4).unwrap(), Ext::NegInf);
        let v = rem_round_down(Ext::Fin(r(37, 100)), 4).unwrap().finite().unwrap();
        assert_eq!(v.value(), r(1, 4));
        let v = rem_round_down(Ext::Fin(r(1, 1)), 4).unwrap().finite().unwrap();
        assert_eq!(v.value(), r(1, 1));
    }

    #[test]
    fn ext_ordering() {
        assert!(Ext::NegInf < Ext::Fin(-5i64));
        assert!(Ext::Fin(0) < Ext::Fin(1));
        assert_eq!(Ext::from(None::<u8>), Ext::NegInf);
    }

    #[test]
    fn mismatched_granules_rejected() {
        let a = FixedPoint::new(1, Granule::Pow2(3));
        let b = FixedPoint::new(1, Granule::Recip(8));
        assert_eq!(a.checked_add(b), Err(Error::GranuleMismatch));
    }

    proptest! {
        #[test]
        fn round_frac_within_half_granule(n in -1_000_000i128..=2_000_000, d in 1i128..=1_000_000, v in 0u32..=40) {
            let z = r(n, d);
            let q = round_frac(z, v).unwrap();
            let err = (q.value() - z).abs();
            prop_assert!(err <= r(1, 1i128 << (v + 1)));
        }

        #[test]
        fn round_down_k_brackets(n in 0i128..=10_000_000, d in 1i128..=1_000_000, k in 1u64..=4096) {
            let x = r(n, d);
            let q = round_down_k(x, k).unwrap().value();
            prop_assert!(q <= x);
            prop_assert!(x < q + r(1, k as i128));
        }

        #[test]
        fn rem_round_down_brackets(n in 0i128..=10_000_000, d in 1i128..=1_000_000, bs in 1u64..=4096) {
            let x = r(n, d);
            let q = rem_round_down(Ext::Fin(x), bs).unwrap().finite().unwrap().value();
            prop_assert!(q <= x);
            prop_assert!(x - r(1, bs as i128) < q);
        }

        #[test]
        fn same_granule_arithmetic_is_exact(a in -(1i128 << 60)..(1i128 << 60), b in -(1i128 << 60)..(1i128 << 60), v in 0u32..=62) {
            let g = Granule::Pow2(v);
            let (fa, fb) = (FixedPoint::new(a, g), FixedPoint::new(b, g));
            prop_assert_eq!(fa.checked_add(fb).unwrap().checked_sub(fb).unwrap(), fa);
        }
    }
}
