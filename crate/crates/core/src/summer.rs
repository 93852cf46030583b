use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::ToPrimitive;

use crate::config::{SlackConfig, SlackEstimate};
use crate::error::Result;

/// A value a summing sketch can report, convertible for downstream arithmetic.
pub trait EstimateValue: Clone + std::fmt::Debug {
    fn to_big_rational(&self) -> BigRational;
    fn to_f64(&self) -> f64;
}

impl EstimateValue for i128 {
    fn to_big_rational(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(*self))
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl EstimateValue for Ratio<i128> {
    fn to_big_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl EstimateValue for f64 {
    fn to_big_rational(&self) -> BigRational {
        BigRational::from_float(*self).expect("estimate is finite")
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl EstimateValue for BigRational {
    fn to_big_rational(&self) -> BigRational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Common surface of the slack-window summing sketches.
pub trait WindowSum {
    type Value: EstimateValue;

    /// Builds the sketch for `cfg`, validating mode-specific requirements.
    fn with_config(cfg: SlackConfig) -> Result<Self>
    where
        Self: Sized;

    fn config(&self) -> &SlackConfig;

    fn update(&mut self, x: i64) -> Result<()>;

    fn output(&self) -> SlackEstimate<Self::Value>;
}
