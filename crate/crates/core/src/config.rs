use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// Upper limit on `R * W * (1 + tau)`; keeps every state word inside a signed 64-bit integer.
pub const CAPACITY_LIMIT: u128 = 1 << 62;

/// A positive rational error parameter, kept as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Epsilon {
    num: u64,
    den: u64,
}

impl Epsilon {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::Config(format!("epsilon must be a positive fraction, got {num}/{den}")));
        }
        let g = num.gcd(&den);
        Ok(Epsilon { num: num / g, den: den / g })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn as_ratio(&self) -> Ratio<i128> {
        Ratio::new(self.num as i128, self.den as i128)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    /// Accepts `NUM/DEN` or a bare integer `NUM`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse epsilon {s:?}; expected NUM/DEN"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: u64 = n.parse().map_err(|_| bad())?;
        let d: u64 = d.parse().map_err(|_| bad())?;
        Epsilon::new(n, d)
    }
}

/// Window parameters shared by every sketch.
///
/// `window` is W, `inv_tau` is q = 1/tau (blocks per window) and `range` is R.
/// The block size W/q must be a positive integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlackConfig {
    window: u64,
    inv_tau: u64,
    range: u64,
    epsilon: Option<Epsilon>,
    signed: bool,
}

impl SlackConfig {
    pub fn new(window: u64, inv_tau: u64, range: u64) -> Result<Self> {
        if window == 0 || inv_tau == 0 || range == 0 {
            return Err(Error::Config(format!(
                "window, inv_tau and range must be positive (W={window}, q={inv_tau}, R={range})"
            )));
        }
        if !window.is_multiple_of(inv_tau) {
            return Err(Error::Config(format!(
                "window {window} is not a multiple of inv_tau {inv_tau}; block size W/q must be an integer"
            )));
        }
        let cfg = SlackConfig { window, inv_tau, range, epsilon: None, signed: false };
        cfg.check_capacity()?;
        Ok(cfg)
    }

    pub fn with_epsilon(mut self, eps: Epsilon) -> Self {
        self.epsilon = Some(eps);
        self
    }

    /// Accept values in `[-R, R]` instead of `[0, R]`.
    pub fn with_signed(mut self, signed: bool) -> Self {
        self.signed = signed;
        self
    }

    /// Same window geometry with a different value range.
    pub fn with_range(&self, range: u64) -> Result<Self> {
        if range == 0 {
            return Err(Error::Config("range must be positive".into()));
        }
        let cfg = SlackConfig { range, ..self.clone() };
        cfg.check_capacity()?;
        Ok(cfg)
    }

    fn check_capacity(&self) -> Result<()> {
        let span = self.window as u128 + self.block_size() as u128;
        let cap = (self.range as u128).checked_mul(span);
        match cap {
            Some(c) if c <= CAPACITY_LIMIT => Ok(()),
            _ => Err(Error::Config(format!(
                "R*W*(1+tau) exceeds 2^62 (W={}, q={}, R={})",
                self.window, self.inv_tau, self.range
            ))),
        }
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn inv_tau(&self) -> u64 {
        self.inv_tau
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    pub fn block_size(&self) -> u64 {
        self.window / self.inv_tau
    }

    pub fn epsilon(&self) -> Option<Epsilon> {
        self.epsilon
    }

    pub fn signed(&self) -> bool {
        self.signed
    }

    pub fn tau(&self) -> Ratio<i128> {
        Ratio::new(1, self.inv_tau as i128)
    }

    pub fn require_epsilon(&self) -> Result<Epsilon> {
        self.epsilon.ok_or_else(|| Error::Config("this mode needs an epsilon".into()))
    }

    /// Lower bound of accepted values: `-R` for signed configurations, else 0.
    pub fn min_value(&self) -> i64 {
        if self.signed {
            -(self.range as i64)
        } else {
            0
        }
    }

    pub fn check_value(&self, x: i64) -> Result<()> {
        let (min, max) = (self.min_value(), self.range as i64);
        if x < min || x > max {
            return Err(Error::OutOfRange { value: x, min, max });
        }
        Ok(())
    }
}

/// The `<estimate, c>` pair every slack-window query returns.
///
/// `covered` is the window size the estimate refers to, `W + slack`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlackEstimate<T> {
    pub estimate: T,
    pub slack: u64,
    pub covered: u64,
}

impl<T> SlackEstimate<T> {
    pub fn new(estimate: T, slack: u64, window: u64) -> Self {
        SlackEstimate { estimate, slack, covered: window + slack }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> SlackEstimate<U> {
        SlackEstimate { estimate: f(self.estimate), slack: self.slack, covered: self.covered }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_size_must_divide() {
        assert!(SlackConfig::new(10, 3, 1).is_err());
        let cfg = SlackConfig::new(12, 3, 1).unwrap();
        assert_eq!(cfg.block_size(), 4);
    }

    #[test]
    fn capacity_guard() {
        assert!(SlackConfig::new(1 << 20, 1, 1 << 41).is_ok());
        assert!(SlackConfig::new(1 << 20, 1, 1 << 42).is_err());
    }

    #[test]
    fn epsilon_parse_reduces() {
        let e: Epsilon = "2/16".parse().unwrap();
        assert_eq!((e.num(), e.den()), (1, 8));
        assert!("x/2".parse::<Epsilon>().is_err());
        assert!("0/2".parse::<Epsilon>().is_err());
    }

    #[test]
    fn value_range() {
        let cfg = SlackConfig::new(4, 2, 8).unwrap();
        assert!(cfg.check_value(8).is_ok());
        assert!(cfg.check_value(-1).is_err());
        let cfg = cfg.with_signed(true);
        assert!(cfg.check_value(-8).is_ok());
        assert_eq!(cfg.check_value(9), Err(Error::OutOfRange { value: 9, min: -8, max: 8 }));
    }
}
