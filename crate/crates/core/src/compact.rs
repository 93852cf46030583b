//! Compact (1+eps)-multiplicative slack summing.
//!
//! The running block sum is kept as an exponent `y` with granule
//! `1/block_size`, so that `(1+eps/3)^y` approximates it from below. Only
//! `floor(y)` is stored per block. Queries add up the `q + 1` powers, which
//! costs O(q).

use crate::config::{SlackConfig, SlackEstimate};
use crate::error::Result;
use crate::fixed::{Ext, FixedPoint, Granule};
use crate::logpow::{Interval, LogDomain, RationalBase};
use crate::mult::check_mult_epsilon;
use crate::summer::WindowSum;

#[derive(Debug, Clone)]
pub struct MultCompactSummer {
    cfg: SlackConfig,
    block_size: u64,
    domain: LogDomain,
    /// Units of `1/block_size`.
    y: Ext<u64>,
    blocks: Vec<Ext<u64>>,
    index: usize,
    offset: u64,
    always_verify: bool,
}

impl MultCompactSummer {
    pub fn new(cfg: SlackConfig) -> Result<Self> {
        let eps = check_mult_epsilon(&cfg)?;
        let base = RationalBase::one_plus(eps, 3)?;
        let q = cfg.inv_tau() as usize;
        let block_size = cfg.block_size();
        Ok(MultCompactSummer {
            domain: LogDomain::new(base, block_size),
            block_size,
            cfg,
            y: Ext::NegInf,
            blocks: vec![Ext::NegInf; q],
            index: 0,
            offset: 0,
            always_verify: false,
        })
    }

    /// Confirm every floored logarithm exactly instead of trusting far-from-boundary floats.
    pub fn with_verified_steps(mut self, on: bool) -> Self {
        self.always_verify = on;
        self
    }

    pub fn base(&self) -> &RationalBase {
        self.domain.base()
    }

    pub fn update(&mut self, x: i64) -> Result<()> {
        self.cfg.check_value(x)?;
        self.y = self.domain.step_with_path(self.y, x as u64, self.always_verify).0;
        self.offset += 1;
        if self.offset == self.block_size {
            self.offset = 0;
            self.blocks[self.index] = self.y.map(|g| g / self.block_size);
            self.y = Ext::NegInf;
            self.index += 1;
            if self.index == self.blocks.len() {
                self.index = 0;
            }
        }
        Ok(())
    }

    fn sum_interval(&self) -> Option<Interval> {
        let stored = self.blocks.iter().filter_map(|b| b.finite()).map(|b| self.domain.whole_power_interval(b));
        let live = self.y.finite().map(|g| self.domain.exp_interval(g));
        stored.chain(live).reduce(|a, b| a.add(&b))
    }

    /// `(1+eps/3)^y + sum_i (1+eps/3)^b_i`, evaluated through 128-bit intervals.
    pub fn output(&self) -> SlackEstimate<f64> {
        let value = self.sum_interval().map_or(0.0, |iv| iv.to_f64());
        SlackEstimate::new(value, self.offset, self.cfg.window())
    }

    /// Rational bounds enclosing the exact query value.
    pub fn output_bounds(&self) -> (num_rational::BigRational, num_rational::BigRational) {
        match self.sum_interval() {
            Some(iv) => (iv.lo_rational(), iv.hi_rational()),
            None => (num_rational::BigRational::from_integer(0.into()), num_rational::BigRational::from_integer(0.into())),
        }
    }

    /// The live exponent `y`, or `-inf`.
    pub fn current_exponent(&self) -> Ext<FixedPoint> {
        self.y.map(|g| FixedPoint::new(g as i128, Granule::Recip(self.block_size)))
    }

    pub fn blocks(&self) -> &[Ext<u64>] {
        &self.blocks
    }

    pub fn block_index(&self) -> usize {
        self.index
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }
}

impl WindowSum for MultCompactSummer {
    type Value = f64;

    fn with_config(cfg: SlackConfig) -> Result<Self> {
        MultCompactSummer::new(cfg)
    }

    fn config(&self) -> &SlackConfig {
        &self.cfg
    }

    fn update(&mut self, x: i64) -> Result<()> {
        MultCompactSummer::update(self, x)
    }

    fn output(&self) -> SlackEstimate<f64> {
        MultCompactSummer::output(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn summer(w: u64, q: u64, r: u64, e: &str) -> MultCompactSummer {
        MultCompactSummer::new(SlackConfig::new(w, q, r).unwrap().with_epsilon(e.parse().unwrap())).unwrap()
    }

    #[test]
    fn zeros_stay_neg_inf() {
        let mut s = summer(8, 2, 4, "1/2");
        s.update(0).unwrap();
        assert_eq!(s.current_exponent(), Ext::NegInf);
        for _ in 0..7 {
            s.update(0).unwrap();
        }
        assert_eq!(s.output().estimate, 0.0);
        assert!(s.blocks().iter().all(|b| b.is_neg_inf()));
    }

    #[test]
    fn one_then_zero() {
        let mut s = summer(8, 2, 4, "1/2");
        assert_eq!(s.base().num(), 7);
        assert_eq!(s.base().den(), 6);
        s.update(1).unwrap();
        assert_eq!(s.current_exponent().finite().unwrap().value(), Ratio::from_integer(0));
        s.update(0).unwrap();
        assert_eq!(s.current_exponent().finite().unwrap().value(), Ratio::from_integer(0));
        assert_eq!(s.output().estimate, 1.0);
    }

    #[test]
    fn output_is_below_true_sum() {
        let mut s = summer(16, 4, 100, "1/4");
        let mut total = 0i64;
        let xs: Vec<i64> = (0..16).map(|i| (i * 37 + 11) % 101).collect();
        for &x in &xs {
            s.update(x).unwrap();
            total += x;
        }
        let est = s.output().estimate;
        assert!(est <= total as f64);
        assert!(est > total as f64 / 1.25);
    }
}
