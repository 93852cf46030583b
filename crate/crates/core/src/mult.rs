//! (1+eps)-multiplicative slack summing with logarithmic block counters.
//!
//! Each completed block is stored as `rho = floor(log_{1+eps/2} y)`. A
//! fixed-point running total `B` holds the sum of the rounded-down powers
//! `floor(k * (1+eps/2)^rho) / k` with `k = ceil(4/eps)`, so queries are O(1).

use num_rational::Ratio;

use crate::config::{SlackConfig, SlackEstimate};
use crate::error::{Error, Result};
use crate::fixed::{Ext, FixedPoint, Granule};
use crate::logpow::{floor_log_base, floor_scaled_pow, RationalBase};
use crate::summer::WindowSum;

/// `ceil(4 / eps)`.
pub fn granule_k(num: u64, den: u64) -> u64 {
    (4 * den).div_ceil(num)
}

pub(crate) fn check_mult_epsilon(cfg: &SlackConfig) -> Result<crate::config::Epsilon> {
    let eps = cfg.require_epsilon()?;
    if cfg.signed() {
        return Err(Error::Config("multiplicative summing accepts only non-negative values".into()));
    }
    // 0 < eps <= 1/2
    if 2 * eps.num() > eps.den() {
        return Err(Error::Config(format!("multiplicative summing needs eps <= 1/2, got {eps}")));
    }
    Ok(eps)
}

#[derive(Debug, Clone)]
pub struct MultSummer {
    cfg: SlackConfig,
    block_size: u64,
    base: RationalBase,
    k: u64,
    y: u64,
    blocks: Vec<Ext<u64>>,
    /// Units of `1/k`.
    total: u128,
    index: usize,
    offset: u64,
}

impl MultSummer {
    pub fn new(cfg: SlackConfig) -> Result<Self> {
        let eps = check_mult_epsilon(&cfg)?;
        let base = RationalBase::one_plus(eps, 2)?;
        let k = granule_k(eps.num(), eps.den());
        let q = cfg.inv_tau() as usize;
        Ok(MultSummer {
            block_size: cfg.block_size(),
            cfg,
            base,
            k,
            y: 0,
            blocks: vec![Ext::NegInf; q],
            total: 0,
            index: 0,
            offset: 0,
        })
    }

    pub fn base(&self) -> &RationalBase {
        &self.base
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `floor(k * base^rho)`, the contribution of a stored block in units of `1/k`.
    pub fn contribution_units(&self, rho: Ext<u64>) -> u128 {
        match rho {
            Ext::NegInf => 0,
            Ext::Fin(r) => floor_scaled_pow(&self.base, r, self.k),
        }
    }

    pub fn update(&mut self, x: i64) -> Result<()> {
        self.cfg.check_value(x)?;
        self.y += x as u64;
        self.offset += 1;
        if self.offset == self.block_size {
            self.offset = 0;
            let rho = if self.y == 0 { Ext::NegInf } else { Ext::Fin(floor_log_base(self.y, &self.base)) };
            let evicted = self.contribution_units(self.blocks[self.index]);
            self.total = self.total - evicted + self.contribution_units(rho);
            self.blocks[self.index] = rho;
            self.y = 0;
            self.index += 1;
            if self.index == self.blocks.len() {
                self.index = 0;
            }
        }
        Ok(())
    }

    /// `B + y`, exactly.
    pub fn output(&self) -> SlackEstimate<Ratio<i128>> {
        let k = self.k as i128;
        let value = Ratio::new(self.total as i128 + self.y as i128 * k, k);
        SlackEstimate::new(value, self.offset, self.cfg.window())
    }

    pub fn current_block(&self) -> u64 {
        self.y
    }

    pub fn blocks(&self) -> &[Ext<u64>] {
        &self.blocks
    }

    pub fn total(&self) -> FixedPoint {
        FixedPoint::new(self.total as i128, Granule::Recip(self.k))
    }

    pub fn block_index(&self) -> usize {
        self.index
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }
}

impl WindowSum for MultSummer {
    type Value = Ratio<i128>;

    fn with_config(cfg: SlackConfig) -> Result<Self> {
        MultSummer::new(cfg)
    }

    fn config(&self) -> &SlackConfig {
        &self.cfg
    }

    fn update(&mut self, x: i64) -> Result<()> {
        MultSummer::update(self, x)
    }

    fn output(&self) -> SlackEstimate<Ratio<i128>> {
        MultSummer::output(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summer(w: u64, q: u64, r: u64, e: &str) -> MultSummer {
        MultSummer::new(SlackConfig::new(w, q, r).unwrap().with_epsilon(e.parse().unwrap())).unwrap()
    }

    #[test]
    fn granule_values() {
        assert_eq!(granule_k(1, 2), 8);
        assert_eq!(granule_k(1, 8), 32);
        assert_eq!(granule_k(3, 10), 14);
    }

    #[test]
    fn zero_block_stores_neg_inf() {
        let mut s = summer(4, 2, 4, "1/2");
        s.update(0).unwrap();
        s.update(0).unwrap();
        assert_eq!(s.blocks()[0], Ext::NegInf);
        assert_eq!(s.total().units(), 0);
    }

    #[test]
    fn block_of_two_with_half_epsilon() {
        let mut s = summer(4, 2, 4, "1/2");
        s.update(1).unwrap();
        s.update(1).unwrap();
        assert_eq!(s.blocks()[0], Ext::Fin(3));
        let contrib = s.total().value();
        assert_eq!(contrib, Ratio::new(15, 8));
        // 2/(1+eps) = 4/3 < 15/8 <= 2
        assert!(Ratio::new(4, 3) < contrib && contrib <= Ratio::from_integer(2));
    }

    #[test]
    fn block_of_one_contributes_exactly_one() {
        let mut s = summer(2, 2, 4, "1/4");
        s.update(1).unwrap();
        assert_eq!(s.blocks()[0], Ext::Fin(0));
        assert_eq!(s.total().value(), Ratio::from_integer(1));
    }

    #[test]
    fn eviction_restores_total() {
        let mut s = summer(6, 3, 9, "1/4");
        let mut x = 1i64;
        for _ in 0..200 {
            x = (x * 7 + 3) % 10;
            s.update(x).unwrap();
            let recomputed: u128 = s.blocks().iter().map(|&r| s.contribution_units(r)).sum();
            assert_eq!(s.total().units() as u128, recomputed);
        }
    }

    #[test]
    fn rejects_large_epsilon() {
        let cfg = SlackConfig::new(4, 2, 4).unwrap().with_epsilon("3/4".parse().unwrap());
        assert!(MultSummer::new(cfg).is_err());
    }
}
