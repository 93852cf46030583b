//! Additive-error slack summing with two-stage rounding.
//!
//! Each input is scaled by `1/R` and rounded to `v1` fractional bits. At the
//! end of a block the block sum is divided by the block size and rounded to
//! `v2` bits; what that second rounding lost stays in `y` and is carried into
//! the next block.

use num_rational::Ratio;

use crate::config::{Epsilon, SlackConfig, SlackEstimate};
use crate::error::{Error, Result};
use crate::fixed::{div_round_half_up, FixedPoint, Granule, MAX_POW2_GRANULE};
use crate::summer::WindowSum;

/// Smallest `n >= 0` with `2^n >= num/den`.
pub(crate) fn ceil_log2_ratio(num: u128, den: u128) -> u32 {
    let mut n = 0;
    while (den << n) < num {
        n += 1;
    }
    n
}

/// Fractional bits of the per-element rounding: `ceil(log2(1/eps)) + 1`.
pub fn upsilon1(eps: Epsilon) -> u32 {
    ceil_log2_ratio(eps.den() as u128, eps.num() as u128) + 1
}

/// Fractional bits of each stored block: `ceil(log2(tau/eps))`.
pub fn upsilon2(eps: Epsilon, inv_tau: u64) -> u32 {
    ceil_log2_ratio(eps.den() as u128, eps.num() as u128 * inv_tau as u128)
}

/// Validates `cfg` for additive summing and returns `(v1, v2)`.
///
/// Requires `tau > 2 * eps`; smaller slack is out of reach of this sketch.
pub(crate) fn check_additive(cfg: &SlackConfig) -> Result<(u32, u32)> {
    let eps = cfg.require_epsilon()?;
    if cfg.signed() {
        return Err(Error::Config("additive summing accepts only non-negative values".into()));
    }
    // tau > 2 eps  <=>  den > 2 * num * q
    if eps.den() as u128 <= 2 * eps.num() as u128 * cfg.inv_tau() as u128 {
        return Err(Error::Config(format!(
            "additive summing needs tau > 2*eps (tau=1/{}, eps={eps}); with less slack use an exact-window algorithm instead",
            cfg.inv_tau()
        )));
    }
    let (v1, v2) = (upsilon1(eps), upsilon2(eps, cfg.inv_tau()));
    if v1 > MAX_POW2_GRANULE {
        return Err(Error::Config(format!("epsilon {eps} needs {v1} fractional bits, limit is {MAX_POW2_GRANULE}")));
    }
    Ok((v1, v2))
}

#[derive(Debug, Clone)]
pub struct AdditiveSummer {
    cfg: SlackConfig,
    block_size: u64,
    upsilon1: u32,
    upsilon2: u32,
    /// Units of `2^-v1`.
    y: i128,
    /// Units of `2^-v2`.
    blocks: Vec<i64>,
    /// Units of `2^-v2`.
    total: i128,
    index: usize,
    offset: u64,
}

impl AdditiveSummer {
    pub fn new(cfg: SlackConfig) -> Result<Self> {
        let (v1, v2) = check_additive(&cfg)?;
        let q = cfg.inv_tau() as usize;
        Ok(AdditiveSummer {
            block_size: cfg.block_size(),
            cfg,
            upsilon1: v1,
            upsilon2: v2,
            y: 0,
            blocks: vec![0; q],
            total: 0,
            index: 0,
            offset: 0,
        })
    }

    pub fn upsilon1(&self) -> u32 {
        self.upsilon1
    }

    pub fn upsilon2(&self) -> u32 {
        self.upsilon2
    }

    fn shift(&self) -> u32 {
        self.upsilon1 - self.upsilon2
    }

    pub fn update(&mut self, x: i64) -> Result<()> {
        self.cfg.check_value(x)?;
        let scaled = div_round_half_up((x as i128) << self.upsilon1, self.cfg.range() as i128);
        self.y += scaled;
        self.offset += 1;
        if self.offset == self.block_size {
            self.offset = 0;
            let per_block = (self.block_size as i128) << self.shift();
            let rounded = div_round_half_up(self.y, per_block);
            let slot = &mut self.blocks[self.index];
            self.total += rounded - *slot as i128;
            *slot = rounded as i64;
            self.y -= rounded * per_block;
            self.index += 1;
            if self.index == self.blocks.len() {
                self.index = 0;
            }
        }
        Ok(())
    }

    /// `R * (block_size * B + y)`, exactly.
    pub fn output(&self) -> SlackEstimate<Ratio<i128>> {
        let units = ((self.block_size as i128 * self.total) << self.shift()) + self.y;
        let value = Ratio::new(units * self.cfg.range() as i128, 1i128 << self.upsilon1);
        SlackEstimate::new(value, self.offset, self.cfg.window())
    }

    pub fn current_block(&self) -> FixedPoint {
        FixedPoint::new(self.y, Granule::Pow2(self.upsilon1))
    }

    pub fn blocks(&self) -> Vec<FixedPoint> {
        self.blocks.iter().map(|&b| FixedPoint::new(b as i128, Granule::Pow2(self.upsilon2))).collect()
    }

    pub fn total(&self) -> FixedPoint {
        FixedPoint::new(self.total, Granule::Pow2(self.upsilon2))
    }

    pub fn block_index(&self) -> usize {
        self.index
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }
}

impl WindowSum for AdditiveSummer {
    type Value = Ratio<i128>;

    fn with_config(cfg: SlackConfig) -> Result<Self> {
        AdditiveSummer::new(cfg)
    }

    fn config(&self) -> &SlackConfig {
        &self.cfg
    }

    fn update(&mut self, x: i64) -> Result<()> {
        AdditiveSummer::update(self, x)
    }

    fn output(&self) -> SlackEstimate<Ratio<i128>> {
        AdditiveSummer::output(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn cfg(w: u64, q: u64, r: u64, e: &str) -> SlackConfig {
        SlackConfig::new(w, q, r).unwrap().with_epsilon(e.parse().unwrap())
    }

    #[test]
    fn rounding_widths() {
        let e: Epsilon = "1/8".parse().unwrap();
        assert_eq!((upsilon1(e), upsilon2(e, 2)), (4, 2));
        let e: Epsilon = "1/1048576".parse().unwrap();
        assert_eq!((upsilon1(e), upsilon2(e, 144)), (21, 13));
        let e: Epsilon = "1/10".parse().unwrap();
        assert_eq!((upsilon1(e), upsilon2(e, 4)), (5, 2));
    }

    #[test]
    fn hand_trace_full_range_stream() {
        let mut s = AdditiveSummer::new(cfg(4, 2, 4, "1/8")).unwrap();
        assert_eq!((s.upsilon1(), s.upsilon2()), (4, 2));
        for _ in 0..5 {
            s.update(4).unwrap();
        }
        let blocks: Vec<_> = s.blocks().iter().map(|b| b.value()).collect();
        assert_eq!(blocks, vec![Ratio::from_integer(1), Ratio::from_integer(1)]);
        assert_eq!(s.current_block().value(), Ratio::from_integer(1));
        let out = s.output();
        assert_eq!((out.estimate, out.slack), (Ratio::from_integer(20), 1));
    }

    #[test]
    fn extreme_inputs_round_exactly() {
        let mut s = AdditiveSummer::new(cfg(4, 2, 7, "1/8")).unwrap();
        s.update(7).unwrap();
        assert_eq!(s.current_block().value(), Ratio::from_integer(1));
        let mut s = AdditiveSummer::new(cfg(4, 2, 7, "1/8")).unwrap();
        s.update(0).unwrap();
        assert_eq!(s.current_block().units(), 0);
    }

    #[test]
    fn zero_stream() {
        let mut s = AdditiveSummer::new(cfg(8, 2, 5, "1/16")).unwrap();
        for _ in 0..11 {
            s.update(0).unwrap();
        }
        let out = s.output();
        assert_eq!((out.estimate, out.slack), (Ratio::from_integer(0), 3));
    }

    #[test]
    fn rejects_small_slack() {
        // tau = 1/4, eps = 1/8: tau == 2 eps
        assert!(AdditiveSummer::new(cfg(8, 4, 1, "1/8")).is_err());
        assert!(AdditiveSummer::new(cfg(8, 4, 1, "1/9")).is_ok());
        assert!(AdditiveSummer::new(SlackConfig::new(8, 4, 1).unwrap()).is_err());
    }

    #[test]
    fn carried_error_is_bounded_at_block_ends() {
        let c = cfg(12, 3, 7, "1/16");
        let mut s = AdditiveSummer::new(c).unwrap();
        let bound = Ratio::new(4i128, 1i128 << (s.upsilon2() + 1));
        let mut x: i64 = 3;
        for _ in 0..500 {
            x = (x * 5 + 1) % 8;
            s.update(x).unwrap();
            if s.offset() == 0 {
                assert!(s.current_block().value().abs() <= bound);
            }
        }
    }
}
