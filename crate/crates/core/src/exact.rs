//! Exact sum over a slack window with constant-time updates and queries.

use crate::config::{SlackConfig, SlackEstimate};
use crate::error::Result;
use crate::summer::WindowSum;

/// Keeps one counter per block plus their running total.
///
/// `output()` returns the exact sum of the last `W + c` elements, where `c`
/// is the number of elements in the current (incomplete) block. Before `W`
/// elements have arrived the missing prefix counts as zeros.
#[derive(Debug, Clone)]
pub struct ExactSummer {
    cfg: SlackConfig,
    block_size: u64,
    y: i64,
    blocks: Vec<i64>,
    total: i64,
    index: usize,
    offset: u64,
}

impl ExactSummer {
    pub fn new(cfg: SlackConfig) -> Self {
        let q = cfg.inv_tau() as usize;
        ExactSummer {
            block_size: cfg.block_size(),
            cfg,
            y: 0,
            blocks: vec![0; q],
            total: 0,
            index: 0,
            offset: 0,
        }
    }

    pub fn update(&mut self, x: i64) -> Result<()> {
        self.cfg.check_value(x)?;
        self.y += x;
        self.offset += 1;
        if self.offset == self.block_size {
            self.offset = 0;
            let slot = &mut self.blocks[self.index];
            self.total += self.y - *slot;
            *slot = self.y;
            self.y = 0;
            self.index += 1;
            if self.index == self.blocks.len() {
                self.index = 0;
            }
        }
        Ok(())
    }

    pub fn output(&self) -> SlackEstimate<i128> {
        SlackEstimate::new((self.total + self.y) as i128, self.offset, self.cfg.window())
    }

    pub fn current_block(&self) -> i64 {
        self.y
    }

    pub fn blocks(&self) -> &[i64] {
        &self.blocks
    }

    pub fn total(&self) -> i64 {
        self.total
    }

    pub fn block_index(&self) -> usize {
        self.index
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }
}

impl WindowSum for ExactSummer {
    type Value = i128;

    fn with_config(cfg: SlackConfig) -> Result<Self> {
        Ok(ExactSummer::new(cfg))
    }

    fn config(&self) -> &SlackConfig {
        &self.cfg
    }

    fn update(&mut self, x: i64) -> Result<()> {
        ExactSummer::update(self, x)
    }

    fn output(&self) -> SlackEstimate<i128> {
        ExactSummer::output(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn summer(w: u64, q: u64, r: u64) -> ExactSummer {
        ExactSummer::new(SlackConfig::new(w, q, r).unwrap())
    }

    #[test]
    fn trace_one_to_five() {
        let mut s = summer(4, 2, 8);
        for x in 1..=5 {
            s.update(x).unwrap();
        }
        assert_eq!(s.blocks(), &[3, 7]);
        assert_eq!(s.total(), 10);
        assert_eq!(s.current_block(), 5);
        assert_eq!(s.offset(), 1);
        let out = s.output();
        assert_eq!((out.estimate, out.slack, out.covered), (15, 1, 5));
    }

    #[test]
    fn empty_and_zero_streams() {
        let mut s = summer(4, 2, 8);
        assert_eq!(s.output(), SlackEstimate { estimate: 0, slack: 0, covered: 4 });
        for _ in 0..37 {
            s.update(0).unwrap();
        }
        assert_eq!((s.total(), s.current_block()), (0, 0));
    }

    #[test]
    fn trailing_full_range_block() {
        let r = 8;
        let mut s = summer(4, 2, r);
        for _ in 0..6 {
            s.update(0).unwrap();
        }
        s.update(r as i64).unwrap();
        s.update(r as i64).unwrap();
        let out = s.output();
        assert_eq!((out.estimate, out.slack), (2 * r as i128, 0));
    }

    #[test]
    fn general_summing_cancels() {
        let cfg = SlackConfig::new(4, 2, 1).unwrap().with_signed(true);
        let mut s = ExactSummer::new(cfg);
        s.update(-1).unwrap();
        s.update(1).unwrap();
        assert_eq!(s.blocks()[0], 0);
        assert_eq!(s.current_block(), 0);
    }

    #[test]
    fn rejects_out_of_range() {
        let mut s = summer(4, 2, 3);
        assert!(matches!(s.update(4), Err(Error::OutOfRange { .. })));
        assert!(matches!(s.update(-1), Err(Error::OutOfRange { .. })));
        // a rejected value leaves the state untouched
        assert_eq!(s.offset(), 0);
    }

    #[test]
    fn single_block_window() {
        let mut s = summer(3, 1, 5);
        for x in [1, 2, 3, 4] {
            s.update(x).unwrap();
        }
        assert_eq!(s.output().estimate, 1 + 2 + 3 + 4);
    }
}
