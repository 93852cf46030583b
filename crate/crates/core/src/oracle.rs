//! Brute-force reference answers over the last `W + c` elements.

use std::collections::{HashSet, VecDeque};
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::config::SlackConfig;
use crate::error::{Error, Result};

/// Keeps the last `W + block_size` elements pushed.
#[derive(Debug, Clone)]
pub struct WindowOracle<T> {
    cfg: SlackConfig,
    buf: VecDeque<T>,
    seen: u64,
}

impl<T: Clone> WindowOracle<T> {
    pub fn new(cfg: SlackConfig) -> Self {
        let cap = (cfg.window() + cfg.block_size()) as usize;
        WindowOracle { cfg, buf: VecDeque::with_capacity(cap.min(1 << 20)), seen: 0 }
    }

    pub fn push(&mut self, x: T) {
        if self.buf.len() as u64 == self.cfg.window() + self.cfg.block_size() {
            self.buf.pop_front();
        }
        self.buf.push_back(x);
        self.seen += 1;
    }

    pub fn total_seen(&self) -> u64 {
        self.seen
    }

    fn check_slack(&self, c: u64) -> Result<()> {
        if c >= self.cfg.block_size() {
            return Err(Error::SlackOutOfRange { offset: c, block_size: self.cfg.block_size() });
        }
        Ok(())
    }

    /// The last `min(seen, W + c)` elements, oldest first.
    pub fn suffix(&self, c: u64) -> Result<Vec<T>> {
        self.check_slack(c)?;
        let n = ((self.cfg.window() + c) as usize).min(self.buf.len());
        Ok(self.buf.iter().skip(self.buf.len() - n).cloned().collect())
    }
}

impl WindowOracle<i64> {
    /// Sum of the last `W + c` elements, positions before the stream start counting as 0.
    pub fn sum(&self, c: u64) -> Result<i128> {
        Ok(self.suffix(c)?.iter().map(|&x| i128::from(x)).sum())
    }

    /// Maximum of the last `W + c` elements that exist; `None` on an empty stream.
    pub fn max(&self, c: u64) -> Result<Option<i64>> {
        Ok(self.suffix(c)?.into_iter().max())
    }

    pub fn mean(&self, c: u64) -> Result<BigRational> {
        let n = self.cfg.window() + c;
        Ok(BigRational::new(BigInt::from(self.sum(c)?), BigInt::from(n)))
    }

    /// Sample standard deviation over `W + c` zero-padded positions.
    pub fn stddev(&self, c: u64) -> Result<f64> {
        let n = self.cfg.window() + c;
        if n < 2 {
            return Err(Error::UndefinedStdDev(n));
        }
        let mean = self.mean(c)?;
        let mut acc = BigRational::zero();
        let suffix = self.suffix(c)?;
        for &x in &suffix {
            let d = BigRational::from_integer(BigInt::from(x)) - &mean;
            acc += &d * &d;
        }
        let pad = n - suffix.len() as u64;
        acc += BigRational::from_integer(BigInt::from(pad)) * &mean * &mean;
        let var = acc / BigRational::from_integer(BigInt::from(n - 1));
        Ok(var.to_f64().unwrap_or(f64::INFINITY).sqrt())
    }
}

impl<T: Clone + Eq + Hash> WindowOracle<T> {
    pub fn distinct(&self, c: u64) -> Result<usize> {
        Ok(self.suffix(c)?.into_iter().collect::<HashSet<_>>().len())
    }
}
