//! Maximum, mean and standard deviation over slack windows.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::config::{SlackConfig, SlackEstimate};
use crate::error::{Error, Result};
use crate::fixed::Ext;
use crate::summer::{EstimateValue, WindowSum};

/// Exact maximum over a slack window: one maximum per block in a cyclic buffer.
///
/// Blocks that have not been filled yet hold `-inf` and drop out of the query.
#[derive(Debug, Clone)]
pub struct SlackMax {
    cfg: SlackConfig,
    block_size: u64,
    current: Ext<i64>,
    blocks: Vec<Ext<i64>>,
    index: usize,
    offset: u64,
    seen: u64,
}

impl SlackMax {
    pub fn new(cfg: SlackConfig) -> Self {
        let q = cfg.inv_tau() as usize;
        SlackMax {
            block_size: cfg.block_size(),
            cfg,
            current: Ext::NegInf,
            blocks: vec![Ext::NegInf; q],
            index: 0,
            offset: 0,
            seen: 0,
        }
    }

    pub fn update(&mut self, x: i64) -> Result<()> {
        let r = self.cfg.range() as i64;
        if x < -r || x > r {
            return Err(Error::OutOfRange { value: x, min: -r, max: r });
        }
        self.current = self.current.max(Ext::Fin(x));
        self.seen += 1;
        self.offset += 1;
        if self.offset == self.block_size {
            self.offset = 0;
            self.blocks[self.index] = self.current;
            self.current = Ext::NegInf;
            self.index += 1;
            if self.index == self.blocks.len() {
                self.index = 0;
            }
        }
        Ok(())
    }

    pub fn output(&self) -> Result<SlackEstimate<i64>> {
        if self.seen == 0 {
            return Err(Error::Empty);
        }
        let m = self.blocks.iter().copied().fold(self.current, Ext::max);
        let m = m.finite().expect("a non-empty stream leaves a finite maximum");
        Ok(SlackEstimate::new(m, self.offset, self.cfg.window()))
    }

    pub fn current_block(&self) -> Ext<i64> {
        self.current
    }

    pub fn blocks(&self) -> &[Ext<i64>] {
        &self.blocks
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }
}

/// `estimate / (W + c)`.
pub fn mean_output<V: EstimateValue>(est: &SlackEstimate<V>) -> BigRational {
    assert!(est.covered >= 1);
    est.estimate.to_big_rational() / BigRational::from_integer(BigInt::from(est.covered))
}

/// Result of a standard-deviation query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StdDevEstimate {
    #[serde(serialize_with = "ser_ratio")]
    pub mean: BigRational,
    pub sigma: f64,
    pub slack: u64,
    pub covered: u64,
    /// The estimated variance came out negative and was replaced by 0.
    pub clamped: bool,
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(ToPrimitive::to_f64(r).unwrap_or(f64::NAN))
}

/// Standard deviation over a slack window from two summing sketches fed `x` and `x^2`.
#[derive(Debug, Clone)]
pub struct SlackStdDev<S> {
    sum_x: S,
    sum_x2: S,
}

impl<S: WindowSum> SlackStdDev<S> {
    /// Builds both inner sketches; the squares sketch gets range `R^2`.
    pub fn new(cfg: SlackConfig) -> Result<Self> {
        Self::with_summers(cfg, S::with_config)
    }

    /// Like [`SlackStdDev::new`] with the inner sketches built by `build`.
    pub fn with_summers(cfg: SlackConfig, build: impl Fn(SlackConfig) -> Result<S>) -> Result<Self> {
        let r = cfg.range();
        let r2 = r.checked_mul(r).ok_or_else(|| Error::Config(format!("range {r} squared overflows")))?;
        let sq_cfg = cfg.with_range(r2)?;
        Ok(SlackStdDev { sum_x: build(cfg)?, sum_x2: build(sq_cfg)? })
    }

    pub fn config(&self) -> &SlackConfig {
        self.sum_x.config()
    }

    pub fn update(&mut self, x: i64) -> Result<()> {
        self.sum_x.config().check_value(x)?;
        let sq = x.checked_mul(x).ok_or(Error::Overflow)?;
        self.sum_x.update(x)?;
        self.sum_x2.update(sq)
    }

    pub fn inner(&self) -> (&S, &S) {
        (&self.sum_x, &self.sum_x2)
    }

    /// `m = S_x/|W|`, `sigma = sqrt((S_x2 - |W| m^2) / (|W| - 1))`.
    pub fn output(&self) -> Result<StdDevEstimate> {
        let ex = self.sum_x.output();
        let ex2 = self.sum_x2.output();
        debug_assert_eq!(ex.slack, ex2.slack);
        let n = ex.covered;
        if n < 2 {
            return Err(Error::UndefinedStdDev(n));
        }
        let mean = mean_output(&ex);
        let nr = BigRational::from_integer(BigInt::from(n));
        let radicand = (ex2.estimate.to_big_rational() - &nr * &mean * &mean)
            / BigRational::from_integer(BigInt::from(n - 1));
        let clamped = radicand.is_negative();
        let sigma = if clamped || radicand.is_zero() {
            0.0
        } else {
            ToPrimitive::to_f64(&radicand).unwrap_or(f64::INFINITY).sqrt()
        };
        Ok(StdDevEstimate { mean, sigma, slack: ex.slack, covered: n, clamped })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactSummer;
    use num_rational::Ratio;

    fn cfg(w: u64, q: u64, r: u64) -> SlackConfig {
        SlackConfig::new(w, q, r).unwrap()
    }

    #[test]
    fn max_basics() {
        let mut m = SlackMax::new(cfg(4, 2, 10));
        assert_eq!(m.output(), Err(Error::Empty));
        m.update(5).unwrap();
        assert_eq!(m.current_block(), Ext::Fin(5));
        assert_eq!(m.output().unwrap().estimate, 5);
        m.update(9).unwrap();
        assert_eq!(m.blocks()[0], Ext::Fin(9));
        m.update(3).unwrap();
        assert_eq!(m.output().unwrap().estimate, 9);
    }

    #[test]
    fn max_decreasing_stream_reports_oldest_block() {
        let mut m = SlackMax::new(cfg(4, 2, 100));
        for x in (0..=20).rev() {
            m.update(x).unwrap();
        }
        // 21 elements, c = 1: window is the last 5 elements 4,3,2,1,0
        let out = m.output().unwrap();
        assert_eq!((out.estimate, out.slack), (4, 1));
    }

    #[test]
    fn max_handles_negative_values() {
        let mut m = SlackMax::new(cfg(2, 1, 5));
        for x in [-5, -3, -4, -2] {
            m.update(x).unwrap();
        }
        assert_eq!(m.output().unwrap().estimate, -2);
        assert!(m.update(6).is_err());
    }

    #[test]
    fn mean_examples() {
        let est = SlackEstimate::new(15i128, 1, 4);
        assert_eq!(mean_output(&est), BigRational::from_integer(3.into()));
        let est = SlackEstimate::new(Ratio::<i128>::from_integer(0), 3, 8);
        assert!(mean_output(&est).is_zero());
    }

    #[test]
    fn constant_stream_has_zero_sigma() {
        let mut s = SlackStdDev::<ExactSummer>::new(cfg(8, 4, 9)).unwrap();
        for _ in 0..30 {
            s.update(7).unwrap();
        }
        let out = s.output().unwrap();
        assert_eq!(out.sigma, 0.0);
        assert!(!out.clamped);
        assert_eq!(out.mean, BigRational::from_integer(7.into()));
    }

    #[test]
    fn inner_summers_advance_in_lockstep() {
        let mut s = SlackStdDev::<ExactSummer>::new(cfg(6, 3, 4)).unwrap();
        for n in 1..=20u64 {
            s.update((n % 5) as i64).unwrap();
            let (a, b) = s.inner();
            assert_eq!(a.offset(), n % 2);
            assert_eq!(a.offset(), b.offset());
        }
        let (_, b) = s.inner();
        assert_eq!(b.config().range(), 16);
    }

    #[test]
    fn square_sketch_sees_r_squared() {
        let mut s = SlackStdDev::<ExactSummer>::new(cfg(2, 1, 3)).unwrap();
        s.update(3).unwrap();
        assert_eq!(s.inner().1.current_block(), 9);
        s.update(0).unwrap();
        assert!(s.update(4).is_err());
    }
}
