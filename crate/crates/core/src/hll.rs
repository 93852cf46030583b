//! HyperLogLog and its slack-window wrapper.

use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::config::{SlackConfig, SlackEstimate};
use crate::error::{Error, Result};

/// 64-bit hash of `bytes`: seeded XXH3.
pub fn hash64(seed: u64, bytes: &[u8]) -> u64 {
    xxh3_64_with_seed(bytes, seed)
}

/// Position (from 0) of the leftmost 1 among the top `width` bits of `bits`;
/// `width` when they are all zero.
pub fn lsb(bits: u64, width: u32) -> u32 {
    debug_assert!(width <= 64);
    bits.leading_zeros().min(width)
}

/// Bias-correction constant for `m` registers.
pub fn alpha(m: usize) -> f64 {
    match m {
        16 => 0.673,
        32 => 0.697,
        64 => 0.709,
        _ => 0.7213 / (1.0 + 1.079 / m as f64),
    }
}

/// Smallest and largest supported `b`.
pub const MIN_BUCKET_BITS: u32 = 4;
pub const MAX_BUCKET_BITS: u32 = 16;

/// HyperLogLog with `2^b` registers, each `-inf` (`None`) or a 0-based leading-zero count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HllSketch {
    bucket_bits: u32,
    registers: Vec<Option<u8>>,
    seed: u64,
}

impl HllSketch {
    pub fn new(bucket_bits: u32, seed: u64) -> Result<Self> {
        if !(MIN_BUCKET_BITS..=MAX_BUCKET_BITS).contains(&bucket_bits) {
            return Err(Error::Config(format!(
                "bucket bits must be in [{MIN_BUCKET_BITS}, {MAX_BUCKET_BITS}], got {bucket_bits}"
            )));
        }
        Ok(HllSketch { bucket_bits, registers: vec![None; 1 << bucket_bits], seed })
    }

    pub fn bucket_bits(&self) -> u32 {
        self.bucket_bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn registers(&self) -> &[Option<u8>] {
        &self.registers
    }

    pub fn update(&mut self, id: &[u8]) {
        self.update_hash(hash64(self.seed, id));
    }

    /// Feeds a precomputed hash value.
    pub fn update_hash(&mut self, h: u64) {
        let b = self.bucket_bits;
        let bucket = (h >> (64 - b)) as usize;
        let rank = lsb(h << b, 64 - b) as u8;
        let reg = &mut self.registers[bucket];
        *reg = (*reg).max(Some(rank));
    }

    /// `alpha_m * m^2 / sum_j 2^-r_j`.
    ///
    /// A register holding the 0-based count `M` contributes `2^-(M+1)`, i.e. the usual
    /// 1-based rank the constants `alpha_m` are calibrated for; an empty register contributes 1.
    pub fn query(&self) -> f64 {
        let m = self.registers.len() as f64;
        let z: f64 = self
            .registers
            .iter()
            .map(|r| match r {
                None => 1.0,
                Some(v) => (-(f64::from(*v) + 1.0)).exp2(),
            })
            .sum();
        alpha(self.registers.len()) * m * m / z
    }

    /// Register-wise maximum with `other`.
    pub fn merge(&mut self, other: &HllSketch) -> Result<()> {
        if other.bucket_bits != self.bucket_bits || other.seed != self.seed {
            return Err(Error::Config("sketches differ in bucket bits or seed".into()));
        }
        for (a, b) in self.registers.iter_mut().zip(&other.registers) {
            *a = (*a).max(*b);
        }
        Ok(())
    }

    pub fn reset(&mut self) {
        self.registers.fill(None);
    }
}

/// Distinct count over a slack window: `q+1` HyperLogLog instances in a cyclic buffer.
#[derive(Debug, Clone)]
pub struct SlackHll {
    cfg: SlackConfig,
    block_size: u64,
    instances: Vec<HllSketch>,
    cb: usize,
    pb: u64,
}

impl SlackHll {
    pub fn new(cfg: SlackConfig, bucket_bits: u32, seed: u64) -> Result<Self> {
        let proto = HllSketch::new(bucket_bits, seed)?;
        let n = cfg.inv_tau() as usize + 1;
        Ok(SlackHll { block_size: cfg.block_size(), cfg, instances: vec![proto; n], cb: 0, pb: 0 })
    }

    pub fn config(&self) -> &SlackConfig {
        &self.cfg
    }

    pub fn update(&mut self, id: &[u8]) {
        self.instances[self.cb].update(id);
        self.pb += 1;
        if self.pb == self.block_size {
            self.pb = 0;
            self.cb = (self.cb + 1) % self.instances.len();
            self.instances[self.cb].reset();
        }
    }

    /// Register-wise maximum over all instances.
    pub fn merged(&self) -> HllSketch {
        let mut out = self.instances[0].clone();
        for h in &self.instances[1..] {
            out.merge(h).expect("instances share parameters");
        }
        out
    }

    pub fn query(&self) -> SlackEstimate<f64> {
        SlackEstimate::new(self.merged().query(), self.pb, self.cfg.window())
    }

    pub fn instances(&self) -> &[HllSketch] {
        &self.instances
    }

    pub fn current_instance(&self) -> usize {
        self.cb
    }

    pub fn place_in_block(&self) -> u64 {
        self.pb
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lsb_examples() {
        assert_eq!(lsb(0b0001 << 60, 64), 3);
        assert_eq!(lsb(1 << 63, 64), 0);
        assert_eq!(lsb(0, 60), 60);
        assert_eq!(lsb(1, 60), 60);
    }

    #[test]
    fn alpha_table() {
        assert_eq!(alpha(16), 0.673);
        assert_eq!(alpha(64), 0.709);
        assert!((alpha(1024) - 0.7213 / (1.0 + 1.079 / 1024.0)).abs() < 1e-15);
    }

    #[test]
    fn hash_is_seeded_and_deterministic() {
        assert_eq!(hash64(1, b"abc"), hash64(1, b"abc"));
        assert_ne!(hash64(1, b"abc"), hash64(2, b"abc"));
        assert_ne!(hash64(0, b""), hash64(0, b"\0"));
    }

    #[test]
    fn empty_sketch_baseline() {
        let h = HllSketch::new(6, 0).unwrap();
        assert!((h.query() - alpha(64) * 64.0).abs() < 1e-12);
    }

    #[test]
    fn update_is_idempotent() {
        let mut h = HllSketch::new(4, 7).unwrap();
        h.update(b"x");
        let once = h.clone();
        h.update(b"x");
        assert_eq!(h, once);
    }

    #[test]
    fn register_rank_from_hash() {
        let mut h = HllSketch::new(4, 0).unwrap();
        h.update_hash(0x3 << 60 | 1 << 56);
        assert_eq!(h.registers()[3], Some(3));
        h.update_hash(0x3 << 60);
        assert_eq!(h.registers()[3], Some(60));
        h.update_hash(0x3 << 60 | 1 << 59);
        assert_eq!(h.registers()[3], Some(60));
    }

    #[test]
    fn merge_rejects_mismatched_seed() {
        let mut a = HllSketch::new(4, 0).unwrap();
        let b = HllSketch::new(4, 1).unwrap();
        assert!(a.merge(&b).is_err());
        assert!(HllSketch::new(3, 0).is_err());
    }

    #[test]
    fn slack_resets_one_instance_per_block() {
        let cfg = SlackConfig::new(8, 4, 1).unwrap();
        let mut s = SlackHll::new(cfg, 4, 0).unwrap();
        s.update(b"a");
        assert_eq!(s.place_in_block(), 1);
        s.update(b"b");
        assert_eq!((s.current_instance(), s.place_in_block()), (1, 0));
        assert!(s.instances()[1].registers().iter().all(Option::is_none));
        assert_eq!(s.instances().len(), 5);
    }

    #[test]
    fn repeated_id_matches_single_distinct() {
        let cfg = SlackConfig::new(16, 4, 1).unwrap();
        let mut s = SlackHll::new(cfg, 5, 3).unwrap();
        let mut one = HllSketch::new(5, 3).unwrap();
        one.update(b"same");
        for _ in 0..100 {
            s.update(b"same");
        }
        assert_eq!(s.query().estimate, one.query());
    }
}
