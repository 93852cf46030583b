//! Exact powers and floored logarithms of rational bases.
//!
//! The multiplicative sketches need `floor(log_b y)`, `floor(k * b^e)` and
//! `floor(s * log_b(x + b^(g/s)))` for a rational base `b = n/d > 1`. Floats
//! give a candidate; the candidate is then confirmed with exact big-integer
//! comparisons for small exponents, or with outward-rounded binary
//! fixed-point intervals whose precision doubles until the comparison is
//! decided.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::config::Epsilon;
use crate::error::{Error, Result};
use crate::fixed::Ext;

/// Above this many bits in `n^e`, comparisons switch from exact integers to intervals.
const EXACT_POW_BITS: u64 = 1 << 16;
const START_PREC: u32 = 128;
/// Interval refinement stops here. Only reached for exact ties, which the callers rule out.
const MAX_PREC: u32 = 1 << 16;

/// A rational base `num/den > 1` in lowest terms.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalBase {
    num: u64,
    den: u64,
    ln: f64,
}

impl RationalBase {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num <= den {
            return Err(Error::Config(format!("base {num}/{den} must exceed 1")));
        }
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        let ln = (num as f64 / den as f64).ln();
        Ok(RationalBase { num, den, ln })
    }

    /// `1 + eps/divisor`.
    pub fn one_plus(eps: Epsilon, divisor: u64) -> Result<Self> {
        let den = eps.den().checked_mul(divisor).ok_or(Error::Overflow)?;
        let num = den.checked_add(eps.num()).ok_or(Error::Overflow)?;
        RationalBase::new(num, den)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn ln(&self) -> f64 {
        self.ln
    }

    pub fn to_big_rational(&self) -> BigRational {
        BigRational::new(self.num.into(), self.den.into())
    }

    /// `base^e` as an exact rational.
    pub fn pow(&self, e: u64) -> BigRational {
        let e = u32::try_from(e).expect("exponent too large for an exact power");
        BigRational::new(BigUint::from(self.num).pow(e).into(), BigUint::from(self.den).pow(e).into())
    }

    fn exact_is_cheap(&self, e: u64) -> bool {
        e.saturating_mul(64 - self.num.leading_zeros() as u64) <= EXACT_POW_BITS
    }
}

/// A closed interval `[lo, hi] / 2^prec` with non-negative endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Interval {
    lo: BigUint,
    hi: BigUint,
    prec: u32,
}

fn ceil_shr(x: &BigUint, shift: u32) -> BigUint {
    let mask = (BigUint::one() << shift) - 1u32;
    (x + mask) >> shift
}

impl Interval {
    pub(crate) fn point(v: BigUint, prec: u32) -> Self {
        Interval { lo: v.clone(), hi: v, prec }
    }

    pub(crate) fn one(prec: u32) -> Self {
        Interval::point(BigUint::one() << prec, prec)
    }

    pub(crate) fn from_int(x: u64, prec: u32) -> Self {
        Interval::point(BigUint::from(x) << prec, prec)
    }

    pub(crate) fn from_ratio(num: u64, den: u64, prec: u32) -> Self {
        let scaled = BigUint::from(num) << prec;
        let (q, r) = scaled.div_rem(&BigUint::from(den));
        let hi = if r.is_zero() { q.clone() } else { &q + 1u32 };
        Interval { lo: q, hi, prec }
    }

    pub(crate) fn mul(&self, o: &Interval) -> Interval {
        debug_assert_eq!(self.prec, o.prec);
        let p = self.prec;
        Interval { lo: (&self.lo * &o.lo) >> p, hi: ceil_shr(&(&self.hi * &o.hi), p), prec: p }
    }

    pub(crate) fn add(&self, o: &Interval) -> Interval {
        debug_assert_eq!(self.prec, o.prec);
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi, prec: self.prec }
    }

    pub(crate) fn mul_int(&self, k: u64) -> Interval {
        Interval { lo: &self.lo * k, hi: &self.hi * k, prec: self.prec }
    }

    pub(crate) fn pow(&self, mut e: u64) -> Interval {
        let mut acc = Interval::one(self.prec);
        let mut sq = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }

    /// Ordering of every point of `self` against every point of `o`, if it is decided.
    pub(crate) fn cmp(&self, o: &Interval) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if self.lo > o.hi {
            Some(Ordering::Greater)
        } else if self.lo == self.hi && o.lo == o.hi && self.lo == o.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub(crate) fn floor(&self) -> Option<BigUint> {
        let a = &self.lo >> self.prec;
        let b = &self.hi >> self.prec;
        (a == b).then_some(a)
    }

    pub(crate) fn lo_rational(&self) -> BigRational {
        BigRational::new(self.lo.clone().into(), (BigUint::one() << self.prec).into())
    }

    pub(crate) fn hi_rational(&self) -> BigRational {
        BigRational::new(self.hi.clone().into(), (BigUint::one() << self.prec).into())
    }

    pub(crate) fn to_f64(&self) -> f64 {
        let mid: BigUint = (&self.lo + &self.hi) >> 1u32;
        big_to_f64_scaled(&mid, self.prec)
    }
}

/// `v / 2^prec` as the nearest-ish f64 (truncated to the top 64 bits first).
fn big_to_f64_scaled(v: &BigUint, prec: u32) -> f64 {
    let bits = v.bits();
    if bits <= 64 {
        return v.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-(prec as i32));
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::INFINITY);
    top * 2f64.powf(shift as f64 - prec as f64)
}

fn f64_to_fixed(v: f64, prec: u32) -> BigUint {
    // v >= 0; split into mantissa and exponent so no precision is invented.
    let (m, e) = frexp(v);
    let mant = (m * (1u64 << 53) as f64) as u64;
    let shift = e - 53 + prec as i64;
    let mant = BigUint::from(mant);
    if shift >= 0 {
        mant << (shift as u64)
    } else {
        mant >> ((-shift) as u64)
    }
}

fn frexp(v: f64) -> (f64, i64) {
    if v == 0.0 {
        return (0.0, 0);
    }
    let e = v.abs().log2().floor() as i64 + 1;
    let m = v / 2f64.powi(e as i32);
    // normalise drift from log2 rounding
    if m >= 1.0 {
        (m / 2.0, e + 1)
    } else if m < 0.5 {
        (m * 2.0, e - 1)
    } else {
        (m, e)
    }
}

/// Encloses `(num/den)^(1/k)` at `prec` fractional bits.
pub(crate) fn root_interval(num: u64, den: u64, k: u64, prec: u32) -> Interval {
    if k == 1 {
        return Interval::from_ratio(num, den, prec);
    }
    let guard = 2 * (64 - k.leading_zeros()) + 16;
    let work = prec + guard;
    let target = Interval::from_ratio(num, den, work);
    let t_mid: BigUint = (&target.lo + &target.hi) >> 1u32;
    let guess = ((num as f64 / den as f64).ln() / k as f64).exp();
    let mut r = f64_to_fixed(guess, work);
    let one = BigUint::one() << work;
    // Newton on r^k = t, in fixed point.
    for _ in 0..64 {
        let rk1 = Interval::point(r.clone(), work).pow(k - 1).lo;
        let rk = (&rk1 * &r) >> work;
        let numer = ((&rk * (k - 1)) + &t_mid) << work;
        let denom = &rk1 * k;
        if denom.is_zero() {
            r = one.clone();
            continue;
        }
        let next = numer / denom;
        let step = if next > r { &next - &r } else { &r - &next };
        r = next;
        if step <= BigUint::from(2u32) {
            break;
        }
    }
    let mut delta = BigUint::one() << (guard - 2);
    loop {
        let lo = if r > delta { &r - &delta } else { BigUint::zero() };
        let hi = &r + &delta;
        let lo_ok = Interval::point(lo.clone(), work).pow(k).hi <= target.lo;
        let hi_ok = Interval::point(hi.clone(), work).pow(k).lo >= target.hi;
        if lo_ok && hi_ok {
            return Interval { lo: lo >> guard, hi: ceil_shr(&hi, guard), prec };
        }
        delta <<= 2u32;
    }
}

/// Compares `base^e` against the integer `y` exactly.
pub fn cmp_pow_int(base: &RationalBase, e: u64, y: &BigUint) -> Ordering {
    if e == 0 {
        return BigUint::one().cmp(y);
    }
    if base.exact_is_cheap(e) {
        let e32 = e as u32;
        let lhs = BigUint::from(base.num).pow(e32);
        let rhs = y * BigUint::from(base.den).pow(e32);
        return lhs.cmp(&rhs);
    }
    // base^e is never an integer for e >= 1 (den > 1 in lowest terms), so refinement terminates.
    let mut prec = START_PREC.max(2 * y.bits() as u32 + 64);
    loop {
        let p = Interval::from_ratio(base.num, base.den, prec).pow(e);
        let yi = Interval::point(y << prec, prec);
        if let Some(ord) = p.cmp(&yi) {
            return ord;
        }
        prec *= 2;
        assert!(prec <= MAX_PREC, "power comparison failed to resolve");
    }
}

/// The unique `rho` with `base^rho <= y < base^(rho+1)`, for `y >= 1`.
pub fn floor_log_base(y: u64, base: &RationalBase) -> u64 {
    assert!(y >= 1, "floor_log_base needs y >= 1");
    let yb = BigUint::from(y);
    let f = (y as f64).ln() / base.ln;
    let mut rho = if f.is_finite() && f > 0.0 { f.floor() as u64 } else { 0 };
    while rho > 0 && cmp_pow_int(base, rho, &yb) == Ordering::Greater {
        rho -= 1;
    }
    while cmp_pow_int(base, rho + 1, &yb) != Ordering::Greater {
        rho += 1;
    }
    rho
}

/// `floor(k * base^e)`.
pub fn floor_scaled_pow(base: &RationalBase, e: u64, k: u64) -> u128 {
    if base.exact_is_cheap(e) {
        let e32 = e as u32;
        let n = BigUint::from(base.num).pow(e32) * k;
        let d = BigUint::from(base.den).pow(e32);
        return (n / d).to_u128().expect("scaled power exceeds u128");
    }
    // For large e, k * base^e is not an integer (den^e cannot divide k), so this terminates.
    let mut prec = START_PREC;
    loop {
        let v = Interval::from_ratio(base.num, base.den, prec).pow(e).mul_int(k);
        if let Some(f) = v.floor() {
            return f.to_u128().expect("scaled power exceeds u128");
        }
        prec *= 2;
        assert!(prec <= MAX_PREC, "scaled power floor failed to resolve");
    }
}

/// `base^e` as an f64 computed through a 128-bit interval.
pub fn pow_f64(base: &RationalBase, e: u64) -> f64 {
    Interval::from_ratio(base.num, base.den, START_PREC).pow(e).to_f64()
}

/// Log-domain arithmetic with granule `1/block_size`: values are exponents `g/block_size`
/// standing for `base^(g/block_size)`.
#[derive(Debug, Clone)]
pub struct LogDomain {
    base: RationalBase,
    block_size: u64,
    /// Enclosures of `base^(1/block_size)`, by precision.
    roots: Vec<Interval>,
}

/// How a log-domain step was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPath {
    /// The float candidate was far from a rounding boundary.
    Float,
    /// The candidate was confirmed by exact or interval comparison.
    Verified,
}

/// Distance from an integer, relative to the error scale of the float evaluation,
/// below which a float floor is re-checked.
const FLOAT_MARGIN: f64 = 1e-11;

impl LogDomain {
    pub fn new(base: RationalBase, block_size: u64) -> Self {
        assert!(block_size >= 1);
        let root = root_interval(base.num, base.den, block_size, START_PREC);
        LogDomain { base, block_size, roots: vec![root] }
    }

    pub fn base(&self) -> &RationalBase {
        &self.base
    }

    pub fn block_size(&self) -> u64 {
        self.block_size
    }

    fn root(&mut self, prec: u32) -> Interval {
        if let Some(r) = self.roots.iter().find(|r| r.prec == prec) {
            return r.clone();
        }
        let r = root_interval(self.base.num, self.base.den, self.block_size, prec);
        self.roots.push(r.clone());
        r
    }

    /// Encloses `base^(g/block_size)` at 128 fractional bits.
    pub(crate) fn exp_interval(&self, g: u64) -> Interval {
        let (q, r) = (g / self.block_size, g % self.block_size);
        self.whole_power_interval(q).mul(&self.roots[0].pow(r))
    }

    /// Encloses `base^e` for a whole exponent at 128 fractional bits.
    pub(crate) fn whole_power_interval(&self, e: u64) -> Interval {
        Interval::from_ratio(self.base.num, self.base.den, START_PREC).pow(e)
    }

    /// `base^(g/block_size)`, or 0 for `-inf`.
    pub fn exp_f64(&self, g: Ext<u64>) -> f64 {
        match g {
            Ext::NegInf => 0.0,
            Ext::Fin(g) => self.exp_interval(g).to_f64(),
        }
    }

    /// Compares `base^(cand/block_size)` with `x + base^(g/block_size)`.
    fn cmp_candidate(&mut self, cand: u64, g: Ext<u64>, x: u64) -> Ordering {
        let mut prec = START_PREC;
        loop {
            let root = self.root(prec);
            let lhs = if cand == 0 { Interval::one(prec) } else { root.pow(cand) };
            let mut rhs = Interval::from_int(x, prec);
            if let Ext::Fin(g) = g {
                rhs = rhs.add(&root.pow(g));
            }
            if let Some(ord) = lhs.cmp(&rhs) {
                return ord;
            }
            prec *= 2;
            if prec > MAX_PREC {
                // Only exact ties get here; a tie satisfies `<=`.
                return Ordering::Equal;
            }
        }
    }

    /// `floor(block_size * log_base(x + base^(g/block_size)))`, with `log(0) = -inf`.
    pub fn step(&mut self, g: Ext<u64>, x: u64) -> Ext<u64> {
        self.step_with_path(g, x, false).0
    }

    /// Like [`step`](Self::step) but always confirms the float candidate.
    pub fn step_verified(&mut self, g: Ext<u64>, x: u64) -> Ext<u64> {
        self.step_with_path(g, x, true).0
    }

    pub fn step_with_path(&mut self, g: Ext<u64>, x: u64, force_verify: bool) -> (Ext<u64>, StepPath) {
        if x == 0 {
            // log_b(b^y) = y is already on the grid.
            return (g, StepPath::Verified);
        }
        if g.is_neg_inf() && x == 1 {
            return (Ext::Fin(0), StepPath::Verified);
        }
        let bs = self.block_size as f64;
        let prev = match g {
            Ext::NegInf => 0.0,
            Ext::Fin(g) => (g as f64 / bs * self.base.ln).exp(),
        };
        let f = bs * (x as f64 + prev).ln() / self.base.ln;
        let mut cand = if f > 0.0 { f.floor() as u64 } else { 0 };
        let dist = (f - f.round()).abs();
        // f64 error in f is a few ulps of both |f| and bs/ln(base)
        let scale = 1.0 + 2.0 * f.abs() + bs / self.base.ln;
        if !force_verify && f.is_finite() && dist > FLOAT_MARGIN * scale {
            return (Ext::Fin(cand), StepPath::Float);
        }
        while cand > 0 && self.cmp_candidate(cand, g, x) == Ordering::Greater {
            cand -= 1;
        }
        while self.cmp_candidate(cand + 1, g, x) != Ordering::Greater {
            cand += 1;
        }
        (Ext::Fin(cand), StepPath::Verified)
    }
}
