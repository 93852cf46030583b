//! Bit accounting for sketch state and closed-form lower bounds.

use num_bigint::BigUint;
use serde::Serialize;

use crate::additive::check_additive;
use crate::config::SlackConfig;
use crate::error::{Error, Result};
use crate::logpow::{floor_log_base, RationalBase};
use crate::mult::{check_mult_epsilon, granule_k};

/// `ceil(log2(n))`: the bits needed to tell `n` values apart.
pub fn bits_for(n: u128) -> u64 {
    if n <= 1 {
        0
    } else {
        u64::from(128 - (n - 1).leading_zeros())
    }
}

fn big_bits_for(n: &BigUint) -> u64 {
    if *n <= BigUint::from(1u8) {
        0
    } else {
        (n - 1u8).bits()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum SpaceMode {
    Exact,
    Additive,
    Mult,
    MultCompact,
    Max,
    Shll { bucket_bits: u32 },
}

impl SpaceMode {
    pub fn name(&self) -> &'static str {
        match self {
            SpaceMode::Exact => "exact",
            SpaceMode::Additive => "additive",
            SpaceMode::Mult => "mult",
            SpaceMode::MultCompact => "mult-compact",
            SpaceMode::Max => "max",
            SpaceMode::Shll { .. } => "distinct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundVariant {
    Exact,
    Additive,
    Multiplicative,
    Max,
}

/// A lower bound on the bits any algorithm needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Bound {
    /// Every term evaluated exactly.
    Exact { bits: u64 },
    /// A term with an unspecified additive constant, evaluated with the constant dropped.
    Approximate { bits: u64 },
    /// Leading term of an Omega bound, constants dropped.
    Asymptotic { bits: u64 },
    Inapplicable { reason: String },
}

impl Bound {
    pub fn bits(&self) -> Option<u64> {
        match self {
            Bound::Exact { bits } | Bound::Approximate { bits } | Bound::Asymptotic { bits } => Some(*bits),
            Bound::Inapplicable { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariableBits {
    pub name: &'static str,
    pub entries: u64,
    pub entry_bits: u64,
    pub bits: u64,
}

impl VariableBits {
    fn new(name: &'static str, entries: u64, entry_bits: u64) -> Self {
        VariableBits { name, entries, entry_bits, bits: entries * entry_bits }
    }
}

/// Closed-form leading term of the known memory bound for the mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedForm {
    pub expression: &'static str,
    pub bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceReport {
    pub mode: &'static str,
    pub per_variable: Vec<VariableBits>,
    pub total_bits: u64,
    pub total_bytes: f64,
    pub formula: Option<ClosedForm>,
    pub lower_bound: Option<Bound>,
    pub deviations: Vec<String>,
    pub notes: Vec<String>,
}

impl SpaceReport {
    fn new(mode: SpaceMode, per_variable: Vec<VariableBits>) -> Self {
        let total_bits = per_variable.iter().map(|v| v.bits).sum();
        SpaceReport {
            mode: mode.name(),
            per_variable,
            total_bits,
            total_bytes: total_bits as f64 / 8.0,
            formula: None,
            lower_bound: None,
            deviations: Vec::new(),
            notes: Vec::new(),
        }
    }
}

fn ceil_bits(x: f64) -> u64 {
    if x <= 0.0 {
        0
    } else {
        x.ceil() as u64
    }
}

/// Index and offset counters shared by every block-based sketch.
fn counters(cfg: &SlackConfig) -> [VariableBits; 2] {
    [
        VariableBits::new("i", 1, bits_for(cfg.inv_tau() as u128)),
        VariableBits::new("c", 1, bits_for(cfg.block_size() as u128)),
    ]
}

/// Per-variable state widths of the sketch `mode` builds for `cfg`.
pub fn algo_bits(cfg: &SlackConfig, mode: SpaceMode) -> Result<SpaceReport> {
    let q = cfg.inv_tau();
    let bs = cfg.block_size() as u128;
    let r = cfg.range() as u128;
    let w = cfg.window() as u128;
    let mut report = match mode {
        SpaceMode::Exact => {
            let (block_values, window_values) = if cfg.signed() {
                (2 * r * bs + 1, 2 * r * w + 1)
            } else {
                (r * bs + 1, r * w + 1)
            };
            let y = bits_for(block_values);
            let mut vars = vec![
                VariableBits::new("y", 1, y),
                VariableBits::new("b", q, y),
                VariableBits::new("B", 1, bits_for(window_values)),
            ];
            vars.extend(counters(cfg));
            let mut rep = SpaceReport::new(mode, vars);
            let formula = (q + 1) as f64 * (r as f64 * bs as f64 + 1.0).log2().ceil()
                + (r as f64 * (w * w) as f64).log2();
            rep.formula = Some(ClosedForm {
                expression: "(1/tau + 1) * ceil(log(R*W*tau + 1)) + log(R*W^2)",
                bits: ceil_bits(formula),
            });
            rep.lower_bound = Some(lower_bound_bits(cfg, BoundVariant::Exact));
            rep
        }
        SpaceMode::Additive => {
            let (v1, v2) = check_additive(cfg)?;
            let half_carry = bs << (v1 - v2) >> 1;
            let y_values = (bs << v1) + 2 * half_carry + 1;
            let mut vars = vec![
                VariableBits::new("y", 1, bits_for(y_values)),
                VariableBits::new("b", q, bits_for((1u128 << v2) + 1)),
                VariableBits::new("B", 1, bits_for(((q as u128) << v2) + 1)),
            ];
            vars.extend(counters(cfg));
            let mut rep = SpaceReport::new(mode, vars);
            let eps = cfg.require_epsilon()?.to_f64();
            let tau = 1.0 / q as f64;
            let formula = q as f64 * (tau / eps).log2() + 2.0 * (w as f64 / eps).log2();
            rep.formula = Some(ClosedForm {
                expression: "(1/tau) * log(tau/eps) + 2 * log(W/eps)",
                bits: ceil_bits(formula),
            });
            rep.lower_bound = Some(lower_bound_bits(cfg, BoundVariant::Additive));
            rep.deviations.push(format!(
                "b entries take v2+1 = {} bits: with half-up rounding a stored block lies in [0, 2^v2]",
                v2 + 1
            ));
            rep.deviations.push(format!(
                "B is sized for its full range [0, (1/tau) * 2^v2] ({} bits)",
                bits_for(((q as u128) << v2) + 1)
            ));
            rep
        }
        SpaceMode::Mult => {
            let eps = check_mult_epsilon(cfg)?;
            let base = RationalBase::one_plus(eps, 2)?;
            let k = granule_k(eps.num(), eps.den()) as u128;
            let rho_max = floor_log_base((r * bs) as u64, &base) as u128;
            let y = bits_for(r * bs + 1);
            let mut vars = vec![
                VariableBits::new("y", 1, y),
                VariableBits::new("b", q, bits_for(rho_max + 2)),
                VariableBits::new("B", 1, bits_for(r * w * k + 1)),
            ];
            vars.extend(counters(cfg));
            let mut rep = SpaceReport::new(mode, vars);
            let ef = eps.to_f64();
            let formula_b = (r as f64 * bs as f64 + 1.0).log2().ceil() + (4.0 / ef).log2().ceil();
            let formula = y as f64
                + q as f64 * ((rho_max + 2) as f64).log2().ceil()
                + formula_b
                + bits_for(q as u128) as f64
                + bits_for(bs) as f64;
            rep.formula = Some(ClosedForm {
                expression: "log(RW*tau+1) + (1/tau) * ceil(log(rho_max+2)) + [ceil(log(RW*tau+1)) + ceil(log(4/eps))] + log(1/tau) + log(W*tau)",
                bits: ceil_bits(formula),
            });
            rep.lower_bound = Some(lower_bound_bits(cfg, BoundVariant::Multiplicative));
            rep.deviations.push(format!(
                "B holds values up to R*W in 1/k units, so it takes ceil(log(R*W*k+1)) = {} bits instead of {}",
                bits_for(r * w * k + 1),
                formula_b as u64
            ));
            rep
        }
        SpaceMode::MultCompact => {
            let eps = check_mult_epsilon(cfg)?;
            let base = RationalBase::one_plus(eps, 3)?;
            let top = r * bs;
            let rho_max = floor_log_base(top as u64, &base) as u128;
            let y_max = (bs as f64 * (top as f64).ln() / base.ln()).floor() as u128;
            let mut vars = vec![
                VariableBits::new("y", 1, bits_for(y_max + 2)),
                VariableBits::new("b", q, bits_for(rho_max + 2)),
            ];
            vars.extend(counters(cfg));
            let mut rep = SpaceReport::new(mode, vars);
            let ef = eps.to_f64();
            let formula = q as f64 * ((r as f64 * bs as f64).log2().max(1.0).log2() + (1.0 / ef).log2())
                + (w as f64).log2();
            rep.formula = Some(ClosedForm {
                expression: "(1/tau) * (log log(RW*tau) + log(1/eps)) + log(W)",
                bits: ceil_bits(formula),
            });
            rep.lower_bound = Some(lower_bound_bits(cfg, BoundVariant::Multiplicative));
            rep
        }
        SpaceMode::Max => {
            let values = if cfg.signed() { 2 * r + 2 } else { r + 2 };
            let mut vars = vec![
                VariableBits::new("y", 1, bits_for(values)),
                VariableBits::new("b", q, bits_for(values)),
            ];
            vars.extend(counters(cfg));
            let mut rep = SpaceReport::new(mode, vars);
            rep.formula = Some(ClosedForm {
                expression: "(1/tau) * log(R)",
                bits: q * bits_for(r + 1),
            });
            rep.lower_bound = Some(lower_bound_bits(cfg, BoundVariant::Max));
            rep
        }
        SpaceMode::Shll { bucket_bits } => {
            let m = 1u64 << bucket_bits;
            let reg = bits_for(64 - u128::from(bucket_bits) + 2);
            let vars = vec![
                VariableBits::new("registers", (q + 1) * m, reg),
                VariableBits::new("CB", 1, bits_for(q as u128 + 1)),
                VariableBits::new("PB", 1, bits_for(bs)),
            ];
            let mut rep = SpaceReport::new(mode, vars);
            rep.formula = Some(ClosedForm { expression: "(1/tau + 1) * m bytes", bits: 8 * (q + 1) * m });
            let whll = 5.0 * m as f64 * (w as f64 / m as f64).ln().max(0.0);
            rep.notes.push(format!("an exact-window HLL needs about 5m*ln(W/m) = {whll:.0} bytes"));
            rep
        }
    };
    if cfg.epsilon().is_some() && matches!(mode, SpaceMode::Exact | SpaceMode::Max | SpaceMode::Shll { .. }) {
        report.notes.push(format!("epsilon is ignored by {}", mode.name()));
    }
    Ok(report)
}

/// `ceil(n * log2(v))`, exactly when the power is small enough to expand.
fn ceil_n_log2(n: u64, v: u128) -> u64 {
    if v <= 1 || n == 0 {
        return 0;
    }
    if n.saturating_mul(128 - u64::from(v.leading_zeros())) <= 1 << 20 {
        big_bits_for(&BigUint::from(v).pow(n as u32))
    } else {
        ceil_bits(n as f64 * (v as f64).log2())
    }
}

/// `floor(log2(n))` for `n >= 1`.
fn floor_log2(n: u128) -> u64 {
    u64::from(127 - n.leading_zeros())
}

/// Closed-form lower bound for `variant` at `cfg`.
pub fn lower_bound_bits(cfg: &SlackConfig, variant: BoundVariant) -> Bound {
    let q = cfg.inv_tau();
    let r = cfg.range() as u128;
    let w = cfg.window() as u128;
    let bs = cfg.block_size() as u128;
    let half_q = q.div_ceil(2);
    match variant {
        BoundVariant::Exact => {
            let rw2 = BigUint::from(r) * BigUint::from(w) * BigUint::from(w);
            let first = rw2.bits() - 1;
            Bound::Exact { bits: first.max(ceil_n_log2(half_q, r * bs + 1)) }
        }
        BoundVariant::Additive => {
            let Some(eps) = cfg.epsilon() else {
                return Bound::Inapplicable { reason: "needs epsilon".into() };
            };
            let (num, den) = (eps.num() as u128, eps.den() as u128);
            if 4 * num >= den {
                return Bound::Inapplicable { reason: format!("needs eps < 1/4, got {eps}") };
            }
            let first = floor_log2(w * den / num);
            // floor(tau/(2 eps) + 1)
            let levels = den / (2 * num * q as u128) + 1;
            Bound::Approximate { bits: first.max(ceil_n_log2(half_q, levels)) }
        }
        BoundVariant::Multiplicative => {
            let Some(eps) = cfg.epsilon() else {
                return Bound::Inapplicable { reason: "needs epsilon".into() };
            };
            if 4 * eps.num() >= eps.den() {
                return Bound::Inapplicable { reason: format!("needs eps < 1/4, got {eps}") };
            }
            let lrw = ((r * w) as f64).log2();
            let limit = 2.0 * lrw - 8.0;
            if limit <= 0.0 || q as f64 > limit {
                return Bound::Inapplicable {
                    reason: format!("needs 1/(2 log(RW) - 8) <= tau, i.e. 1/tau <= {limit:.2}"),
                };
            }
            let e = eps.to_f64();
            let tau = 1.0 / q as f64;
            let v = (w as f64 / e).log2() + q as f64 * ((tau / e).log2() + lrw.log2());
            Bound::Asymptotic { bits: ceil_bits(v) }
        }
        BoundVariant::Max => Bound::Asymptotic { bits: ceil_bits(q as f64 * (r as f64 / q as f64).log2()) },
    }
}

/// Validates a bucket-bit count for distinct-count reports.
pub fn shll_mode(bucket_bits: u32) -> Result<SpaceMode> {
    if !(crate::hll::MIN_BUCKET_BITS..=crate::hll::MAX_BUCKET_BITS).contains(&bucket_bits) {
        return Err(Error::Config(format!("bucket bits {bucket_bits} out of range")));
    }
    Ok(SpaceMode::Shll { bucket_bits })
}
