//! Runtime selection among the summing sketches.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use serde::Serialize;

use crate::additive::AdditiveSummer;
use crate::compact::MultCompactSummer;
use crate::config::{SlackConfig, SlackEstimate};
use crate::error::{Error, Result};
use crate::exact::ExactSummer;
use crate::mult::MultSummer;
use crate::summer::{EstimateValue, WindowSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumKind {
    Exact,
    Additive,
    Mult,
    MultCompact,
}

impl SumKind {
    pub const ALL: [SumKind; 4] = [SumKind::Exact, SumKind::Additive, SumKind::Mult, SumKind::MultCompact];

    pub fn name(&self) -> &'static str {
        match self {
            SumKind::Exact => "exact",
            SumKind::Additive => "additive",
            SumKind::Mult => "mult",
            SumKind::MultCompact => "mult-compact",
        }
    }
}

impl fmt::Display for SumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SumKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown summing mode `{s}`")))
    }
}

/// One of the summing sketches, chosen at runtime.
#[derive(Debug, Clone)]
pub enum AnySummer {
    Exact(ExactSummer),
    Additive(AdditiveSummer),
    Mult(MultSummer),
    MultCompact(MultCompactSummer),
}

impl AnySummer {
    pub fn new(kind: SumKind, cfg: SlackConfig) -> Result<Self> {
        Ok(match kind {
            SumKind::Exact => AnySummer::Exact(ExactSummer::new(cfg)),
            SumKind::Additive => AnySummer::Additive(AdditiveSummer::new(cfg)?),
            SumKind::Mult => AnySummer::Mult(MultSummer::new(cfg)?),
            SumKind::MultCompact => AnySummer::MultCompact(MultCompactSummer::new(cfg)?),
        })
    }

    pub fn kind(&self) -> SumKind {
        match self {
            AnySummer::Exact(_) => SumKind::Exact,
            AnySummer::Additive(_) => SumKind::Additive,
            AnySummer::Mult(_) => SumKind::Mult,
            AnySummer::MultCompact(_) => SumKind::MultCompact,
        }
    }
}

fn widen<V: EstimateValue>(e: SlackEstimate<V>) -> SlackEstimate<BigRational> {
    e.map(|v| v.to_big_rational())
}

impl WindowSum for AnySummer {
    type Value = BigRational;

    /// Defaults to the exact sketch; use [`AnySummer::new`] to choose.
    fn with_config(cfg: SlackConfig) -> Result<Self> {
        AnySummer::new(SumKind::Exact, cfg)
    }

    fn config(&self) -> &SlackConfig {
        match self {
            AnySummer::Exact(s) => s.config(),
            AnySummer::Additive(s) => s.config(),
            AnySummer::Mult(s) => s.config(),
            AnySummer::MultCompact(s) => s.config(),
        }
    }

    fn update(&mut self, x: i64) -> Result<()> {
        match self {
            AnySummer::Exact(s) => s.update(x),
            AnySummer::Additive(s) => s.update(x),
            AnySummer::Mult(s) => s.update(x),
            AnySummer::MultCompact(s) => s.update(x),
        }
    }

    fn output(&self) -> SlackEstimate<BigRational> {
        match self {
            AnySummer::Exact(s) => widen(s.output()),
            AnySummer::Additive(s) => widen(s.output()),
            AnySummer::Mult(s) => widen(s.output()),
            AnySummer::MultCompact(s) => widen(s.output()),
        }
    }
}
