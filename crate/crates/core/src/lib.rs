//! Streaming aggregates over slack windows.
//!
//! A slack window of size `W` with slack `tau = 1/q` is the last `W + c`
//! elements of a stream for some `0 <= c < W/q` chosen by the sketch. Each
//! query returns the estimate together with `c`. Allowing this slack lets the
//! sketches keep one summary per block of `W/q` elements, which makes them
//! far smaller than exact sliding-window structures.
//!
//! - [`ExactSummer`]: exact sums.
//! - [`AdditiveSummer`]: sums within `R*W*eps`.
//! - [`MultSummer`], [`MultCompactSummer`]: sums within a factor `1+eps`.
//! - [`SlackMax`], [`SlackStdDev`], [`mean_output`]: other aggregates.
//! - [`SlackHll`]: distinct counts.
//! - [`space`]: bit accounting for all of the above.

pub mod additive;
pub mod aggregates;
pub mod compact;
pub mod config;
pub mod error;
pub mod exact;
pub mod fixed;
pub mod hll;
pub mod logpow;
pub mod mult;
pub mod oracle;
pub mod sketch;
pub mod space;
pub mod summer;

pub use additive::AdditiveSummer;
pub use aggregates::{mean_output, SlackMax, SlackStdDev, StdDevEstimate};
pub use compact::MultCompactSummer;
pub use config::{Epsilon, SlackConfig, SlackEstimate};
pub use error::{Error, Result};
pub use exact::ExactSummer;
pub use fixed::{Ext, FixedPoint, Granule};
pub use hll::{HllSketch, SlackHll};
pub use mult::MultSummer;
pub use oracle::WindowOracle;
pub use sketch::{AnySummer, SumKind};
pub use space::{algo_bits, lower_bound_bits, Bound, BoundVariant, SpaceMode, SpaceReport};
pub use summer::{EstimateValue, WindowSum};
