//! C ABI for the slack-window sketches.
//!
//! Every sketch is an opaque heap handle created by a `*_new` function and
//! released by the matching `*_free`. Functions return a [`SwStatus`] and
//! write results through out-pointers. Panics never cross the boundary; they
//! surface as [`SwStatus::Panic`].

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use slack_window::space::shll_mode;
use slack_window::{
    algo_bits, AnySummer, Epsilon, Error, SlackConfig, SlackHll, SlackMax, SlackStdDev, SpaceMode, SumKind,
    WindowSum,
};
use slack_window::summer::EstimateValue;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    OutOfRange = 3,
    Empty = 4,
    Undefined = 5,
    Overflow = 6,
    Panic = 7,
}

impl From<&Error> for SwStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_) | Error::GranuleMismatch => SwStatus::InvalidConfig,
            Error::OutOfRange { .. } | Error::SlackOutOfRange { .. } => SwStatus::OutOfRange,
            Error::Empty => SwStatus::Empty,
            Error::UndefinedStdDev(_) => SwStatus::Undefined,
            Error::Overflow => SwStatus::Overflow,
        }
    }
}

/// Which summing sketch to build.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwSumMode {
    Exact = 0,
    Additive = 1,
    Mult = 2,
    MultCompact = 3,
}

impl From<SwSumMode> for SumKind {
    fn from(m: SwSumMode) -> Self {
        match m {
            SwSumMode::Exact => SumKind::Exact,
            SwSumMode::Additive => SumKind::Additive,
            SwSumMode::Mult => SumKind::Mult,
            SwSumMode::MultCompact => SumKind::MultCompact,
        }
    }
}

/// Sketch kinds for `sw_space_total_bits`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwSpaceMode {
    Exact = 0,
    Additive = 1,
    Mult = 2,
    MultCompact = 3,
    Max = 4,
    Distinct = 5,
}

/// Window geometry. `eps_den == 0` means no epsilon.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SwConfig {
    pub window: u64,
    pub inv_tau: u64,
    pub range: u64,
    pub eps_num: u64,
    pub eps_den: u64,
    pub signed_values: bool,
}

/// A query answer covering the last `covered = W + slack` elements.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SwEstimate {
    pub estimate: f64,
    pub slack: u64,
    pub covered: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SwStdDev {
    pub mean: f64,
    pub sigma: f64,
    pub slack: u64,
    pub covered: u64,
    pub clamped: bool,
}

/// Opaque summing sketch.
pub struct SwSketch(AnySummer);

/// Opaque slack maximum.
pub struct SwMax(SlackMax);

/// Opaque slack standard deviation.
pub struct SwStdDevSketch(SlackStdDev<AnySummer>);

/// Opaque slack HyperLogLog.
pub struct SwSlackHll(SlackHll);

fn guard(f: impl FnOnce() -> Result<(), SwStatus>) -> SwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SwStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => SwStatus::Panic,
    }
}

fn lift<T>(r: slack_window::Result<T>) -> Result<T, SwStatus> {
    r.map_err(|e| SwStatus::from(&e))
}

unsafe fn config(cfg: *const SwConfig) -> Result<SlackConfig, SwStatus> {
    let c = cfg.as_ref().ok_or(SwStatus::NullPointer)?;
    let mut out = lift(SlackConfig::new(c.window, c.inv_tau, c.range))?.with_signed(c.signed_values);
    if c.eps_den != 0 {
        out = out.with_epsilon(lift(Epsilon::new(c.eps_num, c.eps_den))?);
    }
    Ok(out)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), SwStatus> {
    if out.is_null() {
        return Err(SwStatus::NullPointer);
    }
    out.write(v);
    Ok(())
}

unsafe fn handle<'a, T>(p: *mut T) -> Result<&'a mut T, SwStatus> {
    p.as_mut().ok_or(SwStatus::NullPointer)
}

/// Static description of `status`.
#[no_mangle]
pub extern "C" fn sw_status_str(status: SwStatus) -> *const c_char {
    let s: &'static CStr = match status {
        SwStatus::Ok => c"ok",
        SwStatus::NullPointer => c"null pointer argument",
        SwStatus::InvalidConfig => c"invalid configuration",
        SwStatus::OutOfRange => c"value out of range",
        SwStatus::Empty => c"no elements observed",
        SwStatus::Undefined => c"fewer than two elements in the window",
        SwStatus::Overflow => c"arithmetic overflow",
        SwStatus::Panic => c"internal error",
    };
    s.as_ptr()
}

/// # Safety
/// `cfg` must point to a valid `SwConfig`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_sketch_new(cfg: *const SwConfig, mode: SwSumMode, out: *mut *mut SwSketch) -> SwStatus {
    guard(|| {
        let s = lift(AnySummer::new(mode.into(), config(cfg)?))?;
        write(out, Box::into_raw(Box::new(SwSketch(s))))
    })
}

/// # Safety
/// `s` must come from `sw_sketch_new`.
#[no_mangle]
pub unsafe extern "C" fn sw_sketch_update(s: *mut SwSketch, x: i64) -> SwStatus {
    guard(|| lift(handle(s)?.0.update(x)))
}

/// # Safety
/// `s` must come from `sw_sketch_new`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_sketch_output(s: *mut SwSketch, out: *mut SwEstimate) -> SwStatus {
    guard(|| {
        let e = handle(s)?.0.output();
        write(out, SwEstimate { estimate: e.estimate.to_f64(), slack: e.slack, covered: e.covered })
    })
}

/// # Safety
/// `s` must come from `sw_sketch_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sw_sketch_free(s: *mut SwSketch) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `cfg` must point to a valid `SwConfig`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_max_new(cfg: *const SwConfig, out: *mut *mut SwMax) -> SwStatus {
    guard(|| {
        let m = SlackMax::new(config(cfg)?);
        write(out, Box::into_raw(Box::new(SwMax(m))))
    })
}

/// # Safety
/// `m` must come from `sw_max_new`.
#[no_mangle]
pub unsafe extern "C" fn sw_max_update(m: *mut SwMax, x: i64) -> SwStatus {
    guard(|| lift(handle(m)?.0.update(x)))
}

/// # Safety
/// `m` must come from `sw_max_new`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_max_output(m: *mut SwMax, out: *mut i64, slack: *mut u64) -> SwStatus {
    guard(|| {
        let e = lift(handle(m)?.0.output())?;
        write(out, e.estimate)?;
        write(slack, e.slack)
    })
}

/// # Safety
/// `m` must come from `sw_max_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sw_max_free(m: *mut SwMax) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `cfg` must point to a valid `SwConfig`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_stddev_new(
    cfg: *const SwConfig,
    inner: SwSumMode,
    out: *mut *mut SwStdDevSketch,
) -> SwStatus {
    guard(|| {
        let s = lift(SlackStdDev::with_summers(config(cfg)?, |c| AnySummer::new(inner.into(), c)))?;
        write(out, Box::into_raw(Box::new(SwStdDevSketch(s))))
    })
}

/// # Safety
/// `s` must come from `sw_stddev_new`.
#[no_mangle]
pub unsafe extern "C" fn sw_stddev_update(s: *mut SwStdDevSketch, x: i64) -> SwStatus {
    guard(|| lift(handle(s)?.0.update(x)))
}

/// # Safety
/// `s` must come from `sw_stddev_new`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_stddev_output(s: *mut SwStdDevSketch, out: *mut SwStdDev) -> SwStatus {
    guard(|| {
        let e = lift(handle(s)?.0.output())?;
        write(
            out,
            SwStdDev {
                mean: e.mean.to_f64(),
                sigma: e.sigma,
                slack: e.slack,
                covered: e.covered,
                clamped: e.clamped,
            },
        )
    })
}

/// # Safety
/// `s` must come from `sw_stddev_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sw_stddev_free(s: *mut SwStdDevSketch) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `cfg` must point to a valid `SwConfig`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_shll_new(
    cfg: *const SwConfig,
    bucket_bits: u32,
    seed: u64,
    out: *mut *mut SwSlackHll,
) -> SwStatus {
    guard(|| {
        let h = lift(SlackHll::new(config(cfg)?, bucket_bits, seed))?;
        write(out, Box::into_raw(Box::new(SwSlackHll(h))))
    })
}

/// Adds the id `data[0..len]`.
///
/// # Safety
/// `h` must come from `sw_shll_new`; `data` must point to `len` readable bytes (may be null when `len == 0`).
#[no_mangle]
pub unsafe extern "C" fn sw_shll_update(h: *mut SwSlackHll, data: *const u8, len: usize) -> SwStatus {
    guard(|| {
        let h = handle(h)?;
        let bytes = if len == 0 {
            &[][..]
        } else if data.is_null() {
            return Err(SwStatus::NullPointer);
        } else {
            slice::from_raw_parts(data, len)
        };
        h.0.update(bytes);
        Ok(())
    })
}

/// # Safety
/// `h` must come from `sw_shll_new`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_shll_output(h: *mut SwSlackHll, out: *mut SwEstimate) -> SwStatus {
    guard(|| {
        let e = handle(h)?.0.query();
        write(out, SwEstimate { estimate: e.estimate, slack: e.slack, covered: e.covered })
    })
}

/// # Safety
/// `h` must come from `sw_shll_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sw_shll_free(h: *mut SwSlackHll) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Total state bits of the sketch `mode` for `cfg`. `bucket_bits` is read only for `DISTINCT`.
///
/// # Safety
/// `cfg` must point to a valid `SwConfig`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_space_total_bits(
    cfg: *const SwConfig,
    mode: SwSpaceMode,
    bucket_bits: u32,
    out: *mut u64,
) -> SwStatus {
    guard(|| {
        let cfg = config(cfg)?;
        let mode = match mode {
            SwSpaceMode::Exact => SpaceMode::Exact,
            SwSpaceMode::Additive => SpaceMode::Additive,
            SwSpaceMode::Mult => SpaceMode::Mult,
            SwSpaceMode::MultCompact => SpaceMode::MultCompact,
            SwSpaceMode::Max => SpaceMode::Max,
            SwSpaceMode::Distinct => lift(shll_mode(bucket_bits))?,
        };
        write(out, lift(algo_bits(&cfg, mode))?.total_bits)
    })
}
