//! C ABI for `interlab`.
//!
//! Datasets and bootstrap distributions are opaque heap handles created by
//! `*_new`/`*_run`/`*_read_csv` and released with the matching `*_free`.
//! Every fallible call returns an [`InterlabStatus`]; on failure a message
//! is stored per thread and can be read with [`interlab_last_error`].
//! Panics never cross the boundary.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use interlab::dist::{self, Df2};
use interlab::intervals::{self, BootMethod, Interval, IntervalFlag, IntervalMethod};
use interlab::{io, model, resampling, BootstrapDistribution, Dataset, Error, Flavor, Scheme, SeedSpec};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterlabStatus {
    Ok = 0,
    NullPointer = 1,
    /// Invalid configuration or argument (CLI exit code 2).
    InvalidArgument = 2,
    /// Invalid or unreadable data (CLI exit code 3).
    DataError = 3,
    /// Numeric failure (CLI exit code 4).
    NumericError = 4,
    IoError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterlabScheme {
    BootI = 0,
    BootJSingle = 1,
    BootJRepeated = 2,
    BootIJRepeated = 3,
    BootIJSingle = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterlabFlavor {
    RawMean = 0,
    BiasCorrected = 1,
    Adjusted = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterlabBootMethod {
    Normal = 0,
    Percentile = 1,
    Bca = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterlabIntervalMethod {
    ApproxChi2 = 0,
    ApproxMoriguchi = 1,
    ApproxSatterthwaite = 2,
    BootNormal = 3,
    BootPercentile = 4,
    BootBca = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterlabIntervalFlag {
    None = 0,
    Inverted = 1,
    BcaCountClamped = 2,
    DegenerateReplicates = 3,
    /// The interval could not be formed; endpoints are NaN.
    NotComputed = 4,
}

/// Values for repeatability, between-laboratory and reproducibility.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InterlabTriple {
    pub repeatability: f64,
    pub between_lab: f64,
    pub reproducibility: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterlabInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub method: InterlabIntervalMethod,
    pub flag: InterlabIntervalFlag,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InterlabAnova {
    pub ssa: f64,
    pub sse: f64,
    pub msa: f64,
    pub mse: f64,
    pub phi_a: usize,
    pub phi_e: usize,
    pub estimates: InterlabTriple,
    pub standard_errors: InterlabTriple,
    /// Nonzero when the reproducibility SE radicand was clamped at zero.
    pub se_clamped: i32,
}

/// Opaque balanced `k × n` dataset.
pub struct InterlabDataset(Dataset);

/// Opaque bootstrap distribution.
pub struct InterlabBootstrap(BootstrapDistribution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> InterlabStatus {
    match err {
        Error::Data(_) => InterlabStatus::DataError,
        Error::Io { .. } => InterlabStatus::IoError,
        Error::Numeric(_) => InterlabStatus::NumericError,
        _ => InterlabStatus::InvalidArgument,
    }
}

type FfiResult = Result<(), InterlabStatus>;

fn fail(status: InterlabStatus, msg: impl Into<String>) -> InterlabStatus {
    set_error(msg);
    status
}

fn lift<T>(r: interlab::Result<T>) -> Result<T, InterlabStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn guard(f: impl FnOnce() -> FfiResult) -> InterlabStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => InterlabStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(InterlabStatus::Panic, "internal panic"),
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, InterlabStatus> {
    p.as_ref()
        .ok_or_else(|| fail(InterlabStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, InterlabStatus> {
    p.as_mut()
        .ok_or_else(|| fail(InterlabStatus::NullPointer, format!("{what} is null")))
}

fn triple(v: &interlab::VarianceComponents) -> InterlabTriple {
    InterlabTriple {
        repeatability: v.repeatability(),
        between_lab: v.between_lab(),
        reproducibility: v.reproducibility(),
    }
}

fn se_triple(v: &interlab::SeTriple) -> InterlabTriple {
    InterlabTriple {
        repeatability: v.repeatability,
        between_lab: v.between_lab,
        reproducibility: v.reproducibility,
    }
}

fn method_of(m: IntervalMethod) -> InterlabIntervalMethod {
    match m {
        IntervalMethod::ApproxChi2 => InterlabIntervalMethod::ApproxChi2,
        IntervalMethod::ApproxMoriguchi => InterlabIntervalMethod::ApproxMoriguchi,
        IntervalMethod::ApproxSatterthwaite => InterlabIntervalMethod::ApproxSatterthwaite,
        IntervalMethod::BootNormal => InterlabIntervalMethod::BootNormal,
        IntervalMethod::BootPercentile => InterlabIntervalMethod::BootPercentile,
        IntervalMethod::BootBCa => InterlabIntervalMethod::BootBca,
    }
}

fn interval(iv: &Interval) -> InterlabInterval {
    InterlabInterval {
        lower: iv.lower,
        upper: iv.upper,
        alpha: iv.alpha,
        method: method_of(iv.method),
        flag: match iv.flag {
            None => InterlabIntervalFlag::None,
            Some(IntervalFlag::Inverted) => InterlabIntervalFlag::Inverted,
            Some(IntervalFlag::BcaCountClamped) => InterlabIntervalFlag::BcaCountClamped,
            Some(IntervalFlag::DegenerateReplicates) => InterlabIntervalFlag::DegenerateReplicates,
        },
    }
}

fn scheme(s: InterlabScheme) -> Scheme {
    match s {
        InterlabScheme::BootI => Scheme::BootI,
        InterlabScheme::BootJSingle => Scheme::BootJSingle,
        InterlabScheme::BootJRepeated => Scheme::BootJRepeated,
        InterlabScheme::BootIJRepeated => Scheme::BootIJRepeated,
        InterlabScheme::BootIJSingle => Scheme::BootIJSingle,
    }
}

fn flavor(f: InterlabFlavor) -> Flavor {
    match f {
        InterlabFlavor::RawMean => Flavor::RawMean,
        InterlabFlavor::BiasCorrected => Flavor::BiasCorrected,
        InterlabFlavor::Adjusted => Flavor::Adjusted,
    }
}

fn boot_method(m: InterlabBootMethod) -> BootMethod {
    match m {
        InterlabBootMethod::Normal => BootMethod::Normal,
        InterlabBootMethod::Percentile => BootMethod::Percentile,
        InterlabBootMethod::Bca => BootMethod::BCa,
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn interlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn interlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `k * n` row-major values into a new dataset.
#[no_mangle]
pub unsafe extern "C" fn interlab_dataset_new(
    values: *const f64,
    k: usize,
    n: usize,
    out_dataset: *mut *mut InterlabDataset,
) -> InterlabStatus {
    guard(|| {
        let slot = out(out_dataset, "out_dataset")?;
        *slot = ptr::null_mut();
        if values.is_null() {
            return Err(fail(InterlabStatus::NullPointer, "values is null"));
        }
        let len = k
            .checked_mul(n)
            .ok_or_else(|| fail(InterlabStatus::InvalidArgument, "k * n overflows"))?;
        let data = std::slice::from_raw_parts(values, len).to_vec();
        let ds = lift(Dataset::from_row_major(k, n, data))?;
        // Rejects k < 2 or n < 2 with the same data error codes as ANOVA.
        lift(model::compute_sums(&ds))?;
        *slot = Box::into_raw(Box::new(InterlabDataset(ds)));
        Ok(())
    })
}

/// Reads a CSV file: long format `lab,replicate,value` when `wide` is 0,
/// otherwise `lab,rep1,...,repN`.
#[no_mangle]
pub unsafe extern "C" fn interlab_dataset_read_csv(
    path: *const c_char,
    wide: i32,
    out_dataset: *mut *mut InterlabDataset,
) -> InterlabStatus {
    guard(|| {
        let slot = out(out_dataset, "out_dataset")?;
        *slot = ptr::null_mut();
        if path.is_null() {
            return Err(fail(InterlabStatus::NullPointer, "path is null"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(InterlabStatus::InvalidArgument, "path is not UTF-8"))?;
        let ds = lift(if wide != 0 {
            io::ingest_wide(path)
        } else {
            io::ingest(path)
        })?;
        *slot = Box::into_raw(Box::new(InterlabDataset(ds)));
        Ok(())
    })
}

/// Releases a dataset. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn interlab_dataset_free(dataset: *mut InterlabDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

#[no_mangle]
pub unsafe extern "C" fn interlab_dataset_dims(
    dataset: *const InterlabDataset,
    out_k: *mut usize,
    out_n: *mut usize,
) -> InterlabStatus {
    guard(|| {
        let ds = &deref(dataset, "dataset")?.0;
        *out(out_k, "out_k")? = ds.k();
        *out(out_n, "out_n")? = ds.n();
        Ok(())
    })
}

/// Sums of squares, ANOVA estimates and their standard errors.
#[no_mangle]
pub unsafe extern "C" fn interlab_anova(
    dataset: *const InterlabDataset,
    out_anova: *mut InterlabAnova,
) -> InterlabStatus {
    guard(|| {
        let ds = &deref(dataset, "dataset")?.0;
        let slot = out(out_anova, "out_anova")?;
        let sums = lift(model::compute_sums(ds))?;
        let est = model::anova_estimates(&sums, ds.n());
        let se = model::anova_standard_errors(&est, ds.k(), ds.n());
        *slot = InterlabAnova {
            ssa: sums.ssa,
            sse: sums.sse,
            msa: sums.msa,
            mse: sums.mse,
            phi_a: sums.phi_a,
            phi_e: sums.phi_e,
            estimates: triple(&est),
            standard_errors: se_triple(&se.se),
            se_clamped: i32::from(se.reproducibility_clamped),
        };
        Ok(())
    })
}

/// Chi-square, Moriguchi and Satterthwaite intervals written to
/// `out_intervals[0..3]`. An interval that cannot be formed gets NaN
/// endpoints and the `NOT_COMPUTED` flag; the call still succeeds.
#[no_mangle]
pub unsafe extern "C" fn interlab_approx_intervals(
    dataset: *const InterlabDataset,
    alpha: f64,
    out_intervals: *mut InterlabInterval,
) -> InterlabStatus {
    guard(|| {
        let ds = &deref(dataset, "dataset")?.0;
        if out_intervals.is_null() {
            return Err(fail(InterlabStatus::NullPointer, "out_intervals is null"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(fail(InterlabStatus::InvalidArgument, format!("invalid alpha {alpha}")));
        }
        let sums = lift(model::compute_sums(ds))?;
        let all = intervals::approximate_intervals(&sums, alpha);
        let methods = [
            InterlabIntervalMethod::ApproxChi2,
            InterlabIntervalMethod::ApproxMoriguchi,
            InterlabIntervalMethod::ApproxSatterthwaite,
        ];
        let out = std::slice::from_raw_parts_mut(out_intervals, 3);
        for ((slot, r), method) in out
            .iter_mut()
            .zip([&all.repeatability, &all.between_lab, &all.reproducibility])
            .zip(methods)
        {
            *slot = match r {
                Ok(iv) => interval(iv),
                Err(_) => InterlabInterval {
                    lower: f64::NAN,
                    upper: f64::NAN,
                    alpha,
                    method,
                    flag: InterlabIntervalFlag::NotComputed,
                },
            };
        }
        Ok(())
    })
}

/// Runs `m` bootstrap replicates. Replicate `t` draws from the stream
/// `(mix(seed, stream), t)`, so equal arguments give equal results.
#[no_mangle]
pub unsafe extern "C" fn interlab_bootstrap_run(
    dataset: *const InterlabDataset,
    scheme_id: InterlabScheme,
    m: usize,
    seed: u64,
    stream: u64,
    out_bootstrap: *mut *mut InterlabBootstrap,
) -> InterlabStatus {
    guard(|| {
        let slot = out(out_bootstrap, "out_bootstrap")?;
        *slot = ptr::null_mut();
        let ds = &deref(dataset, "dataset")?.0;
        let dist = lift(resampling::run_bootstrap(
            ds,
            scheme(scheme_id),
            m,
            SeedSpec::new(seed, stream),
        ))?;
        *slot = Box::into_raw(Box::new(InterlabBootstrap(dist)));
        Ok(())
    })
}

/// Releases a bootstrap distribution. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn interlab_bootstrap_free(bootstrap: *mut InterlabBootstrap) {
    if !bootstrap.is_null() {
        drop(Box::from_raw(bootstrap));
    }
}

/// Number of replicates.
#[no_mangle]
pub unsafe extern "C" fn interlab_bootstrap_size(
    bootstrap: *const InterlabBootstrap,
    out_m: *mut usize,
) -> InterlabStatus {
    guard(|| {
        *out(out_m, "out_m")? = deref(bootstrap, "bootstrap")?.0.m();
        Ok(())
    })
}

/// Point estimate and standard error of one estimator flavor.
#[no_mangle]
pub unsafe extern "C" fn interlab_bootstrap_estimates(
    bootstrap: *const InterlabBootstrap,
    flavor_id: InterlabFlavor,
    out_estimate: *mut InterlabTriple,
    out_se: *mut InterlabTriple,
) -> InterlabStatus {
    guard(|| {
        let dist = &deref(bootstrap, "bootstrap")?.0;
        let view = lift(dist.view(flavor(flavor_id)))?;
        *out(out_estimate, "out_estimate")? = triple(&view.center);
        *out(out_se, "out_se")? = se_triple(&view.se);
        Ok(())
    })
}

/// Bootstrap intervals for the three components, written to
/// `out_intervals[0..3]`. Only the raw-mean and adjusted flavors have
/// intervals.
#[no_mangle]
pub unsafe extern "C" fn interlab_bootstrap_interval(
    bootstrap: *const InterlabBootstrap,
    flavor_id: InterlabFlavor,
    method: InterlabBootMethod,
    alpha: f64,
    out_intervals: *mut InterlabInterval,
) -> InterlabStatus {
    guard(|| {
        let dist = &deref(bootstrap, "bootstrap")?.0;
        if out_intervals.is_null() {
            return Err(fail(InterlabStatus::NullPointer, "out_intervals is null"));
        }
        let ivs = lift(intervals::bootstrap_interval_suite(
            dist,
            flavor(flavor_id),
            boot_method(method),
            alpha,
        ))?;
        let out = std::slice::from_raw_parts_mut(out_intervals, 3);
        out[0] = interval(&ivs.repeatability);
        out[1] = interval(&ivs.between_lab);
        out[2] = interval(&ivs.reproducibility);
        Ok(())
    })
}

/// Copies the raw replicate triples, row-major `M × 3`, into `out_values`
/// of length `capacity`. `out_written` receives `3 * M`; if `capacity` is
/// smaller nothing is copied and `BUFFER_TOO_SMALL` is returned.
#[no_mangle]
pub unsafe extern "C" fn interlab_bootstrap_replicates(
    bootstrap: *const InterlabBootstrap,
    out_values: *mut f64,
    capacity: usize,
    out_written: *mut usize,
) -> InterlabStatus {
    guard(|| {
        let dist = &deref(bootstrap, "bootstrap")?.0;
        let needed = 3 * dist.m();
        *out(out_written, "out_written")? = needed;
        if capacity < needed {
            return Err(fail(
                InterlabStatus::BufferTooSmall,
                format!("need room for {needed} values, got {capacity}"),
            ));
        }
        if out_values.is_null() {
            return Err(fail(InterlabStatus::NullPointer, "out_values is null"));
        }
        let out = std::slice::from_raw_parts_mut(out_values, needed);
        for (dst, r) in out.chunks_exact_mut(3).zip(&dist.replicates) {
            dst[0] = r.repeatability();
            dst[1] = r.between_lab();
            dst[2] = r.reproducibility();
        }
        Ok(())
    })
}

fn write_quantile(out_value: *mut f64, r: interlab::Result<f64>) -> FfiResult {
    let v = lift(r)?;
    *unsafe { out(out_value, "out_value") }? = v;
    Ok(())
}

/// Standard normal quantile.
#[no_mangle]
pub unsafe extern "C" fn interlab_normal_quantile(p: f64, out_value: *mut f64) -> InterlabStatus {
    guard(|| write_quantile(out_value, dist::normal_quantile(p)))
}

/// Chi-square quantile; `df` may be non-integer.
#[no_mangle]
pub unsafe extern "C" fn interlab_chi_square_quantile(
    df: f64,
    p: f64,
    out_value: *mut f64,
) -> InterlabStatus {
    guard(|| write_quantile(out_value, dist::chi_square_quantile(df, p)))
}

/// F quantile; pass `df2 = INFINITY` for the infinite-denominator limit.
#[no_mangle]
pub unsafe extern "C" fn interlab_f_quantile(
    df1: f64,
    df2: f64,
    p: f64,
    out_value: *mut f64,
) -> InterlabStatus {
    guard(|| {
        let d2 = if df2 == f64::INFINITY {
            Df2::Infinite
        } else {
            Df2::Finite(df2)
        };
        write_quantile(out_value, dist::f_quantile(df1, d2, p))
    })
}
