//! C interface to `fhcorr`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `fhc_estimate` and released by the matching `*_free`. Every fallible call
//! returns an [`FhcStatus`]; on failure a message for the calling thread is
//! available from [`fhc_last_error_message`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use fhcorr::estimator::{
    covariance_to_correlation, estimate_covariance, estimate_per_session, ComplexCorrelationMatrix,
};
use fhcorr::graph::{build_graph, FilteredGraph, GraphConfig, GraphKind, PhaseBin};
use fhcorr::ingest::{SectorTable, Session, TickSeries, TimeAxis};
use fhcorr::pipeline::{run_pipeline, PipelineConfig, RunOptions};
use fhcorr::spectral::{
    classify_components, eig_hermitian, ClassifyConfig, ComponentClass, ComponentTag, EigenDecomposition,
};
use fhcorr::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FhcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Bad input data, configuration or file.
    InputError = 3,
    /// Non-finite values, non-Hermitian matrices, solver failures.
    NumericalError = 4,
    OutOfRange = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FhcGraphKind {
    Mst = 0,
    Pmfg = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FhcPhaseBin {
    Small = 0,
    Quarter = 1,
    Opposite = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FhcComponentTag {
    Immediate = 0,
    Delayed = 1,
    Chaotic = 2,
}

/// A directed edge: `theta` is the phase from `from` to `to`, non-positive
/// unless `bidirectional`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhcEdge {
    pub from: usize,
    pub to: usize,
    pub magnitude: f64,
    pub theta: f64,
    pub bin: FhcPhaseBin,
    pub bidirectional: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FhcComponent {
    pub eigenvalue: f64,
    pub dispersion: f64,
    pub tag: FhcComponentTag,
}

/// Log-price series on the seconds axis, all of the same duration.
pub struct FhcSeriesSet {
    series: Vec<TickSeries>,
}

pub struct FhcCorrelation {
    rho: ComplexCorrelationMatrix,
    names: Vec<CString>,
}

pub struct FhcSpectrum {
    decomp: EigenDecomposition,
    classes: Vec<ComponentClass>,
}

pub struct FhcGraph {
    graph: FilteredGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(FhcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_numerical() { FhcStatus::NumericalError } else { FhcStatus::InputError };
        Failure(status, e.to_string())
    }
}

type FfiResult<T = ()> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> FhcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FhcStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {message}"));
            FhcStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(FhcStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(FhcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    match (p.is_null(), len) {
        (_, 0) => Ok(&[]),
        (true, _) => Err(null(what)),
        (false, _) => Ok(std::slice::from_raw_parts(p, len)),
    }
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> FfiResult {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn index(i: usize, n: usize, what: &str) -> FfiResult {
    if i < n {
        Ok(())
    } else {
        Err(Failure(FhcStatus::OutOfRange, format!("{what} {i} out of range (n = {n})")))
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fhc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf` (truncated and
/// NUL-terminated) and return the buffer size needed for the whole message,
/// or 0 if no error has been recorded.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fhc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len) - 1;
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fhc_series_set_new(out: *mut *mut FhcSeriesSet) -> FhcStatus {
    guard(|| put(out, FhcSeriesSet { series: Vec::new() }))
}

/// Add one asset: `len` events at `times` (seconds in `[0, t_span]`,
/// strictly increasing) with log prices `log_prices`. Events that repeat
/// the previous price are dropped.
///
/// # Safety
/// `set` must come from [`fhc_series_set_new`]; `asset_id` must be a
/// NUL-terminated string; `times` and `log_prices` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn fhc_series_set_add(
    set: *mut FhcSeriesSet,
    asset_id: *const c_char,
    times: *const f64,
    log_prices: *const f64,
    len: usize,
    t_span: f64,
) -> FhcStatus {
    guard(|| {
        let set = handle_mut(set, "set")?;
        let id = text(asset_id, "asset_id")?;
        let (times, prices) = (slice(times, len, "times")?, slice(log_prices, len, "log_prices")?);
        if set.series.iter().any(|s| s.asset_id() == id) {
            return Err(Failure(FhcStatus::InvalidArgument, format!("duplicate asset {id}")));
        }
        let (mut t, mut p) = (Vec::with_capacity(len), Vec::<f64>::with_capacity(len));
        for (&ti, &pi) in times.iter().zip(prices) {
            if p.last() != Some(&pi) {
                t.push(ti);
                p.push(pi);
            }
        }
        let sessions = vec![Session::new(0.0, t_span)];
        set.series.push(TickSeries::from_parts(id, t, p, t_span, sessions, TimeAxis::Seconds)?);
        Ok(())
    })
}

/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fhc_series_set_len(set: *const FhcSeriesSet) -> usize {
    set.as_ref().map_or(0, |s| s.series.len())
}

/// # Safety
/// `set` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fhc_series_set_free(set: *mut FhcSeriesSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Complex correlation matrix at cutoff `tau` seconds. With `per_session`
/// each session is estimated separately and the covariances averaged.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fhc_estimate(
    set: *const FhcSeriesSet,
    tau: f64,
    per_session: bool,
    out: *mut *mut FhcCorrelation,
) -> FhcStatus {
    guard(|| {
        let set = handle(set, "set")?;
        let cov =
            if per_session { estimate_per_session(&set.series, tau)? } else { estimate_covariance(&set.series, tau)? };
        let rho = covariance_to_correlation(&cov)?;
        let names = rho.assets().iter().map(|a| CString::new(a.as_str()).expect("asset ids have no NUL")).collect();
        put(out, FhcCorrelation { rho, names })
    })
}

/// # Safety
/// `rho` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fhc_correlation_size(rho: *const FhcCorrelation) -> usize {
    rho.as_ref().map_or(0, |r| r.rho.n())
}

/// Asset name of row `i`, valid until the handle is freed; NULL if out of
/// range.
///
/// # Safety
/// `rho` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fhc_correlation_asset(rho: *const FhcCorrelation, i: usize) -> *const c_char {
    rho.as_ref().and_then(|r| r.names.get(i)).map_or(ptr::null(), |c| c.as_ptr())
}

/// Entry `ρ_ij` as real and imaginary parts.
///
/// # Safety
/// `rho` must be a live handle; `re` and `im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fhc_correlation_get(
    rho: *const FhcCorrelation,
    i: usize,
    j: usize,
    re: *mut f64,
    im: *mut f64,
) -> FhcStatus {
    guard(|| {
        let r = &handle(rho, "rho")?.rho;
        index(i.max(j), r.n(), "index")?;
        let z = r.get(i, j);
        *handle_mut(re, "re")? = z.re;
        *handle_mut(im, "im")? = z.im;
        Ok(())
    })
}

/// Entry `ρ_ij` as magnitude and phase; `theta < 0` means `i` leads `j`.
///
/// # Safety
/// `rho` must be a live handle; `magnitude` and `theta` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fhc_correlation_polar(
    rho: *const FhcCorrelation,
    i: usize,
    j: usize,
    magnitude: *mut f64,
    theta: *mut f64,
) -> FhcStatus {
    guard(|| {
        let r = &handle(rho, "rho")?.rho;
        index(i.max(j), r.n(), "index")?;
        let (s, t) = r.magnitude_phase(i, j);
        *handle_mut(magnitude, "magnitude")? = s;
        *handle_mut(theta, "theta")? = t;
        Ok(())
    })
}

/// # Safety
/// `rho` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fhc_correlation_free(rho: *mut FhcCorrelation) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Eigendecomposition with default component classification (no sectors).
///
/// # Safety
/// `rho` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fhc_spectrum_new(rho: *const FhcCorrelation, out: *mut *mut FhcSpectrum) -> FhcStatus {
    guard(|| {
        let decomp = eig_hermitian(&handle(rho, "rho")?.rho)?;
        let classes = classify_components(&decomp, &ClassifyConfig::default(), &SectorTable::new());
        put(out, FhcSpectrum { decomp, classes })
    })
}

/// # Safety
/// `sp` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fhc_spectrum_size(sp: *const FhcSpectrum) -> usize {
    sp.as_ref().map_or(0, |s| s.decomp.n())
}

/// Component `k` (0-based, largest eigenvalue first).
///
/// # Safety
/// `sp` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fhc_spectrum_component(sp: *const FhcSpectrum, k: usize, out: *mut FhcComponent) -> FhcStatus {
    guard(|| {
        let sp = handle(sp, "spectrum")?;
        index(k, sp.decomp.n(), "component")?;
        let c = &sp.classes[k];
        let tag = match c.tag {
            ComponentTag::Immediate => FhcComponentTag::Immediate,
            ComponentTag::Delayed => FhcComponentTag::Delayed,
            ComponentTag::Chaotic => FhcComponentTag::Chaotic,
        };
        *handle_mut(out, "out")? = FhcComponent { eigenvalue: c.eigenvalue, dispersion: c.dispersion, tag };
        Ok(())
    })
}

/// Copy eigenvector `k` into `re` and `im`, each of length `len` equal to
/// the matrix size.
///
/// # Safety
/// `sp` must be a live handle; `re` and `im` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn fhc_spectrum_vector(
    sp: *const FhcSpectrum,
    k: usize,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> FhcStatus {
    guard(|| {
        let sp = handle(sp, "spectrum")?;
        let n = sp.decomp.n();
        index(k, n, "component")?;
        if len != n {
            return Err(Failure(FhcStatus::InvalidArgument, format!("buffer length {len}, need {n}")));
        }
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        for (j, z) in sp.decomp.vector(k).iter().enumerate() {
            *re.add(j) = z.re;
            *im.add(j) = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `sp` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fhc_spectrum_free(sp: *mut FhcSpectrum) {
    if !sp.is_null() {
        drop(Box::from_raw(sp));
    }
}

/// Filtered graph with oriented edges. With `drop_market` the largest
/// component is removed and the matrix renormalised first; `theta_sym` is
/// the phase below which an edge counts as bidirectional.
///
/// # Safety
/// `rho` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fhc_graph_new(
    rho: *const FhcCorrelation,
    kind: FhcGraphKind,
    drop_market: bool,
    theta_sym: f64,
    out: *mut *mut FhcGraph,
) -> FhcStatus {
    guard(|| {
        let rho = &handle(rho, "rho")?.rho;
        if theta_sym.is_nan() || theta_sym < 0.0 {
            return Err(Failure(
                FhcStatus::InvalidArgument,
                format!("theta_sym must be non-negative, got {theta_sym}"),
            ));
        }
        let kind = match kind {
            FhcGraphKind::Mst => GraphKind::Mst,
            FhcGraphKind::Pmfg => GraphKind::Pmfg,
        };
        let graph = build_graph(rho, kind, &SectorTable::new(), &GraphConfig { drop_market, theta_sym })?;
        put(out, FhcGraph { graph })
    })
}

/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fhc_graph_edge_count(g: *const FhcGraph) -> usize {
    g.as_ref().map_or(0, |g| g.graph.edges.len())
}

/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fhc_graph_edge(g: *const FhcGraph, i: usize, out: *mut FhcEdge) -> FhcStatus {
    guard(|| {
        let edges = &handle(g, "graph")?.graph.edges;
        index(i, edges.len(), "edge")?;
        let e = &edges[i];
        let bin = match e.bin {
            PhaseBin::Small => FhcPhaseBin::Small,
            PhaseBin::Quarter => FhcPhaseBin::Quarter,
            PhaseBin::Opposite => FhcPhaseBin::Opposite,
        };
        *handle_mut(out, "out")? = FhcEdge {
            from: e.from,
            to: e.to,
            magnitude: e.magnitude,
            theta: e.theta,
            bin,
            bidirectional: e.bidirectional,
        };
        Ok(())
    })
}

/// # Safety
/// `g` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fhc_graph_free(g: *mut FhcGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Run every pipeline stage for the TOML configuration at `config_path`.
///
/// # Safety
/// `config_path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fhc_run_pipeline(config_path: *const c_char, resume: bool) -> FhcStatus {
    guard(|| {
        let config = PipelineConfig::load(Path::new(text(config_path, "config_path")?))?;
        run_pipeline(&config, &RunOptions { resume })?;
        Ok(())
    })
}
