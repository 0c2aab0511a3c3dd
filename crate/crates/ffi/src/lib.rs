//! C ABI for walklab.
//!
//! Graphs are opaque `WlGraph` handles owned by the caller and released with
//! [`wl_graph_free`]. Every fallible function returns a [`WlStatus`] and
//! writes its result through an out pointer; on failure a description is
//! available from [`wl_last_error_message`] on the same thread.
//!
//! Functions never unwind across the boundary: panics are caught and
//! reported as `WL_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use walklab::graph::{self, Graph};
use walklab::walk::{self, CandidateSampling, Policy, Reinforcement, RwcScore, WalkOptions};
use walklab::{oracle, Error};

/// Opaque graph handle.
pub struct WlGraph(Graph);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WlStatus {
    Ok = 0,
    InvalidArgument = 1,
    Parse = 2,
    GenerationFailure = 3,
    CapExceeded = 4,
    TooLarge = 5,
    Disconnected = 6,
    StuckWalk = 7,
    NullPointer = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WlPolicyKind {
    Srw = 0,
    Rwc = 1,
    Erwc = 2,
}

/// Walk policy. `d` is ignored for SRW; `h_num / h_den` only matters for
/// ERWC and must exceed 1. `sampling_with_replacement` and
/// `rwc_score_plus_one` select the alternative rule variants.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct WlPolicy {
    pub kind: WlPolicyKind,
    pub d: u32,
    pub h_num: u64,
    pub h_den: u64,
    pub sampling_with_replacement: bool,
    pub rwc_score_plus_one: bool,
}

/// Result of one walk. When the step cap is hit, `covered` is less than the
/// node count and `cover_steps` equals the cap.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WlRunSummary {
    pub cover_steps: u64,
    pub max_node_load: u64,
    pub covered: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WlStatus {
    match e.root() {
        Error::InvalidArgument(_) | Error::Json(_) => WlStatus::InvalidArgument,
        Error::Parse { .. } => WlStatus::Parse,
        Error::GenerationFailure { .. } => WlStatus::GenerationFailure,
        Error::CapExceeded { .. } => WlStatus::CapExceeded,
        Error::TooLarge { .. } => WlStatus::TooLarge,
        Error::Disconnected => WlStatus::Disconnected,
        Error::StuckWalk { .. } => WlStatus::StuckWalk,
        _ => WlStatus::Internal,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, records any error and converts it to a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> WlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WlStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            WlStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".to_string());
            WlStatus::Internal
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn graph_ref<'a>(g: *const WlGraph) -> Result<&'a Graph, Fail> {
    g.as_ref().map(|g| &g.0).ok_or(Fail::Null("graph"))
}

unsafe fn emit_graph(out: *mut *mut WlGraph, g: Graph) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    out.write(Box::into_raw(Box::new(WlGraph(g))));
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_torus(rows: usize, cols: usize, out: *mut *mut WlGraph) -> WlStatus {
    guard(|| emit_graph(out, graph::generate_torus(rows, cols)?))
}

/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_complete(n: usize, out: *mut *mut WlGraph) -> WlStatus {
    guard(|| emit_graph(out, graph::generate_complete(n)?))
}

/// Connected random geometric graph on the unit square, resampled up to
/// `max_retries` times.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_rgg(
    n: usize,
    radius: f64,
    seed: u64,
    max_retries: u32,
    out: *mut *mut WlGraph,
) -> WlStatus {
    guard(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        emit_graph(out, graph::generate_rgg(n, radius, &mut rng, true, max_retries)?.0)
    })
}

/// Parses an edge list: a `n m` header line followed by `m` lines `u v`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_from_edge_list(text: *const c_char, out: *mut *mut WlGraph) -> WlStatus {
    guard(|| {
        if text.is_null() {
            return Err(Fail::Null("text"));
        }
        let text =
            CStr::from_ptr(text).to_str().map_err(|_| Error::invalid("edge list is not valid UTF-8"))?;
        emit_graph(out, Graph::from_edge_list(text)?)
    })
}

/// Releases a graph. NULL is ignored.
///
/// # Safety
/// `g` must come from a `wl_graph_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_free(g: *mut WlGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Node count, or 0 for NULL.
///
/// # Safety
/// `g` must be NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_node_count(g: *const WlGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.node_count())
}

/// Edge count, or 0 for NULL.
///
/// # Safety
/// `g` must be NULL or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_edge_count(g: *const WlGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Serializes a graph as an edge list. Release the string with
/// [`wl_string_free`].
///
/// # Safety
/// `g` must be a live graph handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn wl_graph_to_edge_list(g: *const WlGraph, out: *mut *mut c_char) -> WlStatus {
    guard(|| {
        let text = CString::new(graph_ref(g)?.to_edge_list())
            .map_err(|_| Error::Internal("edge list contains NUL".into()))?;
        write(out, text.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn wl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `sqrt(ln n / (pi n))`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn wl_connectivity_radius(n: usize, out: *mut f64) -> WlStatus {
    guard(|| write(out, graph::connectivity_radius(n)?, "out"))
}

fn to_policy(p: &WlPolicy) -> Result<(Policy, WalkOptions), Error> {
    let policy = match p.kind {
        WlPolicyKind::Srw => Policy::Srw,
        WlPolicyKind::Rwc => Policy::rwc(p.d)?,
        WlPolicyKind::Erwc => Policy::erwc(p.d, Reinforcement::new(p.h_num, p.h_den)?)?,
    };
    let options = WalkOptions {
        sampling: if p.sampling_with_replacement {
            CandidateSampling::WithReplacement
        } else {
            CandidateSampling::Distinct
        },
        rwc_score: if p.rwc_score_plus_one { RwcScore::VisitsPlusOne } else { RwcScore::Visits },
    };
    Ok((policy, options))
}

/// Runs one walk from `start` until every node is visited. `step_cap` 0
/// means `10000 * n`. On `WL_STATUS_CAP_EXCEEDED` the summary still
/// describes the partial run.
///
/// # Safety
/// `g` must be a live graph handle; `policy` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wl_run_replicate(
    g: *const WlGraph,
    policy: *const WlPolicy,
    start: usize,
    seed: u64,
    step_cap: u64,
    out: *mut WlRunSummary,
) -> WlStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let p = policy.as_ref().ok_or(Fail::Null("policy"))?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let (policy, options) = to_policy(p)?;
        let cap = if step_cap == 0 { walk::default_step_cap(g.node_count()) } else { step_cap };
        let rng = ChaCha8Rng::seed_from_u64(seed);
        match walk::run_replicate_with(g, policy, options, start, rng, cap, &[1.0], None) {
            Ok(r) => {
                out.write(WlRunSummary {
                    cover_steps: r.cover_steps,
                    max_node_load: r.max_node_load,
                    covered: g.node_count() as u64,
                });
                Ok(())
            }
            Err(e) => {
                if let Error::CapExceeded { partial, .. } = e.root() {
                    out.write(WlRunSummary {
                        cover_steps: partial.steps,
                        max_node_load: partial.visit_counts.iter().copied().max().unwrap_or(0),
                        covered: partial.covered as u64,
                    });
                }
                Err(e.into())
            }
        }
    })
}

/// Exact expected SRW cover steps from `start` (graphs up to 20 nodes).
///
/// # Safety
/// `g` must be a live graph handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn wl_exact_cover_expectation(
    g: *const WlGraph,
    start: usize,
    out: *mut f64,
) -> WlStatus {
    guard(|| write(out, oracle::exact_cover_expectation(graph_ref(g)?, start)?, "out"))
}
