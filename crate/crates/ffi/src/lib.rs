//! C interface to `cabsat`.
//!
//! Graphs and results are opaque heap handles owned by the caller and
//! released with their `_free` function. Every fallible call returns a
//! [`CabStatus`]; on failure the message is available from
//! [`cab_last_error_message`] on the same thread until the next failing call.
//! Vertices are 0-based, labels 1-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use cabsat::bounds::BoundRange;
use cabsat::graph::{from_spec, parse_edge_list, Graph, Labeling};
use cabsat::oracle::brute_force_cab;
use cabsat::search::{Order, SearchOptions, SearchResult};
use cabsat::{cab_of_labeling, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CabStatus {
    Ok = 0,
    InvalidInput = 1,
    Parse = 2,
    UndefinedObjective = 3,
    Lookup = 4,
    NotApplicable = 5,
    OracleCap = 6,
    Backend = 7,
    Integrity = 8,
    Io = 9,
    NullPointer = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CabOrder {
    Linear = 0,
    Bfs = 1,
    Dfs = 2,
}

/// Search settings. Zero in `lb`, `ub`, `time_limit_seconds` or
/// `memory_limit_mb` means "unset".
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CabSolveOptions {
    pub lb: usize,
    pub ub: usize,
    pub processes: usize,
    pub order: CabOrder,
    pub symmetry: bool,
    pub verify_lb: bool,
    pub time_limit_seconds: f64,
    pub memory_limit_mb: u64,
}

/// Opaque graph handle.
pub struct CabGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    built: Option<Graph>,
}

/// Opaque search result handle.
pub struct CabResult(SearchResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CabStatus {
    match e {
        Error::Input(_) => CabStatus::InvalidInput,
        Error::Parse { .. } => CabStatus::Parse,
        Error::UndefinedObjective(_) => CabStatus::UndefinedObjective,
        Error::Lookup(_) => CabStatus::Lookup,
        Error::NotApplicable(_) => CabStatus::NotApplicable,
        Error::OracleCap { .. } => CabStatus::OracleCap,
        Error::Backend(_) => CabStatus::Backend,
        Error::Integrity(_) => CabStatus::Integrity,
        Error::Io(_) => CabStatus::Io,
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

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CabStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            CabStatus::NullPointer
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CabStatus::Panic
        }
    }
}

unsafe fn nonnull<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn nonnull_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::input(format!("{what} is not valid UTF-8"))))
}

fn into_handle(g: Graph) -> *mut CabGraph {
    Box::into_raw(Box::new(CabGraph {
        n: g.n(),
        edges: g.edges().to_vec(),
        built: Some(g),
    }))
}

impl CabGraph {
    fn graph(&mut self) -> Result<&Graph, Error> {
        if self.built.is_none() {
            self.built = Some(Graph::new(self.n, self.edges.iter().copied())?);
        }
        Ok(self.built.as_ref().expect("just built"))
    }
}

/// Message of the last failing call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Empty graph on `n` vertices.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cab_graph_new(n: usize, out: *mut *mut CabGraph) -> CabStatus {
    guard(|| {
        let out = nonnull_mut(out, "out")?;
        *out = into_handle(Graph::new(n, [])?);
        Ok(())
    })
}

/// Adds the undirected edge `{a, b}`. Self-loops and repeats are ignored.
///
/// # Safety
/// `g` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cab_graph_add_edge(g: *mut CabGraph, a: usize, b: usize) -> CabStatus {
    guard(|| {
        let g = nonnull_mut(g, "graph")?;
        if a >= g.n || b >= g.n {
            return Err(Error::input(format!("edge ({a}, {b}) has an endpoint outside 0..{}", g.n)).into());
        }
        g.edges.push((a, b));
        g.built = None;
        Ok(())
    })
}

/// Parses edge-list text (`n m` header, then 1-based `u v` lines).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cab_graph_from_edge_list(text: *const c_char, out: *mut *mut CabGraph) -> CabStatus {
    guard(|| {
        let text = c_str(text, "text")?;
        let out = nonnull_mut(out, "out")?;
        *out = into_handle(parse_edge_list(text)?);
        Ok(())
    })
}

/// Builds a graph from a generator spec such as `"caterpillar:5,4"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cab_graph_generate(spec: *const c_char, out: *mut *mut CabGraph) -> CabStatus {
    guard(|| {
        let spec = c_str(spec, "spec")?;
        let out = nonnull_mut(out, "out")?;
        *out = into_handle(from_spec(spec)?);
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn cab_graph_free(g: *mut CabGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cab_graph_num_vertices(g: *const CabGraph) -> usize {
    g.as_ref().map_or(0, |g| g.n)
}

/// Number of distinct edges.
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cab_graph_num_edges(g: *mut CabGraph) -> usize {
    match g.as_mut().map(|g| g.graph().map(|g| g.num_edges())) {
        Some(Ok(m)) => m,
        _ => 0,
    }
}

/// Minimum cyclic distance over the edges under `labels[v]` (1-based, a
/// permutation of `1..=n`).
///
/// # Safety
/// `labels` must point to `len` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn cab_labeling_value(
    g: *mut CabGraph,
    labels: *const usize,
    len: usize,
    out: *mut usize,
) -> CabStatus {
    guard(|| {
        let g = nonnull_mut(g, "graph")?.graph()?;
        let labels = std::slice::from_raw_parts(nonnull(labels, "labels")?, len);
        let out = nonnull_mut(out, "out")?;
        *out = cab_of_labeling(g, &Labeling::new(labels.to_vec())?)?;
        Ok(())
    })
}

/// Exact value by exhaustive search (small graphs only). If `witness` is not
/// null it receives `n` labels.
///
/// # Safety
/// `out` must be writable; `witness` null or room for `n` values.
#[no_mangle]
pub unsafe extern "C" fn cab_oracle(g: *mut CabGraph, out: *mut usize, witness: *mut usize) -> CabStatus {
    guard(|| {
        let g = nonnull_mut(g, "graph")?.graph()?;
        let out = nonnull_mut(out, "out")?;
        let r = brute_force_cab(g)?;
        *out = r.cab;
        if !witness.is_null() {
            ptr::copy_nonoverlapping(r.witness.as_slice().as_ptr(), witness, g.n());
        }
        Ok(())
    })
}

/// Defaults: bounds `[2, n/2]`, one process, linear order, symmetry breaking
/// on, lower bound verified, no limits.
#[no_mangle]
pub extern "C" fn cab_solve_options_default() -> CabSolveOptions {
    CabSolveOptions {
        lb: 0,
        ub: 0,
        processes: 1,
        order: CabOrder::Linear,
        symmetry: true,
        verify_lb: true,
        time_limit_seconds: 0.0,
        memory_limit_mb: 0,
    }
}

fn search_options(g: &Graph, o: &CabSolveOptions) -> Result<SearchOptions, Error> {
    let mut opts = SearchOptions {
        processes: o.processes.max(1),
        order: match o.order {
            CabOrder::Linear => Order::Linear,
            CabOrder::Bfs => Order::Bfs,
            CabOrder::Dfs => Order::Dfs,
        },
        symmetry: o.symmetry,
        verify_lb: o.verify_lb,
        memory_limit_mb: (o.memory_limit_mb > 0).then_some(o.memory_limit_mb),
        ..SearchOptions::default()
    };
    if o.time_limit_seconds.is_nan() || o.time_limit_seconds < 0.0 || o.time_limit_seconds.is_infinite() {
        return Err(Error::input("time_limit_seconds must be finite and non-negative"));
    }
    if o.time_limit_seconds > 0.0 {
        opts.time_limit = Some(Duration::from_secs_f64(o.time_limit_seconds));
    }
    if o.lb > 0 || o.ub > 0 {
        let lb = if o.lb > 0 { o.lb } else { 2.min(g.n() / 2).max(1) };
        let ub = if o.ub > 0 { o.ub } else { g.n() / 2 };
        opts.bounds = Some(BoundRange::new(lb, ub)?);
    }
    Ok(opts)
}

/// Runs the exact search with the built-in solver. `opts` may be null for
/// defaults.
///
/// # Safety
/// `g` must be a live handle, `opts` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cab_solve(
    g: *mut CabGraph,
    opts: *const CabSolveOptions,
    out: *mut *mut CabResult,
) -> CabStatus {
    guard(|| {
        let g = nonnull_mut(g, "graph")?.graph()?;
        let o = opts.as_ref().copied().unwrap_or_else(|| cab_solve_options_default());
        let out = nonnull_mut(out, "out")?;
        let r = cabsat::search::solve(g, &search_options(g, &o)?)?;
        *out = Box::into_raw(Box::new(CabResult(r)));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn cab_result_free(r: *mut CabResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Best feasible value found, or 0 if none.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cab_result_k_opt(r: *const CabResult) -> usize {
    r.as_ref().and_then(|r| r.0.k_opt).unwrap_or(0)
}

/// Whether the value is proven optimal.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cab_result_certified(r: *const CabResult) -> bool {
    r.as_ref().is_some_and(|r| r.0.certified)
}

/// Copies the best labeling into `labels` (room for `len` values). Fails
/// with `CAB_STATUS_INVALID_INPUT` if there is none or `len` is too small.
///
/// # Safety
/// `r` must be a live handle and `labels` point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn cab_result_labeling(r: *const CabResult, labels: *mut usize, len: usize) -> CabStatus {
    guard(|| {
        let r = nonnull(r, "result")?;
        let f = r.0.labeling.as_ref().ok_or_else(|| Error::input("result has no labeling"))?;
        if len < f.len() {
            return Err(Error::input(format!("buffer holds {len} labels, need {}", f.len())).into());
        }
        let labels = nonnull_mut(labels, "labels")?;
        ptr::copy_nonoverlapping(f.as_ptr(), labels, f.len());
        Ok(())
    })
}

/// Result as JSON; release with [`cab_string_free`]. Null on failure.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cab_result_to_json(r: *const CabResult) -> *mut c_char {
    let mut s = ptr::null_mut();
    guard(|| {
        let r = nonnull(r, "result")?;
        s = CString::new(r.0.to_json()).map_err(|e| Error::integrity(e.to_string()))?.into_raw();
        Ok(())
    });
    s
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn cab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
