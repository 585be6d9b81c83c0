//! C interface to the sedfs engine.
//!
//! Every function returns a [`SedfsStatus`]. On failure the message for the
//! calling thread is available from [`sedfs_last_error_message`] until the
//! next failing call on that thread. Runs are opaque handles released with
//! [`sedfs_run_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::time::Duration;

use sedfs::graph::{generate_er, generate_sf};
use sedfs::verify::{read_artifact, verify_artifact, write_artifact, Artifact};
use sedfs::{run_algorithm, Algorithm, Error, GraphFile, IoContext, RunConfig, RunStats};

/// Parent entry of the root.
pub const SEDFS_NO_PARENT: u32 = sedfs::graph::NONE;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SedfsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    BatchOverflow = 5,
    IrreducibleBatch = 6,
    TimeLimit = 7,
    Budget = 8,
    Internal = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SedfsAlgorithm {
    Ep = 0,
    Naive = 1,
    Eb = 2,
    InMem = 3,
}

impl From<SedfsAlgorithm> for Algorithm {
    fn from(a: SedfsAlgorithm) -> Self {
        match a {
            SedfsAlgorithm::Ep => Algorithm::Ep,
            SedfsAlgorithm::Naive => Algorithm::Naive,
            SedfsAlgorithm::Eb => Algorithm::Eb,
            SedfsAlgorithm::InMem => Algorithm::InMem,
        }
    }
}

/// Run settings. Start from [`sedfs_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SedfsOptions {
    pub algorithm: SedfsAlgorithm,
    pub gamma: f64,
    /// Edges per batch; 0 means the node count.
    pub budget_edges: u32,
    /// Seconds; 0 disables the limit.
    pub time_limit_secs: f64,
    /// Root node; negative uses the header root or adds a virtual root.
    pub root: i64,
}

/// A finished run.
pub struct SedfsRun {
    order: Vec<u32>,
    parents: Vec<u32>,
    digest: CString,
    stats: RunStats,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SedfsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io(_) | Error::Replace { .. } => SedfsStatus::Io,
            Error::Format { .. } | Error::InvalidEdge { .. } | Error::IndexTooLarge(_) => {
                SedfsStatus::Format
            }
            Error::InvalidArgument(_) => SedfsStatus::InvalidArgument,
            Error::Budget(_) => SedfsStatus::Budget,
            Error::BatchOverflow { .. } => SedfsStatus::BatchOverflow,
            Error::IrreducibleBatch { .. } => SedfsStatus::IrreducibleBatch,
            Error::TimeLimit { .. } => SedfsStatus::TimeLimit,
            Error::Internal(_) => SedfsStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SedfsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SedfsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            SedfsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SedfsStatus::NullArgument, format!("{what} is null"))
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SedfsStatus::InvalidArgument, format!("{what} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

fn ctx() -> IoContext {
    IoContext::from_env()
}

#[no_mangle]
pub extern "C" fn sedfs_options_default() -> SedfsOptions {
    let d = RunConfig::default();
    SedfsOptions {
        algorithm: SedfsAlgorithm::Ep,
        gamma: d.gamma,
        budget_edges: 0,
        time_limit_secs: 0.0,
        root: -1,
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sedfs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Runs one algorithm with default settings.
///
/// # Safety
/// `graph_path` is a NUL-terminated string; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sedfs_run_new(
    graph_path: *const c_char,
    algorithm: SedfsAlgorithm,
    out: *mut *mut SedfsRun,
) -> SedfsStatus {
    let opts = SedfsOptions {
        algorithm,
        ..sedfs_options_default()
    };
    sedfs_run_new_with(graph_path, &opts, out)
}

/// # Safety
/// `graph_path` is a NUL-terminated string, `options` points to a valid
/// [`SedfsOptions`] and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sedfs_run_new_with(
    graph_path: *const c_char,
    options: *const SedfsOptions,
    out: *mut *mut SedfsRun,
) -> SedfsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let path = path_arg(graph_path, "graph_path")?;
        let opts = options.as_ref().ok_or_else(|| null("options"))?;
        let mut cfg = RunConfig::with_algorithm(opts.algorithm.into());
        cfg.gamma = opts.gamma;
        cfg.budget_edges = (opts.budget_edges > 0).then_some(opts.budget_edges);
        if opts.time_limit_secs > 0.0 {
            let limit = Duration::try_from_secs_f64(opts.time_limit_secs)
                .map_err(|e| Failure(SedfsStatus::InvalidArgument, e.to_string()))?;
            cfg.time_limit = Some(limit);
        }
        let root = match opts.root {
            r if r < 0 => None,
            r => Some(
                u32::try_from(r)
                    .map_err(|_| Failure(SedfsStatus::InvalidArgument, format!("root {r}")))?,
            ),
        };
        let ctx = ctx();
        let g = GraphFile::open(&path, root, &ctx)?;
        let run = run_algorithm(&g, &cfg, &ctx, &mut (), g.virtual_root())
            .map_err(|e| Failure::from(e.error))?;
        let digest = CString::new(run.stats.digest.clone().unwrap_or_default()).unwrap_or_default();
        let handle = SedfsRun {
            order: run.order,
            parents: run.parents,
            digest,
            stats: run.stats,
        };
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// # Safety
/// `run` is null or a handle from `sedfs_run_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sedfs_run_free(run: *mut SedfsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Nodes in the result, a virtual root included; 0 for null.
///
/// # Safety
/// `run` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sedfs_run_node_count(run: *const SedfsRun) -> u32 {
    run.as_ref().map_or(0, |r| r.order.len() as u32)
}

/// Node ids in depth-first order. Valid while the handle lives.
///
/// # Safety
/// `run` is null or a live handle; `len` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn sedfs_run_order(run: *const SedfsRun, len: *mut usize) -> *const u32 {
    slice_out(run.as_ref().map(|r| &r.order[..]), len)
}

/// Parent of every node by id; the root's entry is [`SEDFS_NO_PARENT`].
///
/// # Safety
/// `run` is null or a live handle; `len` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn sedfs_run_parents(run: *const SedfsRun, len: *mut usize) -> *const u32 {
    slice_out(run.as_ref().map(|r| &r.parents[..]), len)
}

unsafe fn slice_out(s: Option<&[u32]>, len: *mut usize) -> *const u32 {
    if let Some(l) = len.as_mut() {
        *l = s.map_or(0, <[u32]>::len);
    }
    s.map_or(ptr::null(), <[u32]>::as_ptr)
}

/// Hex SHA-256 of the order and parent arrays.
///
/// # Safety
/// `run` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sedfs_run_digest(run: *const SedfsRun) -> *const c_char {
    run.as_ref().map_or(ptr::null(), |r| r.digest.as_ptr())
}

/// Main-loop iterations (ep, naive) or rounds (eb).
///
/// # Safety
/// `run` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sedfs_run_iterations(run: *const SedfsRun) -> u32 {
    run.as_ref().map_or(0, |r| r.stats.iterations)
}

/// # Safety
/// `run` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sedfs_run_bytes_read(run: *const SedfsRun) -> u64 {
    run.as_ref().map_or(0, |r| r.stats.io.totals.bytes_read)
}

/// # Safety
/// `run` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sedfs_run_peak_slots(run: *const SedfsRun) -> u64 {
    run.as_ref().map_or(0, |r| r.stats.peak_slots)
}

/// Writes the order to `order_path` and the parents to `order_path` +
/// ".parents".
///
/// # Safety
/// `run` is a live handle; `order_path` is a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sedfs_run_write(
    run: *const SedfsRun,
    order_path: *const c_char,
) -> SedfsStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        let path = path_arg(order_path, "order_path")?;
        let art = Artifact {
            order: r.order.clone(),
            parents: r.parents.clone(),
        };
        write_artifact(&path, &art, &ctx())?;
        Ok(())
    })
}

/// # Safety
/// `path` is a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sedfs_generate_er(
    path: *const c_char,
    n: u64,
    m: u64,
    seed: u64,
) -> SedfsStatus {
    guard(|| {
        let p = path_arg(path, "path")?;
        generate_er(&p, n, m, seed, &ctx())?;
        Ok(())
    })
}

/// # Safety
/// `path` is a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sedfs_generate_sf(path: *const c_char, n: u64, seed: u64) -> SedfsStatus {
    guard(|| {
        let p = path_arg(path, "path")?;
        generate_sf(&p, n, seed, &ctx())?;
        Ok(())
    })
}

/// Checks the artifact at `order_path` (parents next to it) against the
/// graph. `valid` receives whether no forward cross edge exists.
///
/// # Safety
/// Both paths are NUL-terminated strings; `valid` is writable.
#[no_mangle]
pub unsafe extern "C" fn sedfs_verify(
    graph_path: *const c_char,
    order_path: *const c_char,
    valid: *mut bool,
) -> SedfsStatus {
    guard(|| {
        let out = valid.as_mut().ok_or_else(|| null("valid"))?;
        let g = path_arg(graph_path, "graph_path")?;
        let o = path_arg(order_path, "order_path")?;
        let ctx = ctx();
        let graph = GraphFile::open(&g, None, &ctx)?;
        let art = read_artifact(&o, None, &ctx)?;
        *out = verify_artifact(&graph, &art, &ctx)?.is_valid();
        Ok(())
    })
}
