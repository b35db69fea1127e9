//! C ABI over the witness-search library: opaque graph handles, status
//! codes mirroring the CLI exit taxonomy, and a thread-local last-error
//! message.
//!
//! Every function catches panics at the boundary; none unwinds into the
//! caller. Pointers are only read when non-null, and output parameters
//! are written only on `SEYMOUR_STATUS_OK` unless documented otherwise.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use seymour::error::Error;
use seymour::graph::OrientedGraph;
use seymour::median;
use seymour::witness::{self, ProofPath};
use seymour::{oracle, Tournament};

/// Outcome of a call. Nonzero values match the CLI exit codes where a
/// counterpart exists.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeymourStatus {
    Ok = 0,
    /// Malformed input: bad text, bad arcs, unmet preconditions.
    InputError = 1,
    /// The instance is too large for the exact algorithms.
    CapabilityError = 2,
    /// A proved property failed to hold; indicates a bug.
    InvariantViolation = 3,
    /// A probe of an open conjecture fired; inspect the error message.
    PotentialRefutation = 4,
    /// A required pointer argument was null.
    NullArgument = 5,
}

/// Which argument certified the returned witness.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeymourProofPath {
    Sink = 0,
    MatchingPrime = 1,
    MatchingBlock = 2,
    StarStable = 3,
    StarPeriodic = 4,
    BruteForce = 5,
}

impl From<ProofPath> for SeymourProofPath {
    fn from(p: ProofPath) -> Self {
        match p {
            ProofPath::Sink => SeymourProofPath::Sink,
            ProofPath::MatchingPrime => SeymourProofPath::MatchingPrime,
            ProofPath::MatchingBlock => SeymourProofPath::MatchingBlock,
            ProofPath::StarStable => SeymourProofPath::StarStable,
            ProofPath::StarPeriodic => SeymourProofPath::StarPeriodic,
            ProofPath::BruteForce => SeymourProofPath::BruteForce,
        }
    }
}

/// An oriented graph. Opaque: create with `seymour_graph_parse` or
/// `seymour_graph_from_arcs`, release with `seymour_graph_free`.
pub struct SeymourGraph {
    inner: OrientedGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_message(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).expect("NULs replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

fn fail(e: &Error) -> SeymourStatus {
    set_message(&e.to_string());
    match e.exit_code() {
        1 => SeymourStatus::InputError,
        2 => SeymourStatus::CapabilityError,
        4 => SeymourStatus::PotentialRefutation,
        _ => SeymourStatus::InvariantViolation,
    }
}

fn null_argument(name: &str) -> SeymourStatus {
    set_message(&format!("{name} must not be null"));
    SeymourStatus::NullArgument
}

fn guarded(f: impl FnOnce() -> SeymourStatus) -> SeymourStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_message("internal panic; state may be inconsistent");
            SeymourStatus::InvariantViolation
        }
    }
}

/// The message from the most recent failing call on this thread, as a
/// NUL-terminated string. Valid until the next failing call on the same
/// thread; empty if nothing failed yet. Never null.
#[no_mangle]
pub extern "C" fn seymour_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// A static name for a proof path, e.g. "matching-prime". Never null.
#[no_mangle]
pub extern "C" fn seymour_proof_path_name(path: SeymourProofPath) -> *const c_char {
    let name: &[u8] = match path {
        SeymourProofPath::Sink => b"sink\0",
        SeymourProofPath::MatchingPrime => b"matching-prime\0",
        SeymourProofPath::MatchingBlock => b"matching-block\0",
        SeymourProofPath::StarStable => b"star-stable\0",
        SeymourProofPath::StarPeriodic => b"star-periodic\0",
        SeymourProofPath::BruteForce => b"brute-force\0",
    };
    name.as_ptr() as *const c_char
}

/// Parses the line-oriented edge-list format (`n m` header, one `u v`
/// arc per line, `#` comments) into a new graph handle.
///
/// # Safety
/// `text` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn seymour_graph_parse(
    text: *const c_char,
    out: *mut *mut SeymourGraph,
) -> SeymourStatus {
    if text.is_null() {
        return null_argument("text");
    }
    if out.is_null() {
        return null_argument("out");
    }
    let text = CStr::from_ptr(text);
    guarded(|| {
        let Ok(text) = text.to_str() else {
            set_message("input is not valid UTF-8");
            return SeymourStatus::InputError;
        };
        match seymour::io::parse_edge_list(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SeymourGraph { inner }));
                SeymourStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Builds a graph on `n` vertices from parallel tail/head arrays of
/// length `arc_count`.
///
/// # Safety
/// `tails` and `heads` must point to `arc_count` readable elements (or be
/// unused when `arc_count` is 0).
#[no_mangle]
pub unsafe extern "C" fn seymour_graph_from_arcs(
    n: usize,
    tails: *const usize,
    heads: *const usize,
    arc_count: usize,
    out: *mut *mut SeymourGraph,
) -> SeymourStatus {
    if out.is_null() {
        return null_argument("out");
    }
    if arc_count > 0 && (tails.is_null() || heads.is_null()) {
        return null_argument("tails/heads");
    }
    let arcs: Vec<(usize, usize)> = (0..arc_count)
        .map(|i| (*tails.add(i), *heads.add(i)))
        .collect();
    guarded(move || match OrientedGraph::from_arcs(n, &arcs) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(SeymourGraph { inner }));
            SeymourStatus::Ok
        }
        Err(e) => fail(&e),
    })
}

/// Releases a graph handle. Accepts null.
///
/// # Safety
/// `g`, when non-null, must come from a constructor of this library and
/// must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn seymour_graph_free(g: *mut SeymourGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of vertices; 0 for a null handle.
///
/// # Safety
/// `g`, when non-null, must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seymour_graph_vertex_count(g: *const SeymourGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.vertex_count())
}

/// Number of arcs; 0 for a null handle.
///
/// # Safety
/// `g`, when non-null, must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn seymour_graph_arc_count(g: *const SeymourGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.arc_count())
}

/// Finds one verified witness — a vertex with at least as many second
/// out-neighbors as out-neighbors — using the pipeline the graph's
/// missing-edge structure calls for. Writes the vertex and the argument
/// that certified it.
///
/// # Safety
/// `g` must be a live handle; `witness` and `path` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seymour_find_witness(
    g: *const SeymourGraph,
    witness: *mut usize,
    path: *mut SeymourProofPath,
) -> SeymourStatus {
    let Some(g) = g.as_ref() else {
        return null_argument("g");
    };
    if witness.is_null() {
        return null_argument("witness");
    }
    if path.is_null() {
        return null_argument("path");
    }
    guarded(|| match witness::find_witness(&g.inner) {
        Ok(report) => {
            *witness = report.witness;
            *path = report.proof_path.into();
            SeymourStatus::Ok
        }
        Err(e) => fail(&e),
    })
}

/// Lists every witness, verified by two independent neighborhood
/// implementations. Writes up to `cap` vertices into `buf` and always
/// stores the total count in `len`; call with `cap` 0 to size a buffer.
///
/// # Safety
/// `g` must be a live handle; `buf` must hold `cap` writable elements;
/// `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seymour_all_witnesses(
    g: *const SeymourGraph,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> SeymourStatus {
    let Some(g) = g.as_ref() else {
        return null_argument("g");
    };
    if len.is_null() {
        return null_argument("len");
    }
    if cap > 0 && buf.is_null() {
        return null_argument("buf");
    }
    guarded(|| match oracle::oracle_all_witnesses(&g.inner) {
        Ok(ws) => {
            *len = ws.len();
            for (i, w) in ws.into_iter().take(cap).enumerate() {
                *buf.add(i) = w;
            }
            SeymourStatus::Ok
        }
        Err(e) => fail(&e),
    })
}

/// Two distinct verified witnesses of a sinkless graph whose missing
/// edges form a matching.
///
/// # Safety
/// `g` must be a live handle; `first` and `second` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seymour_two_witnesses(
    g: *const SeymourGraph,
    first: *mut usize,
    second: *mut usize,
) -> SeymourStatus {
    let Some(g) = g.as_ref() else {
        return null_argument("g");
    };
    if first.is_null() || second.is_null() {
        return null_argument("first/second");
    }
    guarded(|| match witness::two_witnesses_matching(&g.inner) {
        Ok((a, b)) => {
            *first = a.witness;
            *second = b.witness;
            SeymourStatus::Ok
        }
        Err(e) => fail(&e),
    })
}

/// Exact maximum-value ordering of a tournament. `buf` must hold at
/// least `seymour_graph_vertex_count(g)` elements; the maximum number of
/// forward arcs lands in `value`.
///
/// # Safety
/// `g` must be a live handle; `buf` must hold `cap` writable elements;
/// `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seymour_median_order(
    g: *const SeymourGraph,
    buf: *mut usize,
    cap: usize,
    value: *mut u64,
) -> SeymourStatus {
    let Some(g) = g.as_ref() else {
        return null_argument("g");
    };
    if value.is_null() {
        return null_argument("value");
    }
    let n = g.inner.vertex_count();
    if cap < n {
        set_message(&format!("buffer holds {cap} elements, the order needs {n}"));
        return SeymourStatus::InputError;
    }
    if n > 0 && buf.is_null() {
        return null_argument("buf");
    }
    guarded(|| {
        let order = match Tournament::new(g.inner.clone())
            .and_then(|t| median::compute_median_order(&t))
        {
            Ok(order) => order,
            Err(e) => return fail(&e),
        };
        for (i, &v) in order.order().iter().enumerate() {
            *buf.add(i) = v;
        }
        *value = order.value();
        SeymourStatus::Ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    unsafe fn fig2() -> *mut SeymourGraph {
        let (g, _) = oracle::figure2_instance();
        let arcs = g.arcs();
        let tails: Vec<usize> = arcs.iter().map(|a| a.0).collect();
        let heads: Vec<usize> = arcs.iter().map(|a| a.1).collect();
        let mut out = ptr::null_mut();
        let status =
            seymour_graph_from_arcs(6, tails.as_ptr(), heads.as_ptr(), arcs.len(), &mut out);
        assert_eq!(status, SeymourStatus::Ok);
        out
    }

    #[test]
    fn find_witness_on_the_reference_instance() {
        unsafe {
            let g = fig2();
            assert_eq!(seymour_graph_vertex_count(g), 6);
            assert_eq!(seymour_graph_arc_count(g), 13);
            let mut w = usize::MAX;
            let mut path = SeymourProofPath::Sink;
            assert_eq!(seymour_find_witness(g, &mut w, &mut path), SeymourStatus::Ok);
            assert!(w == 0 || w == 2);
            assert_eq!(path, SeymourProofPath::MatchingPrime);
            let name = CStr::from_ptr(seymour_proof_path_name(path));
            assert_eq!(name.to_str().unwrap(), "matching-prime");
            seymour_graph_free(g);
        }
    }

    #[test]
    fn witness_list_respects_capacity() {
        unsafe {
            let g = fig2();
            let mut len = 0;
            assert_eq!(
                seymour_all_witnesses(g, ptr::null_mut(), 0, &mut len),
                SeymourStatus::Ok
            );
            assert_eq!(len, 2);
            let mut buf = vec![usize::MAX; len];
            assert_eq!(
                seymour_all_witnesses(g, buf.as_mut_ptr(), buf.len(), &mut len),
                SeymourStatus::Ok
            );
            assert_eq!(buf, vec![0, 2]);
            let mut first = 0;
            let mut second = 0;
            assert_eq!(
                seymour_two_witnesses(g, &mut first, &mut second),
                SeymourStatus::Ok
            );
            let mut pair = [first, second];
            pair.sort_unstable();
            assert_eq!(pair, [0, 2]);
            seymour_graph_free(g);
        }
    }

    #[test]
    fn parse_failures_set_the_thread_error() {
        unsafe {
            let text = CString::new("2 2\n0 1\n1 0\n").unwrap();
            let mut out = ptr::null_mut();
            assert_eq!(
                seymour_graph_parse(text.as_ptr(), &mut out),
                SeymourStatus::InputError
            );
            let msg = CStr::from_ptr(seymour_last_error()).to_str().unwrap();
            assert!(msg.contains("line 3"), "{msg}");
            assert!(msg.contains("digon"), "{msg}");
        }
    }

    #[test]
    fn null_arguments_are_rejected_not_dereferenced() {
        unsafe {
            assert_eq!(
                seymour_graph_parse(ptr::null(), ptr::null_mut()),
                SeymourStatus::NullArgument
            );
            let mut w = 0;
            let mut path = SeymourProofPath::Sink;
            assert_eq!(
                seymour_find_witness(ptr::null(), &mut w, &mut path),
                SeymourStatus::NullArgument
            );
            let g = fig2();
            assert_eq!(
                seymour_find_witness(g, ptr::null_mut(), &mut path),
                SeymourStatus::NullArgument
            );
            let msg = CStr::from_ptr(seymour_last_error()).to_str().unwrap();
            assert!(msg.contains("must not be null"), "{msg}");
            seymour_graph_free(g);
            seymour_graph_free(ptr::null_mut());
        }
    }

    #[test]
    fn median_order_round_trips_through_the_abi() {
        unsafe {
            let tails = [0usize, 1, 2];
            let heads = [1usize, 2, 0];
            let mut g = ptr::null_mut();
            assert_eq!(
                seymour_graph_from_arcs(3, tails.as_ptr(), heads.as_ptr(), 3, &mut g),
                SeymourStatus::Ok
            );
            let mut buf = [usize::MAX; 3];
            let mut value = 0;
            assert_eq!(
                seymour_median_order(g, buf.as_mut_ptr(), 3, &mut value),
                SeymourStatus::Ok
            );
            assert_eq!(value, 2);
            let mut small = [0usize; 2];
            assert_eq!(
                seymour_median_order(g, small.as_mut_ptr(), 2, &mut value),
                SeymourStatus::InputError
            );
            seymour_graph_free(g);
        }
    }

    #[test]
    fn status_codes_mirror_the_error_taxonomy() {
        assert_eq!(fail(&Error::Input("x".into())), SeymourStatus::InputError);
        assert_eq!(
            fail(&Error::Capability("x".into())),
            SeymourStatus::CapabilityError
        );
        assert_eq!(
            fail(&Error::InvariantViolation("x".into())),
            SeymourStatus::InvariantViolation
        );
        assert_eq!(
            fail(&Error::Refutation("x".into())),
            SeymourStatus::PotentialRefutation
        );
    }

    #[test]
    fn generated_header_declares_the_surface() {
        let header = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/include/seymour.h"
        ))
        .expect("build script wrote the header");
        for symbol in [
            "typedef struct SeymourGraph SeymourGraph;",
            "seymour_graph_parse",
            "seymour_find_witness",
            "seymour_last_error",
            "SEYMOUR_STATUS_POTENTIAL_REFUTATION",
        ] {
            assert!(header.contains(symbol), "header lacks {symbol}");
        }
    }
}
