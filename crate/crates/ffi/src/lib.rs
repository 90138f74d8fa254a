//! C ABI over the persistence and Hodge routines of `toposcope`.
//!
//! Objects are opaque handles released with their `_free` function. Every
//! fallible call returns a `TscStatus`; on failure the message is available
//! from `tsc_last_error_message` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use toposcope::complex::Complex;
use toposcope::embedding::PointCloud;
use toposcope::hodge::{betti_numbers, complex_laplacian, spectrum, DEFAULT_TAU0_REL};
use toposcope::persistence::{compute_persistence, enclosing_radius, max_h1_persistence, rips_filtration, PersistenceDiagram};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TscStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    BufferTooSmall = 4,
    Numerical = 5,
    Panic = 6,
}

/// Simplicial complex (vertices, edges, triangles).
pub struct TscComplex(Complex);

/// Persistence diagram in degrees 0 and 1.
pub struct TscDiagram(PersistenceDiagram);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: TscStatus, msg: impl Into<String>) -> TscStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    status
}

fn guard(f: impl FnOnce() -> TscStatus) -> TscStatus {
    LAST_ERROR.with(|e| e.borrow_mut().clear());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(TscStatus::Panic, "internal panic"),
    }
}

fn from_core(e: toposcope::Error) -> TscStatus {
    let status = match e {
        toposcope::Error::Invalid(_) | toposcope::Error::Shape(_) | toposcope::Error::EmptyComplex => {
            TscStatus::InvalidArgument
        }
        _ => TscStatus::Numerical,
    };
    fail(status, e.to_string())
}

unsafe fn cloud(points: *const f64, n_points: usize, dim: usize) -> Result<PointCloud, TscStatus> {
    if points.is_null() {
        return Err(fail(TscStatus::NullPointer, "points is null"));
    }
    if n_points == 0 || dim == 0 {
        return Err(fail(TscStatus::InvalidArgument, "need at least one point of positive dimension"));
    }
    let data = slice::from_raw_parts(points, n_points * dim);
    if data.iter().any(|v| !v.is_finite()) {
        return Err(fail(TscStatus::InvalidArgument, "coordinates must be finite"));
    }
    PointCloud::new(dim, data.to_vec()).map_err(from_core)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tsc_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!(),
    };
    V.as_ptr()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tsc_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Rips complex up to triangles at scale `eps` of `n_points` row-major points.
///
/// # Safety
/// `points` must hold `n_points * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsc_rips_complex(
    points: *const f64,
    n_points: usize,
    dim: usize,
    eps: f64,
    out: *mut *mut TscComplex,
) -> TscStatus {
    guard(|| {
        if out.is_null() {
            return fail(TscStatus::NullPointer, "out is null");
        }
        let c = match cloud(points, n_points, dim) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if !(eps >= 0.0) || !eps.is_finite() {
            return fail(TscStatus::InvalidArgument, "eps must be finite and non-negative");
        }
        let complex = if eps == 0.0 || n_points == 1 {
            match Complex::new(n_points, vec![], vec![]) {
                Ok(k) => k,
                Err(e) => return from_core(e),
            }
        } else {
            match rips_filtration(&c, eps, 2) {
                Ok(f) => f.complex_at(eps),
                Err(e) => return from_core(e),
            }
        };
        *out = Box::into_raw(Box::new(TscComplex(complex)));
        TscStatus::Ok
    })
}

/// Complex from an explicit edge list (pairs of vertex ids) with its
/// triangles filled in (clique closure).
///
/// # Safety
/// `edges` must hold `2 * n_edges` entries (may be null when `n_edges` is 0).
#[no_mangle]
pub unsafe extern "C" fn tsc_clique_complex(
    n_vertices: usize,
    edges: *const u32,
    n_edges: usize,
    out: *mut *mut TscComplex,
) -> TscStatus {
    guard(|| {
        if out.is_null() || (edges.is_null() && n_edges > 0) {
            return fail(TscStatus::NullPointer, "null argument");
        }
        let raw = if n_edges == 0 { &[][..] } else { slice::from_raw_parts(edges, 2 * n_edges) };
        let mut list = Vec::with_capacity(n_edges);
        for e in raw.chunks_exact(2) {
            let (a, b) = (e[0] as usize, e[1] as usize);
            if a >= n_vertices || b >= n_vertices || a == b {
                return fail(TscStatus::InvalidArgument, format!("bad edge ({a}, {b})"));
            }
            list.push([a.min(b), a.max(b)]);
        }
        list.sort_unstable();
        list.dedup();
        match Complex::new(n_vertices, list, vec![]) {
            Ok(k) => {
                *out = Box::into_raw(Box::new(TscComplex(k.clique_closure())));
                TscStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// # Safety
/// `c` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tsc_complex_free(c: *mut TscComplex) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of p-simplices (p = 0, 1, 2).
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsc_complex_count(c: *const TscComplex, p: usize, out: *mut usize) -> TscStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return fail(TscStatus::NullPointer, "null argument");
        }
        if p > 2 {
            return fail(TscStatus::OutOfRange, format!("degree {p} not in 0..=2"));
        }
        *out = (*c).0.count(p);
        TscStatus::Ok
    })
}

/// Betti numbers (b0, b1, b2) from Laplacian kernels into `out[0..3]`.
///
/// # Safety
/// `c` must be a live handle; `out` must hold three entries.
#[no_mangle]
pub unsafe extern "C" fn tsc_complex_betti(c: *const TscComplex, out: *mut usize) -> TscStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return fail(TscStatus::NullPointer, "null argument");
        }
        let b = betti_numbers(&(*c).0);
        slice::from_raw_parts_mut(out, 3).copy_from_slice(&b);
        TscStatus::Ok
    })
}

/// Ascending eigenvalues of the degree-p Hodge Laplacian. `len` receives the
/// count; with `out` null or `cap` too small nothing is copied and
/// `BufferTooSmall` is returned (unless the spectrum is empty).
///
/// # Safety
/// `c` must be a live handle; `out` must be null or hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn tsc_complex_spectrum(
    c: *const TscComplex,
    p: usize,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> TscStatus {
    guard(|| {
        if c.is_null() || len.is_null() {
            return fail(TscStatus::NullPointer, "null argument");
        }
        if p > 2 {
            return fail(TscStatus::OutOfRange, format!("degree {p} not in 0..=2"));
        }
        let l = complex_laplacian(&(*c).0, p);
        let s = match spectrum(&l, DEFAULT_TAU0_REL) {
            Ok(s) => s,
            Err(e) => return from_core(e),
        };
        *len = s.eigenvalues.len();
        if s.eigenvalues.is_empty() {
            return TscStatus::Ok;
        }
        if out.is_null() || cap < s.eigenvalues.len() {
            return fail(TscStatus::BufferTooSmall, format!("need {} entries", s.eigenvalues.len()));
        }
        slice::from_raw_parts_mut(out, s.eigenvalues.len()).copy_from_slice(&s.eigenvalues);
        TscStatus::Ok
    })
}

/// Rips persistence in degrees 0 and 1. A non-positive `eps_max` means the
/// enclosing radius of the cloud.
///
/// # Safety
/// `points` must hold `n_points * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsc_rips_persistence(
    points: *const f64,
    n_points: usize,
    dim: usize,
    eps_max: f64,
    out: *mut *mut TscDiagram,
) -> TscStatus {
    guard(|| {
        if out.is_null() {
            return fail(TscStatus::NullPointer, "out is null");
        }
        let c = match cloud(points, n_points, dim) {
            Ok(c) => c,
            Err(s) => return s,
        };
        if eps_max.is_nan() {
            return fail(TscStatus::InvalidArgument, "eps_max is NaN");
        }
        let eps = if eps_max > 0.0 { eps_max } else { enclosing_radius(&c) };
        let diag = if !(eps > 0.0) {
            // every point coincides: one component per point, all born at 0
            let pairs = (0..n_points)
                .map(|k| toposcope::persistence::PersistencePair {
                    dim: 0,
                    birth: 0.0,
                    death: if k == 0 { f64::INFINITY } else { 0.0 },
                })
                .filter(|p| p.death > p.birth)
                .collect();
            PersistenceDiagram { pairs }
        } else {
            match rips_filtration(&c, eps, 2) {
                Ok(f) => compute_persistence(&f),
                Err(e) => return from_core(e),
            }
        };
        *out = Box::into_raw(Box::new(TscDiagram(diag)));
        TscStatus::Ok
    })
}

/// # Safety
/// `d` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tsc_diagram_free(d: *mut TscDiagram) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of (dim, birth, death) pairs; 0 for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tsc_diagram_len(d: *const TscDiagram) -> usize {
    if d.is_null() {
        0
    } else {
        (*d).0.pairs.len()
    }
}

/// Pair `index`; an essential class has death = +infinity.
///
/// # Safety
/// `d` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsc_diagram_get(
    d: *const TscDiagram,
    index: usize,
    dim: *mut u32,
    birth: *mut f64,
    death: *mut f64,
) -> TscStatus {
    guard(|| {
        if d.is_null() || dim.is_null() || birth.is_null() || death.is_null() {
            return fail(TscStatus::NullPointer, "null argument");
        }
        let pairs = &(*d).0.pairs;
        let Some(p) = pairs.get(index) else {
            return fail(TscStatus::OutOfRange, format!("index {index} past {}", pairs.len()));
        };
        *dim = p.dim as u32;
        *birth = p.birth;
        *death = p.death;
        TscStatus::Ok
    })
}

/// Largest finite H1 persistence (0 when there is none).
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsc_diagram_max_h1(d: *const TscDiagram, out: *mut f64) -> TscStatus {
    guard(|| {
        if d.is_null() || out.is_null() {
            return fail(TscStatus::NullPointer, "null argument");
        }
        *out = max_h1_persistence(&(*d).0);
        TscStatus::Ok
    })
}

/// Betti number of degree `dim` at scale `eps`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tsc_diagram_betti_at(d: *const TscDiagram, dim: u32, eps: f64, out: *mut usize) -> TscStatus {
    guard(|| {
        if d.is_null() || out.is_null() {
            return fail(TscStatus::NullPointer, "null argument");
        }
        *out = (*d).0.betti_at(dim as usize, eps);
        TscStatus::Ok
    })
}
