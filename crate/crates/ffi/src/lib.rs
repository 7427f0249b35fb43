//! C ABI over `cic-core`.
//!
//! Every entry point returns a [`CicStatus`]; results come back through out
//! pointers. Objects are opaque heap handles released with the matching
//! `*_free`. On failure, [`cic_last_error_message`] describes the most recent
//! error on the calling thread. Matrices cross the boundary as row-major
//! real/imaginary `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cic_core::cones;
use cic_core::matcore;
use cic_core::ratfun::{self, PrGrid, RationalMatrixFunction};
use cic_core::realize::{self, RealizationArray};
use cic_core::{json, Complex64, ComplexMatrix, Error};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CicStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Shape = 3,
    NonFinite = 4,
    NotHermitian = 5,
    Singular = 6,
    NotPositiveDefinite = 7,
    AxisEigenvalue = 8,
    NoWitness = 9,
    Precondition = 10,
    Json = 11,
    Io = 12,
    Panic = 13,
    Other = 14,
}

/// Opaque complex matrix.
pub struct CicMatrix(ComplexMatrix);

/// Opaque real rational matrix function.
pub struct CicRational(RationalMatrixFunction);

/// Opaque realization `[A B; C D]`.
pub struct CicRealization(RealizationArray);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(CicStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Shape(_) => CicStatus::Shape,
            Error::NonFinite => CicStatus::NonFinite,
            Error::NotHermitian(_) => CicStatus::NotHermitian,
            Error::Singular(_) | Error::IdenticallySingular(_) => CicStatus::Singular,
            Error::NotPositiveDefinite(_) => CicStatus::NotPositiveDefinite,
            Error::AxisEigenvalue(_) => CicStatus::AxisEigenvalue,
            Error::NoWitness(_) => CicStatus::NoWitness,
            Error::Precondition(_) | Error::GramCondition(_) => CicStatus::Precondition,
            Error::InvalidArgument(_) => CicStatus::InvalidArgument,
            Error::Json(_) => CicStatus::Json,
            Error::Io(_) => CicStatus::Io,
            _ => CicStatus::Other,
        };
        Fail(status, e.to_string())
    }
}

type FfiResult = Result<(), Fail>;

fn guard(f: impl FnOnce() -> FfiResult) -> CicStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CicStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CicStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(CicStatus::NullPointer, format!("{what} is null"))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> FfiResult {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_box<T>(out: *mut *mut T, value: T, what: &str) -> FfiResult {
    put(out, Box::into_raw(Box::new(value)), what)
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Fail(CicStatus::InvalidArgument, format!("{what}: {e}")))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> FfiResult {
    let c = CString::new(s).map_err(|e| Fail(CicStatus::Other, e.to_string()))?;
    put(out, c.into_raw(), "out")
}

fn from_json<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, Fail> {
    Ok(json::from_str(s)?)
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Fail> {
    Ok(json::to_string(v)?)
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cic_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by any `*_to_json` call.
///
/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn cic_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------- matrices

/// Builds a `rows x cols` matrix from row-major parts; `im` may be null.
///
/// # Safety
/// `re` (and `im` when non-null) must hold `rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn cic_matrix_new(
    rows: usize,
    cols: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut CicMatrix,
) -> CicStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Fail(CicStatus::Shape, "size overflow".into()))?;
        if re.is_null() && len > 0 {
            return Err(null("re"));
        }
        let re = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(re, len)
        };
        let data: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter()
                .zip(im)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect()
        };
        put_box(
            out,
            CicMatrix(ComplexMatrix::from_rows(rows, cols, &data)?),
            "out",
        )
    })
}

/// # Safety
/// `m` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn cic_matrix_free(m: *mut CicMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cic_matrix_shape(
    m: *const CicMatrix,
    rows: *mut usize,
    cols: *mut usize,
) -> CicStatus {
    guard(|| {
        let m = &get(m, "matrix")?.0;
        put(rows, m.nrows(), "rows")?;
        put(cols, m.ncols(), "cols")
    })
}

/// Copies entries row-major into `re` and `im` (either may be null).
///
/// # Safety
/// Non-null buffers must hold `rows * cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn cic_matrix_read(
    m: *const CicMatrix,
    re: *mut f64,
    im: *mut f64,
) -> CicStatus {
    guard(|| {
        let m = &get(m, "matrix")?.0;
        let cols = m.ncols();
        for i in 0..m.nrows() {
            for j in 0..cols {
                let z = m[(i, j)];
                if !re.is_null() {
                    re.add(i * cols + j).write(z.re);
                }
                if !im.is_null() {
                    im.add(i * cols + j).write(z.im);
                }
            }
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be a valid C string.
#[no_mangle]
pub unsafe extern "C" fn cic_matrix_from_json(
    s: *const c_char,
    out: *mut *mut CicMatrix,
) -> CicStatus {
    guard(|| put_box(out, CicMatrix(from_json(text(s, "json")?)?), "out"))
}

/// # Safety
/// Pointers must be valid; release the string with [`cic_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cic_matrix_to_json(
    m: *const CicMatrix,
    out: *mut *mut c_char,
) -> CicStatus {
    guard(|| put_string(out, to_json(&get(m, "matrix")?.0)?))
}

/// Matrix sign function.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cic_sign(a: *const CicMatrix, out: *mut *mut CicMatrix) -> CicStatus {
    guard(|| {
        put_box(
            out,
            CicMatrix(matcore::sign_matrix(&get(a, "a")?.0)?),
            "out",
        )
    })
}

/// `exp(t A)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cic_expm(
    a: *const CicMatrix,
    t: f64,
    out: *mut *mut CicMatrix,
) -> CicStatus {
    guard(|| {
        put_box(
            out,
            CicMatrix(matcore::matrix_exponential(&get(a, "a")?.0, t)?),
            "out",
        )
    })
}

/// Membership of `A` in the cone `L_H`; `h` null means `H = I`.
///
/// # Safety
/// Pointers must be valid; `h` may be null.
#[no_mangle]
pub unsafe extern "C" fn cic_membership(
    a: *const CicMatrix,
    h: *const CicMatrix,
    tol: f64,
    in_open: *mut c_int,
    in_closed: *mut c_int,
) -> CicStatus {
    guard(|| {
        let a = &get(a, "a")?.0;
        let res = match h.as_ref() {
            Some(h) => cones::membership_l_h_with_tol(a, &h.0, tol)?,
            None => cones::membership_l_i_with_tol(a, tol)?,
        };
        put(in_open, res.in_open as c_int, "in_open")?;
        put(in_closed, res.in_closed as c_int, "in_closed")
    })
}

/// A member `A` of `L_I` with `A + B` singular.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cic_maximality_witness(
    b: *const CicMatrix,
    out: *mut *mut CicMatrix,
) -> CicStatus {
    guard(|| {
        put_box(
            out,
            CicMatrix(cones::maximality_witness(&get(b, "b")?.0)?.a),
            "out",
        )
    })
}

// ---------------------------------------------------------------- rational functions

/// # Safety
/// `s` must be a valid C string.
#[no_mangle]
pub unsafe extern "C" fn cic_rational_from_json(
    s: *const c_char,
    out: *mut *mut CicRational,
) -> CicStatus {
    guard(|| put_box(out, CicRational(from_json(text(s, "json")?)?), "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cic_rational_to_json(
    f: *const CicRational,
    out: *mut *mut c_char,
) -> CicStatus {
    guard(|| put_string(out, to_json(&get(f, "function")?.0)?))
}

/// # Safety
/// `f` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn cic_rational_free(f: *mut CicRational) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Evaluates `F(s)`; [`CicStatus::Singular`] at a pole.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cic_rational_eval(
    f: *const CicRational,
    re: f64,
    im: f64,
    out: *mut *mut CicMatrix,
) -> CicStatus {
    guard(|| {
        let v = get(f, "function")?
            .0
            .eval(Complex64::new(re, im))
            .ok_or_else(|| Fail(CicStatus::Singular, format!("pole at {re}{im:+}i")))?;
        put_box(out, CicMatrix(v), "out")
    })
}

/// Positive-real check on the default grid; `is_pr` receives 1 or 0.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cic_pr_check(f: *const CicRational, is_pr: *mut c_int) -> CicStatus {
    guard(|| {
        put(
            is_pr,
            ratfun::pr_check(&get(f, "function")?.0, &PrGrid::default()).is_pr as c_int,
            "is_pr",
        )
    })
}

// ---------------------------------------------------------------- realizations

/// Assembles `[A B; C D]` from matrix handles (copied).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cic_realization_new(
    a: *const CicMatrix,
    b: *const CicMatrix,
    c: *const CicMatrix,
    d: *const CicMatrix,
    out: *mut *mut CicRealization,
) -> CicStatus {
    guard(|| {
        let r = RealizationArray::new(
            get(a, "a")?.0.clone(),
            get(b, "b")?.0.clone(),
            get(c, "c")?.0.clone(),
            get(d, "d")?.0.clone(),
        )?;
        put_box(out, CicRealization(r), "out")
    })
}

/// # Safety
/// `r` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn cic_realization_free(r: *mut CicRealization) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `s` must be a valid C string.
#[no_mangle]
pub unsafe extern "C" fn cic_realization_from_json(
    s: *const c_char,
    out: *mut *mut CicRealization,
) -> CicStatus {
    guard(|| put_box(out, CicRealization(from_json(text(s, "json")?)?), "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cic_realization_to_json(
    r: *const CicRealization,
    out: *mut *mut c_char,
) -> CicStatus {
    guard(|| put_string(out, to_json(&get(r, "realization")?.0)?))
}

/// The `(n+m) x (n+m)` matrix view.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cic_realization_matrix(
    r: *const CicRealization,
    out: *mut *mut CicMatrix,
) -> CicStatus {
    guard(|| put_box(out, CicMatrix(get(r, "realization")?.0.to_matrix()), "out"))
}

/// Transfer function `C (sI - A)^-1 B + D`; [`CicStatus::Singular`] at a pole.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cic_transfer_eval(
    r: *const CicRealization,
    re: f64,
    im: f64,
    out: *mut *mut CicMatrix,
) -> CicStatus {
    guard(|| {
        let v = realize::transfer_eval(&get(r, "realization")?.0, Complex64::new(re, im))
            .ok_or_else(|| Fail(CicStatus::Singular, format!("pole at {re}{im:+}i")))?;
        put_box(out, CicMatrix(v), "out")
    })
}

/// Transfer function as a rational matrix function.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cic_realization_to_rational(
    r: *const CicRealization,
    out: *mut *mut CicRational,
) -> CicStatus {
    guard(|| {
        put_box(
            out,
            CicRational(get(r, "realization")?.0.to_rational()?),
            "out",
        )
    })
}

/// Checks the KYP certificate for weight `H` (null means `I`).
///
/// # Safety
/// Pointers must be valid; `h` may be null.
#[no_mangle]
pub unsafe extern "C" fn cic_kyp_verify(
    r: *const CicRealization,
    h: *const CicMatrix,
    tol: f64,
    valid: *mut c_int,
) -> CicStatus {
    guard(|| {
        let r = &get(r, "realization")?.0;
        let h = match h.as_ref() {
            Some(h) => h.0.clone(),
            None => ComplexMatrix::identity(r.n()),
        };
        put(
            valid,
            realize::kyp_verify_with_tol(r, &h, tol)?.valid as c_int,
            "valid",
        )
    })
}

/// Searches for a KYP certificate; `found` receives 1 or 0 and `h_out`
/// (optional) the weight when found.
///
/// # Safety
/// Pointers must be valid; `h_out` may be null.
#[no_mangle]
pub unsafe extern "C" fn cic_kyp_search(
    r: *const CicRealization,
    max_iter: usize,
    found: *mut c_int,
    h_out: *mut *mut CicMatrix,
) -> CicStatus {
    guard(|| {
        let opts = realize::KypSearch {
            max_iter,
            ..Default::default()
        };
        match realize::kyp_search(&get(r, "realization")?.0, &opts) {
            realize::KypSearchOutcome::Found { certificate, .. } => {
                put(found, 1, "found")?;
                if !h_out.is_null() {
                    put_box(h_out, CicMatrix(certificate.h), "h_out")?;
                }
                Ok(())
            }
            realize::KypSearchOutcome::Infeasible(_) => put(found, 0, "found"),
        }
    })
}

/// Balanced realization and its common diagonal Gramian (optional).
///
/// # Safety
/// Pointers must be valid; `gramian` may be null.
#[no_mangle]
pub unsafe extern "C" fn cic_gramian_balance(
    r: *const CicRealization,
    out: *mut *mut CicRealization,
    gramian: *mut *mut CicMatrix,
) -> CicStatus {
    guard(|| {
        let res = realize::gramian_balance(&get(r, "realization")?.0, false)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !gramian.is_null() {
            put_box(gramian, CicMatrix(res.gramian), "gramian")?;
        }
        put_box(out, CicRealization(res.balanced), "out")
    })
}
