//! C interface to the staged predicates.
//!
//! Predicates are opaque `FpfPredicate` handles created by
//! `fpf_predicate_builtin` or `fpf_predicate_from_expr` and released with
//! `fpf_predicate_free`. Every fallible call returns an `FpfStatus`; the
//! message of the last failure on the calling thread is available from
//! `fpf_last_error_message`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fpfilter::error_bounds::DeriveError;
use fpfilter::filters::SemiStaticFilter;
use fpfilter::predicates::PredicateError;
use fpfilter::{parse_expr, Builtin, Profile, StagedPredicate};

/// Underflow-protected cascade. Exact on every finite input.
pub const FPF_PROFILE_SAFE: i32 = 0;
/// Cheaper first stage that assumes no underflow happens.
pub const FPF_PROFILE_FAST: i32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    DeriveError = 4,
    ArityMismatch = 5,
    NonFinite = 6,
    Undecided = 7,
    Panic = 8,
}

/// A staged predicate. Opaque to C.
pub struct FpfPredicate {
    inner: StagedPredicate,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: FpfStatus, message: impl Into<String>) -> FpfStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = message.into());
    status
}

fn predicate_status(e: &PredicateError) -> FpfStatus {
    match e {
        PredicateError::Arity { .. } => FpfStatus::ArityMismatch,
        PredicateError::NonFinite { .. } => FpfStatus::NonFinite,
        PredicateError::Undecided => FpfStatus::Undecided,
        PredicateError::Parse(_) => FpfStatus::ParseError,
        PredicateError::Derive(_) => FpfStatus::DeriveError,
        _ => FpfStatus::InvalidArgument,
    }
}

fn guarded(f: impl FnOnce() -> FpfStatus) -> FpfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(FpfStatus::Panic, "internal panic"),
    }
}

fn profile(p: i32) -> Result<Profile, FpfStatus> {
    match p {
        FPF_PROFILE_SAFE => Ok(Profile::Safe),
        FPF_PROFILE_FAST => Ok(Profile::Fast),
        _ => Err(fail(FpfStatus::InvalidArgument, format!("unknown profile {p}"))),
    }
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, FpfStatus> {
    if s.is_null() {
        return Err(fail(FpfStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(FpfStatus::InvalidArgument, "string argument is not UTF-8"))
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn emit(p: StagedPredicate, out: *mut *mut FpfPredicate) -> FpfStatus {
    *out = Box::into_raw(Box::new(FpfPredicate { inner: p }));
    FpfStatus::Ok
}

/// Creates the default cascade of a built-in predicate (`orient2d`,
/// `incircle2d`, `orient3d`, `power_side_3d`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fpf_predicate_builtin(
    name: *const c_char,
    profile_id: i32,
    out: *mut *mut FpfPredicate,
) -> FpfStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FpfStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let (name, p) = match (text(name), profile(profile_id)) {
            (Ok(n), Ok(p)) => (n, p),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match name.parse::<Builtin>() {
            Ok(b) => emit(StagedPredicate::default_pipeline(b, p), out),
            Err(e) => fail(FpfStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Creates the default cascade for an expression such as
/// `(_1 - _5) * (_4 - _6) - (_2 - _6) * (_3 - _5)`.
///
/// # Safety
/// `expr` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fpf_predicate_from_expr(
    expr: *const c_char,
    profile_id: i32,
    out: *mut *mut FpfPredicate,
) -> FpfStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FpfStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let (src, p) = match (text(expr), profile(profile_id)) {
            (Ok(t), Ok(p)) => (t, p),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let e = match parse_expr(src) {
            Ok(e) => e,
            Err(err) => return fail(FpfStatus::ParseError, err.to_string()),
        };
        match StagedPredicate::for_expr(&e, p) {
            Ok(pred) => emit(pred, out),
            Err(err) => fail(predicate_status(&err), err.to_string()),
        }
    })
}

/// Releases a predicate. Null is ignored.
///
/// # Safety
/// `p` must come from one of the constructors and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fpf_predicate_free(p: *mut FpfPredicate) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of inputs, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpf_predicate_arity(p: *const FpfPredicate) -> usize {
    p.as_ref().map_or(0, |p| p.inner.arity())
}

/// Number of stages in the cascade, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpf_predicate_stage_count(p: *const FpfPredicate) -> usize {
    p.as_ref().map_or(0, |p| p.inner.stages().len())
}

/// Exact sign (-1, 0 or +1) of the predicate at `inputs[0..len]`, and the
/// 1-based index of the stage that decided it. `stage` may be null.
///
/// # Safety
/// `p` must be a live handle, `inputs` valid for `len` reads and `sign`
/// valid for a write.
#[no_mangle]
pub unsafe extern "C" fn fpf_predicate_apply(
    p: *const FpfPredicate,
    inputs: *const f64,
    len: usize,
    sign: *mut i32,
    stage: *mut u32,
) -> FpfStatus {
    guarded(|| {
        let Some(p) = p.as_ref() else {
            return fail(FpfStatus::NullPointer, "predicate is null");
        };
        if inputs.is_null() || sign.is_null() {
            return fail(FpfStatus::NullPointer, "inputs or sign is null");
        }
        let x = std::slice::from_raw_parts(inputs, len);
        match p.inner.apply_with_stage(x) {
            Ok((s, k)) => {
                *sign = s.to_i32();
                if !stage.is_null() {
                    *stage = k as u32 + 1;
                }
                FpfStatus::Ok
            }
            Err(e) => fail(predicate_status(&e), e.to_string()),
        }
    })
}

/// The semi-static filter constants of an expression ending in a sum or
/// difference. `a4` is the factor the filter uses: the sign of the rounded
/// value is certified when its magnitude exceeds `a4` times the rounded
/// magnitude bound. `a3` is the intermediate constant it is derived from.
///
/// # Safety
/// `expr` must be a NUL-terminated string; `a3` and `a4` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fpf_derive_constants(
    expr: *const c_char,
    ufp: bool,
    a3: *mut f64,
    a4: *mut f64,
) -> FpfStatus {
    guarded(|| {
        if a3.is_null() || a4.is_null() {
            return fail(FpfStatus::NullPointer, "a3 or a4 is null");
        }
        let src = match text(expr) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let e = match parse_expr(src) {
            Ok(e) => e,
            Err(err) => return fail(FpfStatus::ParseError, err.to_string()),
        };
        let f = match SemiStaticFilter::new(&e, ufp) {
            Ok(f) => f,
            Err(err) => return fail(FpfStatus::DeriveError, err.to_string()),
        };
        match f.constants() {
            Some(c) => {
                *a3 = c.a3;
                *a4 = c.a4;
                FpfStatus::Ok
            }
            None => fail(
                FpfStatus::DeriveError,
                DeriveError::NotSumLike { expr: e.to_string() }.to_string(),
            ),
        }
    })
}

/// Copies the last error message of this thread into `buf` (truncated,
/// always NUL-terminated when `cap > 0`) and returns its full length in
/// bytes without the terminator.
///
/// # Safety
/// `buf` must be null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn fpf_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}
