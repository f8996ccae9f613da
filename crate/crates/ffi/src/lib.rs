//! C ABI over the `rigidity` library.
//!
//! Representations cross the boundary as opaque `RigidityRep` handles owned by
//! the caller and released with [`rigidity_rep_free`]. Every fallible function
//! returns a [`RigidityStatus`]; the message for the most recent failure on the
//! calling thread is available from [`rigidity_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rigidity::reps::{exterior_power_rep, klein_schottky, perturb, psl2_schottky, sym_power_rep, Axes, Representation, SchottkyParams};
use rigidity::spectral::jordan_projection;
use rigidity::weyl::{ratio_bound, root_system, WeylKind};
use rigidity::words::{enumerate_conjugacy_classes, Word};
use rigidity::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RigidityStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    WordParse = 4,
    Dimension = 5,
    Numerical = 6,
    NotProximal = 7,
    BufferTooSmall = 8,
    Serialization = 9,
    Panic = 10,
}

/// Opaque handle to a representation of a free group.
pub struct RigidityRep(Representation);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RigidityStatus {
    match e {
        Error::WordParse(_) | Error::LetterOutOfRange { .. } | Error::IdentityWord => RigidityStatus::WordParse,
        Error::Dimension { .. } => RigidityStatus::Dimension,
        Error::NotProximal { .. } | Error::NotHyperbolic(_) => RigidityStatus::NotProximal,
        Error::InvalidArgument(_) | Error::Config(_) | Error::PingPong(..) => RigidityStatus::InvalidArgument,
        Error::Json(_) | Error::Csv(_) | Error::Io(_) => RigidityStatus::Serialization,
        _ => RigidityStatus::Numerical,
    }
}

struct Fail(RigidityStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> RigidityStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RigidityStatus::Ok,
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("panic inside rigidity".into());
            RigidityStatus::Panic
        }
    }
}

unsafe fn rep_ref<'a>(h: *const RigidityRep) -> Result<&'a Representation, Fail> {
    h.as_ref()
        .map(|r| &r.0)
        .ok_or_else(|| Fail(RigidityStatus::NullPointer, "null representation handle".into()))
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(RigidityStatus::NullPointer, "null output pointer".into()))
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail(RigidityStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Fail(RigidityStatus::InvalidUtf8, e.to_string()))
}

fn word_arg(s: &str) -> Result<Word, Fail> {
    Ok(s.parse::<Word>()?)
}

fn boxed(r: Representation) -> *mut RigidityRep {
    Box::into_raw(Box::new(RigidityRep(r)))
}

fn params(k: usize, rank: usize, length: f64, seed: u64) -> Result<SchottkyParams, Fail> {
    let axes = if seed == 0 { Axes::Perpendicular } else { Axes::Random };
    Ok(SchottkyParams::new(k, rank, length, axes, seed)?)
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rigidity_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Schottky group of the given rank in `SO(1, k)`, acting on `H^k`.
/// `seed = 0` places the axes perpendicularly; otherwise they are random.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rigidity_rep_klein(
    k: usize,
    rank: usize,
    length: f64,
    seed: u64,
    out: *mut *mut RigidityRep,
) -> RigidityStatus {
    guard(|| {
        let out = out_ref(out)?;
        let (rep, _) = klein_schottky(&params(k, rank, length, seed)?)?;
        *out = boxed(rep);
        Ok(())
    })
}

/// `Sym^{d-1}` of a Schottky subgroup of `PSL(2, R)`, a representation in
/// dimension `d`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rigidity_rep_sym_power(
    d: usize,
    rank: usize,
    length: f64,
    seed: u64,
    out: *mut *mut RigidityRep,
) -> RigidityStatus {
    guard(|| {
        let out = out_ref(out)?;
        let (r2, _) = psl2_schottky(&params(2, rank, length, seed)?)?;
        *out = boxed(sym_power_rep(&r2, d)?);
        Ok(())
    })
}

/// `n`-th exterior power of `rep`.
///
/// # Safety
/// `rep` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rigidity_rep_exterior(
    rep: *const RigidityRep,
    n: usize,
    out: *mut *mut RigidityRep,
) -> RigidityStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = boxed(exterior_power_rep(rep_ref(rep)?, n)?);
        Ok(())
    })
}

/// Adds to each generator a seeded Gaussian matrix of operator norm `eps`.
///
/// # Safety
/// `rep` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rigidity_rep_perturb(
    rep: *const RigidityRep,
    eps: f64,
    seed: u64,
    out: *mut *mut RigidityRep,
) -> RigidityStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = boxed(perturb(rep_ref(rep)?, eps, seed)?);
        Ok(())
    })
}

/// Parses the representation JSON format.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rigidity_rep_from_json(json: *const c_char, out: *mut *mut RigidityRep) -> RigidityStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = boxed(Representation::from_json(str_arg(json)?)?);
        Ok(())
    })
}

/// Serializes to the representation JSON format. Release the string with
/// [`rigidity_string_free`].
///
/// # Safety
/// `rep` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rigidity_rep_to_json(rep: *const RigidityRep, out: *mut *mut c_char) -> RigidityStatus {
    guard(|| {
        let out = out_ref(out)?;
        let s = rep_ref(rep)?.to_json()?;
        *out = CString::new(s)
            .map_err(|e| Fail(RigidityStatus::Serialization, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `rep` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rigidity_rep_free(rep: *mut RigidityRep) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rigidity_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Dimension of the representation, or 0 for a null handle.
///
/// # Safety
/// `rep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rigidity_rep_dim(rep: *const RigidityRep) -> usize {
    rep.as_ref().map_or(0, |r| r.0.dim())
}

/// Rank of the free group, or 0 for a null handle.
///
/// # Safety
/// `rep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rigidity_rep_rank(rep: *const RigidityRep) -> usize {
    rep.as_ref().map_or(0, |r| r.0.rank())
}

/// Writes the `d * d` row-major entries of the image of `word`, normalized to
/// unit Frobenius norm, into `buf`.
///
/// # Safety
/// `rep` must be a live handle, `word` NUL-terminated, and `buf` valid for
/// `len` writes.
#[no_mangle]
pub unsafe extern "C" fn rigidity_rep_evaluate(
    rep: *const RigidityRep,
    word: *const c_char,
    buf: *mut f64,
    len: usize,
) -> RigidityStatus {
    guard(|| {
        let rep = rep_ref(rep)?;
        let w = word_arg(str_arg(word)?)?;
        if buf.is_null() {
            return Err(Fail(RigidityStatus::NullPointer, "null output buffer".into()));
        }
        let d = rep.dim();
        if len < d * d {
            return Err(Fail(RigidityStatus::BufferTooSmall, format!("need {} entries, got {len}", d * d)));
        }
        let m = rep.evaluate(&w)?.entries();
        let norm = m.norm();
        let out = std::slice::from_raw_parts_mut(buf, d * d);
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = m[(i, j)] / norm;
            }
        }
        Ok(())
    })
}

/// Writes the Jordan projection `lambda_1 >= ... >= lambda_d` of the image of
/// `word` into `buf`.
///
/// # Safety
/// `rep` must be a live handle, `word` NUL-terminated, and `buf` valid for
/// `len` writes.
#[no_mangle]
pub unsafe extern "C" fn rigidity_rep_jordan(
    rep: *const RigidityRep,
    word: *const c_char,
    buf: *mut f64,
    len: usize,
) -> RigidityStatus {
    guard(|| {
        let rep = rep_ref(rep)?;
        let w = word_arg(str_arg(word)?)?;
        if buf.is_null() {
            return Err(Fail(RigidityStatus::NullPointer, "null output buffer".into()));
        }
        if len < rep.dim() {
            return Err(Fail(RigidityStatus::BufferTooSmall, format!("need {} entries, got {len}", rep.dim())));
        }
        let j = jordan_projection(&rep.evaluate(&w)?)?;
        std::slice::from_raw_parts_mut(buf, rep.dim()).copy_from_slice(j.values());
        Ok(())
    })
}

/// Exact `alpha(bar) / chi(bar)` for the root system `kind` (`"A"`, `"B"`,
/// `"C"` or `"G2"`) with the given parameter.
///
/// # Safety
/// `kind` must be NUL-terminated; `num` and `den` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn rigidity_weyl_ratio_bound(
    kind: *const c_char,
    parameter: usize,
    num: *mut i64,
    den: *mut i64,
) -> RigidityStatus {
    guard(|| {
        let (num, den) = (out_ref(num)?, out_ref(den)?);
        let kind: WeylKind = str_arg(kind)?.parse()?;
        let r = ratio_bound(&root_system(kind, parameter)?);
        *num = *r.numer();
        *den = *r.denom();
        Ok(())
    })
}

/// Number of conjugacy classes of cyclic length `1..=max_len` in the free
/// group of the given rank.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rigidity_class_count(rank: usize, max_len: usize, out: *mut usize) -> RigidityStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = enumerate_conjugacy_classes(rank, max_len)?.len();
        Ok(())
    })
}
