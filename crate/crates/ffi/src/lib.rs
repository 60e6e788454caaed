//! C ABI over the `randjoin` library.
//!
//! Objects cross the boundary as opaque handles created by `rj_*_new`-style
//! functions and released with the matching `rj_*_free`. Every fallible call
//! returns an [`RjStatus`]; on failure a message is kept per thread and read
//! with [`rj_last_error_message`]. Strings returned through out-parameters
//! are owned by the caller and released with [`rj_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use randjoin::bits::Bits;
use randjoin::ratio::{self, Rational};
use randjoin::schedule::{self, DensityKind, LevelSchedule};
use randjoin::{mltest, partition, Error, FiniteTree, PartitionSystem};

/// Outcome of an `rj_*` call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RjStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    TooLarge = 4,
    CodingFailure = 5,
    Internal = 6,
}

/// Level schedule handle.
pub struct RjSchedule(LevelSchedule);

/// Finite tree handle.
pub struct RjTree(FiniteTree);

/// Partition system handle.
pub struct RjSystem(PartitionSystem);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RjStatus {
    match e {
        Error::Parse { .. } => RjStatus::Parse,
        Error::TooLarge { .. } | Error::DigitBound { .. } => RjStatus::TooLarge,
        Error::CodingFailure { .. } => RjStatus::CodingFailure,
        _ => RjStatus::InvalidArgument,
    }
}

struct Fail(RjStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RjStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(RjStatus::InvalidArgument, msg.into())
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RjStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RjStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RjStatus::Internal
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn bits_arg(p: *const c_char, what: &str) -> Result<Bits, Fail> {
    Ok(str_arg(p, what)?.parse()?)
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = CString::new(s).map_err(|_| invalid("string holds NUL"))?.into_raw();
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `rj_*` call on the same thread.
#[no_mangle]
pub extern "C" fn rj_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rj_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rj_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a schedule from `n_levels` levels and densities `q_num[i]/q_den[i]`.
///
/// # Safety
/// The three arrays must hold `n_levels` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rj_schedule_new(
    levels: *const u64,
    q_num: *const u64,
    q_den: *const u64,
    n_levels: usize,
    out: *mut *mut RjSchedule,
) -> RjStatus {
    guard(|| {
        if levels.is_null() || q_num.is_null() || q_den.is_null() {
            return Err(null("levels or densities"));
        }
        let levels = std::slice::from_raw_parts(levels, n_levels);
        let num = std::slice::from_raw_parts(q_num, n_levels);
        let den = std::slice::from_raw_parts(q_den, n_levels);
        if den.contains(&0) {
            return Err(invalid("zero density denominator"));
        }
        let q: Vec<Rational> = num
            .iter()
            .zip(den)
            .map(|(&a, &b)| Rational::new(a.into(), b.into()))
            .collect();
        let s = LevelSchedule::new(levels.to_vec(), q)?;
        put(out, RjSchedule(s))
    })
}

/// Builds a schedule from a level kind (`exponential`, `nlogn`,
/// `scaled-nlogn:<c>`, `custom:<l0,l1,..>`) with `q_n = 1/(n+1)²`.
///
/// # Safety
/// `kind` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rj_schedule_from_kind(
    kind: *const c_char,
    n_max: usize,
    out: *mut *mut RjSchedule,
) -> RjStatus {
    guard(|| {
        let kind = randjoin::cli::parse_levels(str_arg(kind, "kind")?).map_err(|f| invalid(f.message))?;
        let s = schedule::make_schedule(kind, n_max, DensityKind::InverseSquare)?;
        put(out, RjSchedule(s))
    })
}

/// # Safety
/// `s` must be null or a live schedule handle.
#[no_mangle]
pub unsafe extern "C" fn rj_schedule_free(s: *mut RjSchedule) {
    free(s)
}

/// The horizon `N`, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live schedule handle.
#[no_mangle]
pub unsafe extern "C" fn rj_schedule_horizon(s: *const RjSchedule) -> usize {
    s.as_ref().map_or(0, |s| s.0.horizon())
}

/// Writes `ℓ_n` to `out`.
///
/// # Safety
/// `s` must be a live schedule handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rj_schedule_level(s: *const RjSchedule, n: usize, out: *mut u64) -> RjStatus {
    guard(|| {
        let s = &get(s, "schedule")?.0;
        if n > s.horizon() {
            return Err(invalid(format!("level {n} is beyond the horizon {}", s.horizon())));
        }
        *out.as_mut().ok_or_else(|| null("out"))? = s.level(n);
        Ok(())
    })
}

/// Parses the canonical tree text (`L=<top>` then one leaf per line).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rj_tree_parse(text: *const c_char, out: *mut *mut RjTree) -> RjStatus {
    guard(|| put(out, RjTree(FiniteTree::parse(str_arg(text, "text")?)?)))
}

/// The full tree at `ℓ_N` minus a seeded random set of leaves of measure
/// `budget_num / budget_den`.
///
/// # Safety
/// `s` must be a live schedule handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rj_tree_generate(
    s: *const RjSchedule,
    budget_num: u64,
    budget_den: u64,
    seed: u64,
    out: *mut *mut RjTree,
) -> RjStatus {
    guard(|| {
        let s = &get(s, "schedule")?.0;
        if budget_den == 0 {
            return Err(invalid("zero budget denominator"));
        }
        let budget = Rational::new(budget_num.into(), budget_den.into());
        put(out, RjTree(randjoin::generate_complement_tree(s, &budget, seed)?))
    })
}

/// Prunes `t` to the schedule densities into a new handle.
///
/// # Safety
/// `t` and `s` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rj_tree_prune(t: *const RjTree, s: *const RjSchedule, out: *mut *mut RjTree) -> RjStatus {
    guard(|| {
        let t = &get(t, "tree")?.0;
        let s = &get(s, "schedule")?.0;
        put(out, RjTree(t.prune_to_density(s)?))
    })
}

/// Writes the measure as `num / 2^exp` in lowest terms.
///
/// # Safety
/// `t` must be a live tree handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rj_tree_measure(t: *const RjTree, num: *mut u64, exp: *mut u32) -> RjStatus {
    guard(|| {
        let t = &get(t, "tree")?.0;
        if num.is_null() || exp.is_null() {
            return Err(null("out"));
        }
        let m = t.measure();
        *num = u64::try_from(m.numer().clone()).map_err(|_| invalid("measure numerator overflow"))?;
        *exp = m.denom().bits().saturating_sub(1) as u32;
        Ok(())
    })
}

/// Number of leaves, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live tree handle.
#[no_mangle]
pub unsafe extern "C" fn rj_tree_leaf_count(t: *const RjTree) -> u64 {
    t.as_ref().map_or(0, |t| t.0.leaf_count())
}

/// Canonical text form of the tree.
///
/// # Safety
/// `t` must be a live tree handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rj_tree_to_text(t: *const RjTree, out: *mut *mut c_char) -> RjStatus {
    guard(|| put_string(out, get(t, "tree")?.0.to_text()))
}

/// # Safety
/// `t` must be null or a live tree handle.
#[no_mangle]
pub unsafe extern "C" fn rj_tree_free(t: *mut RjTree) {
    free(t)
}

/// A uniformly random height-`height` system, deterministic in `seed`.
///
/// # Safety
/// `s` must be a live schedule handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rj_system_sample(
    s: *const RjSchedule,
    height: usize,
    seed: u64,
    out: *mut *mut RjSystem,
) -> RjStatus {
    guard(|| {
        let s = &get(s, "schedule")?.0;
        put(out, RjSystem(partition::sample_uniform(s, height, seed)?))
    })
}

/// The system named by the bit string `name` (characters `0` and `1`).
///
/// # Safety
/// `s` must be a live schedule handle; `name` a NUL-terminated string;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rj_system_from_name(
    s: *const RjSchedule,
    name: *const c_char,
    out: *mut *mut RjSystem,
) -> RjStatus {
    guard(|| {
        let s = &get(s, "schedule")?.0;
        let name = bits_arg(name, "name")?;
        put(out, RjSystem(partition::name_to_system(&name, s)?))
    })
}

/// Height of the system, or 0 for a null handle.
///
/// # Safety
/// `ps` must be null or a live system handle.
#[no_mangle]
pub unsafe extern "C" fn rj_system_height(ps: *const RjSystem) -> usize {
    ps.as_ref().map_or(0, |p| p.0.height())
}

/// Canonical text form of the system.
///
/// # Safety
/// `ps` must be a live system handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rj_system_to_text(ps: *const RjSystem, out: *mut *mut c_char) -> RjStatus {
    guard(|| put_string(out, get(ps, "system")?.0.to_text()))
}

/// # Safety
/// `ps` must be null or a live system handle.
#[no_mangle]
pub unsafe extern "C" fn rj_system_free(ps: *mut RjSystem) {
    free(ps)
}

/// Encodes `z` from `(sigma0, tau0)` into a tree string written to `out_y`.
/// Returns `CodingFailure` when a required class misses the tree.
///
/// # Safety
/// Handles must be live; strings NUL-terminated; `out_y` writable.
#[no_mangle]
pub unsafe extern "C" fn rj_encode(
    ps: *const RjSystem,
    t: *const RjTree,
    z: *const c_char,
    sigma0: *const c_char,
    tau0: *const c_char,
    out_y: *mut *mut c_char,
) -> RjStatus {
    guard(|| {
        let ps = &get(ps, "system")?.0;
        let t = &get(t, "tree")?.0;
        let (y, _) = randjoin::encode(
            &bits_arg(z, "z")?,
            ps,
            t,
            &bits_arg(sigma0, "sigma0")?,
            &bits_arg(tau0, "tau0")?,
        )?;
        put_string(out_y, y.to_string())
    })
}

/// Recovers `z` from `y` using only the system.
///
/// # Safety
/// `ps` must be live; strings NUL-terminated; `out_z` writable.
#[no_mangle]
pub unsafe extern "C" fn rj_decode(
    ps: *const RjSystem,
    y: *const c_char,
    sigma0: *const c_char,
    tau0: *const c_char,
    out_z: *mut *mut c_char,
) -> RjStatus {
    guard(|| {
        let ps = &get(ps, "system")?.0;
        let z = randjoin::decode(
            ps,
            &bits_arg(y, "y")?,
            &bits_arg(sigma0, "sigma0")?,
            &bits_arg(tau0, "tau0")?,
        )?;
        put_string(out_z, z.to_string())
    })
}

/// Writes the failure horizon `n₀` of `ps` on `t`, or -1 when the last
/// level fails.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rj_find_n0(ps: *const RjSystem, t: *const RjTree, out: *mut i64) -> RjStatus {
    guard(|| {
        let ps = &get(ps, "system")?.0;
        let t = &get(t, "tree")?.0;
        let n0 = mltest::find_n0_in(ps, t)?;
        *out.as_mut().ok_or_else(|| null("out"))? = n0.map_or(-1, |n| n as i64);
        Ok(())
    })
}

/// Exact probability `C(N-K, d) / C(N, d)` as a string `p/q`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rj_hypergeom_zero_prob(
    population: u64,
    marked: u64,
    draws: u64,
    out: *mut *mut c_char,
) -> RjStatus {
    guard(|| {
        let p = randjoin::hypergeom_zero_prob(population, marked, draws)?;
        put_string(out, ratio::to_pq(&p))
    })
}
