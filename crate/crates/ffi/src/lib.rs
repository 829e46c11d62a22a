//! C ABI over the seasonal-threshold core.
//!
//! Every function returns a [`StStatus`]. On failure the message is kept in a
//! thread-local slot readable through [`st_last_error_message`]. Matrices are
//! passed as row-major `n * n` arrays of `double`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use seasonal_threshold::floquet::{find_threshold, Regime, ThresholdOptions, TwoSeasonLinearization};
use seasonal_threshold::insect::{as_seasonal_system, equilibria, r0, InsectParams};
use seasonal_threshold::linalg::Matrix;
use seasonal_threshold::simulate::{find_periodic_orbit, Classification, OrbitOptions};
use seasonal_threshold::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Structure = 3,
    Convergence = 4,
    Conditioning = 5,
    Certificate = 6,
    Divergence = 7,
    Other = 8,
    Panic = 9,
}

impl From<&Error> for StStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::Scenario { .. } | Error::Mode(_) | Error::Usage(_) => StStatus::InvalidInput,
            Error::Structure(_) => StStatus::Structure,
            Error::Convergence { .. } => StStatus::Convergence,
            Error::Conditioning(_) | Error::DegenerateDiagonalization(_) => StStatus::Conditioning,
            Error::Certificate { .. } => StStatus::Certificate,
            Error::Divergence { .. } => StStatus::Divergence,
            Error::Inconsistent(_) | Error::Io(_) => StStatus::Other,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StRegime {
    InteriorRoot = 0,
    AlwaysExtinct = 1,
    AlwaysPersistent = 2,
}

impl From<Regime> for StRegime {
    fn from(r: Regime) -> Self {
        match r {
            Regime::InteriorRoot => StRegime::InteriorRoot,
            Regime::AlwaysExtinct => StRegime::AlwaysExtinct,
            Regime::AlwaysPersistent => StRegime::AlwaysPersistent,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StClassification {
    Extinction = 0,
    PeriodicPositive = 1,
    Divergent = 2,
    Undecided = 3,
}

impl From<Classification> for StClassification {
    fn from(c: Classification) -> Self {
        match c {
            Classification::Extinction => StClassification::Extinction,
            Classification::PeriodicPositive => StClassification::PeriodicPositive,
            Classification::Divergent => StClassification::Divergent,
            Classification::Undecided => StClassification::Undecided,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StThresholdReport {
    pub theta_star: f64,
    pub rho_at_theta_star: f64,
    pub regime: StRegime,
    /// 1 when rho passed the monotonicity certificate.
    pub monotone_certificate: i32,
    pub iterations: usize,
}

/// Rates of one season: birth, maturation, juvenile death, juvenile crowding, adult death.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StInsectParams {
    pub b: f64,
    pub h: f64,
    pub d_j: f64,
    pub c_j: f64,
    pub d_a: f64,
}

impl StInsectParams {
    fn to_core(self) -> Result<InsectParams, Error> {
        InsectParams::new(self.b, self.h, self.d_j, self.c_j, self.d_a)
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StEquilibria {
    pub r0: f64,
    /// 1 when the positive steady state exists (`R0 > 1`).
    pub has_positive: i32,
    pub positive_j: f64,
    pub positive_a: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StOrbit {
    pub fixed_point: [f64; 2],
    pub residual: f64,
    pub iterations: usize,
    pub classification: StClassification,
    pub multiplier: f64,
}

/// Opaque handle to a two-season linearization.
pub struct StLinearization(TwoSeasonLinearization);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Fail(StStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(StStatus::from(&e), e.to_string())
    }
}

fn null(name: &str) -> Fail {
    Fail(StStatus::NullPointer, format!("`{name}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> StStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            StStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            StStatus::Panic
        }
    }
}

unsafe fn read_matrix(n: usize, data: *const f64, name: &str) -> Result<Matrix, Fail> {
    if data.is_null() {
        return Err(null(name));
    }
    let len = n.checked_mul(n).ok_or_else(|| Fail(StStatus::InvalidInput, "dimension overflow".into()))?;
    Ok(Matrix::new(n, std::slice::from_raw_parts(data, len).to_vec())?)
}

unsafe fn handle<'a>(h: *const StLinearization) -> Result<&'a TwoSeasonLinearization, Fail> {
    h.as_ref().map(|l| &l.0).ok_or_else(|| null("handle"))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn st_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Builds the linearization from the unfavorable-season matrix `m1`, the
/// favorable-season matrix `m2` and the period. Free the handle with
/// [`st_linearization_free`].
///
/// # Safety
/// `m1` and `m2` must point to `n * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_linearization_new(
    n: usize,
    m1: *const f64,
    m2: *const f64,
    period: f64,
    out: *mut *mut StLinearization,
) -> StStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let lin = TwoSeasonLinearization::new(read_matrix(n, m1, "m1")?, read_matrix(n, m2, "m2")?, period)?;
        out.write(Box::into_raw(Box::new(StLinearization(lin))));
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`st_linearization_new`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn st_linearization_free(h: *mut StLinearization) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_linearization_dim(h: *const StLinearization, out: *mut usize) -> StStatus {
    guard(|| write(out, handle(h)?.dim(), "out"))
}

/// Spectral radius of the monodromy at `theta`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_rho(h: *const StLinearization, theta: f64, out: *mut f64) -> StStatus {
    guard(|| write(out, handle(h)?.rho(theta)?.rho, "out"))
}

/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_rho_prime(h: *const StLinearization, theta: f64, out: *mut f64) -> StStatus {
    guard(|| write(out, handle(h)?.rho_prime(theta)?, "out"))
}

/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_rho_second(h: *const StLinearization, theta: f64, out: *mut f64) -> StStatus {
    guard(|| write(out, handle(h)?.rho_second(theta)?, "out"))
}

/// Perron root with right vector `v` (unit norm) and left vector `v_star`
/// scaled so that `<v, v_star> = 1`.
///
/// # Safety
/// `h` must be a live handle; `rho` must be writable and `v`, `v_star` must
/// each hold `n` doubles, where `n` is the handle's dimension.
#[no_mangle]
pub unsafe extern "C" fn st_perron(
    h: *const StLinearization,
    theta: f64,
    rho: *mut f64,
    v: *mut f64,
    v_star: *mut f64,
) -> StStatus {
    guard(|| {
        let lin = handle(h)?;
        if v.is_null() {
            return Err(null("v"));
        }
        if v_star.is_null() {
            return Err(null("v_star"));
        }
        let pair = lin.rho(theta)?;
        write(rho, pair.rho, "rho")?;
        std::slice::from_raw_parts_mut(v, lin.dim()).copy_from_slice(&pair.v);
        std::slice::from_raw_parts_mut(v_star, lin.dim()).copy_from_slice(&pair.v_star);
        Ok(())
    })
}

/// Row-major monodromy matrix at `theta`.
///
/// # Safety
/// `h` must be a live handle; `out` must hold `n * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn st_monodromy(h: *const StLinearization, theta: f64, out: *mut f64) -> StStatus {
    guard(|| {
        let lin = handle(h)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = lin.monodromy(theta)?;
        std::slice::from_raw_parts_mut(out, m.as_slice().len()).copy_from_slice(m.as_slice());
        Ok(())
    })
}

/// Threshold `theta*` where rho crosses one. A nonpositive `tol` selects the default.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_find_threshold(
    h: *const StLinearization,
    tol: f64,
    out: *mut StThresholdReport,
) -> StStatus {
    guard(|| {
        let lin = handle(h)?;
        let mut opts = ThresholdOptions::default();
        if tol > 0.0 {
            opts.tol = tol;
        }
        let rep = find_threshold(lin, &opts)?;
        let report = StThresholdReport {
            theta_star: rep.theta_star,
            rho_at_theta_star: rep.rho_at_theta_star,
            regime: rep.regime.into(),
            monotone_certificate: rep.monotone_certificate as i32,
            iterations: rep.iterations,
        };
        write(out, report, "out")
    })
}

/// # Safety
/// `params` must be readable; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_insect_r0(params: *const StInsectParams, out: *mut f64) -> StStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?.to_core()?;
        write(out, r0(&p)?, "out")
    })
}

/// # Safety
/// `params` must be readable; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_insect_equilibria(params: *const StInsectParams, out: *mut StEquilibria) -> StStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?.to_core()?;
        let rep = equilibria(&p)?;
        let (j, a) = rep.s1.map_or((0.0, 0.0), |e| (e.state.j, e.state.a));
        write(out, StEquilibria { r0: rep.r0, has_positive: rep.s1.is_some() as i32, positive_j: j, positive_a: a }, "out")
    })
}

/// Periodic orbit of the two-season insect model started from `x0 = (J, A)`.
///
/// # Safety
/// `unfavorable` and `favorable` must be readable, `x0` must hold two doubles
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_insect_orbit(
    unfavorable: *const StInsectParams,
    favorable: *const StInsectParams,
    theta: f64,
    period: f64,
    x0: *const f64,
    out: *mut StOrbit,
) -> StStatus {
    guard(|| {
        let u = unfavorable.as_ref().ok_or_else(|| null("unfavorable"))?.to_core()?;
        let f = favorable.as_ref().ok_or_else(|| null("favorable"))?.to_core()?;
        if x0.is_null() {
            return Err(null("x0"));
        }
        let start = std::slice::from_raw_parts(x0, 2);
        let sys = as_seasonal_system(&u, &f, theta, period)?;
        let res = find_periodic_orbit(&sys, start, &OrbitOptions::default())?;
        let orbit = StOrbit {
            fixed_point: [res.fixed_point[0], res.fixed_point[1]],
            residual: res.residual,
            iterations: res.iterations,
            classification: res.classification.into(),
            multiplier: res.multiplier_lambda,
        };
        write(out, orbit, "out")
    })
}
