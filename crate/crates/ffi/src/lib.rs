//! C ABI over `thermo-core`.
//!
//! Every entry point returns a [`ThermoStatus`] and writes results through
//! out-pointers, which are left untouched on failure. The message for the
//! most recent failure on the calling thread is available from
//! [`thermo_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64 as C64;
use thermo_core::linalg::FockSpace;
use thermo_core::metrology::{cramer_rao, qfi_analytic, qfi_finite_difference, QfiResult, DEFAULT_REL_STEP};
use thermo_core::pointer::{
    closed_form_readouts, evolve_exact_with, gaussian_ground_state, postselect_pointer, weak_final_state,
    CouplingParams,
};
use thermo_core::spin::{
    build_spin_hamiltonian, gibbs_state, postselect_state, InverseTemperature, PostselectionAngles, SpinParams,
};
use thermo_core::weak::{
    inversion_coefficients, invert_beta, weak_value_exact, weak_value_first_order, WeakValue, WeakValueKind,
};
use thermo_core::ThermoError;

/// Result code of every `thermo_*` call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThermoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonFinite = 3,
    OrthogonalPostselection = 4,
    InsensitivePostselection = 5,
    GibbsOverflow = 6,
    TruncationInsufficient = 7,
    NoConvergence = 8,
    InsufficientPrecision = 9,
    Internal = 10,
    Panic = 11,
}

impl From<&ThermoError> for ThermoStatus {
    fn from(e: &ThermoError) -> Self {
        match e {
            ThermoError::InvalidParameter(_) | ThermoError::DimensionMismatch { .. } => ThermoStatus::InvalidArgument,
            ThermoError::NonFinite(_) => ThermoStatus::NonFinite,
            ThermoError::OrthogonalPostselection(_) => ThermoStatus::OrthogonalPostselection,
            ThermoError::InsensitivePostselection { .. } | ThermoError::SymmetricDenominator => {
                ThermoStatus::InsensitivePostselection
            }
            ThermoError::GibbsOverflow(_) => ThermoStatus::GibbsOverflow,
            ThermoError::TruncationInsufficient { .. } => ThermoStatus::TruncationInsufficient,
            ThermoError::NoConvergence(_) => ThermoStatus::NoConvergence,
            ThermoError::InsufficientPrecision(_) => ThermoStatus::InsufficientPrecision,
            ThermoError::NotHermitian { .. } | ThermoError::NotNormalized { .. } => ThermoStatus::Internal,
        }
    }
}

/// `method` argument of [`thermo_qfi`]: closed form.
pub const THERMO_QFI_ANALYTIC: i32 = 0;
/// `method` argument of [`thermo_qfi`]: fidelity-based finite difference.
pub const THERMO_QFI_FINITE_DIFFERENCE: i32 = 1;

/// Model parameters: spin Hamiltonian, impulsive coupling, pointer width and
/// Fock truncation.
pub struct ThermoModel {
    spin: SpinParams,
    coupling: CouplingParams,
    sigma: f64,
    fock_dim: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), ThermoError>>(f: F) -> ThermoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ThermoStatus::Ok,
        Ok(Err(e)) => {
            set_last_error(e.to_string());
            ThermoStatus::from(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            ThermoStatus::Panic
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_last_error(format!("null pointer argument `{}`", stringify!($p)));
            return ThermoStatus::NullPointer;
        })+
    };
}

fn thermal(m: &ThermoModel, theta: f64, phi: f64, beta: f64) -> Result<(PostselectionAngles, WeakValue), ThermoError> {
    let a = PostselectionAngles::new(theta, phi)?;
    let h = build_spin_hamiltonian(&m.spin);
    let s_w = weak_value_exact(&gibbs_state(&h, InverseTemperature::new(beta)?)?, &postselect_state(&a))?;
    Ok((a, s_w))
}

/// Creates a model. `fock_dim` must be at least 2.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer. The
/// returned handle must be released with [`thermo_model_free`].
#[no_mangle]
pub unsafe extern "C" fn thermo_model_new(
    omega_z: f64,
    omega_r: f64,
    g0: f64,
    sigma: f64,
    fock_dim: usize,
    out: *mut *mut ThermoModel,
) -> ThermoStatus {
    non_null!(out);
    guard(|| {
        let spin = SpinParams::new(omega_z, omega_r)?;
        let coupling = CouplingParams::impulsive(g0)?;
        FockSpace::new(fock_dim, sigma)?;
        let model = Box::new(ThermoModel { spin, coupling, sigma, fock_dim });
        // SAFETY: checked non-null above; caller guarantees validity.
        unsafe { *out = Box::into_raw(model) };
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from [`thermo_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn thermo_model_free(model: *mut ThermoModel) {
    if !model.is_null() {
        // SAFETY: handle came from Box::into_raw in thermo_model_new.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Exact weak value `S_w` of the thermal state at `beta` for the
/// postselection `(theta, phi)`.
///
/// # Safety
/// `model` must be a live handle; `out_re` and `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thermo_weak_value(
    model: *const ThermoModel,
    theta: f64,
    phi: f64,
    beta: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> ThermoStatus {
    non_null!(model, out_re, out_im);
    // SAFETY: pointers checked non-null; caller guarantees validity.
    let m = unsafe { &*model };
    guard(|| {
        let (_, s_w) = thermal(m, theta, phi, beta)?;
        unsafe {
            *out_re = s_w.value.re;
            *out_im = s_w.value.im;
        }
        Ok(())
    })
}

/// Linearized weak value, valid for small `beta·‖H‖`.
///
/// # Safety
/// As [`thermo_weak_value`].
#[no_mangle]
pub unsafe extern "C" fn thermo_weak_value_first_order(
    model: *const ThermoModel,
    theta: f64,
    phi: f64,
    beta: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> ThermoStatus {
    non_null!(model, out_re, out_im);
    // SAFETY: pointers checked non-null; caller guarantees validity.
    let m = unsafe { &*model };
    guard(|| {
        let psi = postselect_state(&PostselectionAngles::new(theta, phi)?);
        let h = build_spin_hamiltonian(&m.spin);
        let s_w = weak_value_first_order(&h, &psi, InverseTemperature::new(beta)?)?;
        unsafe {
            *out_re = s_w.value.re;
            *out_im = s_w.value.im;
        }
        Ok(())
    })
}

/// Inverse temperature estimated from a measured weak value. The real part
/// of the linear-response ratio goes to `out_beta`, its imaginary part to
/// `out_residue`.
///
/// # Safety
/// `model` must be a live handle; `out_beta` and `out_residue` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thermo_invert_beta(
    model: *const ThermoModel,
    theta: f64,
    phi: f64,
    weak_re: f64,
    weak_im: f64,
    out_beta: *mut f64,
    out_residue: *mut f64,
) -> ThermoStatus {
    non_null!(model, out_beta, out_residue);
    // SAFETY: pointers checked non-null; caller guarantees validity.
    let m = unsafe { &*model };
    guard(|| {
        if !(weak_re.is_finite() && weak_im.is_finite()) {
            return Err(ThermoError::NonFinite("weak value"));
        }
        let psi = postselect_state(&PostselectionAngles::new(theta, phi)?);
        let coeffs = inversion_coefficients(&build_spin_hamiltonian(&m.spin), &psi);
        let est = invert_beta(&WeakValue::new(C64::new(weak_re, weak_im), WeakValueKind::Reconstructed), &coeffs)?;
        unsafe {
            *out_beta = est.beta;
            *out_residue = est.imaginary_residue;
        }
        Ok(())
    })
}

/// Quantum Fisher information of the pointer state with respect to β, by
/// [`THERMO_QFI_ANALYTIC`] or [`THERMO_QFI_FINITE_DIFFERENCE`].
///
/// # Safety
/// `model` must be a live handle; `out_fisher` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thermo_qfi(
    model: *const ThermoModel,
    theta: f64,
    phi: f64,
    beta: f64,
    method: i32,
    out_fisher: *mut f64,
) -> ThermoStatus {
    non_null!(model, out_fisher);
    // SAFETY: pointers checked non-null; caller guarantees validity.
    let m = unsafe { &*model };
    guard(|| {
        let a = PostselectionAngles::new(theta, phi)?;
        let b = InverseTemperature::new(beta)?;
        let r = match method {
            THERMO_QFI_ANALYTIC => qfi_analytic(b, &a, &m.coupling, &m.spin)?,
            THERMO_QFI_FINITE_DIFFERENCE => qfi_finite_difference(b, &a, &m.coupling, &m.spin, DEFAULT_REL_STEP)?,
            other => return Err(ThermoError::InvalidParameter(format!("unknown QFI method {other}"))),
        };
        unsafe { *out_fisher = r.fisher };
        Ok(())
    })
}

/// Cramér–Rao bound `1/(n·fisher)`. When `fisher` is zero no bound exists:
/// `*out_informative` is set to false and `*out_bound` is left untouched.
///
/// # Safety
/// `out_bound` and `out_informative` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thermo_cramer_rao(
    fisher: f64,
    n_measurements: u64,
    out_bound: *mut f64,
    out_informative: *mut bool,
) -> ThermoStatus {
    non_null!(out_bound, out_informative);
    guard(|| {
        if !(fisher.is_finite() && fisher >= 0.0) {
            return Err(ThermoError::InvalidParameter(format!(
                "Fisher information must be finite and non-negative, got {fisher}"
            )));
        }
        let f = QfiResult {
            fisher,
            method: thermo_core::metrology::QfiMethod::Analytic,
            beta: 0.0,
            angles: PostselectionAngles { theta: 0.0, phi: 0.0 },
        };
        let crb = cramer_rao(&f, n_measurements)?;
        match crb.variance_bound.value() {
            Some(v) => unsafe {
                *out_bound = v;
                *out_informative = true;
            },
            None => unsafe { *out_informative = false },
        }
        Ok(())
    })
}

/// Closed-form pointer readouts `(⟨z⟩, ⟨p⟩)` of the weak-limit state.
///
/// # Safety
/// `model` must be a live handle; `out_z` and `out_p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn thermo_pointer_readouts(
    model: *const ThermoModel,
    theta: f64,
    phi: f64,
    beta: f64,
    out_z: *mut f64,
    out_p: *mut f64,
) -> ThermoStatus {
    non_null!(model, out_z, out_p);
    // SAFETY: pointers checked non-null; caller guarantees validity.
    let m = unsafe { &*model };
    guard(|| {
        let (_, s_w) = thermal(m, theta, phi, beta)?;
        let (z, p) = closed_form_readouts(s_w.value, m.coupling.g0, m.sigma);
        unsafe {
            *out_z = z;
            *out_p = p;
        }
        Ok(())
    })
}

/// Exact evolution in the truncated Fock space followed by postselection:
/// postselection probability, infidelity against the weak-limit state and
/// the readouts `(⟨z⟩, ⟨p⟩)`.
///
/// # Safety
/// `model` must be a live handle; all out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn thermo_pointer_exact(
    model: *const ThermoModel,
    theta: f64,
    phi: f64,
    beta: f64,
    out_prob: *mut f64,
    out_infidelity: *mut f64,
    out_z: *mut f64,
    out_p: *mut f64,
) -> ThermoStatus {
    non_null!(model, out_prob, out_infidelity, out_z, out_p);
    // SAFETY: pointers checked non-null; caller guarantees validity.
    let m = unsafe { &*model };
    guard(|| {
        let a = PostselectionAngles::new(theta, phi)?;
        let psi = postselect_state(&a);
        let rho = gibbs_state(&build_spin_hamiltonian(&m.spin), InverseTemperature::new(beta)?)?;
        let s_w = weak_value_exact(&rho, &psi)?;
        let space = FockSpace::new(m.fock_dim, m.sigma)?;
        let joint = evolve_exact_with(&rho, &gaussian_ground_state(&space), &m.coupling, Some(&m.spin))?;
        let post = postselect_pointer(&joint, &psi, m.sigma)?;
        let infidelity = 1.0 - post.fidelity(&weak_final_state(&s_w, &m.coupling, &space));
        let (z, p) = post.readouts();
        unsafe {
            *out_prob = post.prob;
            *out_infidelity = infidelity;
            *out_z = z;
            *out_p = p;
        }
        Ok(())
    })
}

/// Message for the last failing call on this thread, or null if none. The
/// string stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn thermo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code; unknown codes map to
/// `"unknown status"`.
#[no_mangle]
pub extern "C" fn thermo_status_str(status: i32) -> *const c_char {
    let s: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer\0",
        2 => b"invalid argument\0",
        3 => b"non-finite input\0",
        4 => b"postselection orthogonal to the state\0",
        5 => b"postselection insensitive to temperature\0",
        6 => b"Gibbs exponent overflow\0",
        7 => b"Fock truncation too small\0",
        8 => b"no convergence\0",
        9 => b"insufficient precision\0",
        10 => b"internal error\0",
        11 => b"panic\0",
        _ => b"unknown status\0",
    };
    s.as_ptr().cast()
}
