//! Weak values of `S_z` between a thermal spin and a postselected state, and
//! the linear-response inversion that turns a weak value back into β.

use num_complex::Complex64 as C64;

use crate::error::{Result, ThermoError};
use crate::linalg::{matrix_element, operator_norm, CMatrix};
use crate::spin::{shifted_gibbs_weight, spin_z, InverseTemperature, SpinDensity, SpinParams, SpinState};

/// Postselection probabilities at or below this are treated as zero.
pub const MIN_POSTSELECTION_PROBABILITY: f64 = 1e-300;

/// Relative cutoff (in units of `‖H‖`) for the inversion denominator.
pub const DEGENERACY_TOL: f64 = 1e-15;

/// Largest `β‖H‖` accepted by the linearized weak value.
pub const LINEARIZATION_LIMIT: f64 = 0.5;

/// Above this `β‖H‖` the linearized weak value is still computed but is no
/// longer a good approximation.
pub const LINEARIZATION_WARN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeakValueKind {
    Exact,
    FirstOrder,
    /// Recovered from pointer readouts.
    Reconstructed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakValue {
    pub value: C64,
    pub kind: WeakValueKind,
}

impl WeakValue {
    pub fn new(value: C64, kind: WeakValueKind) -> Self {
        Self { value, kind }
    }
}

/// `S_w = ⟨ψ_f|S_z ρ|ψ_f⟩ / ⟨ψ_f|ρ|ψ_f⟩`
pub fn weak_value_exact(rho: &SpinDensity, psi_f: &SpinState) -> Result<WeakValue> {
    let value = weak_ratio(rho.matrix(), psi_f)?;
    Ok(WeakValue::new(value, WeakValueKind::Exact))
}

fn weak_ratio(weight: &CMatrix, psi_f: &SpinState) -> Result<C64> {
    let psi = psi_f.amplitudes();
    let den = matrix_element(psi, weight, psi);
    let trace = weight.trace().re;
    if !(den.re > MIN_POSTSELECTION_PROBABILITY * trace) {
        return Err(ThermoError::OrthogonalPostselection(den.re / trace));
    }
    let num = matrix_element(psi, &(&spin_z() * weight), psi);
    Ok(num / den)
}

/// Exact weak value for any real β, including slightly negative values used
/// by centered finite differences.
pub(crate) fn weak_value_at(h: &CMatrix, psi_f: &SpinState, beta: f64) -> Result<C64> {
    let (w, _) = shifted_gibbs_weight(h, beta)?;
    weak_ratio(&w, psi_f)
}

/// `β‖H‖`, the expansion parameter of the high-temperature series.
pub fn linearization_parameter(h: &CMatrix, beta: InverseTemperature) -> f64 {
    beta.value() * operator_norm(h)
}

/// Linear-response weak value `⟨S_z⟩ + β(Conv(S_z, H) − ⟨S_z H⟩)`.
///
/// This is the exact inverse of [`invert_beta`]. Rejects `β‖H‖ > 0.5`; callers
/// should warn above [`LINEARIZATION_WARN`].
pub fn weak_value_first_order(h: &CMatrix, psi_f: &SpinState, beta: InverseTemperature) -> Result<WeakValue> {
    let x = linearization_parameter(h, beta);
    if x > LINEARIZATION_LIMIT {
        return Err(ThermoError::InvalidParameter(format!(
            "beta*||H|| = {x:.3e} is outside the linear-response window (<= {LINEARIZATION_LIMIT})"
        )));
    }
    let k = inversion_coefficients(h, psi_f);
    let value = C64::new(k.sz_mean, 0.0) + k.denominator() * beta.value();
    Ok(WeakValue::new(value, WeakValueKind::FirstOrder))
}

/// Postselection averages entering the linear-response inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InversionCoefficients {
    /// `⟨ψ_f|S_z|ψ_f⟩`
    pub sz_mean: f64,
    /// `⟨ψ_f|H|ψ_f⟩`
    pub h_mean: f64,
    /// `⟨ψ_f|S_z H|ψ_f⟩`, complex because `S_z H` is not Hermitian.
    pub szh_mean: C64,
    /// `⟨S_z⟩⟨H⟩`
    pub conv: f64,
    /// `‖H‖`, sets the degeneracy tolerance.
    pub h_norm: f64,
}

impl InversionCoefficients {
    /// `Conv(S_z, H) − ⟨S_z H⟩`, the sensitivity `dS_w/dβ` at β = 0.
    pub fn denominator(&self) -> C64 {
        C64::new(self.conv, 0.0) - self.szh_mean
    }

    pub fn is_degenerate(&self) -> bool {
        self.denominator().norm() <= DEGENERACY_TOL * self.h_norm
    }
}

pub fn inversion_coefficients(h: &CMatrix, psi_f: &SpinState) -> InversionCoefficients {
    let psi = psi_f.amplitudes();
    let sz = spin_z();
    let sz_mean = matrix_element(psi, &sz, psi).re;
    let h_mean = matrix_element(psi, h, psi).re;
    let szh_mean = matrix_element(psi, &(&sz * h), psi);
    InversionCoefficients { sz_mean, h_mean, szh_mean, conv: sz_mean * h_mean, h_norm: operator_norm(h) }
}

/// Result of inverting a weak value for β.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaEstimate {
    pub beta: f64,
    /// Imaginary part of the complex ratio; zero when the linear model is exact.
    pub imaginary_residue: f64,
}

/// `β = (S_w − ⟨S_z⟩)/(Conv(S_z, H) − ⟨S_z H⟩)`, real part.
pub fn invert_beta(s_w: &WeakValue, coeffs: &InversionCoefficients) -> Result<BetaEstimate> {
    let den = coeffs.denominator();
    if coeffs.is_degenerate() {
        return Err(ThermoError::InsensitivePostselection {
            denominator: den.norm(),
            tolerance: DEGENERACY_TOL * coeffs.h_norm,
        });
    }
    let ratio = (s_w.value - coeffs.sz_mean) / den;
    Ok(BetaEstimate { beta: ratio.re, imaginary_residue: ratio.im })
}

/// Closed-form inversion `β = 2(1 − 2S_w)/(ω_R + 3ω_z)` quoted for a
/// postselection built from the `S_x` eigenstates, evaluated as written.
///
/// That postselection, `(|+x⟩ + |−x⟩)/√2`, is `|↑⟩`, for which [`invert_beta`]
/// reports an insensitive postselection; the two routes do not agree and this
/// one is kept only for comparison.
pub fn invert_beta_symmetric_x(s_w: &WeakValue, p: &SpinParams) -> Result<f64> {
    let den = p.omega_r + 3.0 * p.omega_z;
    if den == 0.0 {
        return Err(ThermoError::SymmetricDenominator);
    }
    Ok(2.0 * (1.0 - 2.0 * s_w.value.re) / den)
}
