//! Spin Hamiltonian, thermal state, and postselection states.
//!
//! Basis ordering is `{|↑⟩, |↓⟩}`; units have ħ = k_B = 1, so frequencies are
//! energies and β is measured in seconds.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Result, ThermoError};
use crate::linalg::{CMatrix, ONE, ZERO};

/// Largest admissible `β‖H‖` for the Gibbs exponent.
pub const GIBBS_EXPONENT_LIMIT: f64 = 700.0;

/// `S_z = σ_z / 2`
pub fn spin_z() -> CMatrix {
    CMatrix::from_real_diag(&[0.5, -0.5])
}

/// `S_x = σ_x / 2`
pub fn spin_x() -> CMatrix {
    let h = C64::new(0.5, 0.0);
    CMatrix::from_rows(&[&[ZERO, h], &[h, ZERO]])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinParams {
    pub omega_z: f64,
    pub omega_r: f64,
}

impl SpinParams {
    pub fn new(omega_z: f64, omega_r: f64) -> Result<Self> {
        if !(omega_z.is_finite() && omega_r.is_finite()) {
            return Err(ThermoError::NonFinite("spin frequencies"));
        }
        Ok(Self { omega_z, omega_r })
    }

    /// Largest eigenvalue magnitude of `H_s`, i.e. `√(ω_z² + ω_R²)/2`.
    pub fn energy_scale(&self) -> f64 {
        0.5 * self.omega_z.hypot(self.omega_r)
    }
}

/// Inverse temperature β = 1/T (k_B = 1).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct InverseTemperature(f64);

impl InverseTemperature {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(ThermoError::NonFinite("inverse temperature"));
        }
        if beta < 0.0 {
            return Err(ThermoError::InvalidParameter(format!("inverse temperature must be non-negative, got {beta}")));
        }
        Ok(Self(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `β·max(|ω_z|, |ω_R|) ≤ threshold`
    pub fn is_high_temperature(self, p: &SpinParams, threshold: f64) -> bool {
        self.0 * p.omega_z.abs().max(p.omega_r.abs()) <= threshold
    }

    /// `T = 1/β`; `None` at infinite temperature.
    pub fn temperature(self) -> Option<f64> {
        (self.0 > 0.0).then(|| 1.0 / self.0)
    }
}

/// Bloch angles of the postselection state `cos(θ/2)|↑⟩ + e^{iφ} sin(θ/2)|↓⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PostselectionAngles {
    pub theta: f64,
    pub phi: f64,
}

impl PostselectionAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(ThermoError::InvalidParameter(format!("theta must lie in [0, pi], got {theta}")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(ThermoError::InvalidParameter(format!("phi must lie in [0, 2pi), got {phi}")));
        }
        Ok(Self { theta, phi })
    }
}

/// Normalized two-component spin vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinState([C64; 2]);

impl SpinState {
    pub fn new(up: C64, down: C64) -> Result<Self> {
        let n = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(ThermoError::InvalidParameter("spin state must have finite nonzero norm".into()));
        }
        Ok(Self([up / n, down / n]))
    }

    pub fn up() -> Self {
        Self([ONE, ZERO])
    }

    pub fn down() -> Self {
        Self([ZERO, ONE])
    }

    pub fn amplitudes(&self) -> &[C64; 2] {
        &self.0
    }

    pub fn with_global_phase(&self, chi: f64) -> Self {
        let ph = C64::from_polar(1.0, chi);
        Self([self.0[0] * ph, self.0[1] * ph])
    }
}

/// Thermal spin density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinDensity(CMatrix);

impl SpinDensity {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Pure-state density `|ψ⟩⟨ψ|`.
    pub fn pure(state: &SpinState) -> Self {
        Self(CMatrix::outer(state.amplitudes(), state.amplitudes()))
    }

    /// `⟨ψ|ρ|ψ⟩`
    pub fn postselection_probability(&self, psi: &SpinState) -> f64 {
        crate::linalg::matrix_element(psi.amplitudes(), &self.0, psi.amplitudes()).re
    }
}

/// `H_s = ω_z S_z + ω_R S_x`
pub fn build_spin_hamiltonian(p: &SpinParams) -> CMatrix {
    &spin_z().scale(C64::new(p.omega_z, 0.0)) + &spin_x().scale(C64::new(p.omega_r, 0.0))
}

/// Unnormalized Gibbs weight `e^{−β(H − λ_min)}` for any real β, with its trace.
pub(crate) fn shifted_gibbs_weight(h: &CMatrix, beta: f64) -> Result<(CMatrix, f64)> {
    let (vals, vecs) = h.eigh()?;
    let spread = vals.last().copied().unwrap_or(0.0) - vals.first().copied().unwrap_or(0.0);
    if beta.abs() * spread > 2.0 * GIBBS_EXPONENT_LIMIT {
        return Err(ThermoError::GibbsOverflow(beta.abs() * spread / 2.0));
    }
    // shift so the largest Boltzmann factor is exactly 1
    let anchor = if beta >= 0.0 { vals[0] } else { vals[vals.len() - 1] };
    let weights: Vec<f64> = vals.iter().map(|&l| (-beta * (l - anchor)).exp()).collect();
    let n = vals.len();
    let w = CMatrix::from_fn(n, n, |r, c| (0..n).map(|k| vecs[(r, k)] * weights[k] * vecs[(c, k)].conj()).sum());
    Ok((w, weights.iter().sum()))
}

/// `ρ_s = e^{−βH}/Tr e^{−βH}`
pub fn gibbs_state(h: &CMatrix, beta: InverseTemperature) -> Result<SpinDensity> {
    if !h.is_square() || h.rows() != 2 {
        return Err(ThermoError::DimensionMismatch { expected: 2, found: h.rows() });
    }
    let (vals, _) = h.eigh()?;
    let op_norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let b = beta.value();
    if b * op_norm > GIBBS_EXPONENT_LIMIT {
        return Err(ThermoError::GibbsOverflow(b * op_norm));
    }
    if b == 0.0 {
        return Ok(SpinDensity(CMatrix::identity(2).scale(C64::new(0.5, 0.0))));
    }
    let (w, z) = shifted_gibbs_weight(h, b)?;
    Ok(SpinDensity(w.scale(C64::new(1.0 / z, 0.0))))
}

/// `cos(θ/2)|↑⟩ + e^{iφ} sin(θ/2)|↓⟩`; the poles θ ∈ {0, π} give exact basis states.
pub fn postselect_state(a: &PostselectionAngles) -> SpinState {
    let (c, s) = if a.theta == 0.0 {
        (1.0, 0.0)
    } else if a.theta == PI {
        (0.0, 1.0)
    } else {
        ((a.theta / 2.0).cos(), (a.theta / 2.0).sin())
    };
    SpinState([C64::new(c, 0.0), C64::from_polar(s, a.phi)])
}
