//! Quantum Fisher information of the postselected pointer with respect to β,
//! the Cramér–Rao bound, and a Monte-Carlo rehearsal of the full estimator.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, ThermoError};
use crate::linalg::{matrix_element, CMatrix, FockSpace, I};
use crate::pointer::{reconstruct_weak_value, weak_final_state, CouplingParams};
use crate::sampling::{derive_seed, sample_momentum, sample_position};
use crate::spin::{
    build_spin_hamiltonian, gibbs_state, postselect_state, spin_z, InverseTemperature, PostselectionAngles, SpinParams,
    SpinState,
};
use crate::weak::{
    inversion_coefficients, invert_beta, weak_value_at, weak_value_exact, WeakValue, WeakValueKind,
    MIN_POSTSELECTION_PROBABILITY,
};

/// Smallest β used to set the finite-difference step.
pub const BETA_FLOOR: f64 = 1e-12;

/// Default relative step of the finite-difference QFI.
pub const DEFAULT_REL_STEP: f64 = 1e-3;

/// Cancellation ratio below which the overlap deficit carries too few digits.
const MIN_RESOLUTION: f64 = 1e-10;

/// Smallest sample count accepted by [`simulate_experiment`].
pub const MIN_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QfiMethod {
    Analytic,
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QfiResult {
    pub fisher: f64,
    pub method: QfiMethod,
    pub beta: f64,
    pub angles: PostselectionAngles,
}

/// `dS_w/dβ` of the exact weak value, by the quotient rule with
/// `∂_β e^{−βH} = −H e^{−βH}`.
pub fn dsw_dbeta(h: &CMatrix, psi_f: &SpinState, beta: InverseTemperature) -> Result<C64> {
    let rho = gibbs_state(h, beta)?;
    let psi = psi_f.amplitudes();
    let sz = spin_z();
    let den = matrix_element(psi, rho.matrix(), psi);
    if !(den.re > MIN_POSTSELECTION_PROBABILITY) {
        return Err(ThermoError::OrthogonalPostselection(den.re));
    }
    let h_rho = h * rho.matrix();
    let num = matrix_element(psi, &(&sz * rho.matrix()), psi);
    let d_num = -matrix_element(psi, &(&sz * &h_rho), psi);
    let d_den = -matrix_element(psi, &h_rho, psi);
    Ok((d_num * den - num * d_den) / (den * den))
}

/// Fubini–Study QFI of `κ[|0⟩ + c|1⟩]` with `c = i g₀ S_w(β)`:
/// `F = 4|c′|²/(1 + |c|²)²`.
pub fn qfi_for_state(beta: InverseTemperature, psi_f: &SpinState, c: &CouplingParams, p: &SpinParams) -> Result<f64> {
    let h = build_spin_hamiltonian(p);
    let s_w = weak_value_exact(&gibbs_state(&h, beta)?, psi_f)?.value;
    let ds = dsw_dbeta(&h, psi_f, beta)?;
    let amp = I * c.g0 * s_w;
    let d_amp = I * c.g0 * ds;
    let norm = 1.0 + amp.norm_sqr();
    Ok(4.0 * d_amp.norm_sqr() / (norm * norm))
}

pub fn qfi_analytic(
    beta: InverseTemperature,
    angles: &PostselectionAngles,
    c: &CouplingParams,
    p: &SpinParams,
) -> Result<QfiResult> {
    let fisher = qfi_for_state(beta, &postselect_state(angles), c, p)?;
    Ok(QfiResult { fisher, method: QfiMethod::Analytic, beta: beta.value(), angles: *angles })
}

/// `1 − |⟨a|b⟩|` for unit vectors without forming `1 − overlap`, plus the
/// fraction of digits that survive cancellation in the wedge products.
fn overlap_deficit(a: &[C64], b: &[C64]) -> (f64, f64) {
    // Lagrange identity: 1 − |⟨a|b⟩|² = Σ_{i<j} |a_i b_j − a_j b_i|²
    let mut wedge2 = 0.0;
    let mut scale2 = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let w = a[i] * b[j] - a[j] * b[i];
            wedge2 += w.norm_sqr();
            scale2 += ((a[i] * b[j]).norm() + (a[j] * b[i]).norm()).powi(2);
        }
    }
    let overlap = crate::linalg::inner(a, b).norm().min(1.0);
    let resolution = if scale2 > 0.0 { (wedge2 / scale2).sqrt() } else { 0.0 };
    (wedge2 / (1.0 + overlap), resolution)
}

/// Centered fidelity-susceptibility estimate `8(1 − |⟨φ(β−δ)|φ(β+δ)⟩|)/(2δ)²`.
fn centered_fidelity_qfi(
    h: &CMatrix,
    psi_f: &SpinState,
    c: &CouplingParams,
    beta: f64,
    delta: f64,
) -> Result<(f64, f64)> {
    let space = FockSpace::new(2, 1.0)?;
    let state = |b: f64| -> Result<Vec<C64>> {
        let s_w = WeakValue::new(weak_value_at(h, psi_f, b)?, WeakValueKind::Exact);
        Ok(weak_final_state(&s_w, c, &space).coeffs().to_vec())
    };
    let (lo, hi) = (state(beta - delta)?, state(beta + delta)?);
    let (deficit, resolution) = overlap_deficit(&lo, &hi);
    Ok((8.0 * deficit / (4.0 * delta * delta), resolution))
}

/// Finite-difference QFI from the fidelity between neighbouring pointer
/// states, with one Richardson step over `δ` and `δ/2`,
/// `δ = rel_step·max(β, 1e-12)`.
///
/// Independent of [`dsw_dbeta`]: only exact weak values are evaluated.
pub fn qfi_finite_difference(
    beta: InverseTemperature,
    angles: &PostselectionAngles,
    c: &CouplingParams,
    p: &SpinParams,
    rel_step: f64,
) -> Result<QfiResult> {
    if !(rel_step > 0.0 && rel_step < 1.0) {
        return Err(ThermoError::InvalidParameter(format!("relative step must lie in (0, 1), got {rel_step}")));
    }
    let h = build_spin_hamiltonian(p);
    let psi = postselect_state(angles);
    let b = beta.value();
    let mut delta = rel_step * b.max(BETA_FLOOR);
    for _ in 0..4 {
        let (coarse, res_coarse) = centered_fidelity_qfi(&h, &psi, c, b, delta)?;
        let (fine, res_fine) = centered_fidelity_qfi(&h, &psi, c, b, delta / 2.0)?;
        if coarse == 0.0 && fine == 0.0 {
            return Ok(QfiResult { fisher: 0.0, method: QfiMethod::FiniteDifference, beta: b, angles: *angles });
        }
        if res_coarse.min(res_fine) >= MIN_RESOLUTION {
            let fisher = ((4.0 * fine - coarse) / 3.0).max(0.0);
            return Ok(QfiResult { fisher, method: QfiMethod::FiniteDifference, beta: b, angles: *angles });
        }
        delta *= 8.0;
    }
    Err(ThermoError::InsufficientPrecision(format!(
        "overlap deficit unresolved at beta = {b:e} even with step {delta:e}"
    )))
}

/// Lower bound on `Var(β̂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VarianceBound {
    Finite(f64),
    /// `F = 0`: the measurement carries no information about β.
    NoInformation,
}

impl VarianceBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            VarianceBound::Finite(v) => Some(*v),
            VarianceBound::NoInformation => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrbResult {
    pub variance_bound: VarianceBound,
    pub n_measurements: u64,
}

/// `Var(β̂) ≥ 1/(N F)`.
pub fn cramer_rao(f: &QfiResult, n: u64) -> Result<CrbResult> {
    if n == 0 {
        return Err(ThermoError::InvalidParameter("number of measurements must be positive".into()));
    }
    let variance_bound =
        if f.fisher > 0.0 { VarianceBound::Finite(1.0 / (n as f64 * f.fisher)) } else { VarianceBound::NoInformation };
    Ok(CrbResult { variance_bound, n_measurements: n })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub beta_true: f64,
    pub angles: PostselectionAngles,
    pub coupling: CouplingParams,
    pub spin: SpinParams,
    pub sigma: f64,
    /// Samples per replicate, split evenly between position and momentum.
    pub n_samples: usize,
    pub n_replicates: usize,
    pub seed: u64,
}

/// One batch of samples and the estimate it produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Replicate {
    pub index: usize,
    pub z_mean: f64,
    pub p_mean: f64,
    pub weak_value: Option<C64>,
    pub beta_hat: Option<f64>,
    pub error: Option<ThermoError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    /// Position outcomes of the first replicate.
    pub samples_z: Vec<f64>,
    /// Momentum outcomes of the first replicate.
    pub samples_p: Vec<f64>,
    pub replicates: Vec<Replicate>,
    /// Mean of the successful replicate estimates.
    pub beta_estimate: f64,
    pub beta_true: f64,
    /// Unbiased variance of the replicate estimates.
    pub sample_variance: f64,
    /// Standard error of `sample_variance` (Gaussian approximation).
    pub variance_std_error: f64,
    pub fisher: f64,
    /// `1/(n_samples · F)` for a single replicate.
    pub crb: VarianceBound,
    pub seed: u64,
}

impl ExperimentRecord {
    pub fn successful(&self) -> impl Iterator<Item = f64> + '_ {
        self.replicates.iter().filter_map(|r| r.beta_hat)
    }

    /// `sample_variance / crb`, when the bound is finite.
    pub fn variance_ratio(&self) -> Option<f64> {
        self.crb.value().map(|b| self.sample_variance / b)
    }
}

/// End-to-end rehearsal: sample pointer outcomes from the weak-limit state
/// at `beta_true`, average them, reconstruct `S_w`, and invert for β.
pub fn simulate_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRecord> {
    if cfg.n_samples < MIN_SAMPLES {
        return Err(ThermoError::InvalidParameter(format!(
            "need at least {MIN_SAMPLES} samples per replicate, got {}",
            cfg.n_samples
        )));
    }
    if cfg.n_replicates < 2 {
        return Err(ThermoError::InvalidParameter("need at least two replicates for a variance".into()));
    }
    let beta = InverseTemperature::new(cfg.beta_true)?;
    let h = build_spin_hamiltonian(&cfg.spin);
    let psi = postselect_state(&cfg.angles);
    let coeffs = inversion_coefficients(&h, &psi);
    if coeffs.is_degenerate() {
        // surfaces the same error invert_beta would raise
        invert_beta(&WeakValue::new(C64::new(0.0, 0.0), WeakValueKind::Exact), &coeffs)?;
    }
    let s_w = weak_value_exact(&gibbs_state(&h, beta)?, &psi)?.value;
    let fisher = qfi_for_state(beta, &psi, &cfg.coupling, &cfg.spin)?;
    let g0 = cfg.coupling.g0;
    let n_z = cfg.n_samples / 2;
    let n_p = cfg.n_samples - n_z;

    let mut samples_z = Vec::new();
    let mut samples_p = Vec::new();
    let mut replicates = Vec::with_capacity(cfg.n_replicates);
    for index in 0..cfg.n_replicates {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, index as u64));
        let zs: Vec<f64> = (0..n_z).map(|_| sample_position(s_w, g0, cfg.sigma, &mut rng)).collect();
        let ps: Vec<f64> = (0..n_p).map(|_| sample_momentum(s_w, g0, cfg.sigma, &mut rng)).collect();
        let z_mean = zs.iter().sum::<f64>() / n_z as f64;
        let p_mean = ps.iter().sum::<f64>() / n_p as f64;
        let outcome = reconstruct_weak_value(z_mean, p_mean, &cfg.coupling, cfg.sigma)
            .and_then(|w| invert_beta(&w, &coeffs).map(|est| (w.value, est.beta)));
        replicates.push(match outcome {
            Ok((w, b)) => Replicate { index, z_mean, p_mean, weak_value: Some(w), beta_hat: Some(b), error: None },
            Err(e) => Replicate { index, z_mean, p_mean, weak_value: None, beta_hat: None, error: Some(e) },
        });
        if index == 0 {
            samples_z = zs;
            samples_p = ps;
        }
    }

    let estimates: Vec<f64> = replicates.iter().filter_map(|r| r.beta_hat).collect();
    let k = estimates.len();
    let (beta_estimate, sample_variance) = if k >= 2 {
        let mean = estimates.iter().sum::<f64>() / k as f64;
        let var = estimates.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        (mean, var)
    } else {
        (estimates.first().copied().unwrap_or(f64::NAN), f64::NAN)
    };
    let variance_std_error = if k >= 2 { sample_variance * (2.0 / (k - 1) as f64).sqrt() } else { f64::NAN };
    let crb = if fisher > 0.0 {
        VarianceBound::Finite(1.0 / (cfg.n_samples as f64 * fisher))
    } else {
        VarianceBound::NoInformation
    };

    Ok(ExperimentRecord {
        samples_z,
        samples_p,
        replicates,
        beta_estimate,
        beta_true: cfg.beta_true,
        sample_variance,
        variance_std_error,
        fisher,
        crb,
        seed: cfg.seed,
    })
}
