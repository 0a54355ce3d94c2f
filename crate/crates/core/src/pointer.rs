//! Joint spin ⊗ cantilever dynamics, postselection, and pointer readouts.
//!
//! The joint Hilbert space is ordered spin ⊗ oscillator: index `(s, n)` maps
//! to `s * D + n`. Position is `z = σX` with `X = a + a†`, so with
//! `g₀ = g t σ` the impulsive interaction `exp(+i g t S_z ⊗ z)` depends on
//! `g₀` alone.

use num_complex::Complex64 as C64;

use crate::error::{Result, ThermoError};
use crate::linalg::{
    fock_operators, hermitian_exp, inner, matrix_element, norm_sqr, tensor, CMatrix, FockSpace, I, ONE, ZERO,
};
use crate::spin::{build_spin_hamiltonian, spin_z, SpinDensity, SpinParams, SpinState};
use crate::weak::{WeakValue, WeakValueKind, MIN_POSTSELECTION_PROBABILITY};

/// Maximum population tolerated in the two highest Fock levels.
pub const LEAKAGE_TOL: f64 = 1e-8;

/// Relative convergence threshold of the κ² fixed point.
pub const RECONSTRUCT_TOL: f64 = 1e-12;
pub const RECONSTRUCT_MAX_ITER: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingParams {
    /// Dimensionless strength `g₀ = g t σ`.
    pub g0: f64,
    /// Interaction time (s); only matters when free evolution is on.
    pub t: f64,
    /// Cantilever angular frequency (rad/s), used with free evolution.
    pub omega_c: f64,
    /// Keep `ω_c a†a` and `H_s` during the interaction window.
    pub include_free_evolution: bool,
}

impl CouplingParams {
    /// Impulsive coupling: interaction term only.
    pub fn impulsive(g0: f64) -> Result<Self> {
        Self::new(g0, 1.0, 0.0, false)
    }

    pub fn new(g0: f64, t: f64, omega_c: f64, include_free_evolution: bool) -> Result<Self> {
        if !(g0 >= 0.0 && g0.is_finite()) {
            return Err(ThermoError::InvalidParameter(format!("g0 must be finite and non-negative, got {g0}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(ThermoError::InvalidParameter(format!("interaction time must be positive, got {t}")));
        }
        if !omega_c.is_finite() {
            return Err(ThermoError::NonFinite("cantilever frequency"));
        }
        Ok(Self { g0, t, omega_c, include_free_evolution })
    }

    /// Dimensional coupling rate `g = g₀/(t σ)`.
    pub fn rate(&self, sigma: f64) -> f64 {
        self.g0 / (self.t * sigma)
    }

    pub fn is_weak(&self, s_w: &WeakValue, threshold: f64) -> bool {
        self.g0 * s_w.value.norm() <= threshold
    }
}

/// Pure cantilever state in the truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PointerState {
    coeffs: Vec<C64>,
    sigma: f64,
}

impl PointerState {
    /// Normalizes `coeffs`.
    pub fn new(coeffs: Vec<C64>, sigma: f64) -> Result<Self> {
        let n = norm_sqr(&coeffs).sqrt();
        if coeffs.len() < 2 {
            return Err(ThermoError::InvalidParameter("pointer state needs at least two Fock levels".into()));
        }
        if !(n > 0.0 && n.is_finite()) {
            return Err(ThermoError::InvalidParameter("pointer state must have finite nonzero norm".into()));
        }
        Ok(Self { coeffs: coeffs.into_iter().map(|c| c / n).collect(), sigma })
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn space(&self) -> FockSpace {
        FockSpace::new(self.coeffs.len(), self.sigma).expect("pointer states hold a valid Fock space")
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &PointerState) -> f64 {
        inner(&self.coeffs, &other.coeffs).norm_sqr()
    }

    pub fn density(&self) -> CMatrix {
        CMatrix::outer(&self.coeffs, &self.coeffs)
    }
}

/// State of spin ⊗ cantilever after (or before) the interaction.
#[derive(Clone, Debug, PartialEq)]
pub enum JointState {
    Pure { vector: Vec<C64>, fock_dim: usize },
    Mixed { density: CMatrix, fock_dim: usize },
}

impl JointState {
    pub fn fock_dim(&self) -> usize {
        match self {
            JointState::Pure { fock_dim, .. } | JointState::Mixed { fock_dim, .. } => *fock_dim,
        }
    }

    pub fn density(&self) -> CMatrix {
        match self {
            JointState::Pure { vector, .. } => CMatrix::outer(vector, vector),
            JointState::Mixed { density, .. } => density.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            JointState::Pure { vector, .. } => norm_sqr(vector),
            JointState::Mixed { density, .. } => density.trace().re,
        }
    }

    /// Population in Fock level `n`, summed over the spin.
    pub fn fock_population(&self, n: usize) -> f64 {
        let d = self.fock_dim();
        match self {
            JointState::Pure { vector, .. } => (0..2).map(|s| vector[s * d + n].norm_sqr()).sum(),
            JointState::Mixed { density, .. } => (0..2).map(|s| density[(s * d + n, s * d + n)].re).sum(),
        }
    }
}

/// Fock vacuum, whose position wavefunction is the Gaussian of width σ.
pub fn gaussian_ground_state(space: &FockSpace) -> PointerState {
    let mut coeffs = vec![ZERO; space.dim()];
    coeffs[0] = ONE;
    PointerState { coeffs, sigma: space.sigma() }
}

/// `−i t H` as a Hermitian generator `G` with `U = e^{−iG}`.
fn generator(space: &FockSpace, c: &CouplingParams, spin: Option<&SpinParams>) -> CMatrix {
    let x = space.quadrature_x();
    let mut g = tensor(&spin_z(), &x).scale(C64::new(-c.g0, 0.0));
    if c.include_free_evolution {
        let free_pointer = tensor(&CMatrix::identity(2), &space.number()).scale(C64::new(c.omega_c * c.t, 0.0));
        g = &g + &free_pointer;
        if let Some(p) = spin {
            let hs = tensor(&build_spin_hamiltonian(p), &CMatrix::identity(space.dim()));
            g = &g + &hs.scale(C64::new(c.t, 0.0));
        }
    }
    g
}

fn initial_density(rho_s: &SpinDensity, pointer: &PointerState) -> CMatrix {
    tensor(rho_s.matrix(), &pointer.density())
}

/// Exact joint evolution `U ρ(0) U†` with `U = exp(+i g₀ S_z ⊗ X)` in the
/// impulsive case.
pub fn evolve_exact(rho_s: &SpinDensity, pointer: &PointerState, c: &CouplingParams) -> Result<JointState> {
    evolve_exact_with(rho_s, pointer, c, None)
}

/// As [`evolve_exact`]; with free evolution enabled, `spin` adds `H_s` to the
/// generator.
pub fn evolve_exact_with(
    rho_s: &SpinDensity,
    pointer: &PointerState,
    c: &CouplingParams,
    spin: Option<&SpinParams>,
) -> Result<JointState> {
    let space = pointer.space();
    let u = hermitian_exp(&generator(&space, c, spin), -I)?;
    let rho0 = initial_density(rho_s, pointer);
    let density = &(&u * &rho0) * &u.adjoint();
    let joint = JointState::Mixed { density, fock_dim: space.dim() };
    let d = space.dim();
    let leakage = joint.fock_population(d - 1) + joint.fock_population(d - 2);
    if leakage > LEAKAGE_TOL {
        return Err(ThermoError::TruncationInsufficient { leakage });
    }
    Ok(joint)
}

/// First-order expansion `ρ(0) + i g₀ [S_z ⊗ X, ρ(0)]`. Not positive in general.
pub fn first_order_state(rho_s: &SpinDensity, pointer: &PointerState, c: &CouplingParams) -> JointState {
    let space = pointer.space();
    let coupling = tensor(&spin_z(), &space.quadrature_x());
    let rho0 = initial_density(rho_s, pointer);
    let density = &rho0 + &coupling.commutator(&rho0).scale(C64::new(0.0, c.g0));
    JointState::Mixed { density, fock_dim: space.dim() }
}

/// Pointer state left after projecting the spin onto `|ψ_f⟩`.
#[derive(Clone, Debug)]
pub struct PostselectedPointer {
    /// Normalized pointer density.
    pub density: CMatrix,
    /// Trace before normalization, i.e. the postselection probability.
    pub prob: f64,
    pub sigma: f64,
}

impl PostselectedPointer {
    pub fn purity(&self) -> f64 {
        (&self.density * &self.density).trace().re
    }

    /// `⟨φ|ρ|φ⟩`, the fidelity against a pure reference state.
    pub fn fidelity(&self, reference: &PointerState) -> f64 {
        matrix_element(reference.coeffs(), &self.density, reference.coeffs()).re
    }

    /// Leading eigenvector, phased so the vacuum amplitude is real and non-negative.
    pub fn dominant_state(&self) -> Result<PointerState> {
        let (_, vecs) = self.density.eigh()?;
        let d = self.density.rows();
        let mut v: Vec<C64> = (0..d).map(|r| vecs[(r, d - 1)]).collect();
        let a0 = v[0];
        if a0.norm() > 0.0 {
            let ph = a0.conj() / a0.norm();
            v.iter_mut().for_each(|x| *x *= ph);
        }
        PointerState::new(v, self.sigma)
    }

    /// `(⟨z⟩, ⟨p⟩)` as traces against the truncated operators.
    pub fn readouts(&self) -> (f64, f64) {
        let space = FockSpace::new(self.density.rows(), self.sigma).expect("valid pointer space");
        let ops = fock_operators(&space);
        ((&self.density * &ops.z).trace().re, (&self.density * &ops.p).trace().re)
    }
}

/// `⟨ψ_f|ρ(t)|ψ_f⟩` on the pointer, normalized.
pub fn postselect_pointer(joint: &JointState, psi_f: &SpinState, sigma: f64) -> Result<PostselectedPointer> {
    let d = joint.fock_dim();
    let psi = psi_f.amplitudes();
    let density = match joint {
        JointState::Pure { vector, .. } => {
            let phi: Vec<C64> = (0..d).map(|n| (0..2).map(|s| psi[s].conj() * vector[s * d + n]).sum()).collect();
            CMatrix::outer(&phi, &phi)
        }
        JointState::Mixed { density, .. } => CMatrix::from_fn(d, d, |m, n| {
            let mut acc = ZERO;
            for i in 0..2 {
                for j in 0..2 {
                    acc += psi[i].conj() * density[(i * d + m, j * d + n)] * psi[j];
                }
            }
            acc
        }),
    };
    let prob = density.trace().re;
    if !(prob > MIN_POSTSELECTION_PROBABILITY) {
        return Err(ThermoError::OrthogonalPostselection(prob));
    }
    Ok(PostselectedPointer { density: density.scale(C64::new(1.0 / prob, 0.0)), prob, sigma })
}

/// Weak-limit pointer state `κ[|0⟩ + i g₀ S_w |1⟩]`, `κ = (1 + g₀²|S_w|²)^{−1/2}`.
pub fn weak_final_state(s_w: &WeakValue, c: &CouplingParams, space: &FockSpace) -> PointerState {
    let amp = I * c.g0 * s_w.value;
    let kappa = 1.0 / (1.0 + amp.norm_sqr()).sqrt();
    let mut coeffs = vec![ZERO; space.dim()];
    coeffs[0] = C64::new(kappa, 0.0);
    coeffs[1] = amp * kappa;
    PointerState { coeffs, sigma: space.sigma() }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Readouts {
    /// `⟨z⟩` in length units.
    pub z_mean: f64,
    /// `⟨p⟩` in inverse length units.
    pub p_mean: f64,
    /// Closed-form values, present when the state has the weak-limit form.
    pub closed_form: Option<(f64, f64)>,
}

/// `⟨z⟩ = −2σ g₀ κ² Im S_w`, `⟨p⟩ = κ² g₀ Re S_w / σ`.
pub fn closed_form_readouts(s_w: C64, g0: f64, sigma: f64) -> (f64, f64) {
    let kappa2 = 1.0 / (1.0 + g0 * g0 * s_w.norm_sqr());
    (-2.0 * sigma * g0 * kappa2 * s_w.im, kappa2 * g0 * s_w.re / sigma)
}

pub fn pointer_readouts(state: &PointerState, c: &CouplingParams) -> Readouts {
    let ops = fock_operators(&state.space());
    let z_mean = matrix_element(state.coeffs(), &ops.z, state.coeffs()).re;
    let p_mean = matrix_element(state.coeffs(), &ops.p, state.coeffs()).re;
    Readouts {
        z_mean,
        p_mean,
        closed_form: weak_form_value(state, c).map(|sw| closed_form_readouts(sw, c.g0, state.sigma)),
    }
}

/// Recovers `S_w` from a state of the form `κ[|0⟩ + i g₀ S_w |1⟩]`.
fn weak_form_value(state: &PointerState, c: &CouplingParams) -> Option<C64> {
    let k = state.coeffs();
    let two_level = k[2..].iter().all(|x| *x == ZERO);
    if !two_level || k[0].im != 0.0 || !(k[0].re > 0.0) {
        return None;
    }
    if c.g0 == 0.0 {
        return (k[1] == ZERO).then_some(ZERO);
    }
    Some(k[1] / (k[0] * I * c.g0))
}

/// Inverts the closed-form readouts for `S_w`, iterating on `κ²`.
pub fn reconstruct_weak_value(z_mean: f64, p_mean: f64, c: &CouplingParams, sigma: f64) -> Result<WeakValue> {
    if !(c.g0 > 0.0) {
        return Err(ThermoError::InvalidParameter("reconstruction needs g0 > 0".into()));
    }
    let base = C64::new(p_mean * sigma / c.g0, -z_mean / (2.0 * sigma * c.g0));
    let mut s_w = base;
    for _ in 0..RECONSTRUCT_MAX_ITER {
        let next = base * (1.0 + c.g0 * c.g0 * s_w.norm_sqr());
        if !(next.re.is_finite() && next.im.is_finite()) {
            break;
        }
        let change = (next - s_w).norm();
        s_w = next;
        if change <= RECONSTRUCT_TOL * s_w.norm() {
            return Ok(WeakValue::new(s_w, WeakValueKind::Reconstructed));
        }
    }
    Err(ThermoError::NoConvergence(RECONSTRUCT_MAX_ITER))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{build_spin_hamiltonian, gibbs_state, postselect_state, InverseTemperature, PostselectionAngles};
    use crate::weak::weak_value_exact;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const SIGMA: f64 = 0.35;

    fn space(d: usize) -> FockSpace {
        FockSpace::new(d, SIGMA).unwrap()
    }

    fn thermal(b: f64) -> (SpinParams, SpinDensity) {
        let p = SpinParams::new(0.9, 1.6).unwrap();
        let rho = gibbs_state(&build_spin_hamiltonian(&p), InverseTemperature::new(b).unwrap()).unwrap();
        (p, rho)
    }

    fn sw(v: C64) -> WeakValue {
        WeakValue::new(v, WeakValueKind::Exact)
    }

    #[test]
    fn vacuum_pointer() {
        let s = space(8);
        let vac = gaussian_ground_state(&s);
        assert_eq!(vac.coeffs()[0], ONE);
        assert!(vac.coeffs()[1..].iter().all(|c| *c == ZERO));
        let ops = fock_operators(&s);
        assert_eq!(matrix_element(vac.coeffs(), &ops.z, vac.coeffs()), ZERO);
        let z2 = &ops.z * &ops.z;
        assert!((matrix_element(vac.coeffs(), &z2, vac.coeffs()).re - SIGMA * SIGMA).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_leaves_state_unchanged() {
        let (_, rho) = thermal(0.2);
        let vac = gaussian_ground_state(&space(6));
        let c = CouplingParams::impulsive(0.0).unwrap();
        let out = evolve_exact(&rho, &vac, &c).unwrap();
        assert!(out.density().max_abs_diff(&initial_density(&rho, &vac)) < 1e-15);
        let fo = first_order_state(&rho, &vac, &c);
        assert_eq!(fo.density(), initial_density(&rho, &vac));
    }

    #[test]
    fn spin_up_gives_displaced_vacuum() {
        // exp(i g₀/2 · X)|0⟩ is a coherent state with α = i g₀/2:
        // ⟨X⟩ = 0, ⟨P⟩ = g₀, Poissonian occupation with mean g₀²/4.
        let g0 = 1.0;
        let s = space(32);
        let rho = SpinDensity::pure(&SpinState::up());
        let out = evolve_exact(&rho, &gaussian_ground_state(&s), &CouplingParams::impulsive(g0).unwrap()).unwrap();
        let ptr = postselect_pointer(&out, &SpinState::up(), SIGMA).unwrap();
        let (z, p) = ptr.readouts();
        assert!(z.abs() < 1e-14);
        assert!((p - g0 / (2.0 * SIGMA)).abs() < 1e-13);
        let mean_n = 0.25 * g0 * g0;
        for n in 0..6 {
            let poisson = (-mean_n).exp() * mean_n.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
            assert!((out.fock_population(n) - poisson).abs() < 1e-13);
        }
    }

    #[test]
    fn evolution_is_unitary() {
        let (_, rho) = thermal(0.4);
        let vac = gaussian_ground_state(&space(24));
        let out = evolve_exact(&rho, &vac, &CouplingParams::impulsive(0.3).unwrap()).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-12);
        let (before, _) = initial_density(&rho, &vac).eigh().unwrap();
        let (after, _) = out.density().eigh().unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn free_evolution_is_unitary_too() {
        let (p, rho) = thermal(0.4);
        let vac = gaussian_ground_state(&space(24));
        let c = CouplingParams::new(0.1, 0.5, 2.0, true).unwrap();
        let out = evolve_exact_with(&rho, &vac, &c, Some(&p)).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-12);
        assert!(out.density().is_hermitian());
    }

    #[test]
    fn leakage_is_detected() {
        let rho = SpinDensity::pure(&SpinState::up());
        let c = CouplingParams::impulsive(4.0).unwrap();
        let res = evolve_exact(&rho, &gaussian_ground_state(&space(6)), &c);
        assert!(matches!(res, Err(ThermoError::TruncationInsufficient { .. })));
    }

    #[test]
    fn first_order_state_properties() {
        let (_, rho) = thermal(0.3);
        let vac = gaussian_ground_state(&space(16));
        let dist = |g0: f64| {
            let c = CouplingParams::impulsive(g0).unwrap();
            let fo = first_order_state(&rho, &vac, &c);
            assert!((fo.trace() - 1.0).abs() < 1e-15);
            fo.density().max_abs_diff(&evolve_exact(&rho, &vac, &c).unwrap().density())
        };
        let (d1, d2) = (dist(1e-2), dist(5e-3));
        assert!(d1 <= 0.5 * 1e-4, "{d1}");
        assert!((3.5..=4.5).contains(&(d1 / d2)), "{}", d1 / d2);
    }

    #[test]
    fn postselection_without_coupling() {
        let (_, rho) = thermal(0.3);
        let psi = postselect_state(&PostselectionAngles::new(1.0, 0.5).unwrap());
        let vac = gaussian_ground_state(&space(8));
        let out = evolve_exact(&rho, &vac, &CouplingParams::impulsive(0.0).unwrap()).unwrap();
        let ptr = postselect_pointer(&out, &psi, SIGMA).unwrap();
        assert!((ptr.prob - rho.postselection_probability(&psi)).abs() < 1e-15);
        assert!(ptr.fidelity(&vac) > 1.0 - 1e-15);
    }

    #[test]
    fn postselection_at_infinite_temperature() {
        let (_, rho) = thermal(0.0);
        let psi = postselect_state(&PostselectionAngles::new(PI / 2.0, 0.0).unwrap());
        let out =
            evolve_exact(&rho, &gaussian_ground_state(&space(16)), &CouplingParams::impulsive(0.05).unwrap()).unwrap();
        let ptr = postselect_pointer(&out, &psi, SIGMA).unwrap();
        assert!((ptr.prob - 0.5).abs() < 1e-14);
    }

    #[test]
    fn postselection_of_pure_joint_state() {
        let d = 4;
        let mut v = vec![ZERO; 2 * d];
        v[0] = ONE; // |↑,0⟩
        let joint = JointState::Pure { vector: v, fock_dim: d };
        let ptr = postselect_pointer(&joint, &SpinState::up(), SIGMA).unwrap();
        assert_eq!(ptr.prob, 1.0);
        assert!(matches!(
            postselect_pointer(&joint, &SpinState::down(), SIGMA),
            Err(ThermoError::OrthogonalPostselection(_))
        ));
    }

    #[test]
    fn weak_state_tracks_exact_postselection() {
        let (_, rho) = thermal(0.05);
        let psi = postselect_state(&PostselectionAngles::new(PI / 3.0, 1.0).unwrap());
        let s = space(32);
        let w = weak_value_exact(&rho, &psi).unwrap();
        for g0 in [1e-3, 1e-2] {
            let c = CouplingParams::impulsive(g0).unwrap();
            let out = evolve_exact(&rho, &gaussian_ground_state(&s), &c).unwrap();
            let ptr = postselect_pointer(&out, &psi, SIGMA).unwrap();
            assert!(ptr.purity() > 1.0 - 10.0 * g0 * g0);
            let weak = weak_final_state(&w, &c, &s);
            assert!(1.0 - ptr.fidelity(&weak) <= 10.0 * g0 * g0);
            assert!(1.0 - ptr.dominant_state().unwrap().fidelity(&weak) <= 10.0 * g0 * g0);
        }
    }

    #[test]
    fn weak_final_state_examples() {
        let s = space(6);
        let c = CouplingParams::impulsive(0.1).unwrap();
        let vac = weak_final_state(&sw(ZERO), &c, &s);
        assert_eq!(vac, gaussian_ground_state(&s));
        let st = weak_final_state(&sw(C64::new(0.5, 0.0)), &c, &s);
        let kappa = 1.0 / 1.0025f64.sqrt();
        assert!((st.coeffs()[0] - C64::new(kappa, 0.0)).norm() < 1e-16);
        assert!((st.coeffs()[1] - C64::new(0.0, 0.05 * kappa)).norm() < 1e-16);
        assert!(st.coeffs()[2..].iter().all(|x| *x == ZERO));
    }

    #[test]
    fn readout_examples() {
        let s = space(4);
        let c = CouplingParams::impulsive(0.1).unwrap();
        let r = pointer_readouts(&weak_final_state(&sw(C64::new(0.7, 0.0)), &c, &s), &c);
        assert!(r.z_mean.abs() < 1e-18);
        let r = pointer_readouts(&weak_final_state(&sw(C64::new(0.0, 0.7)), &c, &s), &c);
        assert!(r.p_mean.abs() < 1e-18);
        let r = pointer_readouts(&weak_final_state(&sw(C64::new(0.5, 0.0)), &c, &s), &c);
        let want = 0.05 / 1.0025 / SIGMA;
        assert!((r.p_mean - want).abs() < 1e-15);
        assert!((r.closed_form.unwrap().1 - want).abs() < 1e-15);
    }

    #[test]
    fn positive_imaginary_weak_value_pulls_pointer_down() {
        let c = CouplingParams::impulsive(0.05).unwrap();
        let r = pointer_readouts(&weak_final_state(&sw(C64::new(0.0, 0.8)), &c, &space(4)), &c);
        assert!(r.z_mean < 0.0);
        assert!(r.closed_form.unwrap().0 < 0.0);
    }

    #[test]
    fn generic_states_have_no_closed_form() {
        let c = CouplingParams::impulsive(0.1).unwrap();
        let st = PointerState::new(vec![ONE, ZERO, ONE], SIGMA).unwrap();
        assert_eq!(pointer_readouts(&st, &c).closed_form, None);
    }

    #[test]
    fn reconstruction_examples() {
        let c = CouplingParams::impulsive(0.1).unwrap();
        let zero = reconstruct_weak_value(0.0, 0.0, &c, SIGMA).unwrap();
        assert_eq!(zero.value, ZERO);
        let truth = C64::new(0.8, -1.3);
        let (z, p) = closed_form_readouts(truth, c.g0, SIGMA);
        let noisy = reconstruct_weak_value(z * 1.01, p * 0.99, &c, SIGMA).unwrap();
        assert!((noisy.value.re - truth.re).abs() <= 0.012 * truth.re.abs());
        assert!((noisy.value.im - truth.im).abs() <= 0.012 * truth.im.abs());
        assert!(reconstruct_weak_value(0.0, 0.0, &CouplingParams::impulsive(0.0).unwrap(), SIGMA).is_err());
    }

    #[test]
    fn reconstruction_fails_outside_weak_regime() {
        // g₀|S| large enough that κ²-corrected readouts have no preimage
        let c = CouplingParams::impulsive(1.0).unwrap();
        assert_eq!(reconstruct_weak_value(0.0, 0.9 / SIGMA, &c, SIGMA), Err(ThermoError::NoConvergence(100)));
    }

    proptest! {
        #[test]
        fn weak_state_is_normalized(re in -50.0f64..50.0, im in -50.0f64..50.0, g0 in 0.0f64..1.0) {
            let st = weak_final_state(&sw(C64::new(re, im)), &CouplingParams::impulsive(g0).unwrap(), &space(3));
            prop_assert!((norm_sqr(st.coeffs()) - 1.0).abs() <= 1e-15);
        }

        #[test]
        fn readouts_roundtrip(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let c = CouplingParams::impulsive(0.1).unwrap();
            let st = weak_final_state(&sw(C64::new(re, im)), &c, &space(5));
            let r = pointer_readouts(&st, &c);
            let back = reconstruct_weak_value(r.z_mean, r.p_mean, &c, SIGMA).unwrap();
            prop_assert!((back.value - C64::new(re, im)).norm() <= 1e-10 * C64::new(re, im).norm().max(1e-3));
        }
    }
}
