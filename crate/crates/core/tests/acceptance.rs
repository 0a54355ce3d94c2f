//! Acceptance criteria 1–9. Each test prints one `criterion N: PASS|FAIL` line.

use std::f64::consts::PI;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thermo_core::cli::{self, Command, KeyValues, RunConfig};
use thermo_core::linalg::{operator_norm, FockSpace};
use thermo_core::metrology::{
    qfi_analytic, qfi_finite_difference, simulate_experiment, ExperimentConfig, DEFAULT_REL_STEP,
};
use thermo_core::pointer::{
    closed_form_readouts, evolve_exact, gaussian_ground_state, pointer_readouts, postselect_pointer, weak_final_state,
    CouplingParams,
};
use thermo_core::spin::{
    build_spin_hamiltonian, gibbs_state, postselect_state, InverseTemperature, PostselectionAngles, SpinParams,
};
use thermo_core::weak::{inversion_coefficients, invert_beta, weak_value_exact, WeakValue, WeakValueKind};
use thermo_core::ThermoError;

const OMEGA_Z: f64 = 4.8e6;
const OMEGA_R: f64 = 3e9;
const PAPER_G0: f64 = 1e-8;

fn mrfm() -> SpinParams {
    SpinParams::new(OMEGA_Z, OMEGA_R).unwrap()
}

fn beta(b: f64) -> InverseTemperature {
    InverseTemperature::new(b).unwrap()
}

fn angles(theta: f64, phi: f64) -> PostselectionAngles {
    PostselectionAngles::new(theta, phi).unwrap()
}

fn report(n: u32, name: &str, ok: bool, detail: &str, elapsed: Duration, limit: Duration) {
    let ok = ok && elapsed <= limit;
    println!(
        "criterion {n}: {} {name} ({detail}; {:.3} s, limit {} s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn criterion_1_beta_roundtrip() {
    let start = Instant::now();
    let h = build_spin_hamiltonian(&mrfm());
    let psi = postselect_state(&angles(PI / 4.0, 0.0));
    let coeffs = inversion_coefficients(&h, &psi);
    let rel_error = |b: f64| {
        let s_w = weak_value_exact(&gibbs_state(&h, beta(b)).unwrap(), &psi).unwrap();
        rel(invert_beta(&s_w, &coeffs).unwrap().beta, b)
    };
    let mut ok = true;
    let mut detail = String::new();
    for b in [1e-12, 3e-12, 1e-11] {
        let (e, e_half) = (rel_error(b), rel_error(b / 2.0));
        let shrink = e / e_half;
        ok &= e <= 0.05 && shrink >= 1.8;
        detail.push_str(&format!("beta {b:e}: rel err {e:.3e}, halving shrinks {shrink:.3}x; "));
    }
    report(1, "beta roundtrip", ok, detail.trim_end_matches("; "), start.elapsed(), Duration::from_secs(1));
}

#[test]
fn criterion_2_closed_form_oracle() {
    let start = Instant::now();
    let p = SpinParams::new(1.0, 0.0).unwrap();
    let h = build_spin_hamiltonian(&p);
    let psi = postselect_state(&angles(PI / 2.0, 0.0));
    let mut worst: f64 = 0.0;
    for b in [1e-3, 1e-1, 1.0] {
        let s_w = weak_value_exact(&gibbs_state(&h, beta(b)).unwrap(), &psi).unwrap().value;
        let want = -(b * p.omega_z / 2.0).tanh() / 2.0;
        worst = worst.max(rel(s_w.re, want)).max(s_w.im.abs() / want.abs());
    }
    report(
        2,
        "tanh closed form",
        worst <= 1e-12,
        &format!("worst rel err {worst:.3e}"),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_3_weak_approximation_fidelity() {
    let start = Instant::now();
    let p = mrfm();
    let h = build_spin_hamiltonian(&p);
    let h_norm = operator_norm(&h);
    let mut ok = true;
    let mut worst_infidelity_ratio: f64 = 0.0;
    let mut worst_truncation: f64 = 0.0;
    for g0 in [1e-3, 1e-2] {
        let c = CouplingParams::impulsive(g0).unwrap();
        for b in [0.01 / h_norm, 0.1 / h_norm] {
            for (theta, phi) in [(PI / 4.0, 0.0), (PI / 3.0, PI / 3.0), (2.0, 4.0)] {
                let psi = postselect_state(&angles(theta, phi));
                let rho = gibbs_state(&h, beta(b)).unwrap();
                let s_w = weak_value_exact(&rho, &psi).unwrap();
                let readouts = |dim: usize| {
                    let space = FockSpace::new(dim, 1.0).unwrap();
                    let joint = evolve_exact(&rho, &gaussian_ground_state(&space), &c).unwrap();
                    let post = postselect_pointer(&joint, &psi, 1.0).unwrap();
                    let infidelity = 1.0 - post.fidelity(&weak_final_state(&s_w, &c, &space));
                    (infidelity, post.readouts())
                };
                let (infidelity, (z32, p32)) = readouts(32);
                let (_, (z64, p64)) = readouts(64);
                let ratio = infidelity / (g0 * g0);
                let scale = z32.hypot(p32);
                let truncation = (z64 - z32).hypot(p64 - p32) / scale;
                worst_infidelity_ratio = worst_infidelity_ratio.max(ratio);
                worst_truncation = worst_truncation.max(truncation);
                ok &= ratio <= 10.0 && truncation <= 1e-10;
            }
        }
    }
    report(
        3,
        "weak-limit pointer fidelity",
        ok,
        &format!(
            "max infidelity/g0^2 {worst_infidelity_ratio:.3e}, max readout change D=32->64 {worst_truncation:.3e}"
        ),
        start.elapsed(),
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_4_readout_identities() {
    let start = Instant::now();
    let g0 = 0.1;
    let c = CouplingParams::impulsive(g0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let sigma = rng.random_range(0.2..3.0);
        let space = FockSpace::new(32, sigma).unwrap();
        let s_w = C64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let state = weak_final_state(&WeakValue::new(s_w, WeakValueKind::Exact), &c, &space);
        let r = pointer_readouts(&state, &c);
        let (z, p) = closed_form_readouts(s_w, g0, sigma);
        worst = worst.max(rel(r.z_mean, z)).max(rel(r.p_mean, p));
    }
    report(
        4,
        "closed-form readouts",
        worst <= 1e-12,
        &format!("worst rel deviation {worst:.3e} over 100 weak values"),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_5_qfi_cross_validation() {
    let start = Instant::now();
    let c = CouplingParams::impulsive(PAPER_G0).unwrap();
    let p = mrfm();
    let beta_max = 0.1 / OMEGA_R;
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0);
    for i in 0..20 {
        let theta = PI * (i + 1) as f64 / 21.0;
        for j in 0..20 {
            let b = 1e-12 + (beta_max - 1e-12) * j as f64 / 19.0;
            let a = angles(theta, 0.0);
            let analytic = qfi_analytic(beta(b), &a, &c, &p).unwrap().fisher;
            let fd = qfi_finite_difference(beta(b), &a, &c, &p, DEFAULT_REL_STEP).unwrap().fisher;
            let dev = rel(fd, analytic);
            if dev > worst {
                worst = dev;
                at = (theta, b);
            }
        }
    }
    report(
        5,
        "analytic vs finite-difference QFI",
        worst <= 1e-5,
        &format!("worst rel deviation {worst:.3e} at theta {:.4}, beta {:.3e}", at.0, at.1),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_6_eigenstate_degeneracy() {
    let start = Instant::now();
    let c = CouplingParams::impulsive(PAPER_G0).unwrap();
    let p = mrfm();
    let h = build_spin_hamiltonian(&p);
    let mut ok = true;
    let mut worst_qfi: f64 = 0.0;
    for (theta, expected) in [(0.0, 0.5), (PI, -0.5)] {
        let a = angles(theta, 0.0);
        let psi = postselect_state(&a);
        let coeffs = inversion_coefficients(&h, &psi);
        for b in [0.0, 1e-12, 1e-11, 3e-11] {
            let s_w = weak_value_exact(&gibbs_state(&h, beta(b)).unwrap(), &psi).unwrap();
            ok &= s_w.value == C64::new(expected, 0.0);
            let analytic = qfi_analytic(beta(b), &a, &c, &p).unwrap().fisher;
            let fd = qfi_finite_difference(beta(b), &a, &c, &p, DEFAULT_REL_STEP).unwrap().fisher;
            worst_qfi = worst_qfi.max(analytic).max(fd);
            ok &= matches!(invert_beta(&s_w, &coeffs), Err(ThermoError::InsensitivePostselection { .. }));
        }
    }
    ok &= worst_qfi <= 1e-20;
    report(
        6,
        "eigenstate postselection",
        ok,
        &format!("S_w exactly +-1/2, inversion insensitive, max QFI {worst_qfi:e}"),
        start.elapsed(),
        Duration::from_secs(1),
    );
}

fn sweep_config(text: &str) -> RunConfig {
    RunConfig::resolve(Command::QfiSweep, &KeyValues::parse(text).unwrap(), &KeyValues::new()).unwrap()
}

#[test]
fn criterion_7_temperature_and_phase_dependence() {
    let start = Instant::now();
    let beta_max = 0.1 / OMEGA_R;
    // default parameters: omega_z, omega_r, g0, phi = 0
    let temp_cfg = sweep_config(&format!(
        "theta_min = {}\ntheta_max = {}\ntheta_steps = 9\nbeta_min = {}\nbeta_max = {beta_max:e}\nbeta_steps = 20\nlog_beta = true",
        PI / 10.0,
        9.0 * PI / 10.0,
        beta_max / 32.0
    ));
    let records = cli::sweep_records(&temp_cfg);
    let mut violations = 0;
    let mut pairs = 0;
    let mut worst: f64 = 1.0;
    for row in records.chunks(temp_cfg.beta.steps) {
        // rows ascend in beta, i.e. descend in temperature
        for w in row.windows(2) {
            pairs += 1;
            let (hot, cold) = (&w[0], &w[1]);
            if hot.qfi < cold.qfi {
                violations += 1;
                worst = worst.min(hot.qfi / cold.qfi);
            }
        }
        // F(2T) >= F(T) with both temperatures on the grid
        let n = row.len();
        for k in 0..n {
            if let Some(half) = row[..k].iter().find(|r| (r.beta * 2.0 - row[k].beta).abs() <= 1e-9 * row[k].beta) {
                pairs += 1;
                if half.qfi < row[k].qfi {
                    violations += 1;
                    worst = worst.min(half.qfi / row[k].qfi);
                }
            }
        }
    }
    let monotone = violations == 0;

    let phi_cfg = sweep_config(
        "theta = 0.7853981633974483\nphi_min = 0\nphi_max = 5.890486225480862\nphi_steps = 16\nbeta = 1e-11",
    );
    let phi_rows = cli::sweep_records(&phi_cfg);
    let fmax = phi_rows.iter().map(|r| r.qfi).fold(f64::NEG_INFINITY, f64::max);
    let fmin = phi_rows.iter().map(|r| r.qfi).fold(f64::INFINITY, f64::min);
    let phase_ratio = fmax / fmin;

    report(
        7,
        "QFI temperature trend and phase dependence",
        monotone && phase_ratio > 1.0,
        &format!(
            "phi = 0: {violations} of {pairs} temperature pairs have F decreasing with T (smallest F(hot)/F(cold) {worst:.6}); phi sweep max/min F {phase_ratio:.4}"
        ),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_8_cramer_rao_consistency() {
    let start = Instant::now();
    let base = ExperimentConfig {
        beta_true: 1e-11,
        angles: angles(PI / 4.0, 0.0),
        coupling: CouplingParams::impulsive(0.05).unwrap(),
        spin: mrfm(),
        sigma: 1.0,
        n_samples: 10_000,
        n_replicates: 100,
        seed: 8,
    };
    let rec = simulate_experiment(&base).unwrap();
    let bound = rec.crb.value().unwrap();
    let consistent = rec.sample_variance >= bound - 3.0 * rec.variance_std_error;

    let a = base.angles;
    let f_full = qfi_analytic(beta(base.beta_true), &a, &base.coupling, &base.spin).unwrap().fisher;
    let half = CouplingParams::impulsive(0.025).unwrap();
    let f_half = qfi_analytic(beta(base.beta_true), &a, &half, &base.spin).unwrap().fisher;
    let scaling = f_full / f_half;
    let scaling_ok = (scaling - 4.0).abs() <= 0.04;

    report(
        8,
        "Cramer-Rao consistency",
        consistent && scaling_ok && rec.successful().count() == base.n_replicates,
        &format!(
            "var {:.4e} vs 1/(N F) {bound:.4e} (se {:.2e}, ratio {:.3}); F(g0)/F(g0/2) = {scaling:.5}",
            rec.sample_variance,
            rec.variance_std_error,
            rec.sample_variance / bound
        ),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_9_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_thermo");
    let run = |name: &str, extra: &[&str]| -> Vec<u8> {
        let out = dir.path().join(name);
        let status = Process::new(bin)
            .args([
                "qfi-sweep",
                "--theta-min",
                "0",
                "--theta-max",
                "3.14159",
                "--theta-steps",
                "7",
                "--beta-steps",
                "25",
                "--log-beta",
                "--seed",
                "1234",
                "--out",
            ])
            .arg(&out)
            .args(extra)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(&out).unwrap()
    };
    let parallel = run("parallel.csv", &[]);
    let serial = run("serial.csv", &["--serial"]);
    let again = run("again.csv", &[]);
    let sweeps_match = parallel == serial && parallel == again;

    let exp = |seed: &str| {
        let out = dir.path().join(format!("exp{seed}.csv"));
        let status = Process::new(bin)
            .args(["experiment", "--n-samples", "2000", "--replicates", "10", "--seed", seed, "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        (std::fs::read(&out).unwrap(), std::fs::read(dir.path().join(format!("exp{seed}.csv.summary.txt"))).unwrap())
    };
    let experiments_match = exp("5") == exp("5");

    report(
        9,
        "byte-identical output",
        sweeps_match && experiments_match,
        &format!("sweep serial == parallel == rerun: {sweeps_match}; experiment rerun identical: {experiments_match}"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}
