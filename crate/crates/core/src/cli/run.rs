//! Command runners. Each returns the CSV bytes and a one-line summary; the
//! binary decides where they go.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::config::{fmt_float, Command, RunConfig};
use super::records::{write_sweep, SweepRecord, Table};
use crate::error::{Result, ThermoError};
use crate::linalg::{CMatrix, FockSpace};
use crate::metrology::{
    cramer_rao, qfi_for_state, simulate_experiment, ExperimentConfig, ExperimentRecord, QfiMethod, QfiResult,
};
use crate::pointer::{
    closed_form_readouts, evolve_exact_with, gaussian_ground_state, postselect_pointer, weak_final_state,
};
use crate::spin::{build_spin_hamiltonian, gibbs_state, postselect_state, InverseTemperature, PostselectionAngles};
use crate::weak::{
    inversion_coefficients, invert_beta, invert_beta_symmetric_x, linearization_parameter, weak_value_exact,
    weak_value_first_order, WeakValue, WeakValueKind,
};

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub csv: Vec<u8>,
    pub summary: String,
    pub rows: usize,
    /// Rows whose status is not `ok`.
    pub degenerate: usize,
}

impl RunOutput {
    pub fn all_degenerate(&self) -> bool {
        self.rows > 0 && self.degenerate == self.rows
    }
}

/// Short status text for a per-point failure.
pub fn status_of(e: &ThermoError) -> String {
    match e {
        ThermoError::InsensitivePostselection { .. } | ThermoError::SymmetricDenominator => "insensitive".into(),
        ThermoError::OrthogonalPostselection(_) => "orthogonal".into(),
        ThermoError::GibbsOverflow(_) => "overflow".into(),
        ThermoError::TruncationInsufficient { .. } => "truncation".into(),
        other => format!("error: {other}"),
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    match cfg.command {
        Command::WeakValue => Ok(run_weak_value(cfg)),
        Command::InvertBeta => Ok(run_invert_beta(cfg)),
        Command::Pointer => Ok(run_pointer(cfg)),
        Command::QfiSweep => Ok(run_qfi_sweep(cfg)),
        Command::Experiment => run_experiment(cfg),
    }
}

/// Evaluates `f` at every grid point, in grid order, on the rayon pool or serially.
fn map_points<T, F>(cfg: &RunConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn((f64, f64, f64)) -> T + Sync + Send,
{
    let points = cfg.grid_points();
    if cfg.parallel {
        points.into_par_iter().map(f).collect()
    } else {
        points.into_iter().map(f).collect()
    }
}

fn table_output(command: Command, table: Table, statuses: &[String]) -> RunOutput {
    let mut csv = Vec::new();
    table.write(&mut csv).expect("writing to a Vec cannot fail");
    let degenerate = statuses.iter().filter(|s| *s != "ok").count();
    RunOutput {
        csv,
        summary: format!("{command}: {} points, {degenerate} degenerate", statuses.len()),
        rows: statuses.len(),
        degenerate,
    }
}

fn thermal(
    h: &CMatrix,
    theta: f64,
    phi: f64,
    beta: f64,
) -> Result<(crate::spin::SpinState, InverseTemperature, WeakValue, f64)> {
    let psi = postselect_state(&PostselectionAngles::new(theta, phi)?);
    let b = InverseTemperature::new(beta)?;
    let rho = gibbs_state(h, b)?;
    let prob = rho.postselection_probability(&psi);
    Ok((psi, b, weak_value_exact(&rho, &psi)?, prob))
}

/// The sweep record at one grid point; failures are recorded in `status`.
pub fn sweep_point(cfg: &RunConfig, h: &CMatrix, (theta, phi, beta): (f64, f64, f64)) -> SweepRecord {
    let temperature = (beta > 0.0).then(|| 1.0 / beta);
    let failed = |e: ThermoError| SweepRecord {
        theta,
        phi,
        beta,
        temperature,
        s_w_re: f64::NAN,
        s_w_im: f64::NAN,
        beta_hat: None,
        qfi: f64::NAN,
        crb: None,
        z_mean: f64::NAN,
        p_mean: f64::NAN,
        postselect_prob: f64::NAN,
        status: status_of(&e),
    };
    let (psi, b, s_w, prob) = match thermal(h, theta, phi, beta) {
        Ok(v) => v,
        Err(e) => return failed(e),
    };
    let qfi = match qfi_for_state(b, &psi, &cfg.coupling, &cfg.spin) {
        Ok(f) => f,
        Err(e) => return failed(e),
    };
    let result =
        QfiResult { fisher: qfi, method: QfiMethod::Analytic, beta, angles: PostselectionAngles { theta, phi } };
    let crb = cramer_rao(&result, cfg.n_measurements).ok().and_then(|c| c.variance_bound.value());
    let (beta_hat, status) = match invert_beta(&s_w, &inversion_coefficients(h, &psi)) {
        Ok(est) => (Some(est.beta), "ok".to_string()),
        Err(e) => (None, status_of(&e)),
    };
    let (z_mean, p_mean) = closed_form_readouts(s_w.value, cfg.coupling.g0, cfg.sigma);
    SweepRecord {
        theta,
        phi,
        beta,
        temperature,
        s_w_re: s_w.value.re,
        s_w_im: s_w.value.im,
        beta_hat,
        qfi,
        crb,
        z_mean,
        p_mean,
        postselect_prob: prob,
        status,
    }
}

pub fn sweep_records(cfg: &RunConfig) -> Vec<SweepRecord> {
    let h = build_spin_hamiltonian(&cfg.spin);
    map_points(cfg, |pt| sweep_point(cfg, &h, pt))
}

pub fn run_qfi_sweep(cfg: &RunConfig) -> RunOutput {
    let records = sweep_records(cfg);
    let mut csv = Vec::new();
    write_sweep(&mut csv, &records).expect("writing to a Vec cannot fail");
    let degenerate = records.iter().filter(|r| !r.is_ok()).count();
    let finite = records.iter().map(|r| r.qfi).filter(|f| f.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| (lo.min(f), hi.max(f)));
    RunOutput {
        csv,
        summary: format!(
            "qfi-sweep: {} points, qfi min {} max {}, {degenerate} degenerate",
            records.len(),
            fmt_float(lo),
            fmt_float(hi)
        ),
        rows: records.len(),
        degenerate,
    }
}

pub fn run_weak_value(cfg: &RunConfig) -> RunOutput {
    let h = build_spin_hamiltonian(&cfg.spin);
    let rows = map_points(cfg, |(theta, phi, beta)| {
        let mut row = vec![fmt_float(theta), fmt_float(phi), fmt_float(beta)];
        let (psi, b, s_w, prob) = match thermal(&h, theta, phi, beta) {
            Ok(v) => v,
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 6));
                let st = status_of(&e);
                row.push(st.clone());
                return (row, st);
            }
        };
        row.extend([fmt_float(s_w.value.re), fmt_float(s_w.value.im)]);
        let st = match weak_value_first_order(&h, &psi, b) {
            Ok(w) => {
                row.extend([fmt_float(w.value.re), fmt_float(w.value.im)]);
                "ok".to_string()
            }
            Err(e) => {
                row.extend([String::new(), String::new()]);
                status_of(&e)
            }
        };
        row.extend([fmt_float(prob), fmt_float(linearization_parameter(&h, b)), st.clone()]);
        (row, st)
    });
    let header = vec![
        "theta",
        "phi",
        "beta",
        "S_w_re",
        "S_w_im",
        "S_w_first_order_re",
        "S_w_first_order_im",
        "postselect_prob",
        "beta_h_norm",
        "status",
    ];
    let (rows, statuses): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    table_output(Command::WeakValue, Table { header, rows }, &statuses)
}

pub fn run_invert_beta(cfg: &RunConfig) -> RunOutput {
    let h = build_spin_hamiltonian(&cfg.spin);
    let rows = map_points(cfg, |(theta, phi, beta)| {
        let mut row = vec![fmt_float(theta), fmt_float(phi), fmt_float(beta)];
        let s_w = match cfg.weak_value {
            Some((re, im)) => PostselectionAngles::new(theta, phi)
                .map(|a| (postselect_state(&a), WeakValue::new(C64::new(re, im), WeakValueKind::Reconstructed))),
            None => thermal(&h, theta, phi, beta).map(|(psi, _, w, _)| (psi, w)),
        };
        let (psi, s_w) = match s_w {
            Ok(v) => v,
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 5));
                let st = status_of(&e);
                row.push(st.clone());
                return (row, st);
            }
        };
        row.extend([fmt_float(s_w.value.re), fmt_float(s_w.value.im)]);
        let st = match invert_beta(&s_w, &inversion_coefficients(&h, &psi)) {
            Ok(est) => {
                row.extend([fmt_float(est.beta), fmt_float(est.imaginary_residue)]);
                "ok".to_string()
            }
            Err(e) => {
                row.extend([String::new(), String::new()]);
                status_of(&e)
            }
        };
        row.push(invert_beta_symmetric_x(&s_w, &cfg.spin).map(fmt_float).unwrap_or_default());
        row.push(st.clone());
        (row, st)
    });
    let header =
        vec!["theta", "phi", "beta", "S_w_re", "S_w_im", "beta_hat", "imaginary_residue", "beta_symmetric_x", "status"];
    let (rows, statuses): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    table_output(Command::InvertBeta, Table { header, rows }, &statuses)
}

pub fn run_pointer(cfg: &RunConfig) -> RunOutput {
    let h = build_spin_hamiltonian(&cfg.spin);
    let rows = map_points(cfg, |(theta, phi, beta)| {
        let mut row = vec![fmt_float(theta), fmt_float(phi), fmt_float(beta)];
        let out = (|| -> Result<Vec<String>> {
            let psi = postselect_state(&PostselectionAngles::new(theta, phi)?);
            let rho = gibbs_state(&h, InverseTemperature::new(beta)?)?;
            let s_w = weak_value_exact(&rho, &psi)?;
            let space = FockSpace::new(cfg.fock_dim, cfg.sigma)?;
            let joint = evolve_exact_with(&rho, &gaussian_ground_state(&space), &cfg.coupling, Some(&cfg.spin))?;
            let post = postselect_pointer(&joint, &psi, cfg.sigma)?;
            let weak = weak_final_state(&s_w, &cfg.coupling, &space);
            let (z, p) = post.readouts();
            let (zw, pw) = closed_form_readouts(s_w.value, cfg.coupling.g0, cfg.sigma);
            Ok(vec![
                fmt_float(s_w.value.re),
                fmt_float(s_w.value.im),
                fmt_float(post.prob),
                fmt_float(post.purity()),
                fmt_float(1.0 - post.fidelity(&weak)),
                fmt_float(z),
                fmt_float(p),
                fmt_float(zw),
                fmt_float(pw),
            ])
        })();
        let st = match out {
            Ok(cols) => {
                row.extend(cols);
                "ok".to_string()
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 9));
                status_of(&e)
            }
        };
        row.push(st.clone());
        (row, st)
    });
    let header = vec![
        "theta",
        "phi",
        "beta",
        "S_w_re",
        "S_w_im",
        "postselect_prob",
        "purity",
        "infidelity",
        "z_exact",
        "p_exact",
        "z_weak",
        "p_weak",
        "status",
    ];
    let (rows, statuses): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    table_output(Command::Pointer, Table { header, rows }, &statuses)
}

pub fn experiment_config(cfg: &RunConfig) -> Result<ExperimentConfig> {
    let (theta, phi, beta) = cfg.grid_points()[0];
    Ok(ExperimentConfig {
        beta_true: beta,
        angles: PostselectionAngles::new(theta, phi)?,
        coupling: cfg.coupling,
        spin: cfg.spin,
        sigma: cfg.sigma,
        n_samples: cfg.n_samples,
        n_replicates: cfg.n_replicates,
        seed: cfg.seed,
    })
}

/// Multi-line summary of an experiment: bias, variance, bound and their ratio.
pub fn experiment_summary(rec: &ExperimentRecord) -> String {
    let ok = rec.successful().count();
    let ratio = rec.variance_ratio().map_or_else(|| "inf".into(), fmt_float);
    let crb = rec.crb.value().map_or_else(|| "inf".into(), fmt_float);
    format!(
        "beta_true = {}\nbeta_mean = {}\nbias = {}\nvariance = {}\nvariance_std_error = {}\nfisher = {}\ncrb = {}\nvariance_over_crb = {}\nreplicates_ok = {}\nreplicates_failed = {}\nseed = {}\n",
        fmt_float(rec.beta_true),
        fmt_float(rec.beta_estimate),
        fmt_float(rec.beta_estimate - rec.beta_true),
        fmt_float(rec.sample_variance),
        fmt_float(rec.variance_std_error),
        fmt_float(rec.fisher),
        crb,
        ratio,
        ok,
        rec.replicates.len() - ok,
        rec.seed,
    )
}

pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutput> {
    let rec = simulate_experiment(&experiment_config(cfg)?)?;
    let rows: Vec<Vec<String>> = rec
        .replicates
        .iter()
        .map(|r| {
            let (re, im) = r.weak_value.map_or((String::new(), String::new()), |w| (fmt_float(w.re), fmt_float(w.im)));
            vec![
                r.index.to_string(),
                fmt_float(r.z_mean),
                fmt_float(r.p_mean),
                re,
                im,
                r.beta_hat.map_or_else(String::new, fmt_float),
                r.error.as_ref().map_or_else(|| "ok".into(), status_of),
            ]
        })
        .collect();
    let table = Table { header: vec!["replicate", "z_mean", "p_mean", "S_w_re", "S_w_im", "beta_hat", "status"], rows };
    let mut csv = Vec::new();
    table.write(&mut csv).expect("writing to a Vec cannot fail");
    let degenerate = rec.replicates.len() - rec.successful().count();
    Ok(RunOutput { csv, summary: experiment_summary(&rec), rows: rec.replicates.len(), degenerate })
}
