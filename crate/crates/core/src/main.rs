use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use thermo_core::cli::{run, Command, ConfigError, KeyValues, RunConfig};
use thermo_core::ThermoError;

const EXIT_CONFIG: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CommandArg {
    WeakValue,
    InvertBeta,
    Pointer,
    QfiSweep,
    Experiment,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::WeakValue => Command::WeakValue,
            CommandArg::InvertBeta => Command::InvertBeta,
            CommandArg::Pointer => Command::Pointer,
            CommandArg::QfiSweep => Command::QfiSweep,
            CommandArg::Experiment => Command::Experiment,
        }
    }
}

/// Postselected weak-measurement thermometry of a spin coupled to a cantilever.
#[derive(Debug, Parser)]
#[command(name = "thermo", version, about)]
struct Cli {
    command: CommandArg,
    /// Flat `key = value` configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Longitudinal spin frequency ω_z (rad/s).
    #[arg(long, allow_hyphen_values = true)]
    omega_z: Option<String>,
    /// Transverse (Rabi) spin frequency ω_R (rad/s).
    #[arg(long, allow_hyphen_values = true)]
    omega_r: Option<String>,
    /// Dimensionless spin-pointer coupling g₀.
    #[arg(long)]
    g0: Option<String>,
    /// Pointer position scale σ.
    #[arg(long)]
    sigma: Option<String>,
    /// Interaction time (s), used with --free-evolution.
    #[arg(long)]
    interaction_time: Option<String>,
    /// Cantilever angular frequency (rad/s), used with --free-evolution.
    #[arg(long, allow_hyphen_values = true)]
    omega_c: Option<String>,
    /// Include free spin and oscillator evolution during the coupling.
    #[arg(long)]
    free_evolution: bool,
    /// Postselection polar angle θ in [0, π] (single point).
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// θ grid start.
    #[arg(long, allow_hyphen_values = true)]
    theta_min: Option<String>,
    /// θ grid end.
    #[arg(long)]
    theta_max: Option<String>,
    /// Number of θ grid points.
    #[arg(long)]
    theta_steps: Option<String>,
    /// Postselection phase φ in [0, 2π) (single point).
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// φ grid start.
    #[arg(long, allow_hyphen_values = true)]
    phi_min: Option<String>,
    /// φ grid end.
    #[arg(long)]
    phi_max: Option<String>,
    /// Number of φ grid points.
    #[arg(long)]
    phi_steps: Option<String>,
    /// Inverse temperature β (single point).
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// β grid start.
    #[arg(long, allow_hyphen_values = true)]
    beta_min: Option<String>,
    /// β grid end.
    #[arg(long)]
    beta_max: Option<String>,
    /// Number of β grid points.
    #[arg(long)]
    beta_steps: Option<String>,
    /// Logarithmic β spacing.
    #[arg(long)]
    log_beta: bool,
    /// Pointer Fock-space truncation.
    #[arg(long)]
    fock_dim: Option<String>,
    /// Master RNG seed.
    #[arg(long)]
    seed: Option<String>,
    /// Output CSV path; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pointer readouts per experiment replicate.
    #[arg(long)]
    n_samples: Option<String>,
    /// Number of experiment replicates.
    #[arg(long)]
    replicates: Option<String>,
    /// Measurement count N in the bound `1/(N F)`.
    #[arg(long)]
    n_measurements: Option<String>,
    /// Real part of a weak value for `invert-beta` to use instead of the model value.
    #[arg(long, allow_hyphen_values = true)]
    weak_value_re: Option<String>,
    /// Imaginary part of the weak value for `invert-beta`.
    #[arg(long, allow_hyphen_values = true)]
    weak_value_im: Option<String>,
    /// Evaluate grid points on a single thread.
    #[arg(long)]
    serial: bool,
}

impl Cli {
    fn flags(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        let pairs = [
            ("omega_z", &self.omega_z),
            ("omega_r", &self.omega_r),
            ("g0", &self.g0),
            ("sigma", &self.sigma),
            ("interaction_time", &self.interaction_time),
            ("omega_c", &self.omega_c),
            ("theta", &self.theta),
            ("theta_min", &self.theta_min),
            ("theta_max", &self.theta_max),
            ("theta_steps", &self.theta_steps),
            ("phi", &self.phi),
            ("phi_min", &self.phi_min),
            ("phi_max", &self.phi_max),
            ("phi_steps", &self.phi_steps),
            ("beta", &self.beta),
            ("beta_min", &self.beta_min),
            ("beta_max", &self.beta_max),
            ("beta_steps", &self.beta_steps),
            ("fock_dim", &self.fock_dim),
            ("seed", &self.seed),
            ("n_samples", &self.n_samples),
            ("replicates", &self.replicates),
            ("n_measurements", &self.n_measurements),
            ("weak_value_re", &self.weak_value_re),
            ("weak_value_im", &self.weak_value_im),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                kv.set(k, v.clone());
            }
        }
        if self.free_evolution {
            kv.set("free_evolution", "true");
        }
        if self.log_beta {
            kv.set("log_beta", "true");
        }
        if self.serial {
            kv.set("parallel", "false");
        }
        if let Some(out) = &self.out {
            kv.set("out", out.to_string_lossy());
        }
        kv
    }

    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| ConfigError::Io { path: path.display().to_string(), reason: e.to_string() })?;
                KeyValues::parse(&text)?
            }
            None => KeyValues::new(),
        };
        RunConfig::resolve(self.command.into(), &file, &self.flags())
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("thermo: configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("thermo: {e}");
            let code = match e {
                ThermoError::InvalidParameter(_) => EXIT_CONFIG,
                _ => EXIT_DEGENERATE,
            };
            return ExitCode::from(code);
        }
    };
    if out.all_degenerate() {
        eprintln!("thermo: every grid point is degenerate; {}", out.summary.trim_end());
        return ExitCode::from(EXIT_DEGENERATE);
    }
    let written = match &cfg.output_path {
        Some(path) => fs::write(path, &out.csv)
            .and_then(|_| fs::write(sibling(path, ".config.txt"), cfg.echo()))
            .and_then(|_| match cfg.command {
                Command::Experiment => fs::write(sibling(path, ".summary.txt"), &out.summary),
                _ => Ok(()),
            }),
        None => std::io::stdout().write_all(&out.csv),
    };
    if let Err(e) = written {
        eprintln!("thermo: cannot write output: {e}");
        return ExitCode::FAILURE;
    }
    eprintln!("{}", out.summary.trim_end());
    ExitCode::SUCCESS
}
