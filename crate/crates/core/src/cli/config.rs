//! Run configuration: flat `key = value` files plus command-line overrides.
//!
//! Keys accept `-` or `_` interchangeably. `#` and `;` start comments and
//! `[section]` headers are ignored. Flags always win over file values.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::pointer::CouplingParams;
use crate::spin::SpinParams;

pub const DEFAULT_OMEGA_Z: f64 = 4.8e6;
pub const DEFAULT_OMEGA_R: f64 = 3e9;
pub const DEFAULT_G0: f64 = 1e-8;
pub const DEFAULT_EXPERIMENT_G0: f64 = 0.05;
pub const DEFAULT_THETA: f64 = PI / 4.0;
pub const DEFAULT_PHI: f64 = 0.0;
pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_BETA: f64 = 1e-11;
pub const DEFAULT_SWEEP_BETA_MIN: f64 = 1e-12;
pub const DEFAULT_SWEEP_BETA_MAX: f64 = 3e-11;
pub const DEFAULT_SWEEP_BETA_STEPS: usize = 30;
pub const DEFAULT_FOCK_DIM: usize = 32;
pub const DEFAULT_SEED: u64 = 20_190_101;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_REPLICATES: usize = 100;

const KNOWN_KEYS: &[&str] = &[
    "omega_z",
    "omega_r",
    "g0",
    "sigma",
    "interaction_time",
    "omega_c",
    "free_evolution",
    "theta",
    "theta_min",
    "theta_max",
    "theta_steps",
    "phi",
    "phi_min",
    "phi_max",
    "phi_steps",
    "beta",
    "beta_min",
    "beta_max",
    "beta_steps",
    "log_beta",
    "fock_dim",
    "seed",
    "out",
    "n_samples",
    "replicates",
    "n_measurements",
    "parallel",
    "weak_value_re",
    "weak_value_im",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("{0}")]
    Range(String),
    #[error("cannot read config file {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Command {
    WeakValue,
    InvertBeta,
    Pointer,
    QfiSweep,
    Experiment,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::WeakValue => "weak-value",
            Command::InvertBeta => "invert-beta",
            Command::Pointer => "pointer",
            Command::QfiSweep => "qfi-sweep",
            Command::Experiment => "experiment",
        }
    }
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "weak-value" => Command::WeakValue,
            "invert-beta" => Command::InvertBeta,
            "pointer" => Command::Pointer,
            "qfi-sweep" => Command::QfiSweep,
            "experiment" => Command::Experiment,
            _ => {
                return Err(ConfigError::InvalidValue {
                    key: "command".into(),
                    value: s.into(),
                    reason: "expected weak-value, invert-beta, pointer, qfi-sweep or experiment".into(),
                })
            }
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Inclusive grid of `steps` points from `min` to `max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn single(value: f64) -> Self {
        Self { min: value, max: value, steps: 1, spacing: Spacing::Linear }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k == 0 {
                    return self.min;
                }
                if k + 1 == self.steps {
                    return self.max;
                }
                let f = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + f * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub spin: SpinParams,
    pub coupling: CouplingParams,
    pub sigma: f64,
    pub theta: Grid,
    pub phi: Grid,
    pub beta: Grid,
    pub fock_dim: usize,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub n_samples: usize,
    pub n_replicates: usize,
    pub n_measurements: u64,
    pub parallel: bool,
    /// Weak value supplied to `invert-beta`; computed from the model if absent.
    pub weak_value: Option<(f64, f64)>,
}

/// Raw `key → value` pairs, normalized to underscore keys.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues(BTreeMap<String, String>);

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(normalize_key(key), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// Overlays `other` on `self`; `other` wins.
    pub fn merged(mut self, other: &KeyValues) -> Self {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut kv = KeyValues::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: idx + 1, text: raw.to_string() })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: idx + 1, text: raw.to_string() });
            }
            kv.set(key, value.trim());
        }
        Ok(kv)
    }

    fn check_keys(&self) -> Result<(), ConfigError> {
        match self.0.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            Some(k) => Err(ConfigError::UnknownKey(k.clone())),
            None => Ok(()),
        }
    }

    fn value<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| ConfigError::InvalidValue {
                    key: key.into(),
                    value: v.into(),
                    reason: e.to_string(),
                })
            })
            .transpose()
    }

    fn float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v = self.value::<f64>(key)?;
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(ConfigError::InvalidValue {
                    key: key.into(),
                    value: self.get(key).unwrap_or_default().into(),
                    reason: "must be finite".into(),
                });
            }
        }
        Ok(v)
    }

    fn flag(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.get(key)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(ConfigError::InvalidValue {
                    key: key.into(),
                    value: v.into(),
                    reason: "expected a boolean".into(),
                }),
            })
            .transpose()
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

fn strip_comment(line: &str) -> &str {
    let cut = line.find(['#', ';']).unwrap_or(line.len());
    &line[..cut]
}

fn range_err(msg: impl Into<String>) -> ConfigError {
    ConfigError::Range(msg.into())
}

/// Builds a grid from `<name>`, `<name>_min`, `<name>_max`, `<name>_steps`.
fn grid(kv: &KeyValues, name: &str, default: Grid, log: bool) -> Result<Grid, ConfigError> {
    let single = kv.float(name)?;
    let min = kv.float(&format!("{name}_min"))?;
    let max = kv.float(&format!("{name}_max"))?;
    let steps = kv.value::<usize>(&format!("{name}_steps"))?;
    let spacing = if log { Spacing::Log } else { Spacing::Linear };
    let g = match (single, min, max, steps) {
        (Some(v), None, None, None | Some(1)) => Grid { spacing, ..Grid::single(v) },
        (Some(_), ..) => {
            return Err(range_err(format!("{name} cannot be combined with {name}_min/{name}_max/{name}_steps")))
        }
        (None, None, None, None) => Grid { spacing, ..default },
        (None, min, max, steps) => {
            let min = min.unwrap_or(default.min);
            let max = max.unwrap_or(default.max);
            let steps = steps.unwrap_or(if min == max { 1 } else { default.steps.max(2) });
            Grid { min, max, steps, spacing }
        }
    };
    if g.steps == 0 {
        return Err(range_err(format!("{name}_steps must be at least 1")));
    }
    if g.min > g.max {
        return Err(range_err(format!("{name}_min ({}) exceeds {name}_max ({})", g.min, g.max)));
    }
    if g.steps > 1 && g.min == g.max {
        return Err(range_err(format!("{name} grid with {} steps needs {name}_min < {name}_max", g.steps)));
    }
    if g.spacing == Spacing::Log && g.min <= 0.0 {
        return Err(range_err(format!("logarithmic {name} grid needs a positive minimum")));
    }
    Ok(g)
}

impl RunConfig {
    /// Resolves `file` overlaid with `flags`, filling defaults. File keys and
    /// flag keys are both checked against the known set.
    pub fn resolve(command: Command, file: &KeyValues, flags: &KeyValues) -> Result<Self, ConfigError> {
        file.check_keys()?;
        flags.check_keys()?;
        let kv = file.clone().merged(flags);

        let omega_z = kv.float("omega_z")?.unwrap_or(DEFAULT_OMEGA_Z);
        let omega_r = kv.float("omega_r")?.unwrap_or(DEFAULT_OMEGA_R);
        let spin = SpinParams::new(omega_z, omega_r).map_err(|e| range_err(e.to_string()))?;

        let default_g0 = if command == Command::Experiment { DEFAULT_EXPERIMENT_G0 } else { DEFAULT_G0 };
        let g0 = kv.float("g0")?.unwrap_or(default_g0);
        let t = kv.float("interaction_time")?.unwrap_or(1.0);
        let omega_c = kv.float("omega_c")?.unwrap_or(0.0);
        let free = kv.flag("free_evolution")?.unwrap_or(false);
        let coupling = CouplingParams::new(g0, t, omega_c, free).map_err(|e| range_err(e.to_string()))?;

        let sigma = kv.float("sigma")?.unwrap_or(DEFAULT_SIGMA);
        if sigma <= 0.0 {
            return Err(range_err(format!("sigma must be positive, got {sigma}")));
        }

        let theta = grid(&kv, "theta", Grid::single(DEFAULT_THETA), false)?;
        if theta.min < 0.0 || theta.max > PI {
            return Err(range_err(format!("theta must lie in [0, pi], got [{}, {}]", theta.min, theta.max)));
        }
        let phi = grid(&kv, "phi", Grid::single(DEFAULT_PHI), false)?;
        if phi.min < 0.0 || phi.max >= 2.0 * PI {
            return Err(range_err(format!("phi must lie in [0, 2pi), got [{}, {}]", phi.min, phi.max)));
        }
        let log_beta = kv.flag("log_beta")?.unwrap_or(false);
        let beta_default = if command == Command::QfiSweep {
            Grid {
                min: DEFAULT_SWEEP_BETA_MIN,
                max: DEFAULT_SWEEP_BETA_MAX,
                steps: DEFAULT_SWEEP_BETA_STEPS,
                spacing: Spacing::Linear,
            }
        } else {
            Grid::single(DEFAULT_BETA)
        };
        let beta = grid(&kv, "beta", beta_default, log_beta)?;
        if beta.min < 0.0 {
            return Err(range_err(format!("beta must be non-negative, got {}", beta.min)));
        }

        let fock_dim = kv.value::<usize>("fock_dim")?.unwrap_or(DEFAULT_FOCK_DIM);
        if fock_dim < 2 {
            return Err(range_err(format!("fock_dim must be at least 2, got {fock_dim}")));
        }
        let seed = kv.value::<u64>("seed")?.unwrap_or(DEFAULT_SEED);
        let output_path = kv.get("out").filter(|s| !s.is_empty()).map(PathBuf::from);
        let n_samples = kv.value::<usize>("n_samples")?.unwrap_or(DEFAULT_SAMPLES);
        let n_replicates = kv.value::<usize>("replicates")?.unwrap_or(DEFAULT_REPLICATES);
        let n_measurements = kv.value::<u64>("n_measurements")?.unwrap_or(1);
        if n_measurements == 0 {
            return Err(range_err("n_measurements must be positive"));
        }
        let parallel = kv.flag("parallel")?.unwrap_or(true);
        let weak_value = match (kv.float("weak_value_re")?, kv.float("weak_value_im")?) {
            (None, None) => None,
            (re, im) => Some((re.unwrap_or(0.0), im.unwrap_or(0.0))),
        };

        let cfg = RunConfig {
            command,
            spin,
            coupling,
            sigma,
            theta,
            phi,
            beta,
            fock_dim,
            seed,
            output_path,
            n_samples,
            n_replicates,
            n_measurements,
            parallel,
            weak_value,
        };
        if command == Command::Experiment && cfg.grid_len() != 1 {
            return Err(range_err("experiment runs at a single (theta, phi, beta) point"));
        }
        Ok(cfg)
    }

    pub fn grid_len(&self) -> usize {
        self.theta.steps * self.phi.steps * self.beta.steps
    }

    /// Grid points in row order: θ outermost, then φ, then β.
    pub fn grid_points(&self) -> Vec<(f64, f64, f64)> {
        let (ts, ps, bs) = (self.theta.points(), self.phi.points(), self.beta.points());
        let mut out = Vec::with_capacity(self.grid_len());
        for &t in &ts {
            for &p in &ps {
                for &b in &bs {
                    out.push((t, p, b));
                }
            }
        }
        out
    }

    /// Config echo in the same `key = value` format; feeding it back via
    /// `--config` reproduces the run.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        line("# command", self.command.name().to_string());
        line("omega_z", fmt_float(self.spin.omega_z));
        line("omega_r", fmt_float(self.spin.omega_r));
        line("g0", fmt_float(self.coupling.g0));
        line("interaction_time", fmt_float(self.coupling.t));
        line("omega_c", fmt_float(self.coupling.omega_c));
        line("free_evolution", self.coupling.include_free_evolution.to_string());
        line("sigma", fmt_float(self.sigma));
        for (name, g) in [("theta", &self.theta), ("phi", &self.phi), ("beta", &self.beta)] {
            line(&format!("{name}_min"), fmt_float(g.min));
            line(&format!("{name}_max"), fmt_float(g.max));
            line(&format!("{name}_steps"), g.steps.to_string());
        }
        line("log_beta", (self.beta.spacing == Spacing::Log).to_string());
        line("fock_dim", self.fock_dim.to_string());
        line("seed", self.seed.to_string());
        line("n_samples", self.n_samples.to_string());
        line("replicates", self.n_replicates.to_string());
        line("n_measurements", self.n_measurements.to_string());
        if let Some((re, im)) = self.weak_value {
            line("weak_value_re", fmt_float(re));
            line("weak_value_im", fmt_float(im));
        }
        s
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:e}")
    }
}
