//! Command-line harness: configuration, sweeps and CSV output.

pub mod config;
pub mod records;
pub mod run;

pub use config::{Command, ConfigError, Grid, KeyValues, RunConfig, Spacing};
pub use records::{read_sweep, write_sweep, CsvError, SweepRecord, Table};
pub use run::{run, run_experiment, run_qfi_sweep, sweep_records, RunOutput};
