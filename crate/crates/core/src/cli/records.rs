//! CSV tables: the sweep row type and a plain string table for the other
//! commands. LF line endings, RFC-4180 quoting, shortest round-trip floats.

use std::io::{Read, Write};

use super::config::fmt_float;

pub const SWEEP_HEADER: [&str; 13] = [
    "theta",
    "phi",
    "beta",
    "temperature",
    "S_w_re",
    "S_w_im",
    "beta_hat",
    "qfi",
    "crb",
    "z_mean",
    "p_mean",
    "postselect_prob",
    "status",
];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
    #[error("row {row}, column {column}: cannot parse {value:?}")]
    Field { row: usize, column: &'static str, value: String },
}

/// One `(θ, φ, β)` grid point. `None` temperatures, estimates and bounds are
/// written as `inf` (β = 0, no information) or left empty (no estimate).
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub theta: f64,
    pub phi: f64,
    pub beta: f64,
    pub temperature: Option<f64>,
    pub s_w_re: f64,
    pub s_w_im: f64,
    pub beta_hat: Option<f64>,
    pub qfi: f64,
    pub crb: Option<f64>,
    pub z_mean: f64,
    pub p_mean: f64,
    pub postselect_prob: f64,
    pub status: String,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn fields(&self) -> [String; 13] {
        [
            fmt_float(self.theta),
            fmt_float(self.phi),
            fmt_float(self.beta),
            self.temperature.map_or_else(|| "inf".into(), fmt_float),
            fmt_float(self.s_w_re),
            fmt_float(self.s_w_im),
            self.beta_hat.map_or_else(String::new, fmt_float),
            fmt_float(self.qfi),
            self.crb.map_or_else(|| "inf".into(), fmt_float),
            fmt_float(self.z_mean),
            fmt_float(self.p_mean),
            fmt_float(self.postselect_prob),
            self.status.clone(),
        ]
    }

    fn from_fields(row: usize, rec: &csv::StringRecord) -> Result<Self, CsvError> {
        let get = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64, CsvError> {
            get(i).parse::<f64>().map_err(|_| CsvError::Field { row, column: SWEEP_HEADER[i], value: get(i).into() })
        };
        let opt = |i: usize, sentinel: &str| -> Result<Option<f64>, CsvError> {
            if get(i) == sentinel {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        Ok(Self {
            theta: num(0)?,
            phi: num(1)?,
            beta: num(2)?,
            temperature: opt(3, "inf")?,
            s_w_re: num(4)?,
            s_w_im: num(5)?,
            beta_hat: opt(6, "")?,
            qfi: num(7)?,
            crb: opt(8, "inf")?,
            z_mean: num(9)?,
            p_mean: num(10)?,
            postselect_prob: num(11)?,
            status: get(12).to_string(),
        })
    }
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub fn write_sweep<W: Write>(out: W, records: &[SweepRecord]) -> Result<(), CsvError> {
    let mut w = writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_sweep<R: Read>(input: R) -> Result<Vec<SweepRecord>, CsvError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(CsvError::Header {
            expected: SWEEP_HEADER.iter().map(|s| s.to_string()).collect(),
            found: header.iter().map(str::to_string).collect(),
        });
    }
    rd.records().enumerate().map(|(i, rec)| SweepRecord::from_fields(i + 1, &rec?)).collect()
}

/// Header plus pre-formatted rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write<W: Write>(&self, out: W) -> Result<(), CsvError> {
        let mut w = writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
