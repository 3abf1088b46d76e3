use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use super::error::CliError;
use crate::analysis::{fit_analyticity, AnalysisError, AnalyticityFit, FitSample};

/// One time-series row.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRow {
    pub step: usize,
    pub t: f64,
    /// sup |d psi|
    pub dpsi_sup: f64,
    pub lambda_sup: f64,
    pub torsion_sup: f64,
    pub min_eig_g: f64,
    pub phi_n: f64,
    pub psi_n: Option<f64>,
    pub psi_n_from_zero: Option<f64>,
    /// sup |psi_direct - psi_velocity| when both routes run.
    pub route_discrepancy: Option<f64>,
    pub wall_time: f64,
    pub noise_rm: bool,
    pub noise_torsion: bool,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

const FIXED: [&str; 13] = [
    "step",
    "t",
    "dpsi_sup",
    "lambda_sup",
    "torsion_sup",
    "min_eig_g",
    "phi_n",
    "psi_n",
    "psi_n_from_zero",
    "route_discrepancy",
    "wall_time",
    "noise_rm",
    "noise_torsion",
];

pub fn header(kmax: usize) -> Vec<String> {
    let mut h: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
    h.extend((0..=kmax).map(|k| format!("a_{k}")));
    h.extend((0..=kmax).map(|k| format!("b_{k}")));
    h
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl SeriesRow {
    pub fn record(&self) -> Vec<String> {
        let mut r = vec![
            self.step.to_string(),
            format!("{:e}", self.t),
            format!("{:e}", self.dpsi_sup),
            format!("{:e}", self.lambda_sup),
            format!("{:e}", self.torsion_sup),
            format!("{:e}", self.min_eig_g),
            format!("{:e}", self.phi_n),
            opt(self.psi_n),
            opt(self.psi_n_from_zero),
            opt(self.route_discrepancy),
            format!("{:.3}", self.wall_time),
            u8::from(self.noise_rm).to_string(),
            u8::from(self.noise_torsion).to_string(),
        ];
        r.extend(self.a.iter().map(|v| format!("{v:e}")));
        r.extend(self.b.iter().map(|v| format!("{v:e}")));
        r
    }

    /// Fit samples from the a_k + b_k columns.
    pub fn fit_samples(&self) -> Vec<FitSample> {
        self.a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(k, (a, b))| {
                FitSample::from_weighted(
                    k,
                    self.t,
                    a + b,
                    (k > 0 && self.noise_rm) || self.noise_torsion,
                )
            })
            .collect()
    }

    pub fn fit(&self) -> Result<AnalyticityFit, AnalysisError> {
        fit_analyticity(&self.fit_samples())
    }
}

/// Appends rows to a CSV file, flushing after each one so a failed run
/// keeps everything written so far.
pub struct SeriesWriter {
    inner: csv::Writer<File>,
}

impl SeriesWriter {
    pub fn create(path: &Path, kmax: usize) -> Result<Self, CliError> {
        let file = File::create(path).map_err(CliError::io(path))?;
        let mut inner = csv::Writer::from_writer(file);
        inner.write_record(header(kmax))?;
        inner.flush().map_err(CliError::io(path))?;
        Ok(Self { inner })
    }

    /// Keeps the rows up to `last_step` of an existing file and appends
    /// after them; creates the file when it is missing.
    pub fn resume(path: &Path, kmax: usize, last_step: usize) -> Result<Self, CliError> {
        if !path.exists() {
            return Self::create(path, kmax);
        }
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let mut kept = String::new();
        for (i, line) in text.lines().enumerate() {
            let step = line.split(',').next().and_then(|s| s.parse::<usize>().ok());
            if i == 0 || step.is_some_and(|s| s <= last_step) {
                kept.push_str(line);
                kept.push('\n');
            }
        }
        std::fs::write(path, kept).map_err(CliError::io(path))?;
        let file = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(CliError::io(path))?;
        Ok(Self {
            inner: csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(file),
        })
    }

    pub fn push(&mut self, row: &SeriesRow) -> Result<(), CliError> {
        self.inner.write_record(row.record())?;
        self.inner.flush().map_err(|e| CliError::Csv(e.into()))?;
        Ok(())
    }
}

/// Reads a time series written by [`SeriesWriter`].
pub fn read_series(path: &Path) -> Result<Vec<SeriesRow>, CliError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Validation(format!("{}: missing column {name}", path.display()))
        })
    };
    let fixed: Vec<usize> = FIXED.iter().map(|n| col(n)).collect::<Result<_, _>>()?;
    let a_cols: Vec<usize> = (0..)
        .map_while(|k| headers.iter().position(|h| h == format!("a_{k}")))
        .collect();
    let b_cols: Vec<usize> = (0..)
        .map_while(|k| headers.iter().position(|h| h == format!("b_{k}")))
        .collect();
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |name: &str| {
            CliError::Validation(format!(
                "{}: row {}: bad value in {name}",
                path.display(),
                line + 2
            ))
        };
        let num = |i: usize| -> Result<f64, CliError> {
            rec[fixed[i]].parse().map_err(|_| bad(FIXED[i]))
        };
        let maybe = |i: usize| -> Result<Option<f64>, CliError> {
            let s = &rec[fixed[i]];
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(FIXED[i]))
            }
        };
        let list = |cols: &[usize]| -> Result<Vec<f64>, CliError> {
            cols.iter()
                .map(|&c| rec[c].parse().map_err(|_| bad(&headers[c])))
                .collect()
        };
        rows.push(SeriesRow {
            step: rec[fixed[0]].parse().map_err(|_| bad("step"))?,
            t: num(1)?,
            dpsi_sup: num(2)?,
            lambda_sup: num(3)?,
            torsion_sup: num(4)?,
            min_eig_g: num(5)?,
            phi_n: num(6)?,
            psi_n: maybe(7)?,
            psi_n_from_zero: maybe(8)?,
            route_discrepancy: maybe(9)?,
            wall_time: num(10)?,
            noise_rm: &rec[fixed[11]] == "1",
            noise_torsion: &rec[fixed[12]] == "1",
            a: list(&a_cols)?,
            b: list(&b_cols)?,
        });
    }
    Ok(rows)
}

/// Writes a pretty JSON document.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut f = File::create(path).map_err(CliError::io(path))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n").map_err(CliError::io(path))?;
    Ok(())
}
