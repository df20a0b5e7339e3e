//! Diagnostic time series of a run and its CSV form.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::evolve::SphereMap;
use crate::{Error, Result, Vec3};

pub const SERIES_SCHEMA: u32 = 1;

/// (name, description) of every CSV column, in order.
pub const SERIES_COLUMNS: [(&str, &str); 12] = [
    ("t", "time"),
    ("s", "fitted scale"),
    ("alpha", "fitted rotation angle"),
    ("energy", "discrete energy E"),
    ("q_l2", "L2(r dr) norm of q"),
    ("z_x", "X norm of the remainder z"),
    ("z_sup", "sup norm of z"),
    ("nf_re", "normal-form correction, real part"),
    ("nf_im", "normal-form correction, imaginary part"),
    ("prediction", "formula prediction of [log s]_0^t (nan if not evaluated)"),
    ("dissipation", "int_0^t 2 pi int |P^v Delta_m v|^2 r dr dt"),
    ("log_s", "natural log of s"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub t: f64,
    pub s: f64,
    pub alpha: f64,
    pub energy: f64,
    pub q_norm: f64,
    pub z_x: f64,
    pub z_sup: f64,
    pub normal_form: Complex64,
    pub prediction: Option<f64>,
    pub dissipation: f64,
}

impl RunRecord {
    /// A record with only time, energy and dissipation filled; the rest is NaN.
    pub fn blank(t: f64, energy: f64, dissipation: f64) -> Self {
        Self {
            t,
            s: f64::NAN,
            alpha: f64::NAN,
            energy,
            q_norm: f64::NAN,
            z_x: f64::NAN,
            z_sup: f64::NAN,
            normal_form: Complex64::new(f64::NAN, f64::NAN),
            prediction: None,
            dissipation,
        }
    }

    pub fn log_s(&self) -> f64 {
        self.s.ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSeries {
    pub m: u32,
    pub a: Complex64,
    pub records: Vec<RunRecord>,
    pub snapshots: Vec<(f64, Vec<Vec3>)>,
    pub final_map: Option<SphereMap>,
}

impl RunSeries {
    pub fn new(m: u32, a: Complex64) -> Self {
        Self { m, a, records: Vec::new(), snapshots: Vec::new(), final_map: None }
    }

    /// Appends a record; times must increase strictly.
    pub fn push(&mut self, rec: RunRecord) {
        if let Some(last) = self.records.last() {
            assert!(rec.t > last.t, "record times must increase ({} after {})", rec.t, last.t);
        }
        self.records.push(rec);
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn log_s(&self) -> Vec<f64> {
        self.records.iter().map(RunRecord::log_s).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }

    pub fn q_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.q_norm).collect()
    }

    /// Records with `t` in `[t0, t1]`.
    pub fn window(&self, t0: f64, t1: f64) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(move |r| r.t >= t0 && r.t <= t1)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# equiflow series schema {SERIES_SCHEMA}")?;
        writeln!(w, "# m = {}, a = {} {:+}i", self.m, self.a.re, self.a.im)?;
        for (name, desc) in SERIES_COLUMNS {
            writeln!(w, "# {name}: {desc}")?;
        }
        let header: Vec<&str> = SERIES_COLUMNS.iter().map(|c| c.0).collect();
        writeln!(w, "{}", header.join(","))?;
        for r in &self.records {
            let cells = [
                r.t,
                r.s,
                r.alpha,
                r.energy,
                r.q_norm,
                r.z_x,
                r.z_sup,
                r.normal_form.re,
                r.normal_form.im,
                r.prediction.unwrap_or(f64::NAN),
                r.dissipation,
                r.log_s(),
            ];
            let line: Vec<String> = cells.iter().map(|c| format!("{c:.17e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Reads the records back; snapshots are not part of the series file.
    pub fn read_csv<R: BufRead>(r: R, m: u32, a: Complex64) -> Result<Self> {
        let mut out = Self::new(m, a);
        let mut seen_header = false;
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !seen_header {
                seen_header = true;
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: k + 1, msg: e.to_string() })?;
            if vals.len() != SERIES_COLUMNS.len() {
                return Err(Error::Parse {
                    line: k + 1,
                    msg: format!("expected {} columns, got {}", SERIES_COLUMNS.len(), vals.len()),
                });
            }
            out.records.push(RunRecord {
                t: vals[0],
                s: vals[1],
                alpha: vals[2],
                energy: vals[3],
                q_norm: vals[4],
                z_x: vals[5],
                z_sup: vals[6],
                normal_form: Complex64::new(vals[7], vals[8]),
                prediction: if vals[9].is_nan() { None } else { Some(vals[9]) },
                dissipation: vals[10],
            });
        }
        Ok(out)
    }
}

/// `sum |x_{k+1} - x_k|`.
pub fn total_variation(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}
