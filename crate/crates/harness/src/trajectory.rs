//! CSV persistence of certificate rows and iterates.
//!
//! Floats are written in shortest round-trip form so that re-reading a file
//! reproduces every value bit for bit.

use std::fs;
use std::path::Path;

use chambolle_pock::certificates::CertificateRow;
use chambolle_pock::hilbert::{PPoint, Vector};

use crate::error::{HarnessError, Result};

/// Column order of the certificate CSV.
pub const COLUMNS: [&str; 10] = [
    "k",
    "gap",
    "ergodic_gap",
    "lyapunov",
    "descent_residual",
    "lower_bound_residual",
    "eta_plus",
    "eta_minus",
    "dist_to_star",
    "sum_gap",
];

pub(crate) fn fmt_f64(v: f64) -> String {
    ryu::Buffer::new().format(v).to_string()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn parse_f64(field: &str, column: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| HarnessError::Usage(format!("line {line}: bad value `{field}` in column `{column}`")))
}

fn parse_opt(field: &str, column: &str, line: usize) -> Result<Option<f64>> {
    if field.trim().is_empty() {
        Ok(None)
    } else {
        parse_f64(field, column, line).map(Some)
    }
}

fn write_file(path: &Path, bytes: Vec<u8>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

pub fn certificates_to_csv(rows: &[CertificateRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            fmt_f64(r.gap),
            fmt_opt(r.ergodic_gap),
            fmt_f64(r.lyapunov),
            fmt_opt(r.descent_residual),
            fmt_f64(r.lower_bound_residual),
            fmt_f64(r.eta_plus),
            fmt_f64(r.eta_minus),
            fmt_f64(r.dist_to_star),
            fmt_f64(r.sum_gap),
        ])?;
    }
    w.into_inner().map_err(|e| HarnessError::Usage(e.to_string()))
}

pub fn write_certificates(path: &Path, rows: &[CertificateRow]) -> Result<()> {
    write_file(path, certificates_to_csv(rows)?)
}

fn open(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::Reader::from_reader(file))
}

/// Positions of `wanted` in the header, or a usage error naming the first missing column.
pub(crate) fn column_indices(headers: &csv::StringRecord, wanted: &[&str]) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| HarnessError::Usage(format!("missing column `{name}`")))
        })
        .collect()
}

pub fn read_certificates(path: &Path) -> Result<Vec<CertificateRow>> {
    let mut rdr = open(path)?;
    let idx = column_indices(rdr.headers()?, &COLUMNS)?;
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = line + 2;
        let get = |i: usize| rec.get(idx[i]).unwrap_or("");
        let req = |i: usize| parse_f64(get(i), COLUMNS[i], line);
        let opt = |i: usize| parse_opt(get(i), COLUMNS[i], line);
        let k = get(0)
            .trim()
            .parse()
            .map_err(|_| HarnessError::Usage(format!("line {line}: bad iteration index `{}`", get(0))))?;
        rows.push(CertificateRow {
            k,
            gap: req(1)?,
            ergodic_gap: opt(2)?,
            lyapunov: req(3)?,
            descent_residual: opt(4)?,
            lower_bound_residual: req(5)?,
            eta_plus: req(6)?,
            eta_minus: req(7)?,
            dist_to_star: req(8)?,
            sum_gap: req(9)?,
        });
    }
    Ok(rows)
}

fn iterate_header(primal_dim: usize, dual_dim: usize) -> Vec<String> {
    std::iter::once("k".to_string())
        .chain((0..primal_dim).map(|i| format!("x{i}")))
        .chain((0..dual_dim).map(|i| format!("y{i}")))
        .collect()
}

/// Writes `z^0, z^1, ...` one per row as `k, x0.., y0..`.
pub fn write_iterates(path: &Path, iterates: &[PPoint]) -> Result<()> {
    let (n, m) = iterates.first().map_or((0, 0), |z| (z.x.len(), z.y.len()));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(iterate_header(n, m))?;
    for (k, z) in iterates.iter().enumerate() {
        let record: Vec<String> = std::iter::once(k.to_string())
            .chain(z.x.iter().chain(z.y.iter()).map(|&v| fmt_f64(v)))
            .collect();
        w.write_record(record)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Usage(e.to_string()))?;
    write_file(path, bytes)
}

/// Reads iterates written by [`write_iterates`]; rows must be `k = 0, 1, ...` in order.
pub fn read_iterates(path: &Path, primal_dim: usize, dual_dim: usize) -> Result<Vec<PPoint>> {
    let mut rdr = open(path)?;
    let header = iterate_header(primal_dim, dual_dim);
    let names: Vec<&str> = header.iter().map(String::as_str).collect();
    let idx = column_indices(rdr.headers()?, &names)?;
    let mut out = Vec::new();
    for (expected_k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = expected_k + 2;
        let values = idx
            .iter()
            .zip(&names)
            .map(|(&i, name)| parse_f64(rec.get(i).unwrap_or(""), name, line))
            .collect::<Result<Vec<f64>>>()?;
        if values[0] != expected_k as f64 {
            return Err(HarnessError::Usage(format!(
                "line {line}: expected iteration {expected_k}, found {}",
                values[0]
            )));
        }
        let x = Vector::new(values[1..=primal_dim].to_vec());
        let y = Vector::new(values[primal_dim + 1..].to_vec());
        out.push(PPoint::new(x, y));
    }
    Ok(out)
}
