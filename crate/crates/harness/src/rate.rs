//! Least-squares fit of `log value` against `log k`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::trajectory::column_indices;

/// Minimum number of usable points in a fit window.
pub const MIN_POINTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Inclusive `(k_min, k_max)`.
    pub window: (usize, usize),
    /// Points that entered the fit.
    pub points: usize,
}

/// Fits `log v = intercept + slope log k` over `k_min <= k <= k_max`.
///
/// Points with `k = 0` or a non-positive or non-finite value are skipped.
pub fn fit_rate(series: &[(usize, f64)], window: (usize, usize)) -> Result<RateFit> {
    let (k_min, k_max) = window;
    if k_min > k_max {
        return Err(HarnessError::Usage(format!("empty rate window [{k_min}, {k_max}]")));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(k, v)| k >= k_min.max(1) && k <= k_max && v > 0.0 && v.is_finite())
        .map(|&(k, v)| ((k as f64).ln(), v.ln()))
        .collect();
    if pts.len() < MIN_POINTS {
        return Err(HarnessError::Usage(format!(
            "rate fit needs at least {MIN_POINTS} positive points in [{k_min}, {k_max}], found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        window,
        points: pts.len(),
    })
}

/// `(k, value)` pairs of one CSV column; blank cells are skipped.
pub fn read_series(path: &Path, column: &str) -> Result<Vec<(usize, f64)>> {
    let file = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let idx = column_indices(rdr.headers()?, &["k", column])?;
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = || HarnessError::Usage(format!("line {}: unparsable row", line + 2));
        let v = rec.get(idx[1]).unwrap_or("").trim();
        if v.is_empty() {
            continue;
        }
        let k = rec.get(idx[0]).unwrap_or("").trim().parse().map_err(|_| bad())?;
        out.push((k, v.parse().map_err(|_| bad())?));
    }
    Ok(out)
}
