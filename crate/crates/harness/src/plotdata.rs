//! Plot-ready two-column files from a certificate CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::trajectory::{column_indices, COLUMNS};

/// Metrics drawn on log-log axes by the generated script.
const LOG_METRICS: [&str; 4] = ["gap", "ergodic_gap", "lyapunov", "dist_to_star"];

/// Writes `<metric>.dat` and `<metric>.loglog.dat` for every metric column
/// plus `plot.gp`. Blank cells are dropped from `.dat` files; the log-log
/// variant keeps every row and blanks values that are not strictly positive.
pub fn emit_plotdata(csv_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let file = fs::File::open(csv_path).map_err(|e| HarnessError::io(csv_path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let idx = column_indices(rdr.headers()?, &COLUMNS)?;
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let k_field = rec.get(idx[0]).unwrap_or("");
        let k = k_field
            .trim()
            .parse()
            .map_err(|_| HarnessError::Usage(format!("line {}: bad iteration index `{k_field}`", line + 2)))?;
        rows.push((k, idx.iter().map(|&i| rec.get(i).unwrap_or("").trim().to_string()).collect()));
    }
    rows.sort_by_key(|r| r.0);

    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut written = Vec::new();
    for (c, metric) in COLUMNS.iter().enumerate().skip(1) {
        let mut plain = String::new();
        let mut loglog = String::new();
        for (k, values) in &rows {
            let v = &values[c];
            if !v.is_empty() {
                writeln!(plain, "{k}\t{v}").unwrap();
            }
            let positive = v.parse::<f64>().is_ok_and(|x| x > 0.0 && x.is_finite());
            if positive {
                writeln!(loglog, "{k}\t{v}").unwrap();
            } else {
                writeln!(loglog, "{k}\t").unwrap();
            }
        }
        for (name, body) in [(format!("{metric}.dat"), plain), (format!("{metric}.loglog.dat"), loglog)] {
            let path = out_dir.join(name);
            fs::write(&path, body).map_err(|e| HarnessError::io(&path, e))?;
            written.push(path);
        }
    }
    let script = out_dir.join("plot.gp");
    fs::write(&script, gnuplot_script()).map_err(|e| HarnessError::io(&script, e))?;
    written.push(script);
    Ok(written)
}

fn gnuplot_script() -> String {
    let mut s = String::from(
        "# gnuplot -persist plot.gp\nset datafile missing ''\nset key top right\nset xlabel 'k'\n\nset logscale xy\nplot \\\n",
    );
    let lines: Vec<String> = LOG_METRICS
        .iter()
        .map(|m| format!("  '{m}.loglog.dat' using 1:2 with lines title '{m}'"))
        .collect();
    s.push_str(&lines.join(", \\\n"));
    s.push_str("\n\npause -1\nunset logscale\nplot \\\n");
    s.push_str("  'descent_residual.dat' using 1:2 with lines title 'descent residual', \\\n");
    s.push_str("  'lower_bound_residual.dat' using 1:2 with lines title 'lower bound residual'\n");
    s
}
