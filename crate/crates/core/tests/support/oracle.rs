//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use chambolle_pock::hilbert::{DenseMatrix, Vector};
use chambolle_pock::prox::ProxFn;

/// Eigenvalues of a symmetric matrix (row-major, `n x n`) by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Largest singular value via the spectrum of `M^T M`.
pub fn largest_singular_value(m: &DenseMatrix) -> f64 {
    let (r, c) = (m.rows(), m.cols());
    let mut gram = vec![0.0; c * c];
    for i in 0..c {
        for j in 0..c {
            gram[i * c + j] = (0..r).map(|k| m.get(k, i) * m.get(k, j)).sum();
        }
    }
    jacobi_eigenvalues(gram, c).into_iter().fold(0.0f64, f64::max).max(0.0).sqrt()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for i in col + 1..n {
            let factor = m[i][col] / m[col][col];
            for j in col..=n {
                m[i][j] -= factor * m[col][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// 1-D TV denoising `min 1/2 |x - s|^2 + lambda |Dx|_1` by exhaustive
/// active-set enumeration of the dual box QP
/// `min_{|y|_inf <= lambda} 1/2 |s - D^T y|^2`; returns `(x*, y*)`.
///
/// Each dual coordinate is either at `-lambda`, free, or at `+lambda`. For every
/// one of the `3^(n-1)` patterns the free coordinates solve a linear system;
/// the feasible candidate with the smallest objective wins.
pub fn tv_active_set(signal: &[f64], lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = signal.len();
    let m = n - 1;
    assert!(m <= 9, "exhaustive oracle is for small n");
    // D^T y: (D^T y)_j = y_{j-1} - y_j.
    let dt = |y: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|j| {
                let left = if j > 0 { y[j - 1] } else { 0.0 };
                let right = if j < m { y[j] } else { 0.0 };
                left - right
            })
            .collect()
    };
    let objective = |y: &[f64]| -> f64 {
        let r = dt(y);
        0.5 * signal.iter().zip(&r).map(|(s, v)| (s - v) * (s - v)).sum::<f64>()
    };
    // D D^T is tridiagonal with 2 on the diagonal and -1 off it; D s is the difference vector.
    let ds: Vec<f64> = (0..m).map(|i| signal[i + 1] - signal[i]).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for code in 0..3usize.pow(m as u32) {
        let mut state = vec![0i8; m];
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as i8 - 1;
            c /= 3;
        }
        let mut y: Vec<f64> = state.iter().map(|&s| s as f64 * lambda).collect();
        let free: Vec<usize> = (0..m).filter(|&i| state[i] == 0).collect();
        if !free.is_empty() {
            // Stationarity on free coordinates: (D D^T y)_i = (D s)_i.
            let nf = free.len();
            let mut a = vec![0.0; nf * nf];
            let mut rhs = vec![0.0; nf];
            for (r, &i) in free.iter().enumerate() {
                let mut b = ds[i];
                for j in 0..m {
                    let dd = if i == j {
                        2.0
                    } else if i.abs_diff(j) == 1 {
                        -1.0
                    } else {
                        0.0
                    };
                    match free.iter().position(|&f| f == j) {
                        Some(col) => a[r * nf + col] = dd,
                        None => b -= dd * y[j],
                    }
                }
                rhs[r] = b;
            }
            let sol = gauss_solve(&DenseMatrix::new(nf, nf, a).unwrap(), &rhs);
            for (k, &i) in free.iter().enumerate() {
                y[i] = sol[k];
            }
            if free.iter().any(|&i| y[i].abs() > lambda * (1.0 + 1e-12) + 1e-14) {
                continue;
            }
        }
        let val = objective(&y);
        if best.as_ref().is_none_or(|(b, _)| val < *b - 1e-15) {
            best = Some((val, y));
        }
    }
    let (_, y) = best.expect("the all-bound pattern is always feasible");
    let r = dt(&y);
    let x = signal.iter().zip(&r).map(|(s, v)| s - v).collect();
    (x, y)
}

/// `u in d(lambda |.|_1)(p)` by the componentwise sign/interval rule.
pub fn in_l1_subdifferential(p: &Vector, u: &Vector, lambda: f64, tol: f64) -> bool {
    p.iter().zip(u.iter()).all(|(&pi, &ui)| {
        if pi > 0.0 {
            (ui - lambda).abs() <= tol
        } else if pi < 0.0 {
            (ui + lambda).abs() <= tol
        } else {
            ui.abs() <= lambda + tol
        }
    })
}

/// `u in df(p)` for every shipped prox function, written from the definitions
/// rather than from the library's own subdifferential test.
pub fn in_subdifferential(f: &ProxFn, p: &Vector, u: &Vector, tol: f64) -> bool {
    let pairs = || p.iter().copied().zip(u.iter().copied());
    match f {
        ProxFn::Zero => u.norm_inf() <= tol,
        ProxFn::L1 { lambda } => in_l1_subdifferential(p, u, *lambda, tol),
        ProxFn::Quadratic { center, .. } => (p - center)
            .iter()
            .zip(u.iter())
            .all(|(g, ui)| (g - ui).abs() <= tol * (1.0 + g.abs())),
        // Normal cone of the nonnegative orthant: u <= 0, u_i = 0 where p_i > 0.
        ProxFn::NonnegIndicator => pairs().all(|(pi, ui)| pi >= 0.0 && ui <= tol && (pi == 0.0 || ui.abs() <= tol)),
        ProxFn::NonposIndicator => pairs().all(|(pi, ui)| pi <= 0.0 && ui >= -tol && (pi == 0.0 || ui.abs() <= tol)),
        ProxFn::LinfBall { radius } => pairs().all(|(pi, ui)| {
            if pi == *radius {
                ui >= -tol
            } else if pi == -*radius {
                ui <= tol
            } else {
                pi.abs() < *radius && ui.abs() <= tol
            }
        }),
        ProxFn::OriginIndicator => p.norm_inf() == 0.0,
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
