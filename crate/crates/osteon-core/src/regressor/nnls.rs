//! Non-negative least squares by the active-set method, working on the
//! Gram matrix so the same factorization path serves both the raw API and
//! the regressor training loops (which reuse one Gram per joint).

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;
use crate::linalg::{cholesky_solve, lu_solve_in_place};
use crate::tol;

/// Outcome of an NNLS solve.
#[derive(Debug, Clone)]
pub struct NnlsResult {
    pub x: Vec<f64>,
    /// False when the iteration cap was hit; `x` is the best iterate.
    pub converged: bool,
    pub iterations: usize,
}

/// Minimize `|A x - b|` subject to `x >= 0`.
///
/// `a` is row-major `rows x cols`. The result carries a non-convergence
/// flag instead of erroring when the iteration cap is reached.
pub fn nnls_solve(rows: usize, cols: usize, a: &[f64], b: &[f64]) -> NnlsResult {
    assert!(cols >= 1, "need at least one column");
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    let mut gram = vec![0.0; cols * cols];
    let mut h = vec![0.0; cols];
    for r in 0..rows {
        let row = &a[r * cols..(r + 1) * cols];
        for i in 0..cols {
            if row[i] == 0.0 {
                continue;
            }
            h[i] += row[i] * b[r];
            for j in 0..cols {
                gram[i * cols + j] += row[i] * row[j];
            }
        }
    }
    nnls_solve_gram(cols, &gram, &h)
}

/// NNLS on a precomputed Gram system `G = A^T A`, `h = A^T b`.
pub fn nnls_solve_gram(cols: usize, gram: &[f64], h: &[f64]) -> NnlsResult {
    let mut x = vec![0.0; cols];
    let mut in_set = vec![false; cols];
    let mut banned = vec![false; cols];
    let mut support: Vec<usize> = Vec::new();
    let mut h_inf: f64 = 0.0;
    for &v in h {
        h_inf = fmath::max(h_inf, fmath::abs(v));
    }
    let dual_tol = tol::NNLS_KKT * fmath::max(1.0, h_inf);

    let max_outer = 6 * cols + 30;
    let mut iterations = 0;
    for _ in 0..max_outer {
        iterations += 1;
        // Dual vector w = h - G x.
        let mut best = -1isize;
        let mut best_w = dual_tol;
        for j in 0..cols {
            if in_set[j] || banned[j] {
                continue;
            }
            let mut w = h[j];
            for (k, &xk) in x.iter().enumerate() {
                if xk != 0.0 {
                    w -= gram[j * cols + k] * xk;
                }
            }
            if w > best_w {
                best_w = w;
                best = j as isize;
            }
        }
        if best < 0 {
            return NnlsResult { x, converged: true, iterations };
        }
        in_set[best as usize] = true;
        support.push(best as usize);

        // Inner loop: solve on the support, step back when entries leave
        // the feasible region.
        let mut inner_ok = false;
        for _ in 0..max_outer {
            match solve_support(cols, gram, h, &support) {
                None => {
                    // Numerically dependent column: drop it for good.
                    let j = support.pop().unwrap();
                    in_set[j] = false;
                    banned[j] = true;
                    inner_ok = true;
                    break;
                }
                Some(z) => {
                    let feasible = z.iter().all(|&v| v > 0.0);
                    if feasible {
                        for xv in x.iter_mut() {
                            *xv = 0.0;
                        }
                        for (idx, &j) in support.iter().enumerate() {
                            x[j] = z[idx];
                        }
                        inner_ok = true;
                        break;
                    }
                    // Interpolate towards z until the first coordinate hits 0.
                    let mut alpha = f64::INFINITY;
                    for (idx, &j) in support.iter().enumerate() {
                        if z[idx] <= 0.0 {
                            let denom = x[j] - z[idx];
                            if denom > 0.0 {
                                alpha = fmath::min(alpha, x[j] / denom);
                            } else {
                                alpha = 0.0;
                            }
                        }
                    }
                    if !alpha.is_finite() {
                        alpha = 0.0;
                    }
                    for (idx, &j) in support.iter().enumerate() {
                        x[j] += alpha * (z[idx] - x[j]);
                    }
                    // Remove zeroed coordinates.
                    let mut removed = false;
                    let mut keep = Vec::with_capacity(support.len());
                    for &j in &support {
                        if x[j] <= 1e-14 {
                            x[j] = 0.0;
                            in_set[j] = false;
                            removed = true;
                        } else {
                            keep.push(j);
                        }
                    }
                    support = keep;
                    if !removed {
                        // Should not happen; bail out of the inner loop.
                        inner_ok = true;
                        break;
                    }
                }
            }
        }
        if !inner_ok {
            return NnlsResult { x, converged: false, iterations };
        }
    }
    NnlsResult { x, converged: false, iterations }
}

fn solve_support(cols: usize, gram: &[f64], h: &[f64], support: &[usize]) -> Option<Vec<f64>> {
    let m = support.len();
    let mut g = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for (i, &ji) in support.iter().enumerate() {
        rhs[i] = h[ji];
        for (j, &jj) in support.iter().enumerate() {
            g[i * m + j] = gram[ji * cols + jj];
        }
    }
    cholesky_solve(m, &g, &rhs)
}

/// NNLS followed by a sum-to-one re-solve on the active support: the
/// equality-constrained least squares problem is solved on the support,
/// dropping coordinates that turn negative until the solution is feasible.
pub fn nnls_solve_gram_sum_one(cols: usize, gram: &[f64], h: &[f64]) -> NnlsResult {
    let base = nnls_solve_gram(cols, gram, h);
    let mut support: Vec<usize> =
        (0..cols).filter(|&j| base.x[j] > 0.0).collect();
    if support.is_empty() {
        // Degenerate data: fall back to the single best column.
        let mut best = 0;
        for j in 1..cols {
            if h[j] > h[best] {
                best = j;
            }
        }
        support.push(best);
    }
    let mut iterations = base.iterations;
    loop {
        iterations += 1;
        let m = support.len();
        if m == 1 {
            let mut x = vec![0.0; cols];
            x[support[0]] = 1.0;
            return NnlsResult { x, converged: base.converged, iterations };
        }
        // KKT system of min |A x - b|^2 s.t. sum x = 1 on the support.
        let n = m + 1;
        let mut kkt = vec![0.0; n * n];
        let mut rhs = vec![0.0; n];
        for (i, &ji) in support.iter().enumerate() {
            rhs[i] = h[ji];
            for (j, &jj) in support.iter().enumerate() {
                kkt[i * n + j] = gram[ji * cols + jj];
            }
            kkt[i * n + m] = 1.0;
            kkt[m * n + i] = 1.0;
        }
        rhs[m] = 1.0;
        let solved = lu_solve_in_place(n, &mut kkt, &mut rhs);
        if !solved {
            // Dependent support: drop the last added coordinate.
            support.pop();
            continue;
        }
        let worst = support
            .iter()
            .enumerate()
            .filter(|(i, _)| rhs[*i] < -1e-12)
            .min_by(|a, b| rhs[a.0].partial_cmp(&rhs[b.0]).unwrap());
        match worst {
            None => {
                let mut x = vec![0.0; cols];
                let mut sum = 0.0;
                for (i, &j) in support.iter().enumerate() {
                    let v = fmath::max(rhs[i], 0.0);
                    x[j] = v;
                    sum += v;
                }
                for v in x.iter_mut() {
                    *v /= sum;
                }
                return NnlsResult { x, converged: base.converged, iterations };
            }
            Some((drop_idx, _)) => {
                support.remove(drop_idx);
            }
        }
    }
}

/// Largest KKT violation of `x` for `min |A x - b|^2, x >= 0` given the
/// Gram system: positive-part gradient at zero coordinates and absolute
/// gradient at positive ones.
pub fn kkt_violation(cols: usize, gram: &[f64], h: &[f64], x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..cols {
        let mut grad = -h[j];
        for (k, &xk) in x.iter().enumerate() {
            if xk != 0.0 {
                grad += gram[j * cols + k] * xk;
            }
        }
        if x[j] > 0.0 {
            worst = fmath::max(worst, fmath::abs(grad));
        } else {
            worst = fmath::max(worst, fmath::max(0.0, -grad));
        }
    }
    worst
}
