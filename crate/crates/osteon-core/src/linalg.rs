//! Minimal dense linear algebra: LU and Cholesky solves for the small
//! systems assembled by the solvers (normal equations up to a few hundred
//! unknowns) and a cyclic Jacobi eigendecomposition for symmetric 3x3
//! matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;
use crate::vec3::{Mat3, Vec3};

/// Solve `a * x = b` for square `a` (row-major, `n x n`) in place with
/// partial pivoting. Returns `false` when the matrix is singular to working
/// precision; `a` and `b` are clobbered either way, with the solution left
/// in `b` on success.
pub fn lu_solve_in_place(n: usize, a: &mut [f64], b: &mut [f64]) -> bool {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        let mut best = fmath::abs(a[col * n + col]);
        for r in col + 1..n {
            let v = fmath::abs(a[r * n + col]);
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best <= f64::MIN_POSITIVE * 16.0 {
            return false;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            a[r * n + col] = 0.0;
            for j in col + 1..n {
                a[r * n + j] -= f * a[col * n + j];
            }
            b[r] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for j in col + 1..n {
            s -= a[col * n + j] * b[j];
        }
        b[col] = s / a[col * n + col];
    }
    true
}

/// Solve a symmetric positive definite system `a * x = b` by Cholesky
/// factorization. Returns `None` when the matrix is not positive definite
/// to working precision.
pub fn cholesky_solve(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = fmath::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Eigendecomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues sorted in
/// descending order and eigenvectors as the matching columns of an
/// orthonormal matrix.
pub fn sym_eigen_3x3(s: &Mat3) -> ([f64; 3], Mat3) {
    let mut a = *s;
    // Symmetrize defensively; callers pass Gram matrices.
    for i in 0..3 {
        for j in 0..3 {
            let v = 0.5 * (a.m[i][j] + a.m[j][i]);
            a.m[i][j] = v;
            a.m[j][i] = v;
        }
    }
    let mut v = Mat3::identity();
    let scale = a.max_abs_entry();
    if scale == 0.0 {
        return ([0.0; 3], v);
    }
    for _sweep in 0..32 {
        let off = fmath::abs(a.m[0][1]) + fmath::abs(a.m[0][2]) + fmath::abs(a.m[1][2]);
        if off <= scale * 1e-30 {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a.m[p][q];
            if fmath::abs(apq) <= scale * 1e-300 {
                continue;
            }
            let theta = (a.m[q][q] - a.m[p][p]) / (2.0 * apq);
            let t = if theta >= 0.0 {
                1.0 / (theta + fmath::sqrt(1.0 + theta * theta))
            } else {
                -1.0 / (-theta + fmath::sqrt(1.0 + theta * theta))
            };
            let c = 1.0 / fmath::sqrt(1.0 + t * t);
            let s_ = t * c;
            // Apply the rotation on both sides.
            for k in 0..3 {
                let akp = a.m[k][p];
                let akq = a.m[k][q];
                a.m[k][p] = c * akp - s_ * akq;
                a.m[k][q] = s_ * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a.m[p][k];
                let aqk = a.m[q][k];
                a.m[p][k] = c * apk - s_ * aqk;
                a.m[q][k] = s_ * apk + c * aqk;
            }
            for k in 0..3 {
                let vkp = v.m[k][p];
                let vkq = v.m[k][q];
                v.m[k][p] = c * vkp - s_ * vkq;
                v.m[k][q] = s_ * vkp + c * vkq;
            }
        }
    }
    let mut vals = [a.m[0][0], a.m[1][1], a.m[2][2]];
    let mut order = [0usize, 1, 2];
    // Insertion sort descending.
    for i in 1..3 {
        let mut j = i;
        while j > 0 && vals[order[j - 1]] < vals[order[j]] {
            order.swap(j - 1, j);
            j -= 1;
        }
    }
    let sorted = [vals[order[0]], vals[order[1]], vals[order[2]]];
    let cols = Mat3::from_cols(v.col(order[0]), v.col(order[1]), v.col(order[2]));
    vals = sorted;
    (vals, cols)
}

/// Dense accumulator for `J^T J` / `J^T r` normal equations, filled one
/// residual row at a time.
pub struct NormalEq {
    pub n: usize,
    pub ata: Vec<f64>,
    pub atb: Vec<f64>,
}

impl NormalEq {
    pub fn new(n: usize) -> Self {
        Self { n, ata: vec![0.0; n * n], atb: vec![0.0; n] }
    }

    pub fn clear(&mut self) {
        self.ata.iter_mut().for_each(|v| *v = 0.0);
        self.atb.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Add one scalar residual row: `row . x ~ target`, weighted by `w`
    /// (the row enters the quadratic as `w * (row.x - target)^2`).
    pub fn add_row_sparse(&mut self, row: &[(usize, f64)], target: f64, w: f64) {
        for &(i, vi) in row {
            let wi = w * vi;
            self.atb[i] += wi * target;
            for &(j, vj) in row {
                self.ata[i * self.n + j] += wi * vj;
            }
        }
    }

    /// Add `w * (x_i - target)^2`.
    pub fn add_diag(&mut self, i: usize, target: f64, w: f64) {
        self.ata[i * self.n + i] += w;
        self.atb[i] += w * target;
    }

    /// Add a dense vector row.
    pub fn add_row_dense(&mut self, row: &[f64], target: f64, w: f64) {
        for i in 0..self.n {
            let vi = row[i];
            if vi == 0.0 {
                continue;
            }
            let wi = w * vi;
            self.atb[i] += wi * target;
            for j in 0..self.n {
                self.ata[i * self.n + j] += wi * row[j];
            }
        }
    }

    /// Solve the accumulated system, optionally with Levenberg damping
    /// `mu * diag` added to the diagonal.
    pub fn solve_damped(&self, mu: f64, diag_floor: f64) -> Option<Vec<f64>> {
        let n = self.n;
        let mut a = self.ata.clone();
        if mu != 0.0 || diag_floor != 0.0 {
            let mut mean_diag = 0.0;
            for i in 0..n {
                mean_diag += self.ata[i * n + i];
            }
            mean_diag /= n as f64;
            let floor = diag_floor * fmath::max(mean_diag, f64::MIN_POSITIVE);
            for i in 0..n {
                a[i * n + i] += mu * (self.ata[i * n + i] + floor);
            }
        }
        let mut b = self.atb.clone();
        if lu_solve_in_place(n, &mut a, &mut b) {
            Some(b)
        } else {
            None
        }
    }
}

/// Solve a 3x3 system; `None` when singular.
pub fn solve_3x3(a: &Mat3, b: Vec3) -> Option<Vec3> {
    let mut m = [
        a.m[0][0], a.m[0][1], a.m[0][2], a.m[1][0], a.m[1][1], a.m[1][2], a.m[2][0], a.m[2][1],
        a.m[2][2],
    ];
    let mut rhs = [b.x, b.y, b.z];
    if lu_solve_in_place(3, &mut m, &mut rhs) {
        Some(Vec3::new(rhs[0], rhs[1], rhs[2]))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_random_system() {
        let a = [4.0, 1.0, 2.0, 1.0, 3.0, 0.5, 2.0, 0.5, 5.0];
        let x_true = [1.0, -2.0, 0.5];
        let mut b = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += a[i * 3 + j] * x_true[j];
            }
        }
        let mut a_work = a;
        assert!(lu_solve_in_place(3, &mut a_work, &mut b));
        for i in 0..3 {
            assert!((b[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_matches_lu() {
        let a = [4.0, 1.0, 2.0, 1.0, 3.0, 0.5, 2.0, 0.5, 5.0];
        let b = [1.0, 2.0, 3.0];
        let x = cholesky_solve(3, &a, &b).unwrap();
        let mut a_work = a;
        let mut b_work = b;
        assert!(lu_solve_in_place(3, &mut a_work, &mut b_work));
        for i in 0..3 {
            assert!((x[i] - b_work[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_recovers_diagonal() {
        let m = Mat3::from_rows([3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]);
        let (vals, _) = sym_eigen_3x3(&m);
        assert!((vals[0] - 3.0).abs() < 1e-14);
        assert!((vals[1] - 2.0).abs() < 1e-14);
        assert!((vals[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_eigenvectors_orthonormal() {
        let m = Mat3::from_rows([2.0, 0.5, 0.1], [0.5, 1.0, -0.3], [0.1, -0.3, 4.0]);
        let (vals, v) = sym_eigen_3x3(&m);
        // V^T V = I
        let vtv = v.transpose() * v;
        assert!(vtv.frobenius_distance(&Mat3::identity()) < 1e-12);
        // M v_i = lambda_i v_i
        for i in 0..3 {
            let mv = m * v.col(i);
            let lv = v.col(i) * vals[i];
            assert!((mv - lv).norm() < 1e-10);
        }
    }
}
