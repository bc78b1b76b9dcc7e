//! Anatomical joint regressor: nonnegative sparse rows mapping skin
//! vertices to joint centers.
//!
//! Each joint is trained independently by stacking the x/y/z coordinates of
//! all training frames into one least-squares system over a restricted
//! candidate vertex set, solved under nonnegativity with sum-to-one
//! enforced on the active support. The sum-to-one constraint is what makes
//! the regressed joints translation-equivariant.

mod nnls;

pub use nnls::{kkt_violation, nnls_solve, nnls_solve_gram, nnls_solve_gram_sum_one, NnlsResult};

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::fmath;
use crate::tol;
use crate::vec3::Vec3;

/// Regressor-module errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegressorError {
    /// Too few frames or subjects to train.
    InsufficientData,
    /// Vertex array does not match the regressor.
    DimensionMismatch { expected: usize, got: usize },
    /// Regressor rows violate their invariants.
    InvalidRows(&'static str),
}

impl fmt::Display for RegressorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegressorError::InsufficientData => write!(f, "insufficient training data"),
            RegressorError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            RegressorError::InvalidRows(msg) => write!(f, "invalid regressor rows: {msg}"),
        }
    }
}

impl core::error::Error for RegressorError {}

/// Sparse nonnegative joint regressor: one row per joint over the skin
/// vertices. Rows sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct JointRegressor {
    rows: Vec<Vec<(u32, f64)>>,
    vertex_count: usize,
}

impl JointRegressor {
    /// Validate row invariants: nonnegative entries, sums within
    /// [`tol::WEIGHT_ROW_SUM`] of one, and at most 5% of vertices per row.
    pub fn new(
        rows: Vec<Vec<(u32, f64)>>,
        vertex_count: usize,
    ) -> Result<Self, RegressorError> {
        let cap = sparsity_cap(vertex_count);
        for row in &rows {
            let mut sum = 0.0;
            for &(i, w) in row {
                if i as usize >= vertex_count || w < 0.0 {
                    return Err(RegressorError::DimensionMismatch {
                        expected: vertex_count,
                        got: i as usize,
                    });
                }
                sum += w;
            }
            if fmath::abs(sum - 1.0) > tol::WEIGHT_ROW_SUM {
                return Err(RegressorError::InvalidRows("row does not sum to one"));
            }
            if row.len() > cap {
                return Err(RegressorError::InvalidRows("row denser than the sparsity cap"));
            }
        }
        Ok(Self { rows, vertex_count })
    }

    pub fn rows(&self) -> &[Vec<(u32, f64)>] {
        &self.rows
    }

    pub fn joint_count(&self) -> usize {
        self.rows.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }
}

/// Largest admissible number of nonzeros per row: 5% of the vertices.
pub fn sparsity_cap(vertex_count: usize) -> usize {
    ((vertex_count as f64) * 0.05) as usize
}

/// Apply the regressor: `J = W V`.
pub fn regress_joints(
    regressor: &JointRegressor,
    vertices: &[Vec3],
) -> Result<Vec<Vec3>, RegressorError> {
    if vertices.len() != regressor.vertex_count {
        return Err(RegressorError::DimensionMismatch {
            expected: regressor.vertex_count,
            got: vertices.len(),
        });
    }
    Ok(regressor
        .rows
        .iter()
        .map(|row| {
            let mut p = Vec3::zero();
            for &(i, w) in row {
                p += vertices[i as usize] * w;
            }
            p
        })
        .collect())
}

/// One training frame: posed vertices with their target joints, tagged by
/// subject so the trainer can check subject diversity.
pub struct TrainingFrame<'a> {
    pub subject: usize,
    pub vertices: &'a [Vec3],
    pub joints: &'a [Vec3],
}

/// Training outcome: the regressor plus per-joint RMS residuals (meters).
pub struct TrainOutcome {
    pub regressor: JointRegressor,
    pub residual_rms: Vec<f64>,
}

#[derive(PartialEq)]
struct HeapEntry(f64, u32);

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance via reversed comparison.
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Candidate vertex sets by geodesic distance over the mesh edge graph:
/// for each seed point, the vertices within `radius` of the nearest vertex,
/// nearest-first, truncated to the sparsity cap.
pub fn geodesic_candidates(
    vertices: &[Vec3],
    triangles: &[[u32; 3]],
    seeds: &[Vec3],
    radius: f64,
) -> Vec<Vec<u32>> {
    let n = vertices.len();
    let mut adjacency: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for t in triangles {
        for e in 0..3 {
            let a = t[e] as usize;
            let b = t[(e + 1) % 3] as usize;
            let d = (vertices[a] - vertices[b]).norm();
            adjacency[a].push((b as u32, d));
            adjacency[b].push((a as u32, d));
        }
    }
    let cap = sparsity_cap(n).max(1);
    let mut out = Vec::with_capacity(seeds.len());
    for seed in seeds {
        // Joints sit inside the mesh, so seed the search from the whole
        // ring of surface vertices nearest the joint, not a single vertex;
        // otherwise the far side of the limb ends up beyond the radius.
        let mut best = f64::INFINITY;
        for v in vertices {
            let d = (*v - *seed).norm();
            if d < best {
                best = d;
            }
        }
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        for (vi, v) in vertices.iter().enumerate() {
            if (*v - *seed).norm() <= best + 0.03 {
                dist[vi] = 0.0;
                heap.push(HeapEntry(0.0, vi as u32));
            }
        }
        let mut reached: Vec<(f64, u32)> = Vec::new();
        while let Some(HeapEntry(d, vi)) = heap.pop() {
            if d > dist[vi as usize] {
                continue;
            }
            reached.push((d, vi));
            for &(nb, w) in &adjacency[vi as usize] {
                let nd = d + w;
                if nd <= radius && nd < dist[nb as usize] {
                    dist[nb as usize] = nd;
                    heap.push(HeapEntry(nd, nb));
                }
            }
        }
        reached.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        reached.truncate(cap);
        let mut set: Vec<u32> = reached.into_iter().map(|(_, vi)| vi).collect();
        set.sort_unstable();
        out.push(set);
    }
    out
}

/// Train one regressor row per candidate set from posed frames.
///
/// Requires at least 24 frames spanning at least two distinct subjects.
/// Each joint's system stacks the three coordinates of all frames; the
/// solve is nonnegative with sum-to-one enforced on the active support.
pub fn train_joint_regressor(
    frames: &[TrainingFrame<'_>],
    candidates: &[Vec<u32>],
) -> Result<TrainOutcome, RegressorError> {
    if frames.len() < 24 {
        return Err(RegressorError::InsufficientData);
    }
    {
        let first = frames[0].subject;
        if !frames.iter().any(|f| f.subject != first) {
            return Err(RegressorError::InsufficientData);
        }
    }
    let n_vertices = frames[0].vertices.len();
    let n_joints = candidates.len();
    for f in frames {
        if f.vertices.len() != n_vertices {
            return Err(RegressorError::DimensionMismatch {
                expected: n_vertices,
                got: f.vertices.len(),
            });
        }
        if f.joints.len() != n_joints {
            return Err(RegressorError::DimensionMismatch {
                expected: n_joints,
                got: f.joints.len(),
            });
        }
    }

    let mut rows = Vec::with_capacity(n_joints);
    let mut residual_rms = Vec::with_capacity(n_joints);
    #[cfg(feature = "parallel")]
    let per_joint: Vec<(Vec<(u32, f64)>, f64)> = {
        use rayon::prelude::*;
        (0..n_joints)
            .into_par_iter()
            .map(|j| train_single_joint(frames, &candidates[j], j))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_joint: Vec<(Vec<(u32, f64)>, f64)> =
        (0..n_joints).map(|j| train_single_joint(frames, &candidates[j], j)).collect();

    for (row, rms) in per_joint {
        rows.push(row);
        residual_rms.push(rms);
    }
    let regressor = JointRegressor::new(rows, n_vertices)?;
    Ok(TrainOutcome { regressor, residual_rms })
}

fn train_single_joint(
    frames: &[TrainingFrame<'_>],
    cand: &[u32],
    joint: usize,
) -> (Vec<(u32, f64)>, f64) {
    let m = cand.len();
    let mut gram = vec![0.0; m * m];
    let mut h = vec![0.0; m];
    let mut b_norm_sq = 0.0;
    let mut rows = 0usize;
    for f in frames {
        for c in 0..3 {
            let target = f.joints[joint][c];
            b_norm_sq += target * target;
            rows += 1;
            for (i, &ci) in cand.iter().enumerate() {
                let vi = f.vertices[ci as usize][c];
                if vi == 0.0 {
                    continue;
                }
                h[i] += vi * target;
                for (j, &cj) in cand.iter().enumerate() {
                    gram[i * m + j] += vi * f.vertices[cj as usize][c];
                }
            }
        }
    }
    let sol = nnls_solve_gram_sum_one(m, &gram, &h);
    // Residual |A x - b|^2 = x^T G x - 2 x^T h + |b|^2.
    let mut xtgx = 0.0;
    let mut xth = 0.0;
    for i in 0..m {
        if sol.x[i] == 0.0 {
            continue;
        }
        xth += sol.x[i] * h[i];
        for j in 0..m {
            xtgx += sol.x[i] * gram[i * m + j] * sol.x[j];
        }
    }
    let rss = fmath::max(xtgx - 2.0 * xth + b_norm_sq, 0.0);
    let rms = fmath::sqrt(rss / rows as f64);
    let mut row: Vec<(u32, f64)> = cand
        .iter()
        .zip(&sol.x)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&ci, &w)| (ci, w))
        .collect();
    row.sort_unstable_by_key(|e| e.0);
    (row, rms)
}
