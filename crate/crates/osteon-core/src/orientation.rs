//! Per-bone base rotations learned from paired frames, plus the
//! shape-dependent corrective that aligns each bone with its regressed
//! segment.
//!
//! The T-pose orientation of bone `i` factors as
//! `R_i(shape) = R_shape(shape) * R_base`: the base rotation is the
//! data-driven consensus that fixes the roll about the bone axis and is
//! learned once; the corrective is recomputed per shape and only tilts the
//! bone onto the segment between its regressed joints (its axis is
//! perpendicular to both segments, so it adds no roll).

use alloc::vec::Vec;
use core::fmt;

use crate::kinematics::{fk, KinematicTree, Placement};
use crate::plan;
use crate::regressor::{regress_joints, JointRegressor};
use crate::rigmath::{project_to_rotation, rotation_between, RigMathError, Rotation};
use crate::tol;
use crate::vec3::{Mat3, Vec3};

/// Orientation-module errors.
#[derive(Debug, Clone, PartialEq)]
pub enum OrientationError {
    /// A bone segment is too short to define a direction.
    ZeroSegment { bone: usize },
    /// Degenerate rotation data (propagated from the projection).
    DegenerateInput,
    /// No pairs supplied to the base-rotation fit.
    NoPairs,
    /// Regressor/geometry array mismatch.
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for OrientationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrientationError::ZeroSegment { bone } => {
                write!(f, "bone {bone} segment has zero length")
            }
            OrientationError::DegenerateInput => write!(f, "degenerate rotation data"),
            OrientationError::NoPairs => write!(f, "no rotation pairs supplied"),
            OrientationError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl core::error::Error for OrientationError {}

impl From<RigMathError> for OrientationError {
    fn from(_: RigMathError) -> Self {
        OrientationError::DegenerateInput
    }
}

/// Closed-form minimizer of `sum_f |R^B_f - R^S_f R|_F^2` over rotations:
/// the orthogonal projection of `sum_f (R^S_f)^T R^B_f`.
pub fn learn_base_rotation(pairs: &[(Mat3, Mat3)]) -> Result<Rotation, OrientationError> {
    if pairs.is_empty() {
        return Err(OrientationError::NoPairs);
    }
    let mut acc = Mat3::zero();
    for (rs, rb) in pairs {
        acc = acc + rs.transpose() * *rb;
    }
    Ok(project_to_rotation(&acc)?)
}

/// Shape corrective returned by [`shape_corrective`].
#[derive(Debug, Clone, Copy)]
pub struct ShapeCorrective {
    pub rotation: Rotation,
    /// The segments were antiparallel and the deterministic tie-break was
    /// used; callers record this as a warning.
    pub antiparallel: bool,
}

/// Minimal rotation taking the base-rotated rest segment onto the regressed
/// segment. Its axis is the cross product of the two segments, hence
/// perpendicular to both: the corrective never adds roll about the bone.
pub fn shape_corrective(
    r_base: &Rotation,
    rest_pair: (Vec3, Vec3),
    reg_pair: (Vec3, Vec3),
) -> Result<ShapeCorrective, OrientationError> {
    let rest_seg = rest_pair.1 - rest_pair.0;
    let reg_seg = reg_pair.1 - reg_pair.0;
    if rest_seg.norm() <= tol::ZERO_SEGMENT || reg_seg.norm() <= tol::ZERO_SEGMENT {
        return Err(OrientationError::ZeroSegment { bone: usize::MAX });
    }
    let u = r_base.apply(rest_seg).normalized(0.0).unwrap();
    let w = reg_seg.normalized(0.0).unwrap();
    let r = rotation_between(u, w);
    Ok(ShapeCorrective { rotation: r.rotation, antiparallel: r.antiparallel })
}

/// Rest geometry and correspondence data needed to place bones for a shape.
pub struct SegmentGeometry<'a> {
    /// Rest joint locations of the skeleton layout.
    pub rest_joints: &'a [Vec3],
    /// Rest distal segment end per bone.
    pub rest_ends: &'a [Vec3],
    /// Tip landmark vertex per bone for leaf segments.
    pub landmarks: &'a [Option<u32>],
    /// Vertex ids of the thorax body part (for the scapula ellipsoid).
    pub thorax_vertices: &'a [u32],
}

/// Full T-pose placement for one shape: learned base rotations, per-shape
/// correctives, and the composed placement forward kinematics consumes.
#[derive(Debug, Clone)]
pub struct TPosePlacement {
    pub base: Vec<Rotation>,
    pub corrective: Vec<Rotation>,
    /// Regressed joints, composed orientations, and joint contexts.
    pub fk: Placement,
    /// Shaped distal segment end per bone.
    pub segment_ends: Vec<Vec3>,
    /// Bones whose corrective hit the antiparallel tie-break.
    pub warnings: Vec<usize>,
}

/// Shaped distal segment ends: child joints where the plan names one, tip
/// landmark vertices for leaves.
pub fn shaped_segment_ends(
    joints: &[Vec3],
    shaped_vertices: &[Vec3],
    landmarks: &[Option<u32>],
) -> Vec<Vec3> {
    plan::PARTS
        .iter()
        .enumerate()
        .map(|(g, part)| match part.segment {
            plan::SegmentEnd::Joint(child) => joints[child],
            plan::SegmentEnd::TipOf(_) => {
                shaped_vertices[landmarks[g].expect("leaf landmark") as usize]
            }
        })
        .collect()
}

/// Build the placement for a shape: regress the joints from the unposed
/// shaped vertices, compose each bone's orientation per the base/corrective
/// split, and assemble the joint contexts.
pub fn build_placement(
    tree: &KinematicTree,
    regressor: &JointRegressor,
    shaped_vertices: &[Vec3],
    base: &[Rotation],
    geometry: &SegmentGeometry<'_>,
) -> Result<TPosePlacement, OrientationError> {
    let n = tree.len();
    if base.len() != n || geometry.rest_joints.len() != n || geometry.rest_ends.len() != n {
        return Err(OrientationError::DimensionMismatch { expected: n, got: base.len() });
    }
    let joints = regress_joints(regressor, shaped_vertices).map_err(|_| {
        OrientationError::DimensionMismatch {
            expected: regressor.vertex_count(),
            got: shaped_vertices.len(),
        }
    })?;
    let segment_ends = shaped_segment_ends(&joints, shaped_vertices, geometry.landmarks);

    let mut corrective = Vec::with_capacity(n);
    let mut orient = Vec::with_capacity(n);
    let mut warnings = Vec::new();
    for g in 0..n {
        let sc = shape_corrective(
            &base[g],
            (geometry.rest_joints[g], geometry.rest_ends[g]),
            (joints[g], segment_ends[g]),
        )
        .map_err(|e| match e {
            OrientationError::ZeroSegment { .. } => OrientationError::ZeroSegment { bone: g },
            other => other,
        })?;
        if sc.antiparallel {
            warnings.push(g);
        }
        corrective.push(sc.rotation);
        orient.push(sc.rotation.compose(&base[g]));
    }

    // Thorax bounding-box ellipsoid of the shaped vertices.
    let mut lo = Vec3::splat(f64::INFINITY);
    let mut hi = Vec3::splat(f64::NEG_INFINITY);
    for &vi in geometry.thorax_vertices {
        let v = shaped_vertices[vi as usize];
        for k in 0..3 {
            if v[k] < lo[k] {
                lo[k] = v[k];
            }
            if v[k] > hi[k] {
                hi[k] = v[k];
            }
        }
    }
    let m = plan::SCAPULA_ELLIPSOID_MARGIN;
    let ellipsoid = (
        (lo + hi) * 0.5,
        [(hi.x - lo.x) * 0.5 * m, (hi.y - lo.y) * 0.5 * m, (hi.z - lo.z) * 0.5 * m],
    );
    let ctx = fk::shape_contexts(tree, &orient, &joints, &segment_ends, Some(ellipsoid))
        .map_err(|_| OrientationError::DimensionMismatch { expected: n, got: 0 })?;
    Ok(TPosePlacement {
        base: base.to_vec(),
        corrective,
        fk: Placement { orient, joints, ctx },
        segment_ends,
        warnings,
    })
}

#[cfg(test)]
mod tests;
