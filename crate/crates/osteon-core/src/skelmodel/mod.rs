//! The combined skin + skeleton model: one pose vector drives the skin
//! mesh, the skeleton mesh, and the anatomical joints.
//!
//! Evaluation at `(shape, pose)`:
//!
//! 1. shape the skin template and regress the anatomical joints from the
//!    unposed shaped vertices;
//! 2. build the T-pose placement (learned base rotations plus per-shape
//!    correctives);
//! 3. run forward kinematics once; skin vertices follow the skin-space
//!    transforms through the skinning weights, joints follow their own
//!    skin-space transforms, and the scaled bone template meshes follow the
//!    skeleton-space transforms (skin-space composed with the T-pose
//!    placement), so both meshes agree on where every joint is.

pub mod template;

pub use template::BoneMesh;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::envelope::{EnvelopeModel, Marker, MarkerSet, Mesh};
use crate::kinematics::{
    fk, FkCache, JointCtx, KinError, KinematicTree, Placement, Pose,
};
use crate::orientation::{self, OrientationError, SegmentGeometry, TPosePlacement};
use crate::plan;
use crate::regressor::JointRegressor;
use crate::rigmath::{RigidTransform, Rotation};
use crate::vec3::Vec3;

/// Skeleton-model errors.
#[derive(Debug, Clone, PartialEq)]
pub enum SkelError {
    DimensionMismatch { expected: usize, got: usize },
    /// Pose outside the joint limits under the `Error` limit policy.
    AngleLimit { dofs: Vec<usize> },
    /// A bone segment degenerated to zero length.
    ZeroSegment { bone: usize },
    Placement(OrientationError),
    Kinematics(KinError),
}

impl fmt::Display for SkelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkelError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            SkelError::AngleLimit { dofs } => write!(f, "pose exceeds joint limits at {dofs:?}"),
            SkelError::ZeroSegment { bone } => write!(f, "bone {bone} segment has zero length"),
            SkelError::Placement(e) => write!(f, "placement: {e}"),
            SkelError::Kinematics(e) => write!(f, "kinematics: {e}"),
        }
    }
}

impl core::error::Error for SkelError {}

impl From<OrientationError> for SkelError {
    fn from(e: OrientationError) -> Self {
        SkelError::Placement(e)
    }
}

impl From<KinError> for SkelError {
    fn from(e: KinError) -> Self {
        SkelError::Kinematics(e)
    }
}

/// What to do when a pose exceeds the joint limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LimitPolicy {
    /// Clamp and report the touched DOFs in the output.
    #[default]
    ClampAndWarn,
    /// Refuse the pose.
    Error,
}

/// The skeleton side shared by the full model and the marker-fitting
/// solvers: rest layout, bone template meshes, and the marker set.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub tree: KinematicTree,
    /// Rest joint locations (T-pose world).
    pub rest_joints: Vec<Vec3>,
    /// Rest distal segment end per bone.
    pub rest_ends: Vec<Vec3>,
    /// Rest thorax ellipsoid (center, semi-axes).
    pub rest_ellipsoid: (Vec3, [f64; 3]),
    /// Bone template meshes in bone-local frames.
    pub bone_meshes: Vec<BoneMesh>,
    /// Markers rigidly attached to the bones.
    pub markers: MarkerSet,
}

impl Skeleton {
    /// Rest segment length per bone.
    pub fn rest_lengths(&self) -> Vec<f64> {
        self.rest_joints
            .iter()
            .zip(&self.rest_ends)
            .map(|(j, e)| (*e - *j).norm())
            .collect()
    }

    /// Placement of the raw skeleton under per-bone scales `s` with
    /// identity bone orientations: joint offsets, segment ends, and the
    /// thorax ellipsoid all scale with their owning bone.
    pub fn placement_for_scales(&self, scales: &[[f64; 3]]) -> Result<Placement, SkelError> {
        let n = self.tree.len();
        if scales.len() != n {
            return Err(SkelError::DimensionMismatch { expected: n, got: scales.len() });
        }
        let mut joints = vec![Vec3::zero(); n];
        for (k, spec) in self.tree.joints().iter().enumerate() {
            joints[k] = if spec.parent < 0 {
                self.rest_joints[k]
            } else {
                let p = spec.parent as usize;
                let offset = self.rest_joints[k] - self.rest_joints[p];
                joints[p] + Vec3::from_array(scales[p]).scale(offset)
            };
        }
        let ends: Vec<Vec3> = (0..n)
            .map(|k| {
                let offset = self.rest_ends[k] - self.rest_joints[k];
                joints[k] + Vec3::from_array(scales[k]).scale(offset)
            })
            .collect();
        let thorax = plan::group::THORAX;
        let s_thorax = Vec3::from_array(scales[thorax]);
        let (c_rest, semi_rest) = self.rest_ellipsoid;
        let center = joints[thorax] + s_thorax.scale(c_rest - self.rest_joints[thorax]);
        let semi = [
            semi_rest[0] * s_thorax.x,
            semi_rest[1] * s_thorax.y,
            semi_rest[2] * s_thorax.z,
        ];
        let orient = vec![Rotation::IDENTITY; n];
        let ctx = fk::shape_contexts(&self.tree, &orient, &joints, &ends, Some((center, semi)))?;
        Ok(Placement { orient, joints, ctx })
    }

    /// Bone-local marker points under scales and per-marker offsets:
    /// `s_b * (rest_offset + delta)`.
    pub fn marker_locals(
        &self,
        scales: &[[f64; 3]],
        offsets: &[Vec3],
        deltas: Option<&[Vec3]>,
    ) -> Vec<(usize, Vec3)> {
        self.markers
            .markers
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let mut local = offsets[k];
                if let Some(d) = deltas {
                    local += d[k];
                }
                (m.bone, Vec3::from_array(scales[m.bone]).scale(local))
            })
            .collect()
    }
}

/// Per-DOF pose-corrective hook: displacement fields added to the rest
/// vertices linearly in the pose entries. Zero pose gives zero correction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoseCorrectives {
    pub entries: Vec<(usize, Vec<Vec3>)>,
}

impl PoseCorrectives {
    pub fn apply(&self, q: &[f64], out: &mut [Vec3]) {
        for (dof, field) in &self.entries {
            let w = q[*dof];
            if w == 0.0 {
                continue;
            }
            for (v, d) in out.iter_mut().zip(field) {
                *v += *d * w;
            }
        }
    }
}

/// The full model.
#[derive(Debug, Clone)]
pub struct SkelModel {
    /// Skin template vertices (T-pose).
    pub skin_template: Vec<Vec3>,
    pub skin_triangles: Vec<[u32; 3]>,
    /// Linear shape basis over the skin vertices.
    pub shape_basis: Vec<Vec<Vec3>>,
    /// Skin skinning weights over the 24 bone groups.
    pub skin_weights: Vec<Vec<(u16, f64)>>,
    /// Source-model joint to bone-group correspondence used when the
    /// weights were re-indexed (identity for the bundled envelope).
    pub joint_correspondence: Vec<u16>,
    /// Tip landmark vertex per group (leaf bone segments).
    pub landmarks: Vec<Option<u32>>,
    /// Thorax vertex ids (scapula ellipsoid support).
    pub thorax_vertices: Vec<u32>,
    /// Trained anatomical joint regressor.
    pub regressor: JointRegressor,
    /// Learned per-bone base rotations.
    pub base_rotations: Vec<Rotation>,
    /// Skeleton side.
    pub skeleton: Skeleton,
    /// Optional pose correctives (defaults to none: plain skinning).
    pub pose_correctives: Option<PoseCorrectives>,
    pub limit_policy: LimitPolicy,
}

/// Output of one model evaluation.
#[derive(Debug, Clone)]
pub struct SkelOutput {
    pub v_skin: Mesh,
    pub v_skel: Mesh,
    /// Posed anatomical joints.
    pub joints: Vec<Vec3>,
    /// DOFs clamped to their limits (empty under in-range poses).
    pub clamped_dofs: Vec<usize>,
}

/// Longitudinal per-bone scale factors from regressed segment lengths:
/// the scale on each bone's long axis is the shaped length over the rest
/// length; transverse scales stay 1.
pub fn bone_scale_factors(
    joints: &[Vec3],
    segment_ends: &[Vec3],
    rest_joints: &[Vec3],
    rest_ends: &[Vec3],
) -> Result<Vec<[f64; 3]>, SkelError> {
    let mut out = Vec::with_capacity(plan::GROUP_COUNT);
    for (g, part) in plan::PARTS.iter().enumerate() {
        let rest_len = (rest_ends[g] - rest_joints[g]).norm();
        let len = (segment_ends[g] - joints[g]).norm();
        if rest_len <= crate::tol::ZERO_SEGMENT || len <= crate::tol::ZERO_SEGMENT {
            return Err(SkelError::ZeroSegment { bone: g });
        }
        let mut s = [1.0, 1.0, 1.0];
        s[part.long_axis] = len / rest_len;
        out.push(s);
    }
    Ok(out)
}

/// One row of the DOF range report.
#[derive(Debug, Clone, PartialEq)]
pub struct DofRangeRow {
    pub dof: usize,
    pub joint: alloc::string::String,
    pub kind: &'static str,
    pub lo: f64,
    pub hi: f64,
}

impl SkelModel {
    /// Assemble the model from the envelope pieces plus the learned
    /// regressor and base rotations. The skeleton rest layout is the body
    /// plan's joint stations; skinning weights are re-indexed through the
    /// identity joint correspondence.
    pub fn assemble(
        envelope: &EnvelopeModel,
        regressor: JointRegressor,
        base_rotations: Vec<Rotation>,
    ) -> Result<Self, SkelError> {
        let tree = KinematicTree::default_humanoid();
        let n = tree.len();
        if base_rotations.len() != n {
            return Err(SkelError::DimensionMismatch { expected: n, got: base_rotations.len() });
        }
        if regressor.joint_count() != n {
            return Err(SkelError::DimensionMismatch { expected: n, got: regressor.joint_count() });
        }
        let rest_joints: Vec<Vec3> = tree.joints().iter().map(|j| j.rest_joint).collect();
        let rest_ends: Vec<Vec3> = plan::PARTS
            .iter()
            .enumerate()
            .map(|(g, part)| match part.segment {
                plan::SegmentEnd::Joint(child) => rest_joints[child],
                plan::SegmentEnd::TipOf(_) => {
                    envelope.template[envelope.landmarks[g].expect("landmark") as usize]
                }
            })
            .collect();
        let bone_meshes = template::build_bone_meshes(&rest_joints, &rest_ends);
        let markers = MarkerSet::default_for(envelope);
        let thorax_vertices: Vec<u32> = envelope
            .part_of_vertex
            .iter()
            .enumerate()
            .filter(|(_, &p)| p as usize == plan::group::THORAX)
            .map(|(i, _)| i as u32)
            .collect();
        let mut lo = Vec3::splat(f64::INFINITY);
        let mut hi = Vec3::splat(f64::NEG_INFINITY);
        for &vi in &thorax_vertices {
            let v = envelope.template[vi as usize];
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
        let rest_ellipsoid = (
            (lo + hi) * 0.5,
            [(hi.x - lo.x) * 0.5 * m, (hi.y - lo.y) * 0.5 * m, (hi.z - lo.z) * 0.5 * m],
        );
        let skeleton = Skeleton {
            tree,
            rest_joints,
            rest_ends,
            rest_ellipsoid,
            bone_meshes,
            markers,
        };
        Ok(SkelModel {
            skin_template: envelope.template.clone(),
            skin_triangles: envelope.triangles.clone(),
            shape_basis: envelope.shape_basis.clone(),
            skin_weights: envelope.skin_weights.clone(),
            joint_correspondence: (0..n as u16).collect(),
            landmarks: envelope.landmarks.clone(),
            thorax_vertices,
            regressor,
            base_rotations,
            skeleton,
            pose_correctives: None,
            limit_policy: LimitPolicy::default(),
        })
    }

    pub fn tree(&self) -> &KinematicTree {
        &self.skeleton.tree
    }

    pub fn shape_dims(&self) -> usize {
        self.shape_basis.len()
    }

    /// Shaped (unposed) skin vertices.
    pub fn shaped_vertices(&self, beta: &[f64]) -> Result<Vec<Vec3>, SkelError> {
        if beta.len() != self.shape_dims() {
            return Err(SkelError::DimensionMismatch {
                expected: self.shape_dims(),
                got: beta.len(),
            });
        }
        let mut v = self.skin_template.clone();
        for (k, dir) in self.shape_basis.iter().enumerate() {
            if beta[k] == 0.0 {
                continue;
            }
            for (vi, d) in dir.iter().enumerate() {
                v[vi] += *d * beta[k];
            }
        }
        Ok(v)
    }

    /// T-pose placement for a shape. Pure; callers may cache per shape.
    pub fn placement(&self, beta: &[f64]) -> Result<TPosePlacement, SkelError> {
        let shaped = self.shaped_vertices(beta)?;
        self.placement_for_shaped(&shaped)
    }

    /// Placement from already-shaped vertices.
    pub fn placement_for_shaped(&self, shaped: &[Vec3]) -> Result<TPosePlacement, SkelError> {
        let geometry = SegmentGeometry {
            rest_joints: &self.skeleton.rest_joints,
            rest_ends: &self.skeleton.rest_ends,
            landmarks: &self.landmarks,
            thorax_vertices: &self.thorax_vertices,
        };
        Ok(orientation::build_placement(
            self.tree(),
            &self.regressor,
            shaped,
            &self.base_rotations,
            &geometry,
        )?)
    }

    /// Evaluate the model at `(shape, pose)`.
    pub fn forward(&self, beta: &[f64], pose: &Pose) -> Result<SkelOutput, SkelError> {
        let shaped = self.shaped_vertices(beta)?;
        let placement = self.placement_for_shaped(&shaped)?;
        self.forward_with(&placement, &shaped, pose)
    }

    /// Evaluate with a prebuilt placement (the per-shape cacheable part).
    pub fn forward_with(
        &self,
        placement: &TPosePlacement,
        shaped: &[Vec3],
        pose: &Pose,
    ) -> Result<SkelOutput, SkelError> {
        let tree = self.tree();
        let mut q = pose.q;
        let clamped_dofs = tree.clamp_to_limits(&mut q);
        if !clamped_dofs.is_empty() && self.limit_policy == LimitPolicy::Error {
            return Err(SkelError::AngleLimit { dofs: clamped_dofs });
        }
        let cache = FkCache::evaluate(tree, &q, &placement.fk, false)?;

        // Skin: rest vertices (plus pose correctives) through the skin
        // weights.
        let mut rest = shaped.to_vec();
        if let Some(pc) = &self.pose_correctives {
            pc.apply(&q, &mut rest);
        }
        let mut skin_vertices = Vec::with_capacity(rest.len());
        for (vi, &v) in rest.iter().enumerate() {
            let mut p = Vec3::zero();
            for &(g, w) in &self.skin_weights[vi] {
                p += cache.skin[g as usize].apply(v) * w;
            }
            skin_vertices.push(p + pose.trans);
        }

        // Joints: each joint rides its own skin-space transform.
        let joints: Vec<Vec3> = placement
            .fk
            .joints
            .iter()
            .enumerate()
            .map(|(k, j)| cache.skin[k].apply(*j) + pose.trans)
            .collect();

        // Skeleton: scaled bone meshes placed by C_k, then following the
        // skin-space transforms (boolean weights except the spine ramps).
        let scales = bone_scale_factors(
            &placement.fk.joints,
            &placement.segment_ends,
            &self.skeleton.rest_joints,
            &self.skeleton.rest_ends,
        )?;
        let (skel_vertices, skel_triangles) =
            self.pose_skeleton_mesh(placement, &cache, &scales, pose.trans);

        Ok(SkelOutput {
            v_skin: Mesh { vertices: skin_vertices, triangles: self.skin_triangles.clone() },
            v_skel: Mesh { vertices: skel_vertices, triangles: skel_triangles },
            joints,
            clamped_dofs,
        })
    }

    fn pose_skeleton_mesh(
        &self,
        placement: &TPosePlacement,
        cache: &FkCache,
        scales: &[[f64; 3]],
        trans: Vec3,
    ) -> (Vec<Vec3>, Vec<[u32; 3]>) {
        let tree = self.tree();
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (g, bone) in self.skeleton.bone_meshes.iter().enumerate() {
            let c = placement.fk.bone_to_world(g);
            let s = Vec3::from_array(scales[g]);
            let parent = tree.joint(g).parent;
            let base = vertices.len() as u32;
            for (vi, v) in bone.vertices.iter().enumerate() {
                let local = Vec3::new(v[0] as f64, v[1] as f64, v[2] as f64).scale(s);
                let rest_world = c.apply(local);
                let w = bone.own_weight[vi] as f64;
                let posed = if w >= 1.0 || parent < 0 {
                    cache.skin[g].apply(rest_world)
                } else {
                    cache.skin[g].apply(rest_world) * w
                        + cache.skin[parent as usize].apply(rest_world) * (1.0 - w)
                };
                vertices.push(posed + trans);
            }
            for t in &bone.triangles {
                triangles.push([t[0] + base, t[1] + base, t[2] + base]);
            }
        }
        (vertices, triangles)
    }

    /// Rest anchor point of a scapula joint on the thorax ellipsoid, in
    /// T-pose world coordinates.
    pub fn scapula_rest_anchor(placement: &TPosePlacement, scapula: usize) -> Option<Vec3> {
        match &placement.fk.ctx[scapula] {
            JointCtx::Scapula(sc) => {
                let anchor = crate::kinematics::scapula_transform(
                    [sc.rest_uv[0], sc.rest_uv[1], 0.0],
                    sc.semi,
                );
                let c = placement.fk.bone_to_world(scapula);
                Some(c.apply(sc.ell_in_local.apply(anchor.translation)))
            }
            _ => None,
        }
    }

    /// World pose of the scapula ellipsoid at T-pose.
    pub fn scapula_ellipsoid_world(
        placement: &TPosePlacement,
        scapula: usize,
    ) -> Option<(RigidTransform, [f64; 3])> {
        match &placement.fk.ctx[scapula] {
            JointCtx::Scapula(sc) => {
                let c = placement.fk.bone_to_world(scapula);
                Some((c.compose(&sc.ell_in_local), sc.semi))
            }
            _ => None,
        }
    }

    /// Full DOF table with limits and joint kinds.
    pub fn joint_ranges_report(&self) -> Vec<DofRangeRow> {
        let mut rows = Vec::with_capacity(self.tree().dof_count());
        for spec in self.tree().joints() {
            let kind = match spec.kind {
                crate::kinematics::JointKind::Free6 => "free6",
                crate::kinematics::JointKind::Ball3 => "ball3",
                crate::kinematics::JointKind::Hinge1 { .. } => "hinge1",
                crate::kinematics::JointKind::SpineCc3 { .. } => "spine_cc3",
                crate::kinematics::JointKind::Scapula3 { .. } => "scapula3",
                crate::kinematics::JointKind::Pronation1 { .. } => "pronation1",
                crate::kinematics::JointKind::Universal2 { .. } => "universal2",
            };
            for (k, lim) in spec.limits.iter().enumerate() {
                rows.push(DofRangeRow {
                    dof: spec.dof_offset + k,
                    joint: spec.name.clone(),
                    kind,
                    lo: lim[0],
                    hi: lim[1],
                });
            }
        }
        rows
    }
}

/// Candidate vertex sets for regressor training on the envelope mesh:
/// geodesic neighborhoods of the plan's joint stations with radius 15% of
/// the template height.
pub fn regressor_candidates(envelope: &EnvelopeModel) -> Vec<Vec<u32>> {
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for v in &envelope.template {
        if v.y < y_lo {
            y_lo = v.y;
        }
        if v.y > y_hi {
            y_hi = v.y;
        }
    }
    let radius = 0.15 * (y_hi - y_lo);
    let seeds: Vec<Vec3> =
        plan::PARTS.iter().map(|p| Vec3::from_array(p.joint)).collect();
    crate::regressor::geodesic_candidates(
        &envelope.template,
        &envelope.triangles,
        &seeds,
        radius,
    )
}

/// Training statistics of the learning stage.
#[derive(Debug, Clone)]
pub struct LearnStats {
    /// Per-joint RMS training residual of the regressor, meters.
    pub regressor_rms: Vec<f64>,
}

/// Train the joint regressor and learn the per-bone base rotations from a
/// paired dataset, then assemble the model.
pub fn learn_from_dataset(
    envelope: &EnvelopeModel,
    data: &crate::envelope::PairedDataset,
) -> Result<(SkelModel, LearnStats), SkelError> {
    let candidates = regressor_candidates(envelope);
    let mut frames = Vec::new();
    for (si, subj) in data.subjects.iter().enumerate() {
        for f in &subj.frames {
            frames.push(crate::regressor::TrainingFrame {
                subject: si,
                vertices: &f.vertices,
                joints: &f.joints,
            });
        }
    }
    let outcome = crate::regressor::train_joint_regressor(&frames, &candidates)
        .map_err(|_| SkelError::DimensionMismatch { expected: 24, got: frames.len() })?;

    let mut base = Vec::with_capacity(plan::GROUP_COUNT);
    for g in 0..plan::GROUP_COUNT {
        let mut pairs = Vec::new();
        for subj in &data.subjects {
            for f in &subj.frames {
                pairs.push((f.rot_env[g], f.rot_anat[g]));
            }
        }
        base.push(
            orientation::learn_base_rotation(&pairs).map_err(SkelError::Placement)?,
        );
    }
    let stats = LearnStats { regressor_rms: outcome.residual_rms };
    let model = SkelModel::assemble(envelope, outcome.regressor, base)?;
    Ok((model, stats))
}

#[cfg(test)]
mod tests;
