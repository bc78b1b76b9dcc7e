//! Kinematic tree with anatomical joint types and forward kinematics.
//!
//! Joint kinds beyond plain ball/hinge joints:
//!
//! - **Constant-curvature spine** ([`spine_translation`]): the child end of a
//!   spine segment of fixed arc length `l` travels along a circular arc of
//!   constant curvature parameterized by the termination angles. The printed
//!   form of this map contains a dimensionally inconsistent `(r - cos a)`
//!   term; this implementation uses `r (1 - cos a)`, which restores the
//!   circular-arc chord identity `|t| = 2 (l/a) sin(a/2)`.
//! - **Scapulothoracic joint** ([`scapula_transform`]): the shoulder blade
//!   anchor slides on an ellipsoid around the thorax; its frame keeps one
//!   axis along the outward surface normal and the third degree of freedom
//!   spins about that normal.
//! - **Forearm pronation** ([`pronation_transform`]): rotation of the radius
//!   about the axis through the elbow and the radius extremity; both axis
//!   points stay fixed, so the ulna does not move.

pub mod fk;

pub use fk::{
    forward_kinematics, FkCache, FkTransforms, JointCtx, Placement, ScapulaCtx,
};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::fmath;
use crate::plan;
use crate::rigmath::{RigidTransform, Rotation};
use crate::tol;
use crate::vec3::{Mat3, Vec3};

/// Errors from the kinematics module.
#[derive(Debug, Clone, PartialEq)]
pub enum KinError {
    /// Spine arcsin argument exceeded 1 beyond the allowed slack.
    DomainError { value: f64 },
    /// Pronation axis endpoints coincide.
    DegenerateAxis,
    /// Placement does not cover the tree or misses joint context data.
    MissingPlacement { joint: usize },
    /// Pose or DOF slice length does not match the tree.
    DimensionMismatch { expected: usize, got: usize },
    /// Invalid tree structure (bad parent order, overlapping DOF slices,
    /// inverted limits).
    InvalidTree(&'static str),
}

impl fmt::Display for KinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KinError::DomainError { value } => {
                write!(f, "spine arcsin argument {value} out of domain")
            }
            KinError::DegenerateAxis => write!(f, "pronation axis endpoints coincide"),
            KinError::MissingPlacement { joint } => {
                write!(f, "placement missing or incomplete for joint {joint}")
            }
            KinError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            KinError::InvalidTree(msg) => write!(f, "invalid kinematic tree: {msg}"),
        }
    }
}

impl core::error::Error for KinError {}

/// Joint kind plus its rest-geometry parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum JointKind {
    /// Full rigid transform: `[qx, qz, qy, tx, ty, tz]`.
    Free6,
    /// Ball joint, intrinsic X-Z-Y Euler angles `[qx, qz, qy]`.
    Ball3,
    /// Hinge about a fixed local axis.
    Hinge1 { axis: Vec3 },
    /// Constant-curvature spine segment of rest arc length `l` along the
    /// local +y axis; `[qx, qz, qy]`.
    SpineCc3 { rest_arc_len: f64 },
    /// Scapulothoracic joint: `[abduction, elevation, upward_rotation]` on an
    /// ellipsoid with the given rest semi-axes, rest surface parameters, and
    /// rest center expressed in the joint's local frame.
    Scapula3 { rest_semi: [f64; 3], rest_uv: [f64; 2], rest_center: Vec3 },
    /// Pronation about the axis through two local points.
    Pronation1 { rest_elbow: Vec3, rest_extremity: Vec3 },
    /// Two chained single-axis rotations (wrist flexion + deviation).
    Universal2 { axis_a: Vec3, axis_b: Vec3 },
}

impl JointKind {
    pub fn dof_len(&self) -> usize {
        match self {
            JointKind::Free6 => 6,
            JointKind::Ball3 | JointKind::SpineCc3 { .. } | JointKind::Scapula3 { .. } => 3,
            JointKind::Hinge1 { .. } | JointKind::Pronation1 { .. } => 1,
            JointKind::Universal2 { .. } => 2,
        }
    }
}

/// One joint of the tree.
#[derive(Debug, Clone)]
pub struct JointSpec {
    pub name: String,
    /// Parent joint index; -1 for the root.
    pub parent: isize,
    pub kind: JointKind,
    /// First entry of this joint's slice in the pose vector.
    pub dof_offset: usize,
    /// Rest joint location (T-pose world space).
    pub rest_joint: Vec3,
    /// Per-DOF `[lo, hi]` angle limits (radians; meters for Free6
    /// translations).
    pub limits: Vec<[f64; 2]>,
}

impl JointSpec {
    pub fn dof_len(&self) -> usize {
        self.kind.dof_len()
    }

    pub fn dof_range(&self) -> core::ops::Range<usize> {
        self.dof_offset..self.dof_offset + self.dof_len()
    }
}

/// Rooted kinematic tree, topologically sorted (parents precede children).
#[derive(Debug, Clone)]
pub struct KinematicTree {
    joints: Vec<JointSpec>,
    dof_count: usize,
}

impl KinematicTree {
    /// Validate and build a tree. Checks: single root listed first, parents
    /// before children, disjoint DOF slices covering `0..dof_count`, and
    /// `lo <= hi` for every limit.
    pub fn new(joints: Vec<JointSpec>) -> Result<Self, KinError> {
        if joints.is_empty() {
            return Err(KinError::InvalidTree("empty tree"));
        }
        let mut dof_count = 0;
        for (i, j) in joints.iter().enumerate() {
            if i == 0 {
                if j.parent >= 0 {
                    return Err(KinError::InvalidTree("first joint must be the root"));
                }
            } else if j.parent < 0 {
                return Err(KinError::InvalidTree("multiple roots"));
            } else if j.parent as usize >= i {
                return Err(KinError::InvalidTree("parent does not precede child"));
            }
            if j.dof_offset != dof_count {
                return Err(KinError::InvalidTree("DOF slices must be contiguous"));
            }
            if j.limits.len() != j.dof_len() {
                return Err(KinError::InvalidTree("limit count mismatch"));
            }
            for l in &j.limits {
                if l[0] > l[1] {
                    return Err(KinError::InvalidTree("inverted limit"));
                }
            }
            dof_count += j.dof_len();
        }
        Ok(Self { joints, dof_count })
    }

    /// The default 24-group, 46-DOF humanoid tree from the body plan.
    /// Asserts the group/DOF totals.
    pub fn default_humanoid() -> Self {
        let offsets = plan::dof_offsets();
        let (ell_center, ell_semi) = plan_thorax_ellipsoid();
        let mut joints = Vec::with_capacity(plan::GROUP_COUNT);
        for (i, part) in plan::PARTS.iter().enumerate() {
            let joint = Vec3::from_array(part.joint);
            let kind = match part.kind {
                plan::PlanKind::Ball => JointKind::Ball3,
                plan::PlanKind::Hinge { axis, .. } => {
                    JointKind::Hinge1 { axis: Vec3::from_array(axis) }
                }
                plan::PlanKind::Spine => {
                    let end = segment_end_point(part);
                    JointKind::SpineCc3 { rest_arc_len: (end - joint).norm() }
                }
                plan::PlanKind::Scapula => JointKind::Scapula3 {
                    rest_semi: ell_semi,
                    rest_uv: fk::ellipsoid_uv_toward(ell_center, ell_semi, joint),
                    rest_center: ell_center - joint,
                },
                plan::PlanKind::Pronation => {
                    // The pronation axis runs from the elbow (the parent
                    // ulna's joint) to the radius extremity (the wrist).
                    let elbow = Vec3::from_array(plan::PARTS[part.parent as usize].joint);
                    let wrist = segment_end_point(part);
                    JointKind::Pronation1 {
                        rest_elbow: elbow - joint,
                        rest_extremity: wrist - joint,
                    }
                }
                plan::PlanKind::Universal { axis_a, axis_b } => JointKind::Universal2 {
                    axis_a: Vec3::from_array(axis_a),
                    axis_b: Vec3::from_array(axis_b),
                },
            };
            let limits = default_limits(&part.kind, kind.dof_len());
            joints.push(JointSpec {
                name: String::from(part.name),
                parent: part.parent,
                kind,
                dof_offset: offsets[i],
                rest_joint: joint,
                limits,
            });
        }
        let tree = Self::new(joints).expect("default humanoid tree is valid");
        assert_eq!(tree.len(), plan::GROUP_COUNT);
        assert_eq!(tree.dof_count(), plan::DOF_COUNT);
        tree
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn joint(&self, i: usize) -> &JointSpec {
        &self.joints[i]
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn dof_count(&self) -> usize {
        self.dof_count
    }

    /// Chain of joint indices from the root down to `i`, inclusive.
    pub fn chain(&self, i: usize) -> Vec<usize> {
        let mut c = Vec::new();
        let mut cur = i as isize;
        while cur >= 0 {
            c.push(cur as usize);
            cur = self.joints[cur as usize].parent;
        }
        c.reverse();
        c
    }

    /// Whether `anc` is `i` or an ancestor of `i`.
    pub fn is_ancestor_or_self(&self, anc: usize, i: usize) -> bool {
        let mut cur = i as isize;
        while cur >= 0 {
            if cur as usize == anc {
                return true;
            }
            cur = self.joints[cur as usize].parent;
        }
        false
    }

    /// Joint owning pose entry `d`.
    pub fn joint_of_dof(&self, d: usize) -> usize {
        for (i, j) in self.joints.iter().enumerate() {
            if j.dof_range().contains(&d) {
                return i;
            }
        }
        usize::MAX
    }

    /// Clamp a pose vector to the joint limits in place; returns indices of
    /// the entries that were clamped.
    pub fn clamp_to_limits(&self, q: &mut [f64]) -> Vec<usize> {
        let mut touched = Vec::new();
        for j in &self.joints {
            for (k, lim) in j.limits.iter().enumerate() {
                let d = j.dof_offset + k;
                let v = fmath::clamp(q[d], lim[0], lim[1]);
                if v != q[d] {
                    q[d] = v;
                    touched.push(d);
                }
            }
        }
        touched
    }
}

fn default_limits(kind: &plan::PlanKind, n: usize) -> Vec<[f64; 2]> {
    let mut lims = Vec::with_capacity(n);
    match kind {
        plan::PlanKind::Hinge { limits, .. } => lims.push(*limits),
        plan::PlanKind::Pronation => lims.push(plan::PRONATION_LIMITS),
        _ => {
            for _ in 0..n {
                lims.push([-core::f64::consts::PI, core::f64::consts::PI]);
            }
        }
    }
    lims
}

/// Default scapulothoracic ellipsoid from the thorax part of the body plan:
/// bounding-box center and half extents scaled by the ellipsoid margin.
pub fn plan_thorax_ellipsoid() -> (Vec3, [f64; 3]) {
    let t = &plan::PARTS[plan::group::THORAX];
    let r = fmath::max(t.r0, t.r1);
    let y_lo = t.p0[1] - t.cap0;
    let y_hi = t.p1[1] + t.cap1;
    let center = Vec3::new(0.0, 0.5 * (y_lo + y_hi), 0.0);
    let m = plan::SCAPULA_ELLIPSOID_MARGIN;
    (center, [r * m, 0.5 * (y_hi - y_lo) * m, r * m])
}

/// Nominal distal end point of a part's bone segment in the plan.
pub(crate) fn segment_end_point(part: &plan::PartPlan) -> Vec3 {
    match part.segment {
        plan::SegmentEnd::Joint(child) => Vec3::from_array(plan::PARTS[child].joint),
        plan::SegmentEnd::TipOf(p) => {
            let tp = &plan::PARTS[p];
            let p0 = Vec3::from_array(tp.p0);
            let p1 = Vec3::from_array(tp.p1);
            let axis = (p1 - p0).normalized(0.0).expect("part has extent");
            p1 + axis * tp.cap1
        }
    }
}

/// A 46-DOF humanoid pose: generalized coordinates plus global translation.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub q: [f64; plan::DOF_COUNT],
    pub trans: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Self::zero()
    }
}

impl Pose {
    pub fn zero() -> Self {
        Self { q: [0.0; plan::DOF_COUNT], trans: Vec3::zero() }
    }

    pub fn from_q(q: [f64; plan::DOF_COUNT]) -> Self {
        Self { q, trans: Vec3::zero() }
    }
}

/// Constant-curvature spine translation (corrected form).
///
/// `q_joint = [qx, qz, qy]` are the termination angles (`qy` is pure twist
/// and does not move the arc end); `l` is the arc length. Returns the
/// position of the arc end, which rests at `(0, l, 0)`.
pub fn spine_translation(q_joint: [f64; 3], l: f64) -> Result<Vec3, KinError> {
    let (t, _) = spine_translation_inner(q_joint, l)?;
    Ok(t)
}

/// Shared implementation returning the arc end and its partial derivatives
/// with respect to `qx` and `qz`.
fn spine_translation_inner(q: [f64; 3], l: f64) -> Result<(Vec3, [Vec3; 2]), KinError> {
    let (sx, cx) = (fmath::sin(q[0]), fmath::cos(q[0]));
    let (sz, cz) = (fmath::sin(q[1]), fmath::cos(q[1]));
    // In-plane direction, |w| = sin(alpha).
    let wx = -sz;
    let wz = cz * sx;
    // d w / d qx, d w / d qz
    let dwx = [0.0, -cz];
    let dwz = [cz * cx, -sz * sx];
    let p = wx * wx + wz * wz;
    let sp = fmath::sqrt(p);
    if sp > 1.0 + tol::SPINE_DOMAIN_SLACK {
        return Err(KinError::DomainError { value: sp });
    }
    let sp_clamped = fmath::min(sp, 1.0);
    let alpha = fmath::asin(sp_clamped);

    if alpha < tol::SPINE_SMALL_ANGLE {
        // Series branch: g = 1/2 + a^2/24, f = 1 - a^2/6, with a^2 ~ p,
        // which is smooth in q through the direction degeneracy at zero.
        let g = 0.5 + p / 24.0;
        let f = 1.0 - p / 6.0;
        let t = Vec3::new(l * g * wx, l * f, l * g * wz);
        let mut d = [Vec3::zero(); 2];
        for (k, dk) in d.iter_mut().enumerate() {
            let dp = 2.0 * (wx * dwx[k] + wz * dwz[k]);
            *dk = Vec3::new(
                l * (dp / 24.0 * wx + g * dwx[k]),
                -l * dp / 6.0,
                l * (dp / 24.0 * wz + g * dwz[k]),
            );
        }
        return Ok((t, d));
    }

    let ca = fmath::cos(alpha);
    let tan_half = fmath::sin(alpha * 0.5) / fmath::cos(alpha * 0.5);
    // g = tan(a/2)/a avoids the 1 - cos(a) cancellation.
    let g = tan_half / alpha;
    let f = sp_clamped / alpha;
    let t = Vec3::new(l * g * wx, l * f, l * g * wz);

    // Derivative branch: below this the analytic g'/f' forms lose accuracy
    // to cancellation, so switch to their series.
    let (gp, fp) = if alpha < 1e-4 {
        (alpha / 12.0, -alpha / 3.0)
    } else {
        let sec2 = 1.0 / (fmath::cos(alpha * 0.5) * fmath::cos(alpha * 0.5));
        let gp = (0.5 * sec2 * alpha - tan_half) / (alpha * alpha);
        let fp = (alpha * ca - sp_clamped) / (alpha * alpha);
        (gp, fp)
    };
    let mut d = [Vec3::zero(); 2];
    for (k, dk) in d.iter_mut().enumerate() {
        // d alpha = (w . dw) / (sp * cos(alpha))
        let dsp = (wx * dwx[k] + wz * dwz[k]) / sp_clamped;
        let dalpha = if ca > 1e-12 { dsp / ca } else { 0.0 };
        *dk = Vec3::new(
            l * (gp * dalpha * wx + g * dwx[k]),
            l * fp * dalpha,
            l * (gp * dalpha * wz + g * dwz[k]),
        );
    }
    Ok((t, d))
}

/// Anchor frame of the scapulothoracic joint on the thorax ellipsoid, in
/// ellipsoid coordinates.
///
/// `q_joint = [abduction, elevation, upward_rotation]`; `semi = (a, b, c)`
/// are the ellipsoid semi-axes. The returned translation lies on the
/// ellipsoid surface; the rotation has its z column along the outward
/// surface normal and `upward_rotation` spins the frame about it. At the
/// parameter origin the anchor is at `(0, 0, c)` with the normal along +z.
pub fn scapula_transform(q_joint: [f64; 3], semi: [f64; 3]) -> RigidTransform {
    let (frame, p) = scapula_frame(q_joint[0], q_joint[1], semi);
    let spun = frame * Mat3::rot_z(q_joint[2]);
    RigidTransform::new(Rotation::from_matrix_unchecked(spun), p)
}

/// Surface frame (before the upward-rotation spin) and anchor point.
fn scapula_frame(u: f64, v: f64, semi: [f64; 3]) -> (Mat3, Vec3) {
    let (frame, p, _, _) = scapula_frame_jet(u, v, semi);
    (frame, p)
}

/// Surface frame, anchor point, and their partial derivatives with respect
/// to the two surface parameters.
#[allow(clippy::type_complexity)]
fn scapula_frame_jet(u: f64, v: f64, semi: [f64; 3]) -> (Mat3, Vec3, [Mat3; 2], [Vec3; 2]) {
    let [a, b, c] = semi;
    let (su, cu) = (fmath::sin(u), fmath::cos(u));
    let (sv, cv) = (fmath::sin(v), fmath::cos(v));
    let dir = Vec3::new(cv * su, sv, cv * cu);
    let p = Vec3::new(a * dir.x, b * dir.y, c * dir.z);
    let dp = [
        Vec3::new(a * cv * cu, 0.0, -c * cv * su),
        Vec3::new(-a * sv * su, b * cv, -c * sv * cu),
    ];
    // Outward normal direction: (x/a^2, y/b^2, z/c^2) up to normalization.
    let n_raw = Vec3::new(dir.x / a, dir.y / b, dir.z / c);
    let dn_raw = [
        Vec3::new(cv * cu / a, 0.0, -cv * su / c),
        Vec3::new(-sv * su / a, cv / b, -sv * cu / c),
    ];
    // du-tangent with the cos(v) factor divided out, well defined at the
    // poles and perpendicular to the normal everywhere.
    let t_raw = Vec3::new(a * cu, 0.0, -c * su);
    let dt_raw = [Vec3::new(-a * su, 0.0, -c * cu), Vec3::zero()];

    let normalize_jet = |g: Vec3, dg: [Vec3; 2]| -> (Vec3, [Vec3; 2]) {
        let len = g.norm();
        let hat = g / len;
        let d = [
            (dg[0] - hat * hat.dot(dg[0])) / len,
            (dg[1] - hat * hat.dot(dg[1])) / len,
        ];
        (hat, d)
    };
    let (n, dn) = normalize_jet(n_raw, dn_raw);
    let (t, dt) = normalize_jet(t_raw, dt_raw);
    let y = n.cross(t);
    let dy = [dn[0].cross(t) + n.cross(dt[0]), dn[1].cross(t) + n.cross(dt[1])];
    let frame = Mat3::from_cols(t, y, n);
    let dframe = [
        Mat3::from_cols(dt[0], dy[0], dn[0]),
        Mat3::from_cols(dt[1], dy[1], dn[1]),
    ];
    (frame, p, dframe, dp)
}

/// Rotation by `rho` about the line through `elbow_point` and
/// `radius_extremity`; both points are fixed points of the transform.
pub fn pronation_transform(
    rho: f64,
    elbow_point: Vec3,
    radius_extremity: Vec3,
) -> Result<RigidTransform, KinError> {
    let axis = (radius_extremity - elbow_point)
        .normalized(tol::PRONATION_AXIS_MIN)
        .ok_or(KinError::DegenerateAxis)?;
    let r = Rotation::about_axis(axis, rho);
    let translation = elbow_point - r.apply(elbow_point);
    Ok(RigidTransform::new(r, translation))
}

/// Derivatives of the single-axis rotation matrices.
pub(crate) fn d_rot_x(a: f64) -> Mat3 {
    let (s, c) = (fmath::sin(a), fmath::cos(a));
    Mat3::from_rows([0.0, 0.0, 0.0], [0.0, -s, -c], [0.0, c, -s])
}

pub(crate) fn d_rot_y(a: f64) -> Mat3 {
    let (s, c) = (fmath::sin(a), fmath::cos(a));
    Mat3::from_rows([-s, 0.0, c], [0.0, 0.0, 0.0], [-c, 0.0, -s])
}

pub(crate) fn d_rot_z(a: f64) -> Mat3 {
    let (s, c) = (fmath::sin(a), fmath::cos(a));
    Mat3::from_rows([-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0])
}

/// Local joint transform `G^B` and its per-DOF derivatives.
///
/// The transform acts in the joint's local anatomical frame (origin at the
/// joint, axes given by the T-pose bone orientation) and is the identity at
/// a zero DOF slice.
pub struct LocalJet {
    pub value: RigidTransform,
    /// Per local DOF: derivative of the rotation matrix and translation.
    pub deriv: Vec<(Mat3, Vec3)>,
}

/// Dispatch a joint's local transform from its kind and context.
///
/// `q_joint` is the joint's slice of the pose vector; `ctx` supplies the
/// shape-dependent geometry (arc lengths, axis endpoints, ellipsoid pose)
/// for the joints that need it.
pub fn joint_local_transform(
    spec: &JointSpec,
    q_joint: &[f64],
    ctx: &JointCtx,
) -> Result<RigidTransform, KinError> {
    Ok(joint_local_jet(spec, q_joint, ctx, false)?.value)
}

/// Local transform plus per-DOF derivatives (used by the solvers).
pub fn joint_local_jet(
    spec: &JointSpec,
    q_joint: &[f64],
    ctx: &JointCtx,
    with_deriv: bool,
) -> Result<LocalJet, KinError> {
    if q_joint.len() != spec.dof_len() {
        return Err(KinError::DimensionMismatch { expected: spec.dof_len(), got: q_joint.len() });
    }
    let mut deriv = Vec::new();
    let value = match (&spec.kind, ctx) {
        (JointKind::Ball3, _) => {
            let r = euler_rotation_parts(q_joint, with_deriv, &mut deriv);
            RigidTransform::from_rotation(r)
        }
        (JointKind::Free6, _) => {
            let r = euler_rotation_parts(&q_joint[..3], with_deriv, &mut deriv);
            if with_deriv {
                for k in 0..3 {
                    deriv.push((Mat3::zero(), Vec3::axis(k)));
                }
            }
            RigidTransform::new(r, Vec3::new(q_joint[3], q_joint[4], q_joint[5]))
        }
        (JointKind::Hinge1 { axis }, _) => {
            let r = Rotation::about_axis(*axis, q_joint[0]);
            if with_deriv {
                deriv.push((Mat3::skew(*axis) * *r.matrix(), Vec3::zero()));
            }
            RigidTransform::from_rotation(r)
        }
        (JointKind::Universal2 { axis_a, axis_b }, _) => {
            let ra = Rotation::about_axis(*axis_a, q_joint[0]);
            let rb = Rotation::about_axis(*axis_b, q_joint[1]);
            let r = ra.compose(&rb);
            if with_deriv {
                deriv.push((Mat3::skew(*axis_a) * *r.matrix(), Vec3::zero()));
                deriv.push((*ra.matrix() * (Mat3::skew(*axis_b) * *rb.matrix()), Vec3::zero()));
            }
            RigidTransform::from_rotation(r)
        }
        (JointKind::SpineCc3 { rest_arc_len }, ctx) => {
            let l = match ctx {
                JointCtx::Spine { arc_len } => *arc_len,
                JointCtx::None => *rest_arc_len,
                _ => return Err(KinError::MissingPlacement { joint: spec.dof_offset }),
            };
            let qj = [q_joint[0], q_joint[1], q_joint[2]];
            let (t_end, dt) = spine_translation_inner(qj, l)?;
            let rest_end = Vec3::new(0.0, l, 0.0);
            let mut rderiv = Vec::new();
            let r = euler_rotation_parts(q_joint, with_deriv, &mut rderiv);
            let translation = t_end - r.apply(rest_end);
            if with_deriv {
                // qx, qz move the arc end; qy is twist only.
                for (k, (dr, _)) in rderiv.iter().enumerate() {
                    let dt_end = match k {
                        0 => dt[0],
                        1 => dt[1],
                        _ => Vec3::zero(),
                    };
                    deriv.push((*dr, dt_end - *dr * rest_end));
                }
            }
            RigidTransform::new(r, translation)
        }
        (JointKind::Pronation1 { rest_elbow, rest_extremity }, ctx) => {
            let (e, x) = match ctx {
                JointCtx::Pronation { elbow, extremity } => (*elbow, *extremity),
                JointCtx::None => (*rest_elbow, *rest_extremity),
                _ => return Err(KinError::MissingPlacement { joint: spec.dof_offset }),
            };
            let t = pronation_transform(q_joint[0], e, x)?;
            if with_deriv {
                let axis = (x - e).normalized(tol::PRONATION_AXIS_MIN).unwrap();
                let dr = Mat3::skew(axis) * *t.rotation.matrix();
                deriv.push((dr, -(dr * e)));
            }
            t
        }
        (JointKind::Scapula3 { rest_semi, rest_uv, rest_center }, ctx) => {
            let (semi, ell, uv) = match ctx {
                JointCtx::Scapula(s) => (s.semi, s.ell_in_local, s.rest_uv),
                JointCtx::None => (
                    *rest_semi,
                    RigidTransform::from_translation(*rest_center),
                    *rest_uv,
                ),
                _ => return Err(KinError::MissingPlacement { joint: spec.dof_offset }),
            };
            scapula_local_jet(q_joint, semi, &ell, uv, with_deriv, &mut deriv)
        }
    };
    Ok(LocalJet { value, deriv })
}

/// X-Z-Y Euler rotation; optionally fills per-angle matrix derivatives in
/// the `[qx, qz, qy]` slice order.
fn euler_rotation_parts(q: &[f64], with_deriv: bool, deriv: &mut Vec<(Mat3, Vec3)>) -> Rotation {
    let rx = Mat3::rot_x(q[0]);
    let rz = Mat3::rot_z(q[1]);
    let ry = Mat3::rot_y(q[2]);
    if with_deriv {
        deriv.push((d_rot_x(q[0]) * rz * ry, Vec3::zero()));
        deriv.push((rx * d_rot_z(q[1]) * ry, Vec3::zero()));
        deriv.push((rx * rz * d_rot_y(q[2]), Vec3::zero()));
    }
    Rotation::from_matrix_unchecked(rx * rz * ry)
}

/// Relative scapula motion `M * A(rest + q) * A(rest)^-1 * M^-1` in the
/// joint's local frame, where `A` is the ellipsoid anchor frame and `M` maps
/// ellipsoid coordinates into the local frame.
fn scapula_local_jet(
    q: &[f64],
    semi: [f64; 3],
    ell_in_local: &RigidTransform,
    rest_uv: [f64; 2],
    with_deriv: bool,
    deriv: &mut Vec<(Mat3, Vec3)>,
) -> RigidTransform {
    let a0 = scapula_transform([rest_uv[0], rest_uv[1], 0.0], semi);
    let a0_inv = a0.inverse();
    let (u, v, w) = (rest_uv[0] + q[0], rest_uv[1] + q[1], q[2]);
    let (frame, p, dframe, dp) = scapula_frame_jet(u, v, semi);
    let rz = Mat3::rot_z(w);
    let aq = RigidTransform::new(Rotation::from_matrix_unchecked(frame * rz), p);
    let value = ell_in_local.compose(&aq).compose(&a0_inv).compose(&ell_in_local.inverse());
    if with_deriv {
        let minv = ell_in_local.inverse();
        let m_rot = *ell_in_local.rotation.matrix();
        // d(M Aq A0^-1 M^-1)/dq = M dAq A0^-1 M^-1 for each parameter.
        let d_anchor: [(Mat3, Vec3); 3] = [
            (dframe[0] * rz, dp[0]),
            (dframe[1] * rz, dp[1]),
            (frame * d_rot_z(w), Vec3::zero()),
        ];
        for (dr, dt) in d_anchor {
            let inner_rot = dr * *a0_inv.rotation.matrix();
            let inner_t = dr * a0_inv.translation + dt;
            let lin = m_rot * inner_rot * *minv.rotation.matrix();
            let trans = m_rot * (inner_rot * minv.translation + inner_t);
            deriv.push((lin, trans));
        }
    }
    value
}
