//! Forward kinematics over a kinematic tree and a T-pose placement.
//!
//! For every joint `k` the placement supplies the T-pose bone orientation
//! `R_k` and joint location `J_k`, combined into `C_k: x -> R_k x + J_k`.
//! With `G^B_k` the joint-local transform, the per-joint factors are
//! conjugates `A_k = C_k G^B_k C_k^-1`, and
//!
//! - skin space:     `G_i^skin = A_0 A_1 ... A_i` (root first),
//! - skeleton space: `G_i^skel = G_i^skin C_i`,
//!
//! so the two spaces agree on where every joint is: the skeleton transform
//! applied to the bone template origin (the parent joint) equals
//! `G_i^skin(J_i)`. A zero pose makes every `A_k` the identity, so skin
//! space rests at the identity and skeleton space rests at the placement.

use alloc::vec;
use alloc::vec::Vec;

use super::{joint_local_jet, JointKind, KinematicTree, KinError};
use crate::rigmath::{RigidTransform, Rotation};
use crate::vec3::{Mat3, Vec3};

/// Shape context for a scapulothoracic joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScapulaCtx {
    /// Ellipsoid semi-axes (a, b, c).
    pub semi: [f64; 3],
    /// Pose of the ellipsoid frame in the joint's local frame.
    pub ell_in_local: RigidTransform,
    /// Surface parameters of the rest anchor.
    pub rest_uv: [f64; 2],
}

/// Per-joint shape-dependent geometry consumed by the joint transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JointCtx {
    /// Use the rest geometry stored in the joint kind.
    None,
    /// Spine arc length for the current shape.
    Spine { arc_len: f64 },
    /// Pronation axis endpoints in the joint's local frame.
    Pronation { elbow: Vec3, extremity: Vec3 },
    Scapula(ScapulaCtx),
}

/// T-pose placement: per-joint bone orientation, joint location, and joint
/// context. This is what forward kinematics needs from the orientation
/// learning stage (or from per-bone scaling, for the raw skeleton).
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub orient: Vec<Rotation>,
    pub joints: Vec<Vec3>,
    pub ctx: Vec<JointCtx>,
}

impl Placement {
    /// Rest placement of a tree: identity orientations, rest joints, rest
    /// joint contexts.
    pub fn rest(tree: &KinematicTree) -> Self {
        let n = tree.len();
        let mut p = Placement {
            orient: vec![Rotation::IDENTITY; n],
            joints: Vec::with_capacity(n),
            ctx: vec![JointCtx::None; n],
        };
        for j in tree.joints() {
            p.joints.push(j.rest_joint);
        }
        p
    }

    /// `C_k`: map from the bone-local frame to T-pose world.
    #[inline]
    pub fn bone_to_world(&self, k: usize) -> RigidTransform {
        RigidTransform::new(self.orient[k], self.joints[k])
    }

    fn check(&self, tree: &KinematicTree) -> Result<(), KinError> {
        if self.orient.len() != tree.len()
            || self.joints.len() != tree.len()
            || self.ctx.len() != tree.len()
        {
            return Err(KinError::MissingPlacement { joint: self.orient.len() });
        }
        Ok(())
    }
}

/// Global transforms produced by forward kinematics.
#[derive(Debug, Clone)]
pub struct FkTransforms {
    /// Skin-space transforms (identity at zero pose).
    pub skin: Vec<RigidTransform>,
    /// Skeleton-space transforms (placement at zero pose); applied to bone
    /// template meshes whose parent joint sits at the local origin.
    pub skel: Vec<RigidTransform>,
}

/// Run forward kinematics for `q` (no global translation) over the tree.
pub fn forward_kinematics(
    tree: &KinematicTree,
    q: &[f64],
    placement: &Placement,
) -> Result<FkTransforms, KinError> {
    let cache = FkCache::evaluate(tree, q, placement, false)?;
    Ok(cache.into_transforms(tree, placement))
}

/// Forward kinematics plus everything the solvers need to differentiate
/// posed points with respect to the pose vector.
pub struct FkCache {
    /// Per-joint conjugated factors `A_k`.
    pub factors: Vec<RigidTransform>,
    /// Skin-space chain transforms `G_k^skin`.
    pub skin: Vec<RigidTransform>,
    /// Per joint, per local DOF: affine derivative of `A_k`.
    pub dfactors: Vec<Vec<(Mat3, Vec3)>>,
}

impl FkCache {
    pub fn evaluate(
        tree: &KinematicTree,
        q: &[f64],
        placement: &Placement,
        with_deriv: bool,
    ) -> Result<Self, KinError> {
        placement.check(tree)?;
        if q.len() != tree.dof_count() {
            return Err(KinError::DimensionMismatch { expected: tree.dof_count(), got: q.len() });
        }
        let n = tree.len();
        let mut factors = Vec::with_capacity(n);
        let mut skin: Vec<RigidTransform> = Vec::with_capacity(n);
        let mut dfactors = Vec::with_capacity(n);
        for (k, spec) in tree.joints().iter().enumerate() {
            let jet = joint_local_jet(spec, &q[spec.dof_range()], &placement.ctx[k], with_deriv)?;
            let c = placement.bone_to_world(k);
            let c_inv = c.inverse();
            let a = c.compose(&jet.value).compose(&c_inv);
            let rc = *c.rotation.matrix();
            let rct = *c_inv.rotation.matrix();
            let mut da = Vec::with_capacity(jet.deriv.len());
            for (dr, dt) in jet.deriv {
                // A(v) = C(G(C^-1 v)); dA(v) = Rc dG(C^-1 v)
                //       = (Rc dR Rc^T)(v - J) + Rc dt.
                let lin = rc * dr * rct;
                let trans = rc * dt - lin * c.translation;
                da.push((lin, trans));
            }
            dfactors.push(da);
            let g = if spec.parent < 0 {
                a
            } else {
                skin[spec.parent as usize].compose(&a)
            };
            factors.push(a);
            skin.push(g);
        }
        Ok(Self { factors, skin, dfactors })
    }

    pub fn into_transforms(self, tree: &KinematicTree, placement: &Placement) -> FkTransforms {
        let mut skel = Vec::with_capacity(tree.len());
        for k in 0..tree.len() {
            skel.push(self.skin[k].compose(&placement.bone_to_world(k)));
        }
        FkTransforms { skin: self.skin, skel }
    }

    pub fn skel_transform(&self, placement: &Placement, k: usize) -> RigidTransform {
        self.skin[k].compose(&placement.bone_to_world(k))
    }

    /// Posed position of a T-pose-world point attached to `bone`.
    pub fn apply_to_point(&self, bone: usize, x: Vec3) -> Vec3 {
        self.skin[bone].apply(x)
    }

    /// Fill the Jacobian columns of a posed point with respect to the pose
    /// entries of `bone`'s chain. `out` must hold `dof_count` columns and is
    /// not cleared outside the chain; typical callers zero it first.
    pub fn point_jacobian(
        &self,
        tree: &KinematicTree,
        bone: usize,
        x: Vec3,
        out: &mut [Vec3],
    ) {
        let chain = tree.chain(bone);
        // Suffix points: suffix[p] = A_{chain[p]} ... A_{chain[last]} x.
        let mut suffix = vec![x; chain.len() + 1];
        for p in (0..chain.len()).rev() {
            suffix[p] = self.factors[chain[p]].apply(suffix[p + 1]);
        }
        for (p, &j) in chain.iter().enumerate() {
            let spec = tree.joint(j);
            let pre_rot = if p == 0 {
                None
            } else {
                Some(*self.skin[chain[p - 1]].rotation.matrix())
            };
            for (k, (lin, trans)) in self.dfactors[j].iter().enumerate() {
                let local = *lin * suffix[p + 1] + *trans;
                let col = match &pre_rot {
                    Some(r) => *r * local,
                    None => local,
                };
                out[spec.dof_offset + k] = col;
            }
        }
    }
}

/// Naive reference evaluation of the two chained products, multiplying the
/// printed per-joint factor lists as flat homogeneous 4x4 matrices. Shares
/// no code with [`forward_kinematics`] beyond the joint-local transforms it
/// is given; used as the oracle in the acceptance suite.
pub mod oracle {
    use super::*;

    type M4 = [[f64; 4]; 4];

    fn identity4() -> M4 {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        m
    }

    fn mul4(a: &M4, b: &M4) -> M4 {
        let mut r = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for (k, bk) in b.iter().enumerate() {
                    s += a[i][k] * bk[j];
                }
                r[i][j] = s;
            }
        }
        r
    }

    fn from_rt(rot: &Mat3, t: Vec3) -> M4 {
        let mut m = identity4();
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = rot.m[i][j];
            }
            m[i][3] = t[i];
        }
        m
    }

    fn rot_only(r: &Rotation) -> M4 {
        from_rt(r.matrix(), Vec3::zero())
    }

    fn trans_only(t: Vec3) -> M4 {
        from_rt(&Mat3::identity(), t)
    }

    fn invert_rigid(m: &M4) -> M4 {
        let mut rt = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                rt[i][j] = m[j][i];
            }
        }
        let mut out = identity4();
        for i in 0..3 {
            let mut ti = 0.0;
            for j in 0..3 {
                out[i][j] = rt[i][j];
                ti += rt[i][j] * m[j][3];
            }
            out[i][3] = -ti;
        }
        out
    }

    /// Literal product for the skin-space chain:
    /// `prod_k T(R_k, J_k) G^B_k T(R_k, 0)^-1 T(0, J_k)^-1`.
    pub fn skin_chain(
        tree: &KinematicTree,
        q: &[f64],
        placement: &Placement,
        bone: usize,
    ) -> Result<M4, KinError> {
        let mut acc = identity4();
        for k in tree.chain(bone) {
            let spec = tree.joint(k);
            let gb = super::super::joint_local_transform(spec, &q[spec.dof_range()], &placement.ctx[k])?;
            let r_k = placement.orient[k];
            let j_k = placement.joints[k];
            let t_rj = from_rt(r_k.matrix(), j_k);
            let gb4 = from_rt(gb.rotation.matrix(), gb.translation);
            let r_inv = invert_rigid(&rot_only(&r_k));
            let j_inv = invert_rigid(&trans_only(j_k));
            let factor = mul4(&mul4(&mul4(&t_rj, &gb4), &r_inv), &j_inv);
            acc = mul4(&acc, &factor);
        }
        Ok(acc)
    }

    /// Literal product for the skeleton-space chain, with the per-joint
    /// `T(0, J) T(R, 0)` placement factors taken relative to the parent
    /// bone frame so the chained product lands each bone on its own
    /// T-pose placement:
    /// `prod_k T(0, J'_k) T(R'_k, 0) G^B_k` where `C'_k = C_parent^-1 C_k`.
    pub fn skel_chain(
        tree: &KinematicTree,
        q: &[f64],
        placement: &Placement,
        bone: usize,
    ) -> Result<M4, KinError> {
        let mut acc = identity4();
        for k in tree.chain(bone) {
            let spec = tree.joint(k);
            let gb = super::super::joint_local_transform(spec, &q[spec.dof_range()], &placement.ctx[k])?;
            let c_k = from_rt(placement.orient[k].matrix(), placement.joints[k]);
            let c_local = if spec.parent < 0 {
                c_k
            } else {
                let p = spec.parent as usize;
                let c_p = from_rt(placement.orient[p].matrix(), placement.joints[p]);
                mul4(&invert_rigid(&c_p), &c_k)
            };
            // Split C' into its translation and rotation factors to follow
            // the printed T(0, J') T(R', 0) G^B form.
            let mut rot = Mat3::identity();
            let mut t = Vec3::zero();
            for i in 0..3 {
                for j in 0..3 {
                    rot.m[i][j] = c_local[i][j];
                }
                t[i] = c_local[i][3];
            }
            let gb4 = from_rt(gb.rotation.matrix(), gb.translation);
            let factor = mul4(&mul4(&trans_only(t), &from_rt(&rot, Vec3::zero())), &gb4);
            acc = mul4(&acc, &factor);
        }
        Ok(acc)
    }

    /// Max absolute entry difference between a 4x4 oracle product and a
    /// rigid transform.
    pub fn max_diff(m: &M4, t: &RigidTransform) -> f64 {
        use crate::fmath::{abs, max};
        let mut d: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                d = max(d, abs(m[i][j] - t.rotation.matrix().m[i][j]));
            }
            d = max(d, abs(m[i][3] - t.translation[i]));
        }
        for j in 0..3 {
            d = max(d, abs(m[3][j]));
        }
        max(d, abs(m[3][3] - 1.0))
    }
}

/// Build the per-joint shape contexts for a placement from shaped geometry:
/// per-joint distal segment endpoints and the thorax ellipsoid (for the
/// scapula joints). `orient` and `joints` are the placement's bone
/// orientations and joint locations.
pub fn shape_contexts(
    tree: &KinematicTree,
    orient: &[Rotation],
    joints: &[Vec3],
    segment_ends: &[Vec3],
    ellipsoid: Option<(Vec3, [f64; 3])>,
) -> Result<Vec<JointCtx>, KinError> {
    let mut ctx = Vec::with_capacity(tree.len());
    for (k, spec) in tree.joints().iter().enumerate() {
        let local = RigidTransform::new(orient[k], joints[k]).inverse();
        let c = match spec.kind {
            JointKind::SpineCc3 { .. } => {
                JointCtx::Spine { arc_len: (segment_ends[k] - joints[k]).norm() }
            }
            JointKind::Pronation1 { .. } => {
                let parent = spec.parent;
                if parent < 0 {
                    return Err(KinError::MissingPlacement { joint: k });
                }
                JointCtx::Pronation {
                    elbow: local.apply(joints[parent as usize]),
                    extremity: local.apply(segment_ends[k]),
                }
            }
            JointKind::Scapula3 { .. } => {
                let (center, semi) =
                    ellipsoid.ok_or(KinError::MissingPlacement { joint: k })?;
                JointCtx::Scapula(ScapulaCtx {
                    semi,
                    ell_in_local: local.compose(&RigidTransform::from_translation(center)),
                    rest_uv: ellipsoid_uv_toward(center, semi, joints[k]),
                })
            }
            _ => JointCtx::None,
        };
        ctx.push(c);
    }
    Ok(ctx)
}

/// Ellipsoid surface parameters `(u, v)` of the point where the ray from
/// the ellipsoid center through `p` crosses the surface.
pub fn ellipsoid_uv_toward(center: Vec3, semi: [f64; 3], p: Vec3) -> [f64; 2] {
    let w = Vec3::new(
        (p.x - center.x) / semi[0],
        (p.y - center.y) / semi[1],
        (p.z - center.z) / semi[2],
    );
    let w = w.normalized(1e-12).unwrap_or(Vec3::new(0.0, 0.0, 1.0));
    let v = crate::fmath::asin(crate::fmath::clamp(w.y, -1.0, 1.0));
    let u = crate::fmath::atan2(w.x, w.z);
    [u, v]
}
