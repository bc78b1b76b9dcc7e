//! Paired surface/skeleton dataset generation.
//!
//! Subjects are sampled in shape space; poses follow smooth random
//! trajectories within the joint limits. Every frame records the posed
//! envelope vertices and markers together with the anatomical ground truth
//! the later learning stages consume: joint locations, per-bone anatomical
//! rotations, and the envelope's own bone rotations.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::kinematics::{
    fk, joint_local_transform, KinematicTree, Placement, Pose,
};
use crate::plan;
use crate::rigmath::{rotation_between, rotation_to_euler_xzy, Rotation};
use crate::rng;
use crate::vec3::{Mat3, Vec3};

use super::{envelope_pose, extract_markers, EnvelopeModel, MarkerSet};

/// Per-frame record.
#[derive(Debug, Clone)]
pub struct FrameData {
    /// Generating pose (ground truth).
    pub pose: Pose,
    /// Posed envelope vertices, global translation applied.
    pub vertices: Vec<Vec3>,
    /// Marker targets (posed marker vertices plus optional noise).
    pub markers: Vec<Vec3>,
    /// Posed anatomical joints.
    pub joints: Vec<Vec3>,
    /// Anatomical per-bone world rotations.
    pub rot_anat: Vec<Mat3>,
    /// Envelope per-bone world rotations.
    pub rot_env: Vec<Mat3>,
}

/// Per-subject record.
#[derive(Debug, Clone)]
pub struct SubjectData {
    pub beta: Vec<f64>,
    /// Ground-truth per-bone scales implied by the shape (longitudinal
    /// component on each bone's long axis, transverse 1).
    pub scales: Vec<[f64; 3]>,
    pub frames: Vec<FrameData>,
}

/// The generated paired dataset.
#[derive(Debug, Clone)]
pub struct PairedDataset {
    pub markerset: MarkerSet,
    pub subjects: Vec<SubjectData>,
    pub seed: u64,
    pub noise_sigma: f64,
    /// (bony, soft) marker counts actually realized.
    pub marker_counts: (usize, usize),
}

/// Distal segment endpoints for every bone on a given vertex array.
pub fn segment_ends(model: &EnvelopeModel, joints: &[Vec3], vertices: &[Vec3]) -> Vec<Vec3> {
    plan::PARTS
        .iter()
        .enumerate()
        .map(|(g, part)| match part.segment {
            plan::SegmentEnd::Joint(child) => joints[child],
            plan::SegmentEnd::TipOf(_) => {
                vertices[model.landmarks[g].expect("tip landmark") as usize]
            }
        })
        .collect()
}

/// Thorax bounding-box ellipsoid of a vertex array.
pub fn thorax_ellipsoid(model: &EnvelopeModel, vertices: &[Vec3]) -> (Vec3, [f64; 3]) {
    let mut lo = Vec3::splat(f64::INFINITY);
    let mut hi = Vec3::splat(f64::NEG_INFINITY);
    for (vi, v) in vertices.iter().enumerate() {
        if model.part_of_vertex[vi] as usize == plan::group::THORAX {
            for k in 0..3 {
                if v[k] < lo[k] {
                    lo[k] = v[k];
                }
                if v[k] > hi[k] {
                    hi[k] = v[k];
                }
            }
        }
    }
    let center = (lo + hi) * 0.5;
    let m = plan::SCAPULA_ELLIPSOID_MARGIN;
    let semi = [
        (hi.x - lo.x) * 0.5 * m,
        (hi.y - lo.y) * 0.5 * m,
        (hi.z - lo.z) * 0.5 * m,
    ];
    (center, semi)
}

/// Ground-truth anatomical bone orientations for a subject: the rotation
/// aligning each rest segment onto the shaped segment, composed with the
/// bone's anatomical roll about its rest segment axis.
pub fn planted_orientations(model: &EnvelopeModel, beta: &[f64]) -> Vec<Rotation> {
    let shaped = model.shaped_vertices(beta).expect("beta dims");
    let rest_joints = model.anatomical_joints(&model.template);
    let rest_ends = segment_ends(model, &rest_joints, &model.template);
    let joints = model.anatomical_joints(&shaped);
    let ends = segment_ends(model, &joints, &shaped);
    let mut out = Vec::with_capacity(plan::GROUP_COUNT);
    for (g, part) in plan::PARTS.iter().enumerate() {
        let rest_dir = (rest_ends[g] - rest_joints[g]).normalized(1e-9).expect("rest segment");
        let dir = (ends[g] - joints[g]).normalized(1e-9).expect("shaped segment");
        let align = rotation_between(rest_dir, dir).rotation;
        let twist = Rotation::about_axis(rest_dir, part.twist);
        out.push(align.compose(&twist));
    }
    out
}

/// Placement of the anatomical skeleton inside a subject (the generator's
/// ground truth; the learning pipeline reconstructs this from data).
pub fn planted_placement(
    model: &EnvelopeModel,
    tree: &KinematicTree,
    beta: &[f64],
) -> Placement {
    let shaped = model.shaped_vertices(beta).expect("beta dims");
    let joints = model.anatomical_joints(&shaped);
    let ends = segment_ends(model, &joints, &shaped);
    let orient = planted_orientations(model, beta);
    let ell = thorax_ellipsoid(model, &shaped);
    let ctx = fk::shape_contexts(tree, &orient, &joints, &ends, Some(ell))
        .expect("plan tree contexts");
    Placement { orient, joints, ctx }
}

/// Map a skeleton pose to envelope ball-joint angles: each joint's local
/// rotation, conjugated into world axes by the subject's anatomical bone
/// orientation, becomes the envelope joint's Euler angles. Joint
/// translations (spine arcs, scapula sliding) have no envelope equivalent
/// and are dropped — that is the envelope's approximation.
pub fn pose_to_envelope_angles(
    tree: &KinematicTree,
    placement: &Placement,
    q: &[f64],
) -> Vec<f64> {
    let mut theta = vec![0.0; super::ENVELOPE_DOF];
    for (k, spec) in tree.joints().iter().enumerate() {
        let local = joint_local_transform(spec, &q[spec.dof_range()], &placement.ctx[k])
            .expect("pose in range");
        let world =
            placement.orient[k].compose(&local.rotation).compose(&placement.orient[k].inverse());
        let euler = rotation_to_euler_xzy(&world);
        theta[3 * k..3 * k + 3].copy_from_slice(&euler);
    }
    theta
}

/// Ground-truth longitudinal scales implied by a shape.
fn implied_scales(model: &EnvelopeModel, beta: &[f64]) -> Vec<[f64; 3]> {
    let shaped = model.shaped_vertices(beta).expect("beta dims");
    let rest_joints = model.anatomical_joints(&model.template);
    let rest_ends = segment_ends(model, &rest_joints, &model.template);
    let joints = model.anatomical_joints(&shaped);
    let ends = segment_ends(model, &joints, &shaped);
    plan::PARTS
        .iter()
        .enumerate()
        .map(|(g, part)| {
            let rest_len = (rest_ends[g] - rest_joints[g]).norm();
            let len = (ends[g] - joints[g]).norm();
            let mut s = [1.0, 1.0, 1.0];
            s[part.long_axis] = len / rest_len;
            s
        })
        .collect()
}

/// Smooth per-DOF trajectory: a ramped sum of three sinusoids centered
/// inside the joint limits.
struct DofTrajectory {
    center: f64,
    amp: [f64; 3],
    freq: [f64; 3],
    phase: [f64; 3],
    lo: f64,
    hi: f64,
}

impl DofTrajectory {
    fn sample(rng: &mut ChaCha8Rng, lo: f64, hi: f64, amplitude: f64) -> Self {
        let mut amp = [0.0; 3];
        let mut freq = [0.0; 3];
        let mut phase = [0.0; 3];
        for h in 0..3 {
            amp[h] = amplitude * rng::uniform_in(rng, 0.2, 1.0) / 1.8;
            freq[h] = rng::uniform_in(rng, 0.4, 2.4);
            phase[h] = rng::uniform_in(rng, 0.0, core::f64::consts::TAU);
        }
        // Keep the oscillation inside the limits.
        let center = crate::fmath::clamp(0.0, lo + amplitude, hi - amplitude);
        Self { center, amp, freq, phase, lo, hi }
    }

    fn eval(&self, t: f64, ramp: f64) -> f64 {
        let mut v = 0.0;
        for h in 0..3 {
            v += self.amp[h] * crate::fmath::sin(core::f64::consts::TAU * self.freq[h] * t + self.phase[h]);
        }
        crate::fmath::clamp(ramp * (self.center + v), self.lo, self.hi)
    }
}

/// Generate the paired dataset. Deterministic in `(model, counts, seed,
/// noise)`: subjects draw from independent, seeded RNG streams.
pub fn generate_dataset(
    model: &EnvelopeModel,
    n_subjects: usize,
    n_frames: usize,
    rng_seed: u64,
    noise_sigma: f64,
) -> PairedDataset {
    assert!(n_subjects >= 1 && n_frames >= 1, "need at least one subject and frame");
    let tree = KinematicTree::default_humanoid();
    let markerset = MarkerSet::default_for(model);
    let mut subjects = Vec::with_capacity(n_subjects);
    for si in 0..n_subjects {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        rng.set_stream(si as u64 + 1);
        subjects.push(generate_subject(model, &tree, &markerset, &mut rng, n_frames, noise_sigma));
    }
    let marker_counts = markerset.count_by_class();
    PairedDataset { markerset, subjects, seed: rng_seed, noise_sigma, marker_counts }
}

fn generate_subject(
    model: &EnvelopeModel,
    tree: &KinematicTree,
    markerset: &MarkerSet,
    rng: &mut ChaCha8Rng,
    n_frames: usize,
    noise_sigma: f64,
) -> SubjectData {
    let dims = model.shape_dims();
    let mut beta = Vec::with_capacity(dims);
    for _ in 0..dims {
        beta.push(crate::fmath::clamp(0.8 * rng::normal(rng), -2.0, 2.0));
    }
    let placement = planted_placement(model, tree, &beta);
    let rest_orient = planted_orientations(model, &beta);

    // Per-DOF trajectories.
    let mut trajs = Vec::with_capacity(tree.dof_count());
    for (g, spec) in tree.joints().iter().enumerate() {
        for (k, lim) in spec.limits.iter().enumerate() {
            let amp = plan::dof_amplitude(g, k);
            trajs.push(DofTrajectory::sample(rng, lim[0], lim[1], amp));
        }
    }
    let mut trans_traj = Vec::with_capacity(3);
    for _ in 0..3 {
        trans_traj.push(DofTrajectory::sample(rng, -0.2, 0.2, 0.1));
    }

    let mut frames = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let t = f as f64 / n_frames.max(2) as f64;
        let ramp = crate::fmath::min(1.0, f as f64 / 12.0);
        let mut pose = Pose::zero();
        for (d, traj) in trajs.iter().enumerate() {
            pose.q[d] = traj.eval(t, ramp);
        }
        pose.trans = Vec3::new(
            trans_traj[0].eval(t, ramp),
            trans_traj[1].eval(t, ramp),
            trans_traj[2].eval(t, ramp),
        );
        let theta = pose_to_envelope_angles(tree, &placement, &pose.q);
        let mut mesh = envelope_pose(model, &beta, &theta).expect("generator pose");
        for v in &mut mesh.vertices {
            *v += pose.trans;
        }
        let mut markers = extract_markers(model, markerset, &mesh).expect("marker set");
        if noise_sigma > 0.0 {
            for m in &mut markers {
                *m += Vec3::new(
                    noise_sigma * rng::normal(rng),
                    noise_sigma * rng::normal(rng),
                    noise_sigma * rng::normal(rng),
                );
            }
        }
        let joints = model.anatomical_joints(&mesh.vertices);
        let rot_env = model.env_world_rotations(&theta).expect("theta dims");
        let rot_anat: Vec<Mat3> = rot_env
            .iter()
            .zip(rest_orient.iter())
            .map(|(rs, anat)| *rs * *anat.matrix())
            .collect();
        frames.push(FrameData { pose, vertices: mesh.vertices, markers, joints, rot_anat, rot_env });
    }

    let scales = implied_scales(model, &beta);
    SubjectData { beta, scales, frames }
}
