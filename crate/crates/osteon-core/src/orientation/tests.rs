use super::*;
use crate::envelope::{build_envelope, generate_dataset, EnvelopeConfig};
use crate::kinematics::KinematicTree;
use crate::plan;
use crate::rng;
use crate::vec3::Vec3;

use alloc::vec::Vec;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rand_rotation(rng: &mut ChaCha8Rng) -> Rotation {
    let axis = Vec3::new(
        rng::uniform_in(rng, -1.0, 1.0),
        rng::uniform_in(rng, -1.0, 1.0),
        rng::uniform_in(rng, -1.0, 1.0),
    )
    .normalized(1e-6)
    .unwrap();
    Rotation::about_axis(axis, rng::uniform_in(rng, -3.0, 3.0))
}

#[test]
fn single_pair_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..50 {
        let rs = rand_rotation(&mut rng);
        let rb = rand_rotation(&mut rng);
        let r = learn_base_rotation(&[(*rs.matrix(), *rb.matrix())]).unwrap();
        let expect = rs.inverse().compose(&rb);
        assert!(r.matrix().frobenius_distance(expect.matrix()) < 1e-12);
    }
}

#[test]
fn planted_rotation_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let target = rand_rotation(&mut rng);
    let pairs: Vec<(Mat3, Mat3)> = (0..50)
        .map(|_| {
            let rs = rand_rotation(&mut rng);
            (*rs.matrix(), *rs.compose(&target).matrix())
        })
        .collect();
    let r = learn_base_rotation(&pairs).unwrap();
    assert!(r.matrix().frobenius_distance(target.matrix()) < 1e-10);
}

#[test]
fn perturbed_pairs_beat_sampled_rotations() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let target = rand_rotation(&mut rng);
    let pairs: Vec<(Mat3, Mat3)> = (0..50)
        .map(|_| {
            let rs = rand_rotation(&mut rng);
            let noise_axis = Vec3::new(
                rng::uniform_in(&mut rng, -1.0, 1.0),
                rng::uniform_in(&mut rng, -1.0, 1.0),
                rng::uniform_in(&mut rng, -1.0, 1.0),
            )
            .normalized(1e-6)
            .unwrap();
            let noisy = rs.compose(&target).compose(&Rotation::about_axis(
                noise_axis,
                rng::uniform_in(&mut rng, -1e-3, 1e-3),
            ));
            (*rs.matrix(), *noisy.matrix())
        })
        .collect();
    let r = learn_base_rotation(&pairs).unwrap();
    let objective = |cand: &Rotation| -> f64 {
        pairs
            .iter()
            .map(|(rs, rb)| {
                let pred = *rs * *cand.matrix();
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let d = rb.m[i][j] - pred.m[i][j];
                        s += d * d;
                    }
                }
                s
            })
            .sum()
    };
    let best = objective(&r);
    for _ in 0..1000 {
        let q = rand_rotation(&mut rng);
        assert!(best <= objective(&q) + 1e-12);
    }
    assert!(r.angle_to(&target) < 5e-3);
}

#[test]
fn pair_order_does_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let pairs: Vec<(Mat3, Mat3)> = (0..20)
        .map(|_| (*rand_rotation(&mut rng).matrix(), *rand_rotation(&mut rng).matrix()))
        .collect();
    let mut reversed = pairs.clone();
    reversed.reverse();
    let a = learn_base_rotation(&pairs).unwrap();
    let b = learn_base_rotation(&reversed).unwrap();
    assert!(a.matrix().frobenius_distance(b.matrix()) < 1e-12);
}

#[test]
fn empty_pairs_rejected() {
    assert_eq!(learn_base_rotation(&[]), Err(OrientationError::NoPairs));
}

#[test]
fn corrective_identity_for_parallel_segments() {
    let sc = shape_corrective(
        &Rotation::IDENTITY,
        (Vec3::zero(), Vec3::new(0.0, 1.0, 0.0)),
        (Vec3::new(1.0, 2.0, 3.0), Vec3::new(1.0, 3.5, 3.0)),
    )
    .unwrap();
    assert!(!sc.antiparallel);
    assert!(sc.rotation.matrix().frobenius_distance(&Mat3::identity()) < 1e-12);
}

#[test]
fn corrective_quarter_turn_for_perpendicular_segments() {
    let sc = shape_corrective(
        &Rotation::IDENTITY,
        (Vec3::zero(), Vec3::new(1.0, 0.0, 0.0)),
        (Vec3::zero(), Vec3::new(0.0, 2.0, 0.0)),
    )
    .unwrap();
    let expect = Rotation::about_axis(Vec3::new(0.0, 0.0, 1.0), core::f64::consts::FRAC_PI_2);
    assert!(sc.rotation.matrix().frobenius_distance(expect.matrix()) < 1e-12);
}

#[test]
fn corrective_rejects_zero_segments() {
    assert!(matches!(
        shape_corrective(
            &Rotation::IDENTITY,
            (Vec3::zero(), Vec3::splat(1e-8)),
            (Vec3::zero(), Vec3::new(1.0, 0.0, 0.0)),
        ),
        Err(OrientationError::ZeroSegment { .. })
    ));
}

#[test]
fn corrective_alignment_and_twist_freedom() {
    // Over random inputs: the corrective aligns within 1e-8 rad and its
    // axis is perpendicular to the target segment (no roll).
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..100 {
        let base = rand_rotation(&mut rng);
        let rest = (
            Vec3::zero(),
            Vec3::new(
                rng::uniform_in(&mut rng, -1.0, 1.0),
                rng::uniform_in(&mut rng, -1.0, 1.0),
                rng::uniform_in(&mut rng, -1.0, 1.0),
            ),
        );
        let reg = (
            Vec3::new(0.2, -0.1, 0.4),
            Vec3::new(0.2, -0.1, 0.4)
                + Vec3::new(
                    rng::uniform_in(&mut rng, -1.0, 1.0),
                    rng::uniform_in(&mut rng, -1.0, 1.0),
                    rng::uniform_in(&mut rng, -1.0, 1.0),
                ),
        );
        if (rest.1 - rest.0).norm() < 0.05 || (reg.1 - reg.0).norm() < 0.05 {
            continue;
        }
        let sc = shape_corrective(&base, rest, reg).unwrap();
        let aligned = sc.rotation.compose(&base).apply(rest.1 - rest.0);
        let w = (reg.1 - reg.0).normalized(0.0).unwrap();
        let cosang = aligned.normalized(0.0).unwrap().dot(w);
        assert!(cosang > 1.0 - 1e-10, "alignment residual {}", 1.0 - cosang);
        if sc.antiparallel {
            continue;
        }
        // R - R^T encodes the rotation axis away from the degenerate cases.
        let m = sc.rotation.matrix();
        let axis =
            Vec3::new(m.m[2][1] - m.m[1][2], m.m[0][2] - m.m[2][0], m.m[1][0] - m.m[0][1]);
        if axis.norm() > 1e-9 {
            let axis = axis.normalized(0.0).unwrap();
            assert!(axis.dot(w).abs() < 1e-10, "roll component {}", axis.dot(w));
        }
    }
}

/// Placement built from a small dataset with the planted regressor and base
/// rotations learned from the generated pairs.
fn learned_placement(beta_sel: usize) -> (KinematicTree, TPosePlacement) {
    let model = build_envelope(&EnvelopeConfig::default()).unwrap();
    let tree = KinematicTree::default_humanoid();
    let data = generate_dataset(&model, 2, 30, 17, 0.0);
    let mut base = Vec::new();
    for g in 0..plan::GROUP_COUNT {
        let mut pairs = Vec::new();
        for subj in &data.subjects {
            for f in &subj.frames {
                pairs.push((f.rot_env[g], f.rot_anat[g]));
            }
        }
        base.push(learn_base_rotation(&pairs).unwrap());
    }
    let regressor = crate::regressor::JointRegressor::new(
        model.anat_joint_rows.clone(),
        model.vertex_count(),
    )
    .unwrap();
    let beta = data.subjects[beta_sel].beta.clone();
    let shaped = model.shaped_vertices(&beta).unwrap();
    let rest_joints = model.anatomical_joints(&model.template);
    let rest_ends = shaped_segment_ends(&rest_joints, &model.template, &model.landmarks);
    let thorax: Vec<u32> = model
        .part_of_vertex
        .iter()
        .enumerate()
        .filter(|(_, &p)| p as usize == plan::group::THORAX)
        .map(|(i, _)| i as u32)
        .collect();
    let geometry = SegmentGeometry {
        rest_joints: &rest_joints,
        rest_ends: &rest_ends,
        landmarks: &model.landmarks,
        thorax_vertices: &thorax,
    };
    let placement = build_placement(&tree, &regressor, &shaped, &base, &geometry).unwrap();
    (tree, placement)
}

#[test]
fn placement_decomposition_invariant() {
    // For every bone: R_i(beta) applied to the rest segment is parallel to
    // the regressed segment within 1e-8 rad.
    let model = build_envelope(&EnvelopeConfig::default()).unwrap();
    let rest_joints = model.anatomical_joints(&model.template);
    let rest_ends = shaped_segment_ends(&rest_joints, &model.template, &model.landmarks);
    let (_, placement) = learned_placement(1);
    for g in 0..plan::GROUP_COUNT {
        let rest_dir = (rest_ends[g] - rest_joints[g]).normalized(0.0).unwrap();
        let reg_dir =
            (placement.segment_ends[g] - placement.fk.joints[g]).normalized(0.0).unwrap();
        let aligned = placement.fk.orient[g].apply(rest_dir);
        // Near zero the cross-product norm measures the angle without the
        // acos precision floor.
        assert!(aligned.dot(reg_dir) > 0.0);
        let angle = aligned.cross(reg_dir).norm();
        assert!(angle < 1e-8, "bone {g} misaligned by {angle}");
    }
}

#[test]
fn placement_is_pure() {
    let (_, a) = learned_placement(0);
    let (_, b) = learned_placement(0);
    assert_eq!(a.fk, b.fk);
}

#[test]
fn base_rotations_shared_and_correctives_shape_specific() {
    let (_, a) = learned_placement(0);
    let (_, b) = learned_placement(1);
    for (ra, rb) in a.base.iter().zip(&b.base) {
        assert_eq!(ra.matrix().m, rb.matrix().m);
    }
    let differs = a
        .corrective
        .iter()
        .zip(&b.corrective)
        .any(|(x, y)| x.matrix().frobenius_distance(y.matrix()) > 1e-9);
    assert!(differs);
}
