use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::envelope::{build_envelope, generate_dataset, EnvelopeConfig};
use crate::plan::group;
use crate::rigmath::Rotation;
use crate::rng;
use crate::vec3::{Mat3, Vec3};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A learned model over a small dataset, shared by the tests in this file.
fn test_model() -> SkelModel {
    let envelope = build_envelope(&EnvelopeConfig::default()).unwrap();
    let data = generate_dataset(&envelope, 2, 40, 71, 0.0);
    let (model, _) = learn_from_dataset(&envelope, &data).unwrap();
    model
}

fn random_pose(model: &SkelModel, rng: &mut ChaCha8Rng, frac: f64) -> Pose {
    let mut pose = Pose::zero();
    for spec in model.tree().joints() {
        for (k, lim) in spec.limits.iter().enumerate() {
            let mid = 0.5 * (lim[0] + lim[1]);
            let half = 0.5 * (lim[1] - lim[0]);
            pose.q[spec.dof_offset + k] = mid + half * frac * rng::uniform_in(rng, -1.0, 1.0);
        }
    }
    pose
}

#[test]
fn zero_pose_outputs_shaped_template_and_regressed_joints() {
    let model = test_model();
    let beta = vec![0.3, -0.4, 0.2, 0.1, 0.4, -0.3, 0.2, 0.0];
    let out = model.forward(&beta, &Pose::zero()).unwrap();
    let shaped = model.shaped_vertices(&beta).unwrap();
    for (a, b) in out.v_skin.vertices.iter().zip(&shaped) {
        assert!((*a - *b).norm() < 1e-12);
    }
    // Zero-pose regressor fixed point: the output joints equal the joints
    // regressed from the output skin.
    let reg = crate::regressor::regress_joints(&model.regressor, &out.v_skin.vertices).unwrap();
    for (a, b) in out.joints.iter().zip(&reg) {
        assert!((*a - *b).norm() < 1e-9);
    }
    assert!(out.clamped_dofs.is_empty());
}

#[test]
fn pure_root_rotation_rotates_all_outputs() {
    let model = test_model();
    let beta = vec![0.0; model.shape_dims()];
    let rest = model.forward(&beta, &Pose::zero()).unwrap();
    let mut pose = Pose::zero();
    pose.q[0] = 0.5;
    pose.q[1] = -0.3;
    pose.q[2] = 0.8;
    let out = model.forward(&beta, &pose).unwrap();
    let placement = model.placement(&beta).unwrap();
    let root = placement.fk.joints[0];
    // The applied world rotation is the root's local rotation conjugated by
    // its bone orientation.
    let local = crate::rigmath::euler_xzy_to_rotation([0.5, -0.3, 0.8]);
    let r0 = placement.fk.orient[0];
    let world = r0.compose(&local).compose(&r0.inverse());
    let check = |rested: &[Vec3], posed: &[Vec3]| {
        for (a, b) in rested.iter().zip(posed) {
            let expect = world.apply(*a - root) + root;
            assert!((*b - expect).norm() < 1e-9, "{:?} vs {:?}", expect, b);
        }
    };
    check(&rest.v_skin.vertices, &out.v_skin.vertices);
    check(&rest.v_skel.vertices, &out.v_skel.vertices);
    check(&rest.joints, &out.joints);
}

#[test]
fn elbow_hinge_rotates_forearm_rigidly_about_regressed_elbow() {
    let model = test_model();
    let beta = vec![0.0; model.shape_dims()];
    let placement = model.placement(&beta).unwrap();
    let rest = model.forward(&beta, &Pose::zero()).unwrap();
    let elbow_dof = model.tree().joint(group::ULNA_L).dof_offset;
    let mut pose = Pose::zero();
    pose.q[elbow_dof] = core::f64::consts::FRAC_PI_2;
    let out = model.forward(&beta, &pose).unwrap();

    // Independent single-joint oracle: rotate rigidly about the regressed
    // elbow joint by the local hinge rotation conjugated into world axes.
    let spec = model.tree().joint(group::ULNA_L);
    let axis_local = match spec.kind {
        crate::kinematics::JointKind::Hinge1 { axis } => axis,
        _ => panic!("elbow is a hinge"),
    };
    let r_bone = placement.fk.orient[group::ULNA_L];
    let world_axis = r_bone.apply(axis_local);
    let oracle = Rotation::about_axis(world_axis, core::f64::consts::FRAC_PI_2);
    let elbow = placement.fk.joints[group::ULNA_L];
    let rotate = |p: Vec3| oracle.apply(p - elbow) + elbow;

    // Weight-1 skin vertices of the left forearm groups move rigidly.
    let forearm = [group::ULNA_L, group::RADIUS_L, group::HAND_L];
    let mut checked = 0;
    for (vi, w) in model.skin_weights.iter().enumerate() {
        if w.len() == 1 && forearm.contains(&(w[0].0 as usize)) {
            let expect = rotate(rest.v_skin.vertices[vi]);
            assert!((out.v_skin.vertices[vi] - expect).norm() < 1e-9);
            checked += 1;
        }
    }
    assert!(checked > 30, "weight-1 forearm vertices: {checked}");

    // All skeleton vertices of the ulna/radius/hand bones move rigidly.
    let mut offset = 0usize;
    for (g, bone) in model.skeleton.bone_meshes.iter().enumerate() {
        for vi in 0..bone.vertices.len() {
            if forearm.contains(&g) {
                let expect = rotate(rest.v_skel.vertices[offset + vi]);
                assert!((out.v_skel.vertices[offset + vi] - expect).norm() < 1e-9);
            }
        }
        offset += bone.vertices.len();
    }
}

#[test]
fn bone_scales_near_one_on_training_shape() {
    let model = test_model();
    let beta = vec![0.0; model.shape_dims()];
    let placement = model.placement(&beta).unwrap();
    let scales = bone_scale_factors(
        &placement.fk.joints,
        &placement.segment_ends,
        &model.skeleton.rest_joints,
        &model.skeleton.rest_ends,
    )
    .unwrap();
    for (g, s) in scales.iter().enumerate() {
        let long = s[crate::plan::PARTS[g].long_axis];
        assert!((0.95..=1.05).contains(&long), "bone {g} scale {long}");
        for (k, v) in s.iter().enumerate() {
            if k != crate::plan::PARTS[g].long_axis {
                assert_eq!(*v, 1.0);
            }
        }
    }
}

#[test]
fn bone_scales_are_linear_in_length_shape() {
    // Segment lengths are linear in the shape vector, so scale - 1 doubles
    // when the length coefficient doubles.
    let model = test_model();
    let femur_axis = crate::plan::PARTS[group::FEMUR_L].long_axis;
    let scale_at = |amp: f64| -> f64 {
        let mut beta = vec![0.0; model.shape_dims()];
        beta[0] = amp; // leg length direction
        let placement = model.placement(&beta).unwrap();
        let scales = bone_scale_factors(
            &placement.fk.joints,
            &placement.segment_ends,
            &model.skeleton.rest_joints,
            &model.skeleton.rest_ends,
        )
        .unwrap();
        scales[group::FEMUR_L][femur_axis]
    };
    let s0 = scale_at(0.0);
    let s1 = scale_at(1.0);
    let s2 = scale_at(2.0);
    assert!((s2 - s0) - 2.0 * (s1 - s0) < 1e-6);
    assert!(s1 > s0 + 0.01, "leg shape direction must lengthen the femur");
    // Purity: same shape twice gives identical scales.
    assert_eq!(scale_at(1.3), scale_at(1.3));
}

#[test]
fn dual_rig_joints_agree_between_skin_and_skeleton_space() {
    let model = test_model();
    let beta = vec![0.5, -0.2, 0.3, 0.1, -0.4, 0.2, 0.5, -0.1];
    let shaped = model.shaped_vertices(&beta).unwrap();
    let placement = model.placement_for_shaped(&shaped).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    for _ in 0..40 {
        let pose = random_pose(&model, &mut rng, 0.5);
        let cache = FkCache::evaluate(model.tree(), &pose.q, &placement.fk, false).unwrap();
        for k in 0..model.tree().len() {
            let skel = cache.skel_transform(&placement.fk, k);
            let from_skel = skel.apply(Vec3::zero());
            let from_skin = cache.skin[k].apply(placement.fk.joints[k]);
            assert!((from_skel - from_skin).norm() < 1e-9);
        }
    }
}

#[test]
fn pronation_sweep_leaves_ulna_skeleton_vertices_bit_stable() {
    let model = test_model();
    let beta = vec![0.0; model.shape_dims()];
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let base_pose = random_pose(&model, &mut rng, 0.3);
    let pron = model.tree().joint(group::RADIUS_L).dof_offset;
    let ulna_range = {
        let mut offset = 0usize;
        let mut range = 0..0;
        for (g, bone) in model.skeleton.bone_meshes.iter().enumerate() {
            if g == group::ULNA_L {
                range = offset..offset + bone.vertices.len();
            }
            offset += bone.vertices.len();
        }
        range
    };
    let reference = model.forward(&beta, &base_pose).unwrap();
    for step in 0..8 {
        let mut pose = base_pose.clone();
        pose.q[pron] = -1.5 + step as f64 * 0.4;
        let out = model.forward(&beta, &pose).unwrap();
        for vi in ulna_range.clone() {
            assert_eq!(
                reference.v_skel.vertices[vi].to_array(),
                out.v_skel.vertices[vi].to_array(),
                "ulna vertex {vi} moved under pronation"
            );
        }
    }
}

#[test]
fn scapula_anchor_stays_on_thorax_ellipsoid_over_grid() {
    let model = test_model();
    let beta = vec![0.2, 0.1, -0.3, 0.0, 0.3, -0.2, 0.1, 0.2];
    let shaped = model.shaped_vertices(&beta).unwrap();
    let placement = model.placement_for_shaped(&shaped).unwrap();
    let scap = group::SCAPULA_L;
    let anchor_rest = SkelModel::scapula_rest_anchor(&placement, scap).unwrap();
    let (ell_world, semi) = SkelModel::scapula_ellipsoid_world(&placement, scap).unwrap();
    let spec = model.tree().joint(scap);
    for i in 0..20 {
        for j in 0..20 {
            let u = -1.0 + 2.0 * i as f64 / 19.0;
            let v = -1.0 + 2.0 * j as f64 / 19.0;
            let mut q = [0.0; crate::plan::DOF_COUNT];
            q[spec.dof_offset] = u;
            q[spec.dof_offset + 1] = v;
            q[spec.dof_offset + 2] = 0.4 * u;
            let cache = FkCache::evaluate(model.tree(), &q, &placement.fk, false).unwrap();
            let posed = cache.skin[scap].apply(anchor_rest);
            let local = ell_world.inverse().apply(posed);
            let res = (local.x / semi[0]) * (local.x / semi[0])
                + (local.y / semi[1]) * (local.y / semi[1])
                + (local.z / semi[2]) * (local.z / semi[2]);
            let err = (res - 1.0).abs() * semi[0].min(semi[1]).min(semi[2]);
            assert!(err < 1e-6, "anchor off surface by {err} at ({u}, {v})");
        }
    }
}

#[test]
fn skeleton_mesh_is_continuous_in_spine_dofs() {
    let model = test_model();
    let beta = vec![0.0; model.shape_dims()];
    let lumbar = model.tree().joint(group::LUMBAR).dof_offset;
    let mut prev: Option<Vec<Vec3>> = None;
    let steps = 30;
    for i in 0..=steps {
        let mut pose = Pose::zero();
        pose.q[lumbar] = -0.6 + 1.2 * i as f64 / steps as f64;
        pose.q[lumbar + 1] = 0.4 * (i as f64 / steps as f64);
        let out = model.forward(&beta, &pose).unwrap();
        if let Some(p) = prev {
            let step_bound = 1.2 / steps as f64 * 3.0; // |dv/dq| is O(arc radius)
            for (a, b) in p.iter().zip(&out.v_skel.vertices) {
                assert!((*a - *b).norm() < step_bound, "skeleton jump {}", (*a - *b).norm());
            }
        }
        prev = Some(out.v_skel.vertices);
    }
}

#[test]
fn joint_ranges_report_matches_dof_table() {
    let model = test_model();
    let rows = model.joint_ranges_report();
    assert_eq!(rows.len(), 46);
    for row in &rows {
        assert!(row.lo <= row.hi);
    }
    let knee_rows: Vec<_> = rows.iter().filter(|r| r.joint.starts_with("tibia")).collect();
    assert_eq!(knee_rows.len(), 2);
    for r in knee_rows {
        assert_eq!(r.kind, "hinge1");
        assert_eq!((r.lo, r.hi), (0.0, 2.6));
    }
    let scap_rows: Vec<_> = rows.iter().filter(|r| r.joint.starts_with("scapula")).collect();
    assert_eq!(scap_rows.len(), 6);
    for r in scap_rows {
        assert_eq!(r.kind, "scapula3");
    }
}

#[test]
fn pose_correctives_hook_vanishes_at_zero_pose() {
    let mut model = test_model();
    let n = model.skin_template.len();
    let field: Vec<Vec3> = (0..n).map(|i| Vec3::new(0.0, 0.001 * (i % 3) as f64, 0.0)).collect();
    model.pose_correctives = Some(PoseCorrectives { entries: vec![(9, field)] });
    let beta = vec![0.0; model.shape_dims()];
    let at_zero = model.forward(&beta, &Pose::zero()).unwrap();
    for (a, b) in at_zero.v_skin.vertices.iter().zip(&model.skin_template) {
        assert!((*a - *b).norm() < 1e-12);
    }
    let mut pose = Pose::zero();
    pose.q[9] = 1.0;
    let bent = model.forward(&beta, &pose).unwrap();
    let mut plain = model.clone();
    plain.pose_correctives = None;
    let bent_plain = plain.forward(&beta, &pose).unwrap();
    let moved = bent
        .v_skin
        .vertices
        .iter()
        .zip(&bent_plain.v_skin.vertices)
        .any(|(a, b)| (*a - *b).norm() > 1e-6);
    assert!(moved, "corrective table must influence posed output");
}

#[test]
fn limit_policy_clamps_or_errors() {
    let mut model = test_model();
    let beta = vec![0.0; model.shape_dims()];
    let knee = model.tree().joint(group::TIBIA_L).dof_offset;
    let mut pose = Pose::zero();
    pose.q[knee] = -1.0; // below the hinge range
    let out = model.forward(&beta, &pose).unwrap();
    assert_eq!(out.clamped_dofs, vec![knee]);
    model.limit_policy = LimitPolicy::Error;
    assert!(matches!(model.forward(&beta, &pose), Err(SkelError::AngleLimit { .. })));
}

#[test]
fn learned_base_rotations_are_nontrivial() {
    // The envelope's axis-aligned frames differ from the anatomical frames
    // by the planted roll, so the learned base rotations are far from the
    // identity for the twisted bones.
    let model = test_model();
    let humerus = &model.base_rotations[group::HUMERUS_L];
    assert!(humerus.matrix().frobenius_distance(&Mat3::identity()) > 0.1);
}
