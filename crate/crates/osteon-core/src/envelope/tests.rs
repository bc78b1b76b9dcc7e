use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::kinematics::KinematicTree;
use crate::plan;
use crate::rigmath::Rotation;
use crate::vec3::Vec3;

fn model() -> EnvelopeModel {
    build_envelope(&EnvelopeConfig::default()).unwrap()
}

#[test]
fn default_mesh_size_and_segmentation() {
    let m = model();
    assert!(
        (1500..=3000).contains(&m.vertex_count()),
        "vertex count {}",
        m.vertex_count()
    );
    let mut seen = [false; plan::GROUP_COUNT];
    for &p in &m.part_of_vertex {
        seen[p as usize] = true;
    }
    assert!(seen.iter().all(|&s| s), "all 24 parts populated");
    Mesh { vertices: m.template.clone(), triangles: m.triangles.clone() }.validate().unwrap();
}

#[test]
fn rejects_bad_config() {
    let mut c = EnvelopeConfig::default();
    c.ring_segments = 3;
    assert!(matches!(build_envelope(&c), Err(EnvelopeError::ConfigError(_))));
    let mut c = EnvelopeConfig::default();
    c.shape_dims = 7;
    assert!(build_envelope(&c).is_err());
}

#[test]
fn zero_shape_is_template() {
    let m = model();
    let beta = vec![0.0; m.shape_dims()];
    let shaped = m.shaped_vertices(&beta).unwrap();
    assert_eq!(shaped, m.template);
}

#[test]
fn girth_only_shape_leaves_joint_distances_unchanged() {
    let m = model();
    let mut beta = vec![0.0; m.shape_dims()];
    let half = m.shape_dims() / 2;
    for b in beta.iter_mut().skip(half) {
        *b = 1.3;
    }
    let shaped = m.shaped_vertices(&beta).unwrap();
    let j0 = m.anatomical_joints(&m.template);
    let j1 = m.anatomical_joints(&shaped);
    for a in 0..j0.len() {
        for b in a + 1..j0.len() {
            let d0 = (j0[a] - j0[b]).norm();
            let d1 = (j1[a] - j1[b]).norm();
            assert!((d0 - d1).abs() < 1e-9, "joints {a},{b}: {d0} vs {d1}");
        }
    }
    // The envelope's own regressed joints stay fixed as well.
    let e0 = m.env_joints(&m.template);
    let e1 = m.env_joints(&shaped);
    for (a, b) in e0.iter().zip(&e1) {
        assert!((*a - *b).norm() < 1e-6);
    }
}

#[test]
fn skinning_rows_are_partition_of_unity() {
    let m = model();
    for row in &m.skin_weights {
        assert!(row.len() <= 4);
        let s: f64 = row.iter().map(|e| e.1).sum();
        assert!((s - 1.0).abs() < 1e-9);
        assert!(row.iter().all(|e| e.1 >= 0.0));
    }
}

#[test]
fn zero_pose_is_shaped_template() {
    let m = model();
    let beta = vec![0.4, -0.3, 0.2, 0.0, 0.5, -0.2, 0.1, 0.3];
    let shaped = m.shaped_vertices(&beta).unwrap();
    let posed = envelope_pose(&m, &beta, &vec![0.0; ENVELOPE_DOF]).unwrap();
    for (a, b) in posed.vertices.iter().zip(&shaped) {
        assert!((*a - *b).norm() < 1e-12);
    }
}

#[test]
fn global_root_rotation_rotates_all_vertices() {
    let m = model();
    let beta = vec![0.0; m.shape_dims()];
    let mut theta = vec![0.0; ENVELOPE_DOF];
    theta[0] = 0.4;
    theta[1] = -0.3;
    theta[2] = 0.7;
    let posed = envelope_pose(&m, &beta, &theta).unwrap();
    let r = crate::rigmath::euler_xzy_to_rotation([0.4, -0.3, 0.7]);
    let root = m.env_joints(&m.template)[0];
    for (vi, v) in m.template.iter().enumerate() {
        let expect = r.apply(*v - root) + root;
        assert!((posed.vertices[vi] - expect).norm() < 1e-9);
    }
}

#[test]
fn single_joint_bend_moves_owned_vertices_rigidly() {
    let m = model();
    let beta = vec![0.0; m.shape_dims()];
    let knee = plan::group::TIBIA_L;
    let mut theta = vec![0.0; ENVELOPE_DOF];
    theta[3 * knee] = core::f64::consts::FRAC_PI_2;
    let posed = envelope_pose(&m, &beta, &theta).unwrap();
    let joint = m.env_joints(&m.template)[knee];
    let r = Rotation::about_axis(Vec3::new(1.0, 0.0, 0.0), core::f64::consts::FRAC_PI_2);
    let mut checked = 0;
    for (vi, v) in m.template.iter().enumerate() {
        let w = &m.skin_weights[vi];
        if w.len() == 1 && w[0].0 as usize == knee {
            let expect = r.apply(*v - joint) + joint;
            assert!((posed.vertices[vi] - expect).norm() < 1e-12);
            checked += 1;
        }
    }
    assert!(checked > 20, "expected a rigid core of tibia vertices, got {checked}");
}

#[test]
fn lbs_equivariant_under_root_composition() {
    // R applied at the root on top of an arbitrary pose rotates the posed
    // mesh rigidly about the root joint.
    let m = model();
    let beta = vec![0.2; m.shape_dims()];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    use rand_chacha::rand_core::SeedableRng;
    let mut theta = vec![0.0; ENVELOPE_DOF];
    for (d, th) in theta.iter_mut().enumerate().skip(3) {
        *th = 0.25 * crate::rng::normal(&mut rng) * ((d % 3) as f64 * 0.3 + 0.4);
    }
    let base = envelope_pose(&m, &beta, &theta).unwrap();
    let root_euler = [0.3, -0.5, 0.8];
    let mut theta2 = theta.clone();
    theta2[..3].copy_from_slice(&root_euler);
    let rotated = envelope_pose(&m, &beta, &theta2).unwrap();
    let r = crate::rigmath::euler_xzy_to_rotation(root_euler);
    let shaped = m.shaped_vertices(&beta).unwrap();
    let root = m.env_joints(&shaped)[0];
    for (a, b) in base.vertices.iter().zip(&rotated.vertices) {
        let expect = r.apply(*a - root) + root;
        assert!((*b - expect).norm() < 1e-9);
    }
}

#[test]
fn default_marker_set_counts() {
    let m = model();
    let ms = MarkerSet::default_for(&m);
    let (bony, soft) = ms.count_by_class();
    assert_eq!((bony, soft), (57, 48));
    assert_eq!(ms.len(), 105);
    // Bony markers carry the higher weight.
    for mk in &ms.markers {
        match mk.class {
            MarkerClass::Bony => assert_eq!(mk.weight, plan::BONY_WEIGHT),
            MarkerClass::Soft => assert_eq!(mk.weight, plan::SOFT_WEIGHT),
        }
    }
}

#[test]
fn extract_markers_identity_on_template() {
    let m = model();
    let ms = MarkerSet::default_for(&m);
    let mesh = Mesh { vertices: m.template.clone(), triangles: m.triangles.clone() };
    let pos = extract_markers(&m, &ms, &mesh).unwrap();
    for (p, mk) in pos.iter().zip(&ms.markers) {
        assert_eq!(*p, m.template[mk.vertex as usize]);
    }
}

#[test]
fn markers_transform_with_rigid_mesh_motion() {
    let m = model();
    let ms = MarkerSet::default_for(&m);
    let r = Rotation::about_axis(Vec3::new(0.0, 1.0, 0.0), 0.9);
    let t = Vec3::new(0.3, -0.1, 0.2);
    let moved = Mesh {
        vertices: m.template.iter().map(|v| r.apply(*v) + t).collect(),
        triangles: m.triangles.clone(),
    };
    let pos = extract_markers(&m, &ms, &moved).unwrap();
    for (p, mk) in pos.iter().zip(&ms.markers) {
        let expect = r.apply(m.template[mk.vertex as usize]) + t;
        assert_eq!(*p, expect);
    }
}

#[test]
fn dataset_is_deterministic_under_seed() {
    let m = model();
    let a = generate_dataset(&m, 2, 6, 42, 0.002);
    let b = generate_dataset(&m, 2, 6, 42, 0.002);
    assert_eq!(a.subjects.len(), b.subjects.len());
    for (sa, sb) in a.subjects.iter().zip(&b.subjects) {
        assert_eq!(sa.beta, sb.beta);
        for (fa, fb) in sa.frames.iter().zip(&sb.frames) {
            assert_eq!(fa.pose.q, fb.pose.q);
            assert_eq!(fa.markers, fb.markers);
            assert_eq!(fa.vertices, fb.vertices);
        }
    }
    let c = generate_dataset(&m, 2, 6, 43, 0.002);
    assert_ne!(a.subjects[0].beta, c.subjects[0].beta);
}

#[test]
fn noise_free_markers_sit_on_mesh_vertices() {
    let m = model();
    let d = generate_dataset(&m, 1, 4, 5, 0.0);
    for f in &d.subjects[0].frames {
        for (p, mk) in f.markers.iter().zip(&d.markerset.markers) {
            assert_eq!(*p, f.vertices[mk.vertex as usize]);
        }
    }
}

#[test]
fn marker_noise_matches_half_normal_mean() {
    let m = model();
    let sigma = 0.005;
    let clean = generate_dataset(&m, 1, 40, 9, 0.0);
    let noisy = generate_dataset(&m, 1, 40, 9, sigma);
    let mut abs_sum = 0.0;
    let mut n = 0usize;
    for (fc, fn_) in clean.subjects[0].frames.iter().zip(&noisy.subjects[0].frames) {
        for (a, b) in fc.markers.iter().zip(&fn_.markers) {
            let e = *b - *a;
            abs_sum += e.x.abs() + e.y.abs() + e.z.abs();
            n += 3;
        }
    }
    let mean_abs = abs_sum / n as f64;
    let expect = sigma * (2.0 / core::f64::consts::PI).sqrt();
    assert!(
        (mean_abs - expect).abs() < 0.2 * expect,
        "half-normal mean {mean_abs} vs {expect}"
    );
}

#[test]
fn planted_rotations_relate_envelope_and_anatomy() {
    // R^B = R^S * R_anat by construction in every generated frame.
    let m = model();
    let d = generate_dataset(&m, 1, 5, 11, 0.0);
    let subj = &d.subjects[0];
    let anat0 = dataset::planted_orientations(&m, &subj.beta);
    for f in &subj.frames {
        for g in 0..plan::GROUP_COUNT {
            let expect = f.rot_env[g] * *anat0[g].matrix();
            assert!(expect.frobenius_distance(&f.rot_anat[g]) < 1e-12);
        }
    }
}

#[test]
fn generated_poses_respect_limits() {
    let m = model();
    let tree = KinematicTree::default_humanoid();
    let d = generate_dataset(&m, 2, 30, 13, 0.0);
    for subj in &d.subjects {
        for f in &subj.frames {
            let mut q = f.pose.q;
            let touched = tree.clamp_to_limits(&mut q);
            assert!(touched.is_empty(), "pose outside limits at {touched:?}");
        }
    }
}
