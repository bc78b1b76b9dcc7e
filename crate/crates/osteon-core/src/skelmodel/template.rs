//! Procedural per-bone skeleton template meshes.
//!
//! Every bone mesh lives in its bone-local frame: the parent joint at the
//! origin, the shaft running along the rest segment direction. Vertices are
//! stored as little-endian-friendly `f32` triples, the unit the model file
//! persists, so save/load round-trips are bit-exact.

use alloc::vec::Vec;

use crate::plan;
use crate::vec3::Vec3;

/// One bone mesh in bone-local coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BoneMesh {
    pub vertices: Vec<[f32; 3]>,
    pub triangles: Vec<[u32; 3]>,
    /// Skeleton-skinning weight on the bone's own transform per vertex
    /// (1 everywhere except the interpolated spine/ribcage groups, where it
    /// ramps 0 at the section bottom to 1 at the top). The remainder goes
    /// to the parent chain.
    pub own_weight: Vec<f32>,
}

const SEGMENTS: usize = 8;

/// Shaft radius profile per group, fractions of a nominal scale.
fn radius_profile(group: usize) -> (&'static [f32], f32) {
    use plan::group::*;
    // (profile along the shaft, absolute scale in meters)
    match group {
        PELVIS => (&[0.8, 1.0, 1.0, 0.9], 0.055),
        LUMBAR => (&[0.5, 0.9, 0.5, 0.9, 0.5, 0.9], 0.030),
        THORAX => (&[0.45, 0.9, 1.0, 0.95, 0.7, 0.5], 0.085),
        HEAD => (&[0.22, 0.22, 0.8, 1.0, 0.85], 0.065),
        SCAPULA_L | SCAPULA_R => (&[0.6, 1.0, 0.8], 0.022),
        FEMUR_L | FEMUR_R => (&[1.0, 0.55, 0.55, 0.9], 0.024),
        TIBIA_L | TIBIA_R => (&[0.9, 0.5, 0.5, 0.85], 0.019),
        HUMERUS_L | HUMERUS_R => (&[1.0, 0.55, 0.55, 0.9], 0.020),
        ULNA_L | ULNA_R | RADIUS_L | RADIUS_R => (&[0.9, 0.55, 0.5, 0.8], 0.013),
        HAND_L | HAND_R => (&[0.8, 1.0, 0.7], 0.016),
        TALUS_L | TALUS_R => (&[0.9, 1.0], 0.016),
        CALCN_L | CALCN_R => (&[1.0, 0.9, 0.7], 0.018),
        TOES_L | TOES_R => (&[0.8, 0.6], 0.012),
        _ => (&[0.8, 0.8], 0.015),
    }
}

/// Build one bone mesh along `dir * len` with the group's radius profile.
fn bone_tube(group: usize, dir: Vec3, len: f64, spine_ramp: bool) -> BoneMesh {
    let (profile, scale) = radius_profile(group);
    let rings = profile.len();
    // Ring basis perpendicular to the shaft.
    let reference = if dir.dot(Vec3::new(0.0, 0.0, 1.0)).abs() < 0.9 {
        Vec3::new(0.0, 0.0, 1.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let e1 = (reference - dir * reference.dot(dir)).normalized(1e-12).unwrap();
    let e2 = dir.cross(e1);

    let mut vertices: Vec<[f32; 3]> = Vec::new();
    let mut own_weight = Vec::new();
    let mut triangles = Vec::new();
    for (ri, &rf) in profile.iter().enumerate() {
        let t = ri as f64 / (rings - 1) as f64;
        let center = dir * (len * t);
        let r = rf as f64 * scale as f64;
        for j in 0..SEGMENTS {
            let phi = core::f64::consts::TAU * j as f64 / SEGMENTS as f64;
            let p = center + (e1 * crate::fmath::cos(phi) + e2 * crate::fmath::sin(phi)) * r;
            vertices.push([p.x as f32, p.y as f32, p.z as f32]);
            own_weight.push(if spine_ramp { t as f32 } else { 1.0 });
        }
    }
    let apex0 = vertices.len() as u32;
    let a0 = dir * (-0.25 * scale as f64);
    vertices.push([a0.x as f32, a0.y as f32, a0.z as f32]);
    own_weight.push(if spine_ramp { 0.0 } else { 1.0 });
    let apex1 = vertices.len() as u32;
    let a1 = dir * (len + 0.25 * scale as f64);
    vertices.push([a1.x as f32, a1.y as f32, a1.z as f32]);
    own_weight.push(1.0);

    let ring = |r: usize, j: usize| (r * SEGMENTS + j) as u32;
    for j in 0..SEGMENTS {
        triangles.push([apex0, ring(0, (j + 1) % SEGMENTS), ring(0, j)]);
    }
    for r in 0..rings - 1 {
        for j in 0..SEGMENTS {
            let a = ring(r, j);
            let b = ring(r, (j + 1) % SEGMENTS);
            let c = ring(r + 1, j);
            let d = ring(r + 1, (j + 1) % SEGMENTS);
            triangles.push([a, b, d]);
            triangles.push([a, d, c]);
        }
    }
    for j in 0..SEGMENTS {
        triangles.push([apex1, ring(rings - 1, j), ring(rings - 1, (j + 1) % SEGMENTS)]);
    }
    BoneMesh { vertices, triangles, own_weight }
}

/// Build all 24 bone template meshes for a rest layout.
pub fn build_bone_meshes(rest_joints: &[Vec3], rest_ends: &[Vec3]) -> Vec<BoneMesh> {
    plan::PARTS
        .iter()
        .enumerate()
        .map(|(g, part)| {
            let seg = rest_ends[g] - rest_joints[g];
            let len = seg.norm();
            let dir = seg / len;
            let spine_ramp = matches!(part.kind, plan::PlanKind::Spine);
            bone_tube(g, dir, len, spine_ramp)
        })
        .collect()
}
