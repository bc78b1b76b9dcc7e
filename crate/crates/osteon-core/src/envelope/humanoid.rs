//! Procedural capsule-limb humanoid: the over-parameterized source body.
//!
//! Each body part from the plan becomes a tube of vertex rings with two cap
//! apexes. The builder also derives everything that depends on the mesh
//! layout: the 24-part segmentation, skinning weights, the shape basis, the
//! ring-combination rows defining the envelope's own joints and the
//! anatomical joints, tip landmarks, and per-vertex radial directions.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;
use crate::plan::{self, PartPlan};
use crate::vec3::Vec3;

/// Ring layout bookkeeping for one part.
#[derive(Debug, Clone)]
pub struct PartLayout {
    /// First vertex index of the part.
    pub vert_start: usize,
    /// Ring vertex indices are `vert_start + ring * segments + j`.
    pub rings: usize,
    pub segments: usize,
    /// Axis stations (world points) of each ring on the template.
    pub stations: Vec<Vec3>,
    /// Apex vertex indices (proximal, distal).
    pub apex: [usize; 2],
    /// Tube axis direction (unit).
    pub dir: Vec3,
    /// In-plane ring basis (e1 toward +z / +y reference, e2 = dir x e1).
    pub e1: Vec3,
    pub e2: Vec3,
}

impl PartLayout {
    pub fn ring_vertex(&self, ring: usize, j: usize) -> usize {
        self.vert_start + ring * self.segments + j
    }
}

pub struct BuiltMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub part_of_vertex: Vec<u16>,
    pub layouts: Vec<PartLayout>,
    /// Unit direction from the part axis, zero for apex vertices.
    pub radial_dir: Vec<Vec3>,
}

fn ring_basis(dir: Vec3) -> (Vec3, Vec3) {
    let z = Vec3::new(0.0, 0.0, 1.0);
    let y = Vec3::new(0.0, 1.0, 0.0);
    let reference = if fmath::abs(dir.dot(z)) < 0.9 { z } else { y };
    let e1 = (reference - dir * reference.dot(dir)).normalized(1e-12).expect("ring basis");
    let e2 = dir.cross(e1);
    (e1, e2)
}

fn ring_radius(part: &PartPlan, ring: usize) -> f64 {
    let t = if part.rings > 1 { ring as f64 / (part.rings - 1) as f64 } else { 0.0 };
    match part.profile {
        Some(profile) => {
            // Piecewise-linear interpolation over the profile table.
            let x = t * (profile.len() - 1) as f64;
            let i = fmath::min(fmath::floor(x), (profile.len() - 2) as f64) as usize;
            let frac = x - i as f64;
            profile[i] * (1.0 - frac) + profile[i + 1] * frac
        }
        None => part.r0 * (1.0 - t) + part.r1 * t,
    }
}

/// Build the template mesh for a given ring segment count.
pub fn build_mesh(segments: usize) -> BuiltMesh {
    let mut vertices = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    let mut part_of_vertex = Vec::new();
    let mut radial_dir = Vec::new();
    let mut layouts = Vec::with_capacity(plan::GROUP_COUNT);

    for (pid, part) in plan::PARTS.iter().enumerate() {
        let p0 = Vec3::from_array(part.p0);
        let p1 = Vec3::from_array(part.p1);
        let axis = p1 - p0;
        let dir = axis.normalized(1e-12).expect("part axis");
        let (e1, e2) = ring_basis(dir);
        let vert_start = vertices.len();
        let mut stations = Vec::with_capacity(part.rings);
        for ring in 0..part.rings {
            let t = if part.rings > 1 { ring as f64 / (part.rings - 1) as f64 } else { 0.0 };
            let center = p0 + axis * t;
            stations.push(center);
            let r = ring_radius(part, ring);
            for j in 0..segments {
                let phi = core::f64::consts::TAU * j as f64 / segments as f64;
                let rad = e1 * fmath::cos(phi) + e2 * fmath::sin(phi);
                vertices.push(center + rad * r);
                radial_dir.push(rad);
                part_of_vertex.push(pid as u16);
            }
        }
        let apex0 = vertices.len();
        vertices.push(p0 - dir * part.cap0);
        radial_dir.push(Vec3::zero());
        part_of_vertex.push(pid as u16);
        let apex1 = vertices.len();
        vertices.push(p1 + dir * part.cap1);
        radial_dir.push(Vec3::zero());
        part_of_vertex.push(pid as u16);

        let layout = PartLayout {
            vert_start,
            rings: part.rings,
            segments,
            stations,
            apex: [apex0, apex1],
            dir,
            e1,
            e2,
        };

        // Proximal fan (wound toward the apex), ring strips, distal fan.
        for j in 0..segments {
            let a = layout.ring_vertex(0, j) as u32;
            let b = layout.ring_vertex(0, (j + 1) % segments) as u32;
            triangles.push([apex0 as u32, b, a]);
        }
        for ring in 0..part.rings - 1 {
            for j in 0..segments {
                let a = layout.ring_vertex(ring, j) as u32;
                let b = layout.ring_vertex(ring, (j + 1) % segments) as u32;
                let c = layout.ring_vertex(ring + 1, j) as u32;
                let d = layout.ring_vertex(ring + 1, (j + 1) % segments) as u32;
                triangles.push([a, b, d]);
                triangles.push([a, d, c]);
            }
        }
        for j in 0..segments {
            let a = layout.ring_vertex(part.rings - 1, j) as u32;
            let b = layout.ring_vertex(part.rings - 1, (j + 1) % segments) as u32;
            triangles.push([apex1 as u32, a, b]);
        }
        layouts.push(layout);
    }

    BuiltMesh { vertices, triangles, part_of_vertex, layouts, radial_dir }
}

/// Sparse nonnegative row over mesh vertices.
pub type SparseRow = Vec<(u32, f64)>;

/// Ring-interpolation row targeting a point on a part's axis: the two rings
/// bracketing the point's axis station share the weight, uniformly within
/// each ring. The row sums to one.
pub fn ring_lerp_row(layout: &PartLayout, target: Vec3) -> SparseRow {
    let n = layout.stations.len();
    let axis0 = layout.stations[0];
    let along = (target - axis0).dot(layout.dir);
    let total = (layout.stations[n - 1] - axis0).dot(layout.dir);
    let x = if total > 0.0 {
        fmath::clamp(along / total, 0.0, 1.0) * (n - 1) as f64
    } else {
        0.0
    };
    let i = fmath::min(fmath::floor(x), (n - 2).max(0) as f64) as usize;
    let s = if n > 1 { x - i as f64 } else { 0.0 };
    let mut row = Vec::with_capacity(2 * layout.segments);
    let seg_w = 1.0 / layout.segments as f64;
    if s < 1.0 {
        for j in 0..layout.segments {
            row.push((layout.ring_vertex(i, j) as u32, (1.0 - s) * seg_w));
        }
    }
    if s > 0.0 && n > 1 {
        for j in 0..layout.segments {
            row.push((layout.ring_vertex(i + 1, j) as u32, s * seg_w));
        }
    }
    row
}

/// Apply a sparse row to a vertex array.
pub fn apply_row(row: &SparseRow, vertices: &[Vec3]) -> Vec3 {
    let mut p = Vec3::zero();
    for &(i, w) in row {
        p += vertices[i as usize] * w;
    }
    p
}

/// Per-vertex skinning weights, at most four influences, summing to one.
pub fn build_skin_weights(mesh: &BuiltMesh, blend_radius: f64) -> Vec<Vec<(u16, f64)>> {
    // Seam points: each part blends with its parent near its own proximal
    // seam (p0) and with each child near that child's seam.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); plan::GROUP_COUNT];
    for (pid, part) in plan::PARTS.iter().enumerate() {
        if part.parent >= 0 {
            children[part.parent as usize].push(pid);
        }
    }
    let mut weights = Vec::with_capacity(mesh.vertices.len());
    for (vi, &v) in mesh.vertices.iter().enumerate() {
        let pid = mesh.part_of_vertex[vi] as usize;
        let part = &plan::PARTS[pid];
        let mut entries: Vec<(u16, f64)> = Vec::new();
        let mut own = 1.0;
        if part.parent >= 0 {
            let seam = Vec3::from_array(part.p0);
            let d = (v - seam).norm();
            let w = 0.5 * fmath::max(0.0, 1.0 - d / blend_radius);
            if w > 0.0 {
                entries.push((part.parent as u16, w));
                own -= w;
            }
        }
        for &child in &children[pid] {
            let seam = Vec3::from_array(plan::PARTS[child].p0);
            let d = (v - seam).norm();
            let w = 0.5 * fmath::max(0.0, 1.0 - d / blend_radius);
            if w > 0.0 {
                entries.push((child as u16, w));
                own -= w;
            }
        }
        entries.push((pid as u16, fmath::max(own, 0.0)));
        // Keep the four largest influences and renormalize.
        entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        entries.truncate(4);
        let sum: f64 = entries.iter().map(|e| e.1).sum();
        for e in &mut entries {
            e.1 /= sum;
        }
        entries.sort_by_key(|e| e.0);
        weights.push(entries);
    }
    weights
}

/// Which parts belong to the legs / arms for shape-basis purposes.
fn leg_parts() -> [usize; 10] {
    use plan::group::*;
    [FEMUR_L, FEMUR_R, TIBIA_L, TIBIA_R, TALUS_L, TALUS_R, CALCN_L, CALCN_R, TOES_L, TOES_R]
}

fn arm_parts() -> [usize; 8] {
    use plan::group::*;
    [HUMERUS_L, HUMERUS_R, ULNA_L, ULNA_R, RADIUS_L, RADIUS_R, HAND_L, HAND_R]
}

/// Build the shape basis: `dims/2` limb-length directions followed by
/// `dims/2` girth directions. Each direction is a per-vertex displacement
/// field applied linearly in the shape coefficient.
pub fn build_shape_basis(mesh: &BuiltMesh, dims: usize) -> Vec<Vec<Vec3>> {
    use plan::group::*;
    let n = mesh.vertices.len();
    let part_of = &mesh.part_of_vertex;

    let length_fields: [fn(&BuiltMesh, usize, Vec3) -> Vec3; 4] = [
        // Legs lengthen downward, pinned at the hips.
        |m, vi, v| {
            if leg_parts().contains(&(m.part_of_vertex[vi] as usize)) {
                let f = fmath::clamp((0.90 - v.y) / 0.80, 0.0, 1.0);
                Vec3::new(0.0, -0.05 * f, 0.0)
            } else {
                Vec3::zero()
            }
        },
        // Torso lengthens upward; parts above the chest ride along with the
        // factor at their attachment height.
        |m, vi, v| {
            let pid = m.part_of_vertex[vi] as usize;
            let carried = match pid {
                HEAD => Some(1.0),
                SCAPULA_L | SCAPULA_R => Some((1.33 - 1.02) / 0.40),
                p if arm_parts().contains(&p) => Some((1.38 - 1.02) / 0.40),
                LUMBAR | THORAX => None,
                _ => return Vec3::zero(),
            };
            let f = carried.unwrap_or_else(|| fmath::clamp((v.y - 1.02) / 0.40, 0.0, 1.0));
            Vec3::new(0.0, 0.04 * f, 0.0)
        },
        // Arms lengthen outward from the shoulders.
        |m, vi, v| {
            if arm_parts().contains(&(m.part_of_vertex[vi] as usize)) {
                let f = fmath::clamp((fmath::abs(v.x) - 0.17) / 0.67, 0.0, 1.0);
                let sign = if v.x >= 0.0 { 1.0 } else { -1.0 };
                Vec3::new(sign * 0.06 * f, 0.0, 0.0)
            } else {
                Vec3::zero()
            }
        },
        // Neck/head lengthens upward.
        |m, vi, v| {
            if m.part_of_vertex[vi] as usize == HEAD {
                let f = fmath::clamp((v.y - 1.42) / 0.10, 0.0, 1.0);
                Vec3::new(0.0, 0.03 * f, 0.0)
            } else {
                Vec3::zero()
            }
        },
    ];

    let girth_sets: [(f64, fn(usize) -> bool); 4] = [
        (0.025, |_| true),
        (0.030, |p| matches!(p, PELVIS | LUMBAR | THORAX)),
        (0.020, |p| leg_parts().contains(&p) || arm_parts().contains(&p)),
        (0.015, |p| p == HEAD),
    ];

    let half = dims / 2;
    let mut basis = Vec::with_capacity(dims);
    for field in length_fields.iter().take(half) {
        let mut dir = Vec::with_capacity(n);
        for vi in 0..n {
            dir.push(field(mesh, vi, mesh.vertices[vi]));
        }
        basis.push(dir);
    }
    for (mag, in_set) in girth_sets.iter().take(dims - half) {
        let mut dir = Vec::with_capacity(n);
        for vi in 0..n {
            if in_set(part_of[vi] as usize) {
                dir.push(mesh.radial_dir[vi] * *mag);
            } else {
                dir.push(Vec3::zero());
            }
        }
        basis.push(dir);
    }
    basis
}

/// Ring-combination rows for the anatomical joints (the generator's ground
/// truth) and for the envelope's own artist-style joints, which sit at a
/// small offset along the part axis.
pub fn build_joint_rows(mesh: &BuiltMesh) -> (Vec<SparseRow>, Vec<SparseRow>) {
    let mut anat = Vec::with_capacity(plan::GROUP_COUNT);
    let mut env = Vec::with_capacity(plan::GROUP_COUNT);
    for part in plan::PARTS.iter() {
        let rings_part = part.joint_rings_part;
        let layout = &mesh.layouts[rings_part];
        let target = Vec3::from_array(part.joint);
        anat.push(ring_lerp_row(layout, target));
        let env_target = target + layout.dir * part.env_joint_offset;
        env.push(ring_lerp_row(layout, env_target));
    }
    (anat, env)
}

/// Nearest vertex of `part` to a station point; used to snap markers.
/// A part's vertices are contiguous: rings first, then the two apexes.
pub fn nearest_part_vertex(mesh: &BuiltMesh, part: usize, p: Vec3) -> usize {
    let layout = &mesh.layouts[part];
    let count = layout.rings * layout.segments + 2;
    let mut best = layout.vert_start;
    let mut best_d = f64::INFINITY;
    for vi in layout.vert_start..layout.vert_start + count {
        let d = (mesh.vertices[vi] - p).norm_sq();
        if d < best_d {
            best_d = d;
            best = vi;
        }
    }
    best
}

/// World point of a marker station on the template.
pub fn station_point(mesh: &BuiltMesh, st: &plan::MarkerStation) -> Vec3 {
    let part = &plan::PARTS[st.part];
    let layout = &mesh.layouts[st.part];
    let p0 = Vec3::from_array(part.p0);
    let p1 = Vec3::from_array(part.p1);
    let center = p0 + (p1 - p0) * st.t;
    // Interpolate the ring radius at the station.
    let x = st.t * (part.rings - 1) as f64;
    let i = fmath::min(fmath::floor(x), (part.rings - 2).max(0) as f64) as usize;
    let frac = x - i as f64;
    let r = ring_radius(part, i) * (1.0 - frac) + ring_radius(part, (i + 1).min(part.rings - 1)) * frac;
    let phi = st.phi_deg * core::f64::consts::PI / 180.0;
    center + (layout.e1 * fmath::cos(phi) + layout.e2 * fmath::sin(phi)) * r
}
