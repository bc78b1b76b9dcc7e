//! Synthetic over-parameterized source body and paired-dataset generator.
//!
//! The envelope stands in for a scanned statistical body model: a template
//! mesh with a linear shape basis, 24 ball joints with axis-aligned joint
//! frames, and linear blend skinning. Its deliberate simplification — joint
//! frames that ignore the anatomy — is exactly what the orientation
//! learning stage has to correct, so the generated data carries both the
//! envelope's own frames and the anatomical ground-truth frames.

pub(crate) mod humanoid;

mod dataset;

pub use dataset::{generate_dataset, FrameData, PairedDataset, SubjectData};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::fmath;
use crate::plan::{self, MarkerClass};
use crate::rigmath::{euler_xzy_to_rotation, RigidTransform};
use crate::tol;
use crate::vec3::{Mat3, Vec3};

use humanoid::{apply_row, SparseRow};

/// Envelope-module errors.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeError {
    /// Invalid build configuration.
    ConfigError(String),
    /// Pose / shape / vertex array length mismatch.
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for EnvelopeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvelopeError::ConfigError(msg) => write!(f, "invalid envelope config: {msg}"),
            EnvelopeError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl core::error::Error for EnvelopeError {}

/// Triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl Mesh {
    /// Check index ranges and that no triangle is degenerate.
    pub fn validate(&self) -> Result<(), EnvelopeError> {
        for t in &self.triangles {
            for &i in t {
                if i as usize >= self.vertices.len() {
                    return Err(EnvelopeError::DimensionMismatch {
                        expected: self.vertices.len(),
                        got: i as usize,
                    });
                }
            }
            let a = self.vertices[t[0] as usize];
            let b = self.vertices[t[1] as usize];
            let c = self.vertices[t[2] as usize];
            let area = 0.5 * (b - a).cross(c - a).norm();
            if area <= tol::TRIANGLE_AREA_MIN {
                return Err(EnvelopeError::ConfigError(String::from("degenerate triangle")));
            }
        }
        Ok(())
    }
}

/// Build configuration for the envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeConfig {
    /// Vertices per ring (>= 6).
    pub ring_segments: usize,
    /// Number of shape directions: even, between 2 and 8.
    pub shape_dims: usize,
    /// Skinning blend half-width around part seams, meters.
    pub blend_radius: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { ring_segments: 14, shape_dims: 8, blend_radius: 0.05 }
    }
}

/// Number of pose parameters of the envelope: 24 ball joints.
pub const ENVELOPE_DOF: usize = plan::GROUP_COUNT * 3;

/// The procedural source body model.
#[derive(Debug, Clone)]
pub struct EnvelopeModel {
    pub config: EnvelopeConfig,
    /// Template vertices (T-pose).
    pub template: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    /// Bone-group id per vertex.
    pub part_of_vertex: Vec<u16>,
    /// Shape basis: per direction, a per-vertex displacement field.
    pub shape_basis: Vec<Vec<Vec3>>,
    /// Skinning weights: per vertex, up to 4 `(group, weight)` influences.
    pub skin_weights: Vec<Vec<(u16, f64)>>,
    /// The envelope's own joint-regressor rows (artist-style joints).
    pub env_joint_rows: Vec<SparseRow>,
    /// Anatomical joint rows: the generator's ground truth.
    pub anat_joint_rows: Vec<SparseRow>,
    /// Parent of each envelope joint (same topology as the plan).
    pub parents: Vec<isize>,
    /// Tip landmark vertex per group, where the plan defines one.
    pub landmarks: Vec<Option<u32>>,
    /// Unit radial direction per vertex (zero at cap apexes).
    pub radial_dir: Vec<Vec3>,
}

impl EnvelopeModel {
    pub fn vertex_count(&self) -> usize {
        self.template.len()
    }

    pub fn shape_dims(&self) -> usize {
        self.shape_basis.len()
    }

    /// Template plus shape displacements.
    pub fn shaped_vertices(&self, beta: &[f64]) -> Result<Vec<Vec3>, EnvelopeError> {
        if beta.len() != self.shape_dims() {
            return Err(EnvelopeError::DimensionMismatch {
                expected: self.shape_dims(),
                got: beta.len(),
            });
        }
        let mut v = self.template.clone();
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

    /// The envelope's own joints regressed from a vertex array.
    pub fn env_joints(&self, vertices: &[Vec3]) -> Vec<Vec3> {
        self.env_joint_rows.iter().map(|r| apply_row(r, vertices)).collect()
    }

    /// Anatomical (ground-truth) joints regressed from a vertex array.
    pub fn anatomical_joints(&self, vertices: &[Vec3]) -> Vec<Vec3> {
        self.anat_joint_rows.iter().map(|r| apply_row(r, vertices)).collect()
    }

    /// Per-joint world transforms of the envelope's own ball-joint rig.
    /// Joint frames are axis-aligned: each local rotation is applied about
    /// the joint location in world axes.
    pub fn env_pose_transforms(
        &self,
        env_joints: &[Vec3],
        theta: &[f64],
    ) -> Result<Vec<RigidTransform>, EnvelopeError> {
        if theta.len() != ENVELOPE_DOF {
            return Err(EnvelopeError::DimensionMismatch {
                expected: ENVELOPE_DOF,
                got: theta.len(),
            });
        }
        let mut out: Vec<RigidTransform> = Vec::with_capacity(self.parents.len());
        for (k, &parent) in self.parents.iter().enumerate() {
            let r = euler_xzy_to_rotation([theta[3 * k], theta[3 * k + 1], theta[3 * k + 2]]);
            let j = env_joints[k];
            let factor = RigidTransform::new(r, j - r.apply(j));
            let g = if parent < 0 { factor } else { out[parent as usize].compose(&factor) };
            out.push(g);
        }
        Ok(out)
    }

    /// Accumulated world rotations of the envelope rig.
    pub fn env_world_rotations(
        &self,
        theta: &[f64],
    ) -> Result<Vec<Mat3>, EnvelopeError> {
        if theta.len() != ENVELOPE_DOF {
            return Err(EnvelopeError::DimensionMismatch {
                expected: ENVELOPE_DOF,
                got: theta.len(),
            });
        }
        let mut out: Vec<Mat3> = Vec::with_capacity(self.parents.len());
        for (k, &parent) in self.parents.iter().enumerate() {
            let r = *euler_xzy_to_rotation([theta[3 * k], theta[3 * k + 1], theta[3 * k + 2]])
                .matrix();
            out.push(if parent < 0 { r } else { out[parent as usize] * r });
        }
        Ok(out)
    }
}

/// Build the envelope from a configuration. Deterministic.
pub fn build_envelope(config: &EnvelopeConfig) -> Result<EnvelopeModel, EnvelopeError> {
    if config.ring_segments < 6 {
        return Err(EnvelopeError::ConfigError(String::from("ring_segments must be >= 6")));
    }
    if config.shape_dims == 0 || config.shape_dims % 2 != 0 || config.shape_dims > 8 {
        return Err(EnvelopeError::ConfigError(String::from(
            "shape_dims must be even and between 2 and 8",
        )));
    }
    if !(config.blend_radius > 0.0) {
        return Err(EnvelopeError::ConfigError(String::from("blend_radius must be positive")));
    }
    let mesh = humanoid::build_mesh(config.ring_segments);
    let skin_weights = humanoid::build_skin_weights(&mesh, config.blend_radius);
    let shape_basis = humanoid::build_shape_basis(&mesh, config.shape_dims);
    let (anat_joint_rows, env_joint_rows) = humanoid::build_joint_rows(&mesh);
    let mut landmarks = vec![None; plan::GROUP_COUNT];
    for (g, part) in plan::PARTS.iter().enumerate() {
        if let plan::SegmentEnd::TipOf(p) = part.segment {
            landmarks[g] = Some(mesh.layouts[p].apex[1] as u32);
        }
    }
    let model = EnvelopeModel {
        config: config.clone(),
        template: mesh.vertices,
        triangles: mesh.triangles,
        part_of_vertex: mesh.part_of_vertex,
        shape_basis,
        skin_weights,
        env_joint_rows,
        anat_joint_rows,
        parents: plan::PARTS.iter().map(|p| p.parent).collect(),
        landmarks,
        radial_dir: mesh.radial_dir,
    };
    debug_assert!(weights_are_partition(&model));
    Ok(model)
}

fn weights_are_partition(model: &EnvelopeModel) -> bool {
    model.skin_weights.iter().all(|row| {
        let s: f64 = row.iter().map(|e| e.1).sum();
        row.len() <= 4
            && row.iter().all(|e| e.1 >= 0.0)
            && fmath::abs(s - 1.0) < tol::WEIGHT_ROW_SUM
    })
}

/// Pose the envelope with linear blend skinning over the shaped template.
pub fn envelope_pose(
    model: &EnvelopeModel,
    beta: &[f64],
    theta: &[f64],
) -> Result<Mesh, EnvelopeError> {
    let shaped = model.shaped_vertices(beta)?;
    let joints = model.env_joints(&shaped);
    let transforms = model.env_pose_transforms(&joints, theta)?;
    let mut vertices = Vec::with_capacity(shaped.len());
    for (vi, &v) in shaped.iter().enumerate() {
        let mut p = Vec3::zero();
        for &(g, w) in &model.skin_weights[vi] {
            p += transforms[g as usize].apply(v) * w;
        }
        vertices.push(p);
    }
    Ok(Mesh { vertices, triangles: model.triangles.clone() })
}

/// One marker of the set.
#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub name: String,
    pub class: MarkerClass,
    /// Envelope vertex the marker sits on.
    pub vertex: u32,
    /// Bone group the marker is rigidly attached to.
    pub bone: usize,
    /// Rest offset in the bone frame, meters.
    pub rest_offset: Vec3,
    /// Outward radial direction in the bone frame (for per-subject offset
    /// personalization).
    pub radial_local: Vec3,
    /// Fit weight.
    pub weight: f64,
}

/// Named marker set attached to the bone groups.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarkerSet {
    pub markers: Vec<Marker>,
}

impl MarkerSet {
    /// Default marker set: the plan stations snapped to mesh vertices.
    /// Stations that collapse onto an already-used vertex (coarse meshes)
    /// are dropped, so counts degrade proportionally with resolution.
    pub fn default_for(model: &EnvelopeModel) -> Self {
        let mesh_view = humanoid::build_mesh(model.config.ring_segments);
        let rest_joints = model.anatomical_joints(&model.template);
        let mut markers = Vec::new();
        let mut used = vec![false; model.template.len()];
        for st in plan::MARKER_STATIONS.iter() {
            let p = humanoid::station_point(&mesh_view, st);
            let vi = humanoid::nearest_part_vertex(&mesh_view, st.part, p);
            if used[vi] {
                continue;
            }
            used[vi] = true;
            let bone = st.part;
            let v = model.template[vi];
            markers.push(Marker {
                name: String::from(st.name),
                class: st.class,
                vertex: vi as u32,
                bone,
                rest_offset: v - rest_joints[bone],
                radial_local: model.radial_dir[vi],
                weight: match st.class {
                    MarkerClass::Bony => plan::BONY_WEIGHT,
                    MarkerClass::Soft => plan::SOFT_WEIGHT,
                },
            });
        }
        Self { markers }
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    pub fn count_by_class(&self) -> (usize, usize) {
        let bony = self.markers.iter().filter(|m| m.class == MarkerClass::Bony).count();
        (bony, self.markers.len() - bony)
    }

    /// Template marker offsets personalized for a subject: soft markers move
    /// outward with the girth statistic of the shape vector more than bony
    /// ones do.
    pub fn personalized_offsets(&self, beta: &[f64]) -> Vec<Vec3> {
        let g = girth_statistic(beta);
        self.markers
            .iter()
            .map(|m| {
                let slope = match m.class {
                    MarkerClass::Bony => plan::MARKER_OFFSET_SLOPE_BONY,
                    MarkerClass::Soft => plan::MARKER_OFFSET_SLOPE_SOFT,
                };
                m.rest_offset + m.radial_local * (slope * g)
            })
            .collect()
    }
}

/// Mean of the girth half of a shape vector.
pub fn girth_statistic(beta: &[f64]) -> f64 {
    let half = beta.len() / 2;
    if half == 0 || beta.len() < 2 * half {
        return 0.0;
    }
    beta[half..].iter().sum::<f64>() / half as f64
}

/// Extract marker positions from a posed mesh: posed vertex positions of
/// the marker vertices.
pub fn extract_markers(
    model: &EnvelopeModel,
    markerset: &MarkerSet,
    posed: &Mesh,
) -> Result<Vec<Vec3>, EnvelopeError> {
    if posed.vertices.len() != model.vertex_count() {
        return Err(EnvelopeError::DimensionMismatch {
            expected: model.vertex_count(),
            got: posed.vertices.len(),
        });
    }
    Ok(markerset.markers.iter().map(|m| posed.vertices[m.vertex as usize]).collect())
}

#[cfg(test)]
mod tests;
