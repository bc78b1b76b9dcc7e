//! Anatomically parameterized body rig.
//!
//! A single 46-entry pose vector drives a skin mesh, a skeleton mesh, and a
//! set of anatomical joints through one kinematic tree with biomechanical
//! joint types: constant-curvature spine segments, a scapulothoracic joint
//! sliding on a thorax ellipsoid, a forearm pronation axis, and hinge knees
//! and elbows. The crate also contains the machinery that builds such a rig
//! from paired surface/skeleton data:
//!
//! - [`rigmath`]: rotation and rigid-transform primitives.
//! - [`kinematics`]: joint specifications, pose vectors, forward kinematics.
//! - [`envelope`]: a procedural over-parameterized source body (capsule
//!   humanoid with a shape basis) and the paired-dataset generator.
//! - [`regressor`]: non-negative least squares joint regression from skin
//!   vertices to anatomical joint centers.
//! - [`orientation`]: per-bone base rotations learned from paired frames and
//!   shape-dependent corrective rotations.
//! - [`skelmodel`]: the combined skin + skeleton model evaluated at
//!   (shape, pose).
//! - [`fitting`]: damped least-squares IK, the bi-level scale + pose marker
//!   fit, and pose fitting to target meshes.
//!
//! The crate is `no_std`-compatible (requires `alloc`); file formats and the
//! command-line pipeline live in the companion `osteon-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod envelope;
pub(crate) mod rng;
pub mod fitting;
mod fmath;
pub mod kinematics;
pub mod linalg;
pub mod orientation;
pub mod plan;
pub mod regressor;
pub mod rigmath;
pub mod skelmodel;
pub mod vec3;

pub mod tol {
    //! Central tolerance table. Every numerical threshold used by the crate
    //! is defined here rather than inline at call sites.

    /// Per-entry orthonormality defect allowed in a rotation matrix.
    pub const ROTATION_ORTHONORMALITY: f64 = 1e-10;
    /// Residual allowed when checking `R * a == b` style alignment posts.
    pub const ALIGNMENT_RESIDUAL: f64 = 1e-8;
    /// Rigid transform compose/inverse round-trip defect.
    pub const TRANSFORM_ROUND_TRIP: f64 = 1e-9;
    /// Dot-product margin below which two unit vectors count as antiparallel.
    pub const ANTIPARALLEL_MARGIN: f64 = 1e-12;
    /// Bend angle below which the spine joint switches to its series branch.
    pub const SPINE_SMALL_ANGLE: f64 = 1e-6;
    /// Allowed overshoot of the spine arcsin argument before it is an error.
    pub const SPINE_DOMAIN_SLACK: f64 = 1e-12;
    /// Distance below which the two pronation axis points are degenerate.
    pub const PRONATION_AXIS_MIN: f64 = 1e-9;
    /// Segment length below which a bone segment counts as zero.
    pub const ZERO_SEGMENT: f64 = 1e-6;
    /// Ratio to the largest singular value below which a singular value of a
    /// projected matrix counts as vanished.
    pub const SINGULAR_VALUE_RATIO: f64 = 1e-12;
    /// Dual-feasibility slack for the NNLS active-set solver.
    pub const NNLS_KKT: f64 = 1e-10;
    /// Skinning weight rows must sum to one within this.
    pub const WEIGHT_ROW_SUM: f64 = 1e-9;
    /// Gradient infinity-norm at which the damped least-squares IK stops.
    pub const IK_GRADIENT: f64 = 1e-8;
    /// Step infinity-norm at which the damped least-squares IK stops.
    pub const IK_STEP: f64 = 1e-10;
    /// Relative outer-objective decrease at which the bi-level fit stops.
    pub const BILEVEL_RELATIVE_DECREASE: f64 = 1e-6;
    /// Minimum triangle area for a mesh to count as non-degenerate.
    pub const TRIANGLE_AREA_MIN: f64 = 1e-12;
}
