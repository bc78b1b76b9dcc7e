//! Canonical body plan for the bundled synthetic humanoid.
//!
//! Everything geometric in the default model derives from this table: the
//! capsule-limb envelope mesh, the 24-group kinematic tree with its 46
//! degrees of freedom, the anatomical joint stations, the marker set, and
//! the per-bone skeleton template meshes. Coordinates are meters in a
//! y-up, character-facing-+z, left-is-+x T-pose frame.

/// Number of rigid bone groups.
pub const GROUP_COUNT: usize = 24;
/// Number of generalized coordinates in a pose vector (global translation
/// is carried separately).
pub const DOF_COUNT: usize = 46;

/// Indices of the bone groups, in topological order (parents first).
pub mod group {
    pub const PELVIS: usize = 0;
    pub const FEMUR_L: usize = 1;
    pub const FEMUR_R: usize = 2;
    pub const TIBIA_L: usize = 3;
    pub const TIBIA_R: usize = 4;
    pub const TALUS_L: usize = 5;
    pub const TALUS_R: usize = 6;
    pub const CALCN_L: usize = 7;
    pub const CALCN_R: usize = 8;
    pub const TOES_L: usize = 9;
    pub const TOES_R: usize = 10;
    pub const LUMBAR: usize = 11;
    pub const THORAX: usize = 12;
    pub const HEAD: usize = 13;
    pub const SCAPULA_L: usize = 14;
    pub const SCAPULA_R: usize = 15;
    pub const HUMERUS_L: usize = 16;
    pub const HUMERUS_R: usize = 17;
    pub const ULNA_L: usize = 18;
    pub const ULNA_R: usize = 19;
    pub const RADIUS_L: usize = 20;
    pub const RADIUS_R: usize = 21;
    pub const HAND_L: usize = 22;
    pub const HAND_R: usize = 23;
}

/// Joint kind of a bone group in the plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanKind {
    /// Three-DOF ball joint (intrinsic X-Z-Y Euler angles).
    Ball,
    /// One-DOF hinge about a fixed local axis, with angle limits.
    Hinge { axis: [f64; 3], limits: [f64; 2] },
    /// Three-DOF constant-curvature spine segment.
    Spine,
    /// Three-DOF scapulothoracic joint sliding on the thorax ellipsoid.
    Scapula,
    /// One-DOF forearm pronation about the elbow-to-wrist axis.
    Pronation,
    /// Two-DOF joint: rotation about `axis_a` then `axis_b` (wrist
    /// flexion + deviation).
    Universal { axis_a: [f64; 3], axis_b: [f64; 3] },
}

impl PlanKind {
    pub fn dof_len(&self) -> usize {
        match self {
            PlanKind::Ball | PlanKind::Spine | PlanKind::Scapula => 3,
            PlanKind::Hinge { .. } | PlanKind::Pronation => 1,
            PlanKind::Universal { .. } => 2,
        }
    }
}

/// What defines the distal end of a bone's anatomical segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentEnd {
    /// The joint of another bone group.
    Joint(usize),
    /// The on-axis apex vertex at the distal cap of a body part.
    TipOf(usize),
}

/// One body part: a capsule-like tube of rings plus two cap apexes, owned
/// by one bone group.
#[derive(Debug, Clone, Copy)]
pub struct PartPlan {
    pub name: &'static str,
    /// Parent group index; -1 for the root.
    pub parent: isize,
    /// Tube axis start / end.
    pub p0: [f64; 3],
    pub p1: [f64; 3],
    /// Ring radii at the axis start / end (linearly interpolated unless a
    /// profile is given).
    pub r0: f64,
    pub r1: f64,
    /// Optional per-ring radius profile overriding the linear taper.
    pub profile: Option<&'static [f64]>,
    /// Cap apex extents beyond p0 / p1 along the axis.
    pub cap0: f64,
    pub cap1: f64,
    /// Number of rings along the axis (>= 2).
    pub rings: usize,
    /// Nominal anatomical joint position of this group.
    pub joint: [f64; 3],
    /// Part whose mesh rings anchor the joint (usually the part itself; the
    /// forearm pronation joint sits on the ulna tube).
    pub joint_rings_part: usize,
    /// Envelope ("artist") joint offset along the tube axis, meters.
    pub env_joint_offset: f64,
    /// Longitudinal axis index (0=x, 1=y, 2=z) used for bone scaling.
    pub long_axis: usize,
    pub kind: PlanKind,
    /// Distal end of the anatomical bone segment.
    pub segment: SegmentEnd,
    /// Anatomical roll of the bone template about its rest segment axis,
    /// radians. This is the component of the bone orientation that cannot
    /// be read off the joint locations and must be learned from data.
    pub twist: f64,
}

const PI: f64 = core::f64::consts::PI;
const X: [f64; 3] = [1.0, 0.0, 0.0];
const Z: [f64; 3] = [0.0, 0.0, 1.0];
const NEG_Z: [f64; 3] = [0.0, 0.0, -1.0];

const FULL: [f64; 2] = [-PI, PI];
/// Knee and elbow flexion range.
const FLEX: [f64; 2] = [0.0, 2.6];

/// Skull/neck ring radius profile for the head part.
static HEAD_PROFILE: [f64; 7] = [0.048, 0.048, 0.052, 0.080, 0.090, 0.086, 0.062];

/// The 24 body parts in topological order.
pub static PARTS: [PartPlan; GROUP_COUNT] = [
    PartPlan {
        name: "pelvis",
        parent: -1,
        p0: [0.0, 0.84, 0.0],
        p1: [0.0, 1.02, 0.0],
        r0: 0.120,
        r1: 0.112,
        profile: None,
        cap0: 0.045,
        cap1: 0.0,
        rings: 7,
        joint: [0.0, 0.95, 0.0],
        joint_rings_part: group::PELVIS,
        env_joint_offset: 0.004,
        long_axis: 1,
        kind: PlanKind::Ball,
        segment: SegmentEnd::Joint(group::LUMBAR),
        twist: 0.0,
    },
    PartPlan {
        name: "femur_l",
        parent: group::PELVIS as isize,
        p0: [0.09, 0.90, 0.0],
        p1: [0.09, 0.50, 0.0],
        r0: 0.070,
        r1: 0.053,
        profile: None,
        cap0: 0.025,
        cap1: 0.02,
        rings: 10,
        joint: [0.09, 0.90, 0.0],
        joint_rings_part: group::FEMUR_L,
        env_joint_offset: 0.003,
        long_axis: 1,
        kind: PlanKind::Ball,
        segment: SegmentEnd::Joint(group::TIBIA_L),
        twist: 0.15,
    },
    PartPlan {
        name: "femur_r",
        parent: group::PELVIS as isize,
        p0: [-0.09, 0.90, 0.0],
        p1: [-0.09, 0.50, 0.0],
        r0: 0.070,
        r1: 0.053,
        profile: None,
        cap0: 0.025,
        cap1: 0.02,
        rings: 10,
        joint: [-0.09, 0.90, 0.0],
        joint_rings_part: group::FEMUR_R,
        env_joint_offset: 0.003,
        long_axis: 1,
        kind: PlanKind::Ball,
        segment: SegmentEnd::Joint(group::TIBIA_R),
        twist: -0.15,
    },
    PartPlan {
        name: "tibia_l",
        parent: group::FEMUR_L as isize,
        p0: [0.09, 0.50, 0.0],
        p1: [0.09, 0.10, 0.0],
        r0: 0.050,
        r1: 0.037,
        profile: None,
        cap0: 0.02,
        cap1: 0.015,
        rings: 10,
        joint: [0.09, 0.50, 0.0],
        joint_rings_part: group::TIBIA_L,
        env_joint_offset: 0.004,
        long_axis: 1,
        kind: PlanKind::Hinge { axis: X, limits: FLEX },
        segment: SegmentEnd::Joint(group::TALUS_L),
        twist: 0.10,
    },
    PartPlan {
        name: "tibia_r",
        parent: group::FEMUR_R as isize,
        p0: [-0.09, 0.50, 0.0],
        p1: [-0.09, 0.10, 0.0],
        r0: 0.050,
        r1: 0.037,
        profile: None,
        cap0: 0.02,
        cap1: 0.015,
        rings: 10,
        joint: [-0.09, 0.50, 0.0],
        joint_rings_part: group::TIBIA_R,
        env_joint_offset: 0.004,
        long_axis: 1,
        kind: PlanKind::Hinge { axis: X, limits: FLEX },
        segment: SegmentEnd::Joint(group::TALUS_R),
        twist: -0.10,
    },
    PartPlan {
        name: "talus_l",
        parent: group::TIBIA_L as isize,
        p0: [0.09, 0.10, 0.0],
        p1: [0.09, 0.055, -0.01],
        r0: 0.034,
        r1: 0.030,
        profile: None,
        cap0: 0.008,
        cap1: 0.008,
        rings: 3,
        joint: [0.09, 0.10, 0.0],
        joint_rings_part: group::TALUS_L,
        env_joint_offset: 0.002,
        long_axis: 1,
        kind: PlanKind::Hinge { axis: X, limits: FULL },
        segment: SegmentEnd::Joint(group::CALCN_L),
        twist: 0.05,
    },
    PartPlan {
        name: "talus_r",
        parent: group::TIBIA_R as isize,
        p0: [-0.09, 0.10, 0.0],
        p1: [-0.09, 0.055, -0.01],
        r0: 0.034,
        r1: 0.030,
        profile: None,
        cap0: 0.008,
        cap1: 0.008,
        rings: 3,
        joint: [-0.09, 0.10, 0.0],
        joint_rings_part: group::TALUS_R,
        env_joint_offset: 0.002,
        long_axis: 1,
        kind: PlanKind::Hinge { axis: X, limits: FULL },
        segment: SegmentEnd::Joint(group::CALCN_R),
        twist: -0.05,
    },
    PartPlan {
        name: "calcn_l",
        parent: group::TALUS_L as isize,
        p0: [0.09, 0.055, -0.01],
        p1: [0.09, 0.035, 0.115],
        r0: 0.031,
        r1: 0.027,
        profile: None,
        cap0: 0.045,
        cap1: 0.005,
        rings: 6,
        joint: [0.09, 0.055, -0.01],
        joint_rings_part: group::CALCN_L,
        env_joint_offset: 0.003,
        long_axis: 2,
        kind: PlanKind::Hinge { axis: Z, limits: FULL },
        segment: SegmentEnd::Joint(group::TOES_L),
        twist: 0.10,
    },
    PartPlan {
        name: "calcn_r",
        parent: group::TALUS_R as isize,
        p0: [-0.09, 0.055, -0.01],
        p1: [-0.09, 0.035, 0.115],
        r0: 0.031,
        r1: 0.027,
        profile: None,
        cap0: 0.045,
        cap1: 0.005,
        rings: 6,
        joint: [-0.09, 0.055, -0.01],
        joint_rings_part: group::CALCN_R,
        env_joint_offset: 0.003,
        long_axis: 2,
        kind: PlanKind::Hinge { axis: Z, limits: FULL },
        segment: SegmentEnd::Joint(group::TOES_R),
        twist: -0.10,
    },
    PartPlan {
        name: "toes_l",
        parent: group::CALCN_L as isize,
        p0: [0.09, 0.030, 0.115],
        p1: [0.09, 0.028, 0.185],
        r0: 0.025,
        r1: 0.019,
        profile: None,
        cap0: 0.004,
        cap1: 0.012,
        rings: 3,
        joint: [0.09, 0.030, 0.115],
        joint_rings_part: group::TOES_L,
        env_joint_offset: 0.002,
        long_axis: 2,
        kind: PlanKind::Hinge { axis: X, limits: FULL },
        segment: SegmentEnd::TipOf(group::TOES_L),
        twist: 0.0,
    },
    PartPlan {
        name: "toes_r",
        parent: group::CALCN_R as isize,
        p0: [-0.09, 0.030, 0.115],
        p1: [-0.09, 0.028, 0.185],
        r0: 0.025,
        r1: 0.019,
        profile: None,
        cap0: 0.004,
        cap1: 0.012,
        rings: 3,
        joint: [-0.09, 0.030, 0.115],
        joint_rings_part: group::TOES_R,
        env_joint_offset: 0.002,
        long_axis: 2,
        kind: PlanKind::Hinge { axis: X, limits: FULL },
        segment: SegmentEnd::TipOf(group::TOES_R),
        twist: 0.0,
    },
    PartPlan {
        name: "lumbar",
        parent: group::PELVIS as isize,
        p0: [0.0, 1.02, 0.0],
        p1: [0.0, 1.17, 0.0],
        r0: 0.108,
        r1: 0.112,
        profile: None,
        cap0: 0.0,
        cap1: 0.0,
        rings: 6,
        joint: [0.0, 1.02, 0.0],
        joint_rings_part: group::LUMBAR,
        env_joint_offset: 0.004,
        long_axis: 1,
        kind: PlanKind::Spine,
        segment: SegmentEnd::Joint(group::THORAX),
        twist: 0.05,
    },
    PartPlan {
        name: "thorax",
        parent: group::LUMBAR as isize,
        p0: [0.0, 1.17, 0.0],
        p1: [0.0, 1.42, 0.0],
        r0: 0.122,
        r1: 0.096,
        profile: None,
        cap0: 0.0,
        cap1: 0.02,
        rings: 9,
        joint: [0.0, 1.17, 0.0],
        joint_rings_part: group::THORAX,
        env_joint_offset: 0.004,
        long_axis: 1,
        kind: PlanKind::Spine,
        segment: SegmentEnd::Joint(group::HEAD),
        twist: 0.05,
    },
    PartPlan {
        name: "head",
        parent: group::THORAX as isize,
        p0: [0.0, 1.42, 0.0],
        p1: [0.0, 1.70, 0.0],
        r0: 0.048,
        r1: 0.062,
        profile: Some(&HEAD_PROFILE),
        cap0: 0.0,
        cap1: 0.035,
        rings: 7,
        joint: [0.0, 1.42, 0.0],
        joint_rings_part: group::HEAD,
        env_joint_offset: 0.003,
        long_axis: 1,
        kind: PlanKind::Spine,
        segment: SegmentEnd::TipOf(group::HEAD),
        twist: 0.0,
    },
    PartPlan {
        name: "scapula_l",
        parent: group::THORAX as isize,
        p0: [0.06, 1.330, -0.115],
        p1: [0.165, 1.375, -0.055],
        r0: 0.030,
        r1: 0.024,
        profile: None,
        cap0: 0.01,
        cap1: 0.01,
        rings: 4,
        joint: [0.06, 1.330, -0.115],
        joint_rings_part: group::SCAPULA_L,
        env_joint_offset: 0.003,
        long_axis: 0,
        kind: PlanKind::Scapula,
        segment: SegmentEnd::Joint(group::HUMERUS_L),
        twist: 0.30,
    },
    PartPlan {
        name: "scapula_r",
        parent: group::THORAX as isize,
        p0: [-0.06, 1.330, -0.115],
        p1: [-0.165, 1.375, -0.055],
        r0: 0.030,
        r1: 0.024,
        profile: None,
        cap0: 0.01,
        cap1: 0.01,
        rings: 4,
        joint: [-0.06, 1.330, -0.115],
        joint_rings_part: group::SCAPULA_R,
        env_joint_offset: 0.003,
        long_axis: 0,
        kind: PlanKind::Scapula,
        segment: SegmentEnd::Joint(group::HUMERUS_R),
        twist: -0.30,
    },
    PartPlan {
        name: "humerus_l",
        parent: group::SCAPULA_L as isize,
        p0: [0.17, 1.38, 0.0],
        p1: [0.45, 1.38, 0.0],
        r0: 0.047,
        r1: 0.040,
        profile: None,
        cap0: 0.025,
        cap1: 0.015,
        rings: 8,
        joint: [0.17, 1.38, 0.0],
        joint_rings_part: group::HUMERUS_L,
        env_joint_offset: 0.004,
        long_axis: 0,
        kind: PlanKind::Ball,
        segment: SegmentEnd::Joint(group::ULNA_L),
        twist: 0.35,
    },
    PartPlan {
        name: "humerus_r",
        parent: group::SCAPULA_R as isize,
        p0: [-0.17, 1.38, 0.0],
        p1: [-0.45, 1.38, 0.0],
        r0: 0.047,
        r1: 0.040,
        profile: None,
        cap0: 0.025,
        cap1: 0.015,
        rings: 8,
        joint: [-0.17, 1.38, 0.0],
        joint_rings_part: group::HUMERUS_R,
        env_joint_offset: 0.004,
        long_axis: 0,
        kind: PlanKind::Ball,
        segment: SegmentEnd::Joint(group::ULNA_R),
        twist: -0.35,
    },
    PartPlan {
        name: "ulna_l",
        parent: group::HUMERUS_L as isize,
        p0: [0.45, 1.38, 0.0],
        p1: [0.58, 1.38, 0.0],
        r0: 0.038,
        r1: 0.034,
        profile: None,
        cap0: 0.012,
        cap1: 0.0,
        rings: 5,
        joint: [0.45, 1.38, 0.0],
        joint_rings_part: group::ULNA_L,
        env_joint_offset: 0.004,
        long_axis: 0,
        kind: PlanKind::Hinge { axis: Z, limits: FLEX },
        segment: SegmentEnd::Joint(group::HAND_L),
        twist: 0.20,
    },
    PartPlan {
        name: "ulna_r",
        parent: group::HUMERUS_R as isize,
        p0: [-0.45, 1.38, 0.0],
        p1: [-0.58, 1.38, 0.0],
        r0: 0.038,
        r1: 0.034,
        profile: None,
        cap0: 0.012,
        cap1: 0.0,
        rings: 5,
        joint: [-0.45, 1.38, 0.0],
        joint_rings_part: group::ULNA_R,
        env_joint_offset: 0.004,
        long_axis: 0,
        kind: PlanKind::Hinge { axis: NEG_Z, limits: FLEX },
        segment: SegmentEnd::Joint(group::HAND_R),
        twist: -0.20,
    },
    PartPlan {
        name: "radius_l",
        parent: group::ULNA_L as isize,
        p0: [0.58, 1.38, 0.0],
        p1: [0.71, 1.38, 0.0],
        r0: 0.034,
        r1: 0.029,
        profile: None,
        cap0: 0.0,
        cap1: 0.008,
        rings: 5,
        joint: [0.49, 1.38, 0.0],
        joint_rings_part: group::ULNA_L,
        env_joint_offset: 0.003,
        long_axis: 0,
        kind: PlanKind::Pronation,
        segment: SegmentEnd::Joint(group::HAND_L),
        twist: 0.25,
    },
    PartPlan {
        name: "radius_r",
        parent: group::ULNA_R as isize,
        p0: [-0.58, 1.38, 0.0],
        p1: [-0.71, 1.38, 0.0],
        r0: 0.034,
        r1: 0.029,
        profile: None,
        cap0: 0.0,
        cap1: 0.008,
        rings: 5,
        joint: [-0.49, 1.38, 0.0],
        joint_rings_part: group::ULNA_R,
        env_joint_offset: 0.003,
        long_axis: 0,
        kind: PlanKind::Pronation,
        segment: SegmentEnd::Joint(group::HAND_R),
        twist: -0.25,
    },
    PartPlan {
        name: "hand_l",
        parent: group::RADIUS_L as isize,
        p0: [0.71, 1.38, 0.0],
        p1: [0.84, 1.38, 0.0],
        r0: 0.033,
        r1: 0.020,
        profile: None,
        cap0: 0.0,
        cap1: 0.015,
        rings: 5,
        joint: [0.71, 1.38, 0.0],
        joint_rings_part: group::HAND_L,
        env_joint_offset: 0.003,
        long_axis: 0,
        kind: PlanKind::Universal { axis_a: X, axis_b: Z },
        segment: SegmentEnd::TipOf(group::HAND_L),
        twist: 0.15,
    },
    PartPlan {
        name: "hand_r",
        parent: group::RADIUS_R as isize,
        p0: [-0.71, 1.38, 0.0],
        p1: [-0.84, 1.38, 0.0],
        r0: 0.033,
        r1: 0.020,
        profile: None,
        cap0: 0.0,
        cap1: 0.015,
        rings: 5,
        joint: [-0.71, 1.38, 0.0],
        joint_rings_part: group::HAND_R,
        env_joint_offset: 0.003,
        long_axis: 0,
        kind: PlanKind::Universal { axis_a: X, axis_b: Z },
        segment: SegmentEnd::TipOf(group::HAND_R),
        twist: -0.15,
    },
];

/// DOF offset of each group, derived from the kinds table.
pub fn dof_offsets() -> [usize; GROUP_COUNT] {
    let mut off = [0usize; GROUP_COUNT];
    let mut acc = 0;
    for (i, p) in PARTS.iter().enumerate() {
        off[i] = acc;
        acc += p.kind.dof_len();
    }
    debug_assert_eq!(acc, DOF_COUNT);
    off
}

/// Pronation range.
pub const PRONATION_LIMITS: [f64; 2] = [-PI / 2.0, PI / 2.0];

/// Factor applied to the thorax bounding-box half extents to obtain the
/// default scapulothoracic ellipsoid semi-axes.
pub const SCAPULA_ELLIPSOID_MARGIN: f64 = 1.05;

/// Default marker fit weights.
pub const BONY_WEIGHT: f64 = 1.0;
pub const SOFT_WEIGHT: f64 = 0.25;

/// Per-subject marker offset slope (meters of outward offset per unit of
/// the girth statistic of the shape vector), replacing model-based
/// personalized marker placement.
pub const MARKER_OFFSET_SLOPE_BONY: f64 = 0.005;
pub const MARKER_OFFSET_SLOPE_SOFT: f64 = 0.015;

/// Uniform body density for weight estimates, kg/m^3.
pub const BODY_DENSITY: f64 = 1000.0;

/// Marker class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerClass {
    Bony,
    Soft,
}

/// A nominal marker station: a point on a part tube at fraction `t` along
/// the axis and angle `phi_deg` around it. The builder snaps each station to
/// the nearest mesh vertex of that part.
#[derive(Debug, Clone, Copy)]
pub struct MarkerStation {
    pub name: &'static str,
    pub part: usize,
    pub t: f64,
    pub phi_deg: f64,
    pub class: MarkerClass,
}

const fn bony(name: &'static str, part: usize, t: f64, phi_deg: f64) -> MarkerStation {
    MarkerStation { name, part, t, phi_deg, class: MarkerClass::Bony }
}

const fn soft(name: &'static str, part: usize, t: f64, phi_deg: f64) -> MarkerStation {
    MarkerStation { name, part, t, phi_deg, class: MarkerClass::Soft }
}

/// 57 bony + 48 soft marker stations. Bony stations sit inside the
/// single-bone skinning zones of their parts so they move near-rigidly;
/// soft stations may sit in blend zones.
pub static MARKER_STATIONS: [MarkerStation; 105] = [
    // --- bony: pelvis (5)
    bony("LASI", group::PELVIS, 0.65, 48.0),
    bony("RASI", group::PELVIS, 0.65, -48.0),
    bony("LPSI", group::PELVIS, 0.75, 155.0),
    bony("RPSI", group::PELVIS, 0.75, -155.0),
    bony("SACR", group::PELVIS, 0.80, 180.0),
    // --- bony: femur (3 per side)
    bony("LGTR", group::FEMUR_L, 0.15, 90.0),
    bony("LKNL", group::FEMUR_L, 0.85, 90.0),
    bony("LKNM", group::FEMUR_L, 0.85, -90.0),
    bony("RGTR", group::FEMUR_R, 0.15, -90.0),
    bony("RKNL", group::FEMUR_R, 0.85, -90.0),
    bony("RKNM", group::FEMUR_R, 0.85, 90.0),
    // --- bony: tibia (4 per side)
    bony("LTTB", group::TIBIA_L, 0.18, 0.0),
    bony("LFIB", group::TIBIA_L, 0.18, 120.0),
    bony("LANL", group::TIBIA_L, 0.82, 90.0),
    bony("LANM", group::TIBIA_L, 0.82, -90.0),
    bony("RTTB", group::TIBIA_R, 0.18, 0.0),
    bony("RFIB", group::TIBIA_R, 0.18, -120.0),
    bony("RANL", group::TIBIA_R, 0.82, -90.0),
    bony("RANM", group::TIBIA_R, 0.82, 90.0),
    // --- bony: calcaneus (2 per side)
    bony("LHEE", group::CALCN_L, 0.42, 180.0),
    bony("LMT5", group::CALCN_L, 0.58, 90.0),
    bony("RHEE", group::CALCN_R, 0.42, 180.0),
    bony("RMT5", group::CALCN_R, 0.58, -90.0),
    // --- bony: toes (1 per side)
    bony("LTOE", group::TOES_L, 0.75, 0.0),
    bony("RTOE", group::TOES_R, 0.75, 0.0),
    // --- bony: lumbar (1)
    bony("L3MK", group::LUMBAR, 0.50, 180.0),
    // --- bony: thorax (7)
    bony("STRN", group::THORAX, 0.30, 0.0),
    bony("XIPH", group::THORAX, 0.24, 15.0),
    bony("MANU", group::THORAX, 0.78, 0.0),
    bony("C7MK", group::THORAX, 0.78, 180.0),
    bony("T10M", group::THORAX, 0.42, 180.0),
    bony("LCLV", group::THORAX, 0.76, 35.0),
    bony("RCLV", group::THORAX, 0.76, -35.0),
    // --- bony: head (4)
    bony("FHED", group::HEAD, 0.75, 0.0),
    bony("BHED", group::HEAD, 0.75, 180.0),
    bony("LHED", group::HEAD, 0.80, 90.0),
    bony("RHED", group::HEAD, 0.80, -90.0),
    // --- bony: scapula (2 per side)
    bony("LACR", group::SCAPULA_L, 0.52, 0.0),
    bony("LSCP", group::SCAPULA_L, 0.45, 180.0),
    bony("RACR", group::SCAPULA_R, 0.52, 0.0),
    bony("RSCP", group::SCAPULA_R, 0.45, 180.0),
    // --- bony: humerus (3 per side)
    bony("LSHO", group::HUMERUS_L, 0.16, 0.0),
    bony("LELL", group::HUMERUS_L, 0.84, 0.0),
    bony("LELM", group::HUMERUS_L, 0.84, 180.0),
    bony("RSHO", group::HUMERUS_R, 0.16, 0.0),
    bony("RELL", group::HUMERUS_R, 0.84, 0.0),
    bony("RELM", group::HUMERUS_R, 0.84, 180.0),
    // --- bony: ulna (1 per side)
    bony("LOLE", group::ULNA_L, 0.50, 180.0),
    bony("ROLE", group::ULNA_R, 0.50, 180.0),
    // --- bony: radius / wrist (2 per side)
    bony("LWRA", group::RADIUS_L, 0.50, 90.0),
    bony("LWRB", group::RADIUS_L, 0.50, -90.0),
    bony("RWRA", group::RADIUS_R, 0.50, -90.0),
    bony("RWRB", group::RADIUS_R, 0.50, 90.0),
    // --- bony: hand (2 per side)
    bony("LHND", group::HAND_L, 0.50, 0.0),
    bony("LFIN", group::HAND_L, 0.82, 0.0),
    bony("RHND", group::HAND_R, 0.50, 0.0),
    bony("RFIN", group::HAND_R, 0.82, 0.0),
    // --- soft: femur (4 per side)
    soft("LTH1", group::FEMUR_L, 0.35, 45.0),
    soft("LTH2", group::FEMUR_L, 0.55, 90.0),
    soft("LTH3", group::FEMUR_L, 0.75, -30.0),
    soft("LTH4", group::FEMUR_L, 0.60, 135.0),
    soft("RTH1", group::FEMUR_R, 0.35, -45.0),
    soft("RTH2", group::FEMUR_R, 0.55, -90.0),
    soft("RTH3", group::FEMUR_R, 0.75, 30.0),
    soft("RTH4", group::FEMUR_R, 0.60, -135.0),
    // --- soft: tibia (3 per side)
    soft("LCLF", group::TIBIA_L, 0.30, 180.0),
    soft("LSHN", group::TIBIA_L, 0.55, 150.0),
    soft("LCL2", group::TIBIA_L, 0.70, -160.0),
    soft("RCLF", group::TIBIA_R, 0.30, 180.0),
    soft("RSHN", group::TIBIA_R, 0.55, -150.0),
    soft("RCL2", group::TIBIA_R, 0.70, 160.0),
    // --- soft: pelvis (2)
    soft("LPEL", group::PELVIS, 0.45, 70.0),
    soft("RPEL", group::PELVIS, 0.45, -70.0),
    // --- soft: lumbar (4)
    soft("BELY", group::LUMBAR, 0.60, 0.0),
    soft("LWST", group::LUMBAR, 0.50, 90.0),
    soft("RWST", group::LUMBAR, 0.50, -90.0),
    soft("LBAK", group::LUMBAR, 0.40, 160.0),
    // --- soft: thorax (4)
    soft("LCHS", group::THORAX, 0.50, 25.0),
    soft("RCHS", group::THORAX, 0.50, -25.0),
    soft("LBK2", group::THORAX, 0.60, 160.0),
    soft("RBK2", group::THORAX, 0.60, -160.0),
    // --- soft: neck (2)
    soft("NEKF", group::HEAD, 0.10, 0.0),
    soft("NEKB", group::HEAD, 0.12, 180.0),
    // --- soft: talus (1 per side)
    soft("LANS", group::TALUS_L, 0.50, 0.0),
    soft("RANS", group::TALUS_R, 0.50, 0.0),
    // --- soft: calcaneus (1 per side)
    soft("LFOT", group::CALCN_L, 0.50, -125.0),
    soft("RFOT", group::CALCN_R, 0.50, 125.0),
    // --- soft: scapula (1 per side)
    soft("LSCS", group::SCAPULA_L, 0.60, 45.0),
    soft("RSCS", group::SCAPULA_R, 0.60, -45.0),
    // --- soft: humerus (3 per side)
    soft("LUA1", group::HUMERUS_L, 0.30, 0.0),
    soft("LUA2", group::HUMERUS_L, 0.50, 180.0),
    soft("LUA3", group::HUMERUS_L, 0.70, 90.0),
    soft("RUA1", group::HUMERUS_R, 0.30, 0.0),
    soft("RUA2", group::HUMERUS_R, 0.50, 180.0),
    soft("RUA3", group::HUMERUS_R, 0.70, -90.0),
    // --- soft: ulna (2 per side)
    soft("LFA1", group::ULNA_L, 0.50, 0.0),
    soft("LFA2", group::ULNA_L, 0.60, 120.0),
    soft("RFA1", group::ULNA_R, 0.50, 0.0),
    soft("RFA2", group::ULNA_R, 0.60, -120.0),
    // --- soft: radius (2 per side)
    soft("LFA3", group::RADIUS_L, 0.28, 45.0),
    soft("LFA4", group::RADIUS_L, 0.72, -45.0),
    soft("RFA3", group::RADIUS_R, 0.28, -45.0),
    soft("RFA4", group::RADIUS_R, 0.72, 45.0),
    // --- soft: hand (1 per side)
    soft("LPLM", group::HAND_L, 0.30, 180.0),
    soft("RPLM", group::HAND_R, 0.30, 180.0),
];

/// Per-DOF trajectory amplitude used by the synthetic motion generator,
/// as a fraction applied to joint-kind specific base amplitudes.
pub fn dof_amplitude(group_idx: usize, dof_in_joint: usize) -> f64 {
    use group::*;
    match group_idx {
        PELVIS => 0.15,
        FEMUR_L | FEMUR_R => 0.35,
        TIBIA_L | TIBIA_R => 0.50,
        TALUS_L | TALUS_R => 0.25,
        CALCN_L | CALCN_R => 0.15,
        TOES_L | TOES_R => 0.25,
        LUMBAR => 0.18,
        THORAX => 0.14,
        HEAD => 0.20,
        SCAPULA_L | SCAPULA_R => 0.04,
        HUMERUS_L | HUMERUS_R => 0.30,
        ULNA_L | ULNA_R => 0.50,
        RADIUS_L | RADIUS_R => 0.45,
        HAND_L | HAND_R => {
            if dof_in_joint == 0 {
                0.30
            } else {
                0.20
            }
        }
        _ => 0.2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dof_table_totals_46_and_24_groups() {
        assert_eq!(PARTS.len(), GROUP_COUNT);
        let total: usize = PARTS.iter().map(|p| p.kind.dof_len()).sum();
        assert_eq!(total, DOF_COUNT);
    }

    #[test]
    fn parts_topologically_ordered() {
        for (i, p) in PARTS.iter().enumerate() {
            assert!(p.parent < i as isize);
        }
        assert_eq!(PARTS.iter().filter(|p| p.parent < 0).count(), 1);
    }

    #[test]
    fn marker_counts_match_default_set() {
        let bony = MARKER_STATIONS.iter().filter(|m| m.class == MarkerClass::Bony).count();
        let soft = MARKER_STATIONS.iter().filter(|m| m.class == MarkerClass::Soft).count();
        assert_eq!(bony, 57);
        assert_eq!(soft, 48);
    }

    #[test]
    fn marker_names_unique() {
        for (i, a) in MARKER_STATIONS.iter().enumerate() {
            for b in MARKER_STATIONS.iter().skip(i + 1) {
                assert_ne!(a.name, b.name);
            }
        }
    }
}
