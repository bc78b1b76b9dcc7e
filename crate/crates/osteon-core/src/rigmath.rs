//! Rotation and rigid-transform primitives shared by every other module.
//!
//! Euler-angle convention: all three-angle rotations in this crate use the
//! intrinsic X-Z-Y order, `R = Rx(qx) * Rz(qz) * Ry(qy)`, with the pose slice
//! stored as `[qx, qz, qy]`. This is defined once here ([`euler_xzy_to_rotation`])
//! and used everywhere else.

use core::fmt;

use crate::fmath;
use crate::linalg::sym_eigen_3x3;
use crate::tol;
use crate::vec3::{Mat3, Vec3};

/// A proper rotation: 3x3 orthonormal matrix with determinant +1.
///
/// Constructors either guarantee the invariants structurally or check them;
/// [`Rotation::orthonormality_defect`] reports the worst-case deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub const IDENTITY: Rotation = Rotation(Mat3::identity());

    /// Wrap a matrix that is already orthonormal with determinant +1.
    ///
    /// Returns `DegenerateInput` when the matrix violates the invariants by
    /// more than [`tol::ROTATION_ORTHONORMALITY`] per entry.
    pub fn from_matrix(m: Mat3) -> Result<Self, RigMathError> {
        let r = Rotation(m);
        if r.orthonormality_defect() > tol::ROTATION_ORTHONORMALITY
            || fmath::abs(m.det() - 1.0) > tol::ROTATION_ORTHONORMALITY * 10.0
        {
            return Err(RigMathError::DegenerateInput);
        }
        Ok(r)
    }

    /// Wrap without checking. Callers must guarantee orthonormality.
    #[inline]
    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    #[inline]
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    #[inline]
    pub fn apply(&self, v: Vec3) -> Vec3 {
        self.0 * v
    }

    /// Apply the inverse rotation (transpose).
    #[inline]
    pub fn apply_inverse(&self, v: Vec3) -> Vec3 {
        Vec3::new(self.0.col(0).dot(v).to_owned(), self.0.col(1).dot(v), self.0.col(2).dot(v))
    }

    #[inline]
    pub fn inverse(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    #[inline]
    pub fn compose(&self, o: &Rotation) -> Rotation {
        Rotation(self.0 * o.0)
    }

    /// Rotation about a unit axis by `angle` (Rodrigues form).
    pub fn about_axis(axis: Vec3, angle: f64) -> Rotation {
        let k = Mat3::skew(axis);
        let (s, c) = (fmath::sin(angle), fmath::cos(angle));
        Rotation(Mat3::identity() + k * s + (k * k) * (1.0 - c))
    }

    /// Largest per-entry deviation of `R^T R` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.0.transpose() * self.0;
        (g - Mat3::identity()).max_abs_entry()
    }

    /// Geodesic angle to another rotation, in radians.
    pub fn angle_to(&self, o: &Rotation) -> f64 {
        let rel = self.inverse().compose(o);
        let c = fmath::clamp((rel.0.trace() - 1.0) * 0.5, -1.0, 1.0);
        fmath::acos(c)
    }
}

/// Rigid transform `x -> R x + t` (rotation then translation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Rotation,
    pub translation: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform =
        RigidTransform { rotation: Rotation::IDENTITY, translation: Vec3::new(0.0, 0.0, 0.0) };

    #[inline]
    pub fn new(rotation: Rotation, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    #[inline]
    pub fn from_rotation(rotation: Rotation) -> Self {
        Self { rotation, translation: Vec3::zero() }
    }

    #[inline]
    pub fn from_translation(translation: Vec3) -> Self {
        Self { rotation: Rotation::IDENTITY, translation }
    }

    #[inline]
    pub fn apply(&self, v: Vec3) -> Vec3 {
        self.rotation.apply(v) + self.translation
    }

    /// Composition: `(self ∘ o)(x) = self(o(x))`.
    pub fn compose(&self, o: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation.compose(&o.rotation),
            translation: self.rotation.apply(o.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rinv = self.rotation.inverse();
        RigidTransform { rotation: rinv, translation: -(rinv.apply(self.translation)) }
    }
}

/// Errors from the rotation primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RigMathError {
    /// Input matrix too rank-deficient for a well-defined rotation (two
    /// singular values vanish), or an invalid rotation matrix was supplied.
    DegenerateInput,
}

impl fmt::Display for RigMathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RigMathError::DegenerateInput => write!(f, "matrix is degenerate (rank below 2)"),
        }
    }
}

impl core::error::Error for RigMathError {}

/// Build a rotation from Euler angles in the intrinsic X-Z-Y convention,
/// `q = [qx, qz, qy]`, as `R = Rx(qx) * Rz(qz) * Ry(qy)`.
pub fn euler_xzy_to_rotation(q: [f64; 3]) -> Rotation {
    let [qx, qz, qy] = q;
    Rotation(Mat3::rot_x(qx) * Mat3::rot_z(qz) * Mat3::rot_y(qy))
}

/// Recover `[qx, qz, qy]` with `euler_xzy_to_rotation(result) == r`.
///
/// At the gimbal singularity (`cos qz == 0`) the y-angle is fixed to zero and
/// the x-angle absorbs the remaining rotation.
pub fn rotation_to_euler_xzy(r: &Rotation) -> [f64; 3] {
    let m = r.matrix().m;
    // R[0][1] = -sin(qz)
    let sz = fmath::clamp(-m[0][1], -1.0, 1.0);
    let qz = fmath::asin(sz);
    let cz = fmath::cos(qz);
    if fmath::abs(cz) > 1e-9 {
        let qy = fmath::atan2(m[0][2], m[0][0]);
        let qx = fmath::atan2(m[2][1], m[1][1]);
        [qx, qz, qy]
    } else {
        // qy := 0; R[1][2] = -sin(qx)*cos(qy) - ..., use remaining entries.
        let qx = fmath::atan2(-m[1][2], m[2][2]);
        [qx, qz, 0.0]
    }
}

/// Result of [`rotation_between`]: the rotation plus a flag marking that the
/// antiparallel tie-break was taken.
#[derive(Debug, Clone, Copy)]
pub struct RotationBetween {
    pub rotation: Rotation,
    /// True when `a . b` was within [`tol::ANTIPARALLEL_MARGIN`] of -1 and
    /// the deterministic perpendicular-axis tie-break was used.
    pub antiparallel: bool,
}

/// Minimal rotation mapping unit vector `a` onto unit vector `b`.
///
/// The rotation axis is `(a x b)/|a x b|` whenever the cross product is
/// meaningful. For antiparallel inputs the axis is chosen deterministically
/// as `normalize(a x e)` where `e` is the canonical basis vector least
/// aligned with `a`, and the result is flagged.
pub fn rotation_between(a: Vec3, b: Vec3) -> RotationBetween {
    let dot = fmath::clamp(a.dot(b), -1.0, 1.0);
    let cross = a.cross(b);
    let cross_norm = cross.norm();
    if dot < -1.0 + tol::ANTIPARALLEL_MARGIN {
        let e = Vec3::axis(a.argmin_abs());
        let axis = a.cross(e).normalized(0.0).expect("tie-break axis");
        return RotationBetween {
            rotation: Rotation::about_axis(axis, core::f64::consts::PI),
            antiparallel: true,
        };
    }
    if cross_norm < 1e-300 {
        return RotationBetween { rotation: Rotation::IDENTITY, antiparallel: false };
    }
    let axis = cross / cross_norm;
    let angle = fmath::atan2(cross_norm, dot);
    RotationBetween { rotation: Rotation::about_axis(axis, angle), antiparallel: false }
}

/// Closest rotation to `m` in the Frobenius norm, with determinant sign
/// correction (the orthogonal Procrustes projection).
///
/// Errors with `DegenerateInput` when two singular values of `m` vanish,
/// leaving the projection underdetermined.
pub fn project_to_rotation(m: &Mat3) -> Result<Rotation, RigMathError> {
    let gram = m.transpose() * *m;
    let (vals, mut v) = sym_eigen_3x3(&gram);
    // Make V right-handed first; the flip of the weakest eigenvector does
    // not disturb the two directions U is built from.
    if v.det() < 0.0 {
        v = Mat3::from_cols(v.col(0), v.col(1), v.col(2) * -1.0);
    }
    let sigma0 = fmath::sqrt(fmath::max(vals[0], 0.0));
    let sigma1 = fmath::sqrt(fmath::max(vals[1], 0.0));
    if sigma0 <= 0.0 || sigma1 <= sigma0 * tol::SINGULAR_VALUE_RATIO {
        return Err(RigMathError::DegenerateInput);
    }
    let u0 = (*m * v.col(0)) / sigma0;
    let u0 = u0.normalized(0.0).ok_or(RigMathError::DegenerateInput)?;
    let mut u1 = (*m * v.col(1)) / sigma1;
    // Re-orthogonalize against u0 to scrub rounding from the eigen solve.
    u1 -= u0 * u0.dot(u1);
    let u1 = u1.normalized(0.0).ok_or(RigMathError::DegenerateInput)?;
    // Completing U with the cross product bakes in the determinant sign
    // correction: when det(m) < 0 it flips the weakest direction, which is
    // the constrained optimum.
    let u2 = u0.cross(u1);
    let u = Mat3::from_cols(u0, u1, u2);
    Ok(Rotation(u * v.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3::Vec3;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn rand_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * uniform(rng)
    }

    fn rand_unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = Vec3::new(
                rand_in(rng, -1.0, 1.0),
                rand_in(rng, -1.0, 1.0),
                rand_in(rng, -1.0, 1.0),
            );
            let n = v.norm();
            if n > 1e-3 && n < 1.0 {
                return v / n;
            }
        }
    }

    fn rand_rotation(rng: &mut ChaCha8Rng) -> Rotation {
        let axis = rand_unit(rng);
        let angle = rand_in(rng, -core::f64::consts::PI, core::f64::consts::PI);
        Rotation::about_axis(axis, angle)
    }

    #[test]
    fn euler_identity_case() {
        let r = euler_xzy_to_rotation([0.0, 0.0, 0.0]);
        assert!(r.matrix().frobenius_distance(&Mat3::identity()) < 1e-15);
    }

    #[test]
    fn euler_quarter_turn_about_x_maps_y_to_z() {
        let r = euler_xzy_to_rotation([core::f64::consts::FRAC_PI_2, 0.0, 0.0]);
        let v = r.apply(Vec3::new(0.0, 1.0, 0.0));
        assert!((v - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn euler_matches_single_axis_product_oracle() {
        // Independent oracle: multiply the three single-axis matrices
        // element by element in the stated order.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let q = [
                rand_in(&mut rng, -3.0, 3.0),
                rand_in(&mut rng, -3.0, 3.0),
                rand_in(&mut rng, -3.0, 3.0),
            ];
            let r = euler_xzy_to_rotation(q);
            let oracle = Mat3::rot_x(q[0]) * (Mat3::rot_z(q[1]) * Mat3::rot_y(q[2]));
            assert!(r.matrix().frobenius_distance(&oracle) < 1e-14);
        }
    }

    #[test]
    fn euler_round_trip_extraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let r = rand_rotation(&mut rng);
            let q = rotation_to_euler_xzy(&r);
            let back = euler_xzy_to_rotation(q);
            assert!(back.matrix().frobenius_distance(r.matrix()) < 1e-9);
        }
    }

    #[test]
    fn euler_continuity_bound() {
        // |R(q) - R(q + d)|_F <= 3 |d| for small d.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let q = [
                rand_in(&mut rng, -3.0, 3.0),
                rand_in(&mut rng, -3.0, 3.0),
                rand_in(&mut rng, -3.0, 3.0),
            ];
            let mut d = [0.0; 3];
            let mut norm = 0.0;
            for v in &mut d {
                *v = rand_in(&mut rng, -1e-3, 1e-3);
                norm += *v * *v;
            }
            let norm = norm.sqrt();
            let q2 = [q[0] + d[0], q[1] + d[1], q[2] + d[2]];
            let dist =
                euler_xzy_to_rotation(q).matrix().frobenius_distance(euler_xzy_to_rotation(q2).matrix());
            assert!(dist <= 3.0 * norm + 1e-12, "dist {dist} vs bound {}", 3.0 * norm);
        }
    }

    #[test]
    fn rotation_between_identity_case() {
        let a = Vec3::new(0.3, -0.4, 0.866_025_403_784_438_6).normalized(0.0).unwrap();
        let r = rotation_between(a, a);
        assert!(!r.antiparallel);
        assert!(r.rotation.matrix().frobenius_distance(&Mat3::identity()) < 1e-12);
    }

    #[test]
    fn rotation_between_quarter_turn() {
        let r = rotation_between(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0));
        let expected = Rotation::about_axis(Vec3::new(0.0, 0.0, 1.0), core::f64::consts::FRAC_PI_2);
        assert!(r.rotation.matrix().frobenius_distance(expected.matrix()) < 1e-14);
    }

    #[test]
    fn rotation_between_residual_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..500 {
            let a = rand_unit(&mut rng);
            let b = rand_unit(&mut rng);
            if a.dot(b) < -0.999 {
                continue;
            }
            let r = rotation_between(a, b);
            assert!((r.rotation.apply(a) - b).norm() < 1e-10);
            let back = rotation_between(b, a);
            let comp = back.rotation.compose(&r.rotation);
            assert!(comp.matrix().frobenius_distance(&Mat3::identity()) < 1e-9);
            assert!(r.rotation.orthonormality_defect() < tol::ROTATION_ORTHONORMALITY);
        }
    }

    #[test]
    fn rotation_between_antiparallel_tie_break() {
        let a = Vec3::new(1.0, 0.0, 0.0);
        let r = rotation_between(a, -a);
        assert!(r.antiparallel);
        assert!((r.rotation.apply(a) + a).norm() < 1e-12);
        // Axis must be perpendicular to a: a stays mapped to -a and the
        // tie-break is reproducible.
        let r2 = rotation_between(a, -a);
        assert_eq!(r.rotation.matrix().m, r2.rotation.matrix().m);
    }

    #[test]
    fn project_fixed_point_on_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let r = rand_rotation(&mut rng);
            let p = project_to_rotation(r.matrix()).unwrap();
            assert!(p.matrix().frobenius_distance(r.matrix()) < 1e-12);
        }
    }

    #[test]
    fn project_positive_scaling_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..200 {
            let r = rand_rotation(&mut rng);
            let m = *r.matrix() * rand_in(&mut rng, 0.1, 5.0);
            let p = project_to_rotation(&m).unwrap();
            assert!(p.matrix().frobenius_distance(r.matrix()) < 1e-11);
        }
    }

    #[test]
    fn project_diagonal_scaling_invariance() {
        // project(R * D) = R for diagonal D with strictly positive entries.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..200 {
            let r = rand_rotation(&mut rng);
            let d = Mat3::from_rows(
                [rand_in(&mut rng, 0.1, 3.0), 0.0, 0.0],
                [0.0, rand_in(&mut rng, 0.1, 3.0), 0.0],
                [0.0, 0.0, rand_in(&mut rng, 0.1, 3.0)],
            );
            let p = project_to_rotation(&(*r.matrix() * d)).unwrap();
            assert!(p.matrix().frobenius_distance(r.matrix()) < 1e-9);
        }
    }

    #[test]
    fn project_beats_sampled_rotations() {
        // Sampled maximality oracle: trace(R^T M) >= trace(Q^T M) for random Q.
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..10 {
            let mut m = Mat3::zero();
            for i in 0..3 {
                for j in 0..3 {
                    m.m[i][j] = rand_in(&mut rng, -2.0, 2.0);
                }
            }
            let p = match project_to_rotation(&m) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let score = (p.matrix().transpose() * m).trace();
            for _ in 0..10_000 {
                let q = rand_rotation(&mut rng);
                let qs = (q.matrix().transpose() * m).trace();
                assert!(score >= qs - 1e-9, "projection not maximal: {score} < {qs}");
            }
        }
    }

    #[test]
    fn project_detects_degenerate_rank() {
        let m = Mat3::from_rows([1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]);
        assert_eq!(project_to_rotation(&m), Err(RigMathError::DegenerateInput));
    }

    #[test]
    fn project_handles_negative_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..100 {
            let mut m = Mat3::zero();
            for i in 0..3 {
                for j in 0..3 {
                    m.m[i][j] = rand_in(&mut rng, -2.0, 2.0);
                }
            }
            m.m[0][0] = -3.0; // bias towards negative determinants
            if let Ok(p) = project_to_rotation(&m) {
                assert!(p.orthonormality_defect() < tol::ROTATION_ORTHONORMALITY);
                assert!((p.matrix().det() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn transform_compose_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let t = RigidTransform::new(
                rand_rotation(&mut rng),
                Vec3::new(
                    rand_in(&mut rng, -2.0, 2.0),
                    rand_in(&mut rng, -2.0, 2.0),
                    rand_in(&mut rng, -2.0, 2.0),
                ),
            );
            let id = t.compose(&t.inverse());
            assert!(id.rotation.matrix().frobenius_distance(&Mat3::identity()) < tol::TRANSFORM_ROUND_TRIP);
            assert!(id.translation.norm() < tol::TRANSFORM_ROUND_TRIP);
        }
    }
}
