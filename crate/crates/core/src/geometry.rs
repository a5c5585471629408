//! Small vector helpers shared by the kinematic and field modules.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Rotation about a unit axis through the origin, right-hand rule, angle in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub m: Mat3,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform { m: Mat3::identity() }
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.m * v
    }

    pub fn compose(&self, rhs: &RigidTransform) -> RigidTransform {
        RigidTransform { m: self.m * rhs.m }
    }

    /// Largest entry of |MᵀM − I|.
    pub fn orthonormality_error(&self) -> f64 {
        (self.m.transpose() * self.m - Mat3::identity()).abs().max()
    }
}

/// Rodrigues rotation. Fails when the axis norm is off by more than 1e-9.
pub fn joint_rotation(axis: &Vec3, angle_deg: f64) -> Result<RigidTransform> {
    let n = axis.norm();
    if !((n - 1.0).abs() <= 1e-9) {
        return Err(Error::NonUnitAxis(n));
    }
    Ok(rotation_unchecked(axis, angle_deg))
}

pub(crate) fn rotation_unchecked(u: &Vec3, angle_deg: f64) -> RigidTransform {
    let (s, c) = angle_deg.to_radians().sin_cos();
    let t = 1.0 - c;
    let (x, y, z) = (u.x, u.y, u.z);
    let m = Mat3::new(
        t * x * x + c,
        t * x * y - s * z,
        t * x * z + s * y,
        t * x * y + s * z,
        t * y * y + c,
        t * y * z - s * x,
        t * x * z - s * y,
        t * y * z + s * x,
        t * z * z + c,
    );
    RigidTransform { m }
}

/// IUPAC dihedral a-b-c-d in degrees, range (−180, 180].
pub fn dihedral(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    let b0 = a - b;
    let b1 = c - b;
    let b2 = d - c;
    let b1n = b1.normalize();
    let v = b0 - b1n * b0.dot(&b1n);
    let w = b2 - b1n * b2.dot(&b1n);
    let x = v.dot(&w);
    let y = b1n.cross(&v).dot(&w);
    y.atan2(x).to_degrees()
}

pub fn angle(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let u = (a - b).normalize();
    let v = (c - b).normalize();
    u.dot(&v).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Places atom d bonded to c with bond length `len`, angle b-c-d and dihedral a-b-c-d (degrees).
pub fn place(a: &Vec3, b: &Vec3, c: &Vec3, len: f64, angle_deg: f64, dihedral_deg: f64) -> Vec3 {
    let bc = (c - b).normalize();
    let n = (b - a).cross(&bc).normalize();
    let m = n.cross(&bc);
    let (st, ct) = angle_deg.to_radians().sin_cos();
    let (sp, cp) = dihedral_deg.to_radians().sin_cos();
    let d2 = Vec3::new(-len * ct, len * st * cp, len * st * sp);
    c + bc * d2.x + m * d2.y + n * d2.z
}

/// Wraps an angle into [0, 360).
pub fn wrap360(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Wraps an angle into [−180, 180).
pub fn wrap180(a: f64) -> f64 {
    let r = (a + 180.0).rem_euclid(360.0) - 180.0;
    if r >= 180.0 {
        r - 360.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_angle_is_identity() {
        let r = joint_rotation(&Vec3::new(0.0, 0.6, 0.8), 0.0).unwrap();
        assert_eq!(r.m, Mat3::identity());
    }

    #[test]
    fn quarter_turn_about_z() {
        let r = joint_rotation(&Vec3::z(), 90.0).unwrap();
        let y = r.apply(&Vec3::x());
        assert!((y - Vec3::y()).abs().max() < 1e-12);
    }

    #[test]
    fn rejects_non_unit_axis() {
        assert!(matches!(
            joint_rotation(&Vec3::new(1.0, 1.0, 0.0), 10.0),
            Err(Error::NonUnitAxis(_))
        ));
    }

    #[test]
    fn place_reproduces_internal_coordinates() {
        let a = Vec3::new(0.3, 1.2, -0.4);
        let b = Vec3::new(0.0, 0.0, 0.0);
        let c = Vec3::new(1.5, 0.1, 0.2);
        for &dih in &[-170.0, -60.0, 0.0, 45.0, 179.0] {
            let d = place(&a, &b, &c, 1.33, 116.0, dih);
            assert!(((d - c).norm() - 1.33).abs() < 1e-12);
            assert!((angle(&b, &c, &d) - 116.0).abs() < 1e-9);
            assert!(wrap180(dihedral(&a, &b, &c, &d) - dih).abs() < 1e-9);
        }
    }

    #[test]
    fn right_hand_rotation_increases_dihedral() {
        let a = Vec3::new(1.0, 1.0, 0.0);
        let b = Vec3::zeros();
        let c = Vec3::x();
        let d = Vec3::new(1.5, -1.0, 0.2);
        let before = dihedral(&a, &b, &c, &d);
        let r = joint_rotation(&Vec3::x(), 25.0).unwrap();
        let d2 = c + r.apply(&(d - c));
        let after = dihedral(&a, &b, &c, &d2);
        assert!((wrap180(after - before) - 25.0).abs() < 1e-9);
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap360(361.0), 1.0);
        assert_eq!(wrap360(-1.0), 359.0);
        assert_eq!(wrap360(-1e-18), 0.0);
        assert_eq!(wrap180(180.0), -180.0);
        assert_eq!(wrap180(-190.0), 170.0);
    }
}
