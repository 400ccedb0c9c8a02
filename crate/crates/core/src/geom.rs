//! World-frame geometry. World-up is the y axis; planar worlds live in the
//! x-z plane with the agent height fixed per world.

use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::num;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    /// World-up.
    pub const UP: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    pub fn norm(self) -> f64 {
        num::sqrt(self.dot(self))
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        Vec3 { x: self.x / n, y: self.y / n, z: self.z / n }
    }

    /// Same point with the up-coordinate replaced (planar projection).
    pub fn with_y(self, y: f64) -> Vec3 {
        Vec3 { y, ..self }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

pub fn euclidean_distance(a: Vec3, b: Vec3) -> f64 {
    (a - b).norm()
}

/// Wraps an angle to `[-pi, pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = libm::fmod(a + PI, 2.0 * PI);
    if a < 0.0 {
        a += 2.0 * PI;
    }
    a - PI
}

/// Agent / camera pose: position plus a heading about world-up. Heading 0
/// faces +z; positive headings turn toward +x (left turn increases heading).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub heading: f64,
}

impl Pose {
    pub fn new(position: Vec3, heading: f64) -> Self {
        Pose { position, heading: wrap_angle(heading) }
    }

    pub fn identity() -> Self {
        Pose { position: Vec3::ZERO, heading: 0.0 }
    }

    /// Unit vector the pose is facing.
    pub fn forward(&self) -> Vec3 {
        Vec3::new(num::sin(self.heading), 0.0, num::cos(self.heading))
    }

    /// Rotates a camera-frame vector (x right, y up, z forward) into the
    /// world frame.
    pub fn rotate_to_world(&self, v: Vec3) -> Vec3 {
        let (s, c) = (num::sin(self.heading), num::cos(self.heading));
        Vec3::new(c * v.x + s * v.z, v.y, -s * v.x + c * v.z)
    }

    /// Inverse of [`Pose::rotate_to_world`] composed with the translation:
    /// expresses a world point in the camera frame.
    pub fn world_to_camera(&self, p: Vec3) -> Vec3 {
        let d = p - self.position;
        let (s, c) = (num::sin(self.heading), num::cos(self.heading));
        Vec3::new(c * d.x - s * d.z, d.y, s * d.x + c * d.z)
    }

    pub fn camera_to_world(&self, v: Vec3) -> Vec3 {
        self.rotate_to_world(v) + self.position
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_trivia() {
        assert_eq!(euclidean_distance(Vec3::ZERO, Vec3::ZERO), 0.0);
        assert_eq!(
            euclidean_distance(Vec3::ZERO, Vec3::new(3.0, 0.0, 4.0)),
            5.0
        );
    }

    #[test]
    fn heading_wraps() {
        let p = Pose::new(Vec3::ZERO, 3.5 * PI);
        assert!((-PI..PI).contains(&p.heading));
        assert!((wrap_angle(PI) - -PI).abs() < 1e-12);
    }

    #[test]
    fn forward_convention() {
        let p = Pose::identity();
        let f = p.forward();
        assert!((f.z - 1.0).abs() < 1e-12 && f.x.abs() < 1e-12);
        // left turn by 90 degrees faces +x
        let l = Pose::new(Vec3::ZERO, PI / 2.0).forward();
        assert!((l.x - 1.0).abs() < 1e-12 && l.z.abs() < 1e-12);
    }

    fn arb_point() -> impl Strategy<Value = Vec3> {
        (-50.0..50.0f64, -50.0..50.0f64, -50.0..50.0f64)
            .prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn distance_matches_componentwise(a in arb_point(), b in arb_point()) {
            let manual = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt();
            prop_assert!((euclidean_distance(a, b) - manual).abs() < 1e-12);
        }

        #[test]
        fn triangle_inequality(a in arb_point(), b in arb_point(), c in arb_point()) {
            prop_assert!(
                euclidean_distance(a, c)
                    <= euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-12
            );
        }

        #[test]
        fn camera_world_roundtrip(p in arb_point(), pos in arb_point(), h in -3.0..3.0f64) {
            let pose = Pose::new(pos, h);
            let back = pose.camera_to_world(pose.world_to_camera(p));
            prop_assert!(euclidean_distance(p, back) < 1e-9);
        }
    }
}
