//! Pinhole camera model and back-projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Pose, Vec3};
use crate::num;

use alloc::format;

/// Pinhole intrinsics. Camera frame: x right, y up, z forward; pixel rows
/// grow downward, so `v` maps to `-y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    /// Maximum sensed z-depth in meters.
    pub max_depth: f64,
}

impl Default for CameraModel {
    /// Desk-scale sensor: 128x96 pixels, 79 degree field of view, 3.5 m
    /// range.
    fn default() -> Self {
        CameraModel::from_fov(128, 96, 79.0f64.to_radians(), 3.5)
            .expect("default intrinsics are valid")
    }
}

impl CameraModel {
    /// Builds intrinsics from a horizontal field of view in radians.
    pub fn from_fov(width: u32, height: u32, hfov: f64, max_depth: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config("camera dimensions must be positive".into()));
        }
        if !(hfov > 0.0 && hfov < core::f64::consts::PI) {
            return Err(Error::Config(format!("hfov out of range: {hfov}")));
        }
        if max_depth <= 0.0 {
            return Err(Error::Config("max_depth must be positive".into()));
        }
        let fx = (width as f64 / 2.0) / num::tan(hfov / 2.0);
        Ok(CameraModel {
            fx,
            fy: fx,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            width,
            height,
            max_depth,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::Config("focal lengths must be positive".into()));
        }
        if !(0.0..self.width as f64).contains(&self.cx)
            || !(0.0..self.height as f64).contains(&self.cy)
        {
            return Err(Error::Config("principal point outside image".into()));
        }
        if self.max_depth <= 0.0 {
            return Err(Error::Config("max_depth must be positive".into()));
        }
        Ok(())
    }

    fn check_pixel(&self, u: f64, v: f64) -> Result<()> {
        if !(0.0..self.width as f64).contains(&u) || !(0.0..self.height as f64).contains(&v) {
            return Err(Error::InvalidInput(format!("pixel ({u}, {v}) out of bounds")));
        }
        Ok(())
    }

    /// Camera-frame ray direction through a pixel, scaled so that z = 1.
    pub fn pixel_ray(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, -(v - self.cy) / self.fy, 1.0)
    }
}

/// Lifts a pixel with a known z-depth into the world frame.
pub fn back_project(pixel: (f64, f64), depth: f64, camera: &CameraModel, pose: &Pose) -> Result<Vec3> {
    camera.check_pixel(pixel.0, pixel.1)?;
    if !(depth > 0.0 && depth <= camera.max_depth) {
        return Err(Error::InvalidInput(format!("depth {depth} outside (0, max_depth]")));
    }
    let cam = camera.pixel_ray(pixel.0, pixel.1) * depth;
    Ok(pose.camera_to_world(cam))
}

/// Projects a world point into the image. Returns `(u, v, z_depth)`, or
/// `None` for points at or behind the camera plane.
pub fn project(point: Vec3, camera: &CameraModel, pose: &Pose) -> Option<(f64, f64, f64)> {
    let cam = pose.world_to_camera(point);
    if cam.z <= 1e-12 {
        return None;
    }
    let u = camera.cx + camera.fx * cam.x / cam.z;
    let v = camera.cy - camera.fy * cam.y / cam.z;
    Some((u, v, cam.z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::euclidean_distance;
    use proptest::prelude::*;

    fn cam() -> CameraModel {
        CameraModel::from_fov(128, 96, 79f64.to_radians(), 3.5).unwrap()
    }

    #[test]
    fn principal_ray() {
        let c = cam();
        let p = back_project((c.cx, c.cy), 2.0, &c, &Pose::identity()).unwrap();
        assert!(euclidean_distance(p, Vec3::new(0.0, 0.0, 2.0)) < 1e-12);
    }

    #[test]
    fn translation_only() {
        let c = cam();
        let pose = Pose::new(Vec3::new(1.0, 0.0, 0.0), 0.0);
        let p = back_project((c.cx, c.cy), 2.0, &c, &pose).unwrap();
        assert!(euclidean_distance(p, Vec3::new(1.0, 0.0, 2.0)) < 1e-12);
    }

    #[test]
    fn unit_lateral_offset() {
        // fx exceeds the image width for this fov, so build a wider camera
        // where cx + fx stays in bounds.
        let c = CameraModel {
            fx: 40.0,
            fy: 40.0,
            cx: 64.0,
            cy: 48.0,
            width: 128,
            height: 96,
            max_depth: 3.5,
        };
        let p = back_project((c.cx + c.fx, c.cy), 1.0, &c, &Pose::identity()).unwrap();
        assert!(euclidean_distance(p, Vec3::new(1.0, 0.0, 1.0)) < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = cam();
        assert!(back_project((-1.0, 0.0), 1.0, &c, &Pose::identity()).is_err());
        assert!(back_project((c.cx, c.cy), 0.0, &c, &Pose::identity()).is_err());
        assert!(back_project((c.cx, c.cy), 99.0, &c, &Pose::identity()).is_err());
    }

    proptest! {
        // project(back_project(u, v, d)) recovers (u, v, d).
        #[test]
        fn projection_roundtrip(
            u in 0.0..128.0f64,
            v in 0.0..96.0f64,
            d in 0.01..3.5f64,
            px in -10.0..10.0f64,
            pz in -10.0..10.0f64,
            h in -3.0..3.0f64,
        ) {
            let c = cam();
            let pose = Pose::new(Vec3::new(px, 0.0, pz), h);
            let world = back_project((u, v), d, &c, &pose).unwrap();
            let (u2, v2, d2) = project(world, &c, &pose).unwrap();
            prop_assert!((u - u2).abs() < 1e-9);
            prop_assert!((v - v2).abs() < 1e-9);
            prop_assert!((d - d2).abs() < 1e-9);
        }
    }
}
