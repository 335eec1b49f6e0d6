//! Pinhole camera and head pose.

use nalgebra::{Rotation3, Vector2};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Pinhole camera. Camera frame: `+x` right, `+y` down, `+z` forward.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub focal_length: f64,
    pub principal_point: [f64; 2],
    pub width: u32,
    pub height: u32,
    /// Camera-to-world rotation.
    pub rotation: Rotation3<f64>,
    /// Camera center in world coordinates (mm).
    pub translation: Vec3,
}

/// Default subject distance from the camera center, mm.
pub const DEFAULT_DISTANCE: f64 = 1000.0;
/// Default focal length for a 227-pixel image, pixels.
pub const DEFAULT_FOCAL_227: f64 = 800.0;

/// A projected point: pixel coordinates and camera-frame depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub pixel: Vector2<f64>,
    pub depth: f64,
}

impl Camera {
    /// Camera on the `+z` axis at `distance`, looking at the origin with
    /// world `+y` up in the image. The principal point is the image center.
    pub fn looking_at_origin(width: u32, height: u32, focal_length: f64, distance: f64) -> Self {
        // columns are the camera axes expressed in world coordinates
        let rotation = Rotation3::from_matrix_unchecked(nalgebra::Matrix3::new(
            1.0, 0.0, 0.0, //
            0.0, -1.0, 0.0, //
            0.0, 0.0, -1.0,
        ));
        Camera {
            focal_length,
            principal_point: [f64::from(width) / 2.0, f64::from(height) / 2.0],
            width,
            height,
            rotation,
            translation: Vec3::new(0.0, 0.0, distance),
        }
    }

    /// Default framing: focal length scales with the image width.
    pub fn default_for_size(width: u32, height: u32) -> Self {
        let f = DEFAULT_FOCAL_227 * f64::from(width) / 227.0;
        Camera::looking_at_origin(width, height, f, DEFAULT_DISTANCE)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.focal_length > 0.0) {
            return Err(Error::param("focal length must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::param("image size must be positive"));
        }
        Ok(())
    }

    pub fn world_to_camera(&self, p: &Vec3) -> Vec3 {
        self.rotation.inverse() * (p - self.translation)
    }

    /// Projects a camera-frame point. The caller guarantees `z > 0`.
    pub fn project_camera_frame(&self, p: &Vec3) -> Projection {
        Projection {
            pixel: Vector2::new(
                self.principal_point[0] + self.focal_length * p.x / p.z,
                self.principal_point[1] + self.focal_length * p.y / p.z,
            ),
            depth: p.z,
        }
    }

    pub fn project(&self, world: &Vec3) -> Projection {
        self.project_camera_frame(&self.world_to_camera(world))
    }
}

/// Rigid head pose applied about the head center before the camera.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PoseParams {
    /// Rotation about the vertical axis; positive turns the face toward
    /// `+x` (the subject's left, image right).
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    pub translation: [f64; 3],
}

impl PoseParams {
    pub fn yaw(yaw: f64) -> Self {
        PoseParams {
            yaw,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&self.yaw) {
            return Err(Error::param(format!("yaw {} outside [-pi, pi]", self.yaw)));
        }
        Ok(())
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&Vec3::y_axis(), self.yaw)
            * Rotation3::from_axis_angle(&Vec3::x_axis(), self.pitch)
            * Rotation3::from_axis_angle(&Vec3::z_axis(), self.roll)
    }
}
