use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{normalize, Vec3};

/// Camera-to-world transform with a horizontal field of view. Cameras look
/// down their local -z axis with +y up (Blender convention).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub transform: [[f64; 4]; 4],
    pub fov_x: f64,
}

impl CameraPose {
    pub fn new(transform: [[f64; 4]; 4], fov_x: f64) -> Result<Self> {
        let pose = Self { transform, fov_x };
        pose.validate()?;
        Ok(pose)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov_x.is_finite() && self.fov_x > 0.0 && self.fov_x < std::f64::consts::PI) {
            return Err(Error::invalid(format!("fov_x {} must lie in (0, pi)", self.fov_x)));
        }
        let m = &self.transform;
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("camera transform has non-finite entries"));
        }
        if m[3] != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::invalid(format!("camera transform bottom row {:?} is not (0, 0, 0, 1)", m[3])));
        }
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if (d - expected).abs() > 1e-4 {
                    return Err(Error::invalid("camera rotation block is not orthonormal"));
                }
            }
        }
        Ok(())
    }

    pub fn identity(fov_x: f64) -> Self {
        let mut transform = [[0.0; 4]; 4];
        for (i, row) in transform.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self { transform, fov_x }
    }

    /// Pose at `eye` looking at `target` with world `up`.
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3, fov_x: f64) -> Result<Self> {
        use crate::math::{cross, sub};
        let back = normalize(sub(eye, target));
        let right = cross(up, back);
        if right.iter().all(|v| v.abs() < 1e-12) {
            return Err(Error::invalid("look_at: up vector is parallel to the view direction"));
        }
        let right = normalize(right);
        let true_up = cross(back, right);
        let mut transform = [[0.0; 4]; 4];
        for k in 0..3 {
            transform[k] = [right[k], true_up[k], back[k], eye[k]];
        }
        transform[3] = [0.0, 0.0, 0.0, 1.0];
        Self::new(transform, fov_x)
    }

    pub fn origin(&self) -> Vec3 {
        [self.transform[0][3], self.transform[1][3], self.transform[2][3]]
    }

    /// Pinhole focal length in pixels for an image `width` pixels wide.
    pub fn focal(&self, width: usize) -> f64 {
        0.5 * width as f64 / (0.5 * self.fov_x).tan()
    }

    fn rotate(&self, v: Vec3) -> Vec3 {
        let m = &self.transform;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Unit world-space direction through the center of pixel `(row, col)`.
    pub fn pixel_direction(&self, width: usize, height: usize, row: usize, col: usize) -> Vec3 {
        let f = self.focal(width);
        let x = (col as f64 + 0.5 - 0.5 * width as f64) / f;
        let y = -(row as f64 + 0.5 - 0.5 * height as f64) / f;
        normalize(self.rotate([x, y, -1.0]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
    pub t_near: f64,
    pub t_far: f64,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3, t_near: f64, t_far: f64) -> Result<Self> {
        crate::field::check_unit_direction(direction)?;
        if !(t_near >= 0.0 && t_near < t_far && t_far.is_finite()) {
            return Err(Error::invalid(format!("ray bounds [{t_near}, {t_far}] must satisfy 0 <= near < far")));
        }
        if origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("ray origin is not finite"));
        }
        Ok(Self {
            origin,
            direction,
            t_near,
            t_far,
        })
    }

    pub fn at(&self, t: f64) -> Vec3 {
        [
            self.origin[0] + t * self.direction[0],
            self.origin[1] + t * self.direction[1],
            self.origin[2] + t * self.direction[2],
        ]
    }
}

/// One ray through the center of each requested `(row, col)` pixel.
pub fn generate_rays(
    pose: &CameraPose,
    width: usize,
    height: usize,
    pixels: &[(usize, usize)],
    t_near: f64,
    t_far: f64,
) -> Result<Vec<Ray>> {
    pose.validate()?;
    pixels
        .iter()
        .map(|&(row, col)| {
            if row >= height || col >= width {
                return Err(Error::invalid(format!(
                    "pixel ({row}, {col}) outside {height}x{width} image"
                )));
            }
            Ray::new(pose.origin(), pose.pixel_direction(width, height, row, col), t_near, t_far)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: Vec3, b: Vec3) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn center_pixel_looks_down_negative_z() {
        let pose = CameraPose::identity(FRAC_PI_2);
        let rays = generate_rays(&pose, 5, 5, &[(2, 2)], 0.0, 1.0).unwrap();
        assert!(close(rays[0].direction, [0.0, 0.0, -1.0]));
        assert_eq!(rays[0].origin, [0.0; 3]);
    }

    #[test]
    fn focal_from_fov() {
        let pose = CameraPose::identity(FRAC_PI_2);
        assert!((pose.focal(800) - 400.0).abs() < 1e-9);
    }

    #[test]
    fn corner_pixel_direction() {
        // W = H = 4, f = 2: top-left center sits at (-1.5, 1.5) / 2 on the z = -1 plane
        let pose = CameraPose::identity(FRAC_PI_2);
        let d = generate_rays(&pose, 4, 4, &[(0, 0)], 0.0, 1.0).unwrap()[0].direction;
        let (x, y) = (-0.75f64, 0.75f64);
        let n = (x * x + y * y + 1.0).sqrt();
        assert!(close(d, [x / n, y / n, -1.0 / n]));
    }

    #[test]
    fn translation_moves_origins_only() {
        let a = CameraPose::identity(1.0);
        let mut b = a;
        b.transform[0][3] = 1.0;
        b.transform[1][3] = -2.0;
        b.transform[2][3] = 0.5;
        let px = [(0, 0), (3, 1), (2, 2)];
        let ra = generate_rays(&a, 4, 4, &px, 0.0, 1.0).unwrap();
        let rb = generate_rays(&b, 4, 4, &px, 0.0, 1.0).unwrap();
        for (x, y) in ra.iter().zip(&rb) {
            assert_eq!(x.direction, y.direction);
            assert_eq!(y.origin, [1.0, -2.0, 0.5]);
        }
    }

    #[test]
    fn out_of_bounds_pixel_rejected() {
        let pose = CameraPose::identity(1.0);
        assert!(generate_rays(&pose, 4, 4, &[(4, 0)], 0.0, 1.0).is_err());
        assert!(generate_rays(&pose, 4, 4, &[(0, 4)], 0.0, 1.0).is_err());
    }

    #[test]
    fn look_at_points_optical_axis_at_target() {
        let pose = CameraPose::look_at([3.0, 1.0, 2.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0], 0.8).unwrap();
        let d = pose.pixel_direction(3, 3, 1, 1);
        let expected = normalize([-3.0, -1.0, -2.0]);
        assert!(close(d, expected));
    }

    #[test]
    fn invalid_poses_rejected() {
        let mut m = CameraPose::identity(1.0).transform;
        m[0][0] = 2.0;
        assert!(CameraPose::new(m, 1.0).is_err());
        let mut m = CameraPose::identity(1.0).transform;
        m[3][0] = 1.0;
        assert!(CameraPose::new(m, 1.0).is_err());
        assert!(CameraPose::new(CameraPose::identity(1.0).transform, 0.0).is_err());
    }

    #[test]
    fn ray_bounds_checked() {
        assert!(Ray::new([0.0; 3], [0.0, 0.0, 1.0], 2.0, 1.0).is_err());
        assert!(Ray::new([0.0; 3], [0.0, 0.0, 1.0], -0.1, 1.0).is_err());
        assert!(Ray::new([0.0; 3], [0.0, 0.0, 3.0], 0.0, 1.0).is_err());
    }
}
