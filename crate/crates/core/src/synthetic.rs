//! Procedural multi-view scene: a textured ball resting on a finite
//! checkered plane, ray traced analytically under a fixed directional light.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use crate::dataset::{save_dataset, Augmentation, PosedDataset, PosedImage};
use crate::error::Result;
use crate::image_ops::Image;
use crate::math::{dot, normalize, Vec3};
use crate::render::CameraPose;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SyntheticScene {
    pub size: usize,
    pub train_views: usize,
    pub test_views: usize,
    pub ball_radius: f64,
    /// Half extent of the square ground plane.
    pub plane_half: f64,
    pub camera_distance: f64,
    pub fov_x: f64,
}

impl Default for SyntheticScene {
    fn default() -> Self {
        Self {
            size: 64,
            train_views: 20,
            test_views: 5,
            ball_radius: 0.5,
            plane_half: 1.0,
            camera_distance: 3.0,
            fov_x: 0.6,
        }
    }
}

const LIGHT: Vec3 = [0.408_248_290_463_863, 0.408_248_290_463_863, 0.816_496_580_927_726];
const BACKGROUND: [f64; 3] = [1.0, 1.0, 1.0];

impl SyntheticScene {
    /// Ray bounds enclosing the whole scene from every camera.
    pub fn bounds(&self) -> (f64, f64) {
        let reach = (2.0 * self.plane_half * self.plane_half + self.ball_radius * self.ball_radius).sqrt();
        ((self.camera_distance - reach).max(0.05), self.camera_distance + reach)
    }

    /// Camera on the viewing sphere for view `i` of `n`, offset by `phase`
    /// turns so that train and test views interleave.
    fn pose(&self, i: usize, n: usize, phase: f64) -> Result<CameraPose> {
        let azimuth = TAU * (i as f64 + phase) / n as f64;
        let elevation = (0.35 + 0.35 * ((i as f64 * 0.618_033_988_75 + phase).fract())) * 0.5 * PI;
        let d = self.camera_distance;
        let eye = [
            d * elevation.cos() * azimuth.cos(),
            d * elevation.cos() * azimuth.sin(),
            d * elevation.sin(),
        ];
        CameraPose::look_at(eye, [0.0, 0.0, 0.0], [0.0, 0.0, 1.0], self.fov_x)
    }

    fn ball_color(&self, n: Vec3) -> [f64; 3] {
        let lon = n[1].atan2(n[0]);
        let lat = n[2].asin();
        let band = 0.5 + 0.5 * (3.0 * lon).sin();
        let stripe = 0.5 + 0.5 * (4.0 * lat).cos();
        [0.85 * band + 0.1, 0.25 + 0.5 * stripe, 0.9 - 0.6 * band]
    }

    fn plane_color(&self, x: f64, y: f64) -> [f64; 3] {
        let cell = 0.5;
        let odd = ((x / cell).floor() as i64 + (y / cell).floor() as i64).rem_euclid(2) == 1;
        if odd {
            [0.25, 0.35, 0.55]
        } else {
            [0.8, 0.75, 0.6]
        }
    }

    /// Radiance along a ray.
    pub fn trace(&self, origin: Vec3, dir: Vec3) -> [f64; 3] {
        let r = self.ball_radius;
        let ground = -r;
        // ball centered at the origin, resting on z = -r
        let b = dot(origin, dir);
        let c = dot(origin, origin) - r * r;
        let disc = b * b - c;
        let t_ball = if disc >= 0.0 {
            let t = -b - disc.sqrt();
            (t > 1e-9).then_some(t)
        } else {
            None
        };
        let t_plane = if dir[2] < 0.0 {
            let t = (ground - origin[2]) / dir[2];
            let x = origin[0] + t * dir[0];
            let y = origin[1] + t * dir[1];
            (t > 1e-9 && x.abs() <= self.plane_half && y.abs() <= self.plane_half).then_some(t)
        } else {
            None
        };
        let at = |t: f64| [origin[0] + t * dir[0], origin[1] + t * dir[1], origin[2] + t * dir[2]];
        match (t_ball, t_plane) {
            (Some(tb), tp) if tp.is_none_or(|tp| tb <= tp) => {
                let n = normalize(at(tb));
                let shade = 0.35 + 0.65 * dot(n, LIGHT).max(0.0);
                self.ball_color(n).map(|v| (v * shade).clamp(0.0, 1.0))
            }
            (_, Some(tp)) => {
                let p = at(tp);
                // hard shadow cast by the ball
                let bq = dot(p, LIGHT);
                let cq = dot(p, p) - r * r;
                let shadowed = bq * bq - cq >= 0.0 && -bq > 0.0;
                let shade = if shadowed { 0.55 } else { 1.0 };
                self.plane_color(p[0], p[1]).map(|v| v * shade)
            }
            _ => BACKGROUND,
        }
    }

    pub fn render_view(&self, pose: &CameraPose) -> Result<Image> {
        let s = self.size;
        let o = pose.origin();
        let mut data = Vec::with_capacity(s * s * 3);
        for row in 0..s {
            for col in 0..s {
                data.extend(self.trace(o, pose.pixel_direction(s, s, row, col)));
            }
        }
        Image::new(s, s, data)
    }

    fn views(&self, n: usize, phase: f64, prefix: &str) -> Result<PosedDataset> {
        let records = (0..n)
            .map(|i| {
                let pose = self.pose(i, n, phase)?;
                Ok(PosedImage {
                    name: format!("{prefix}_{i}"),
                    image: self.render_view(&pose)?,
                    pose,
                    augmentation: Augmentation::IDENTITY,
                    source: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PosedDataset::new(records, self.bounds())
    }

    /// `(train, test)` views; test cameras sit between training cameras.
    pub fn generate(&self) -> Result<(PosedDataset, PosedDataset)> {
        Ok((self.views(self.train_views, 0.0, "r")?, self.views(self.test_views, 0.5, "t")?))
    }

    /// Writes `train/` and `test/` scene directories under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PosedDataset, PosedDataset)> {
        let (train, test) = self.generate()?;
        save_dataset(&train, &dir.join("train"))?;
        save_dataset(&test, &dir.join("test"))?;
        Ok((train, test))
    }
}
