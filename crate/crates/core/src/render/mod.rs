//! Camera rays and volume rendering.

mod camera;
mod quadrature;

pub use camera::{generate_rays, CameraPose, Ray};
pub use quadrature::{
    render_image, render_image_with, render_ray, render_ray_with, QuadratureConfig, RadianceField, RayRender,
    SampleRecord,
};
pub(crate) use quadrature::{composite, composite_backward};
