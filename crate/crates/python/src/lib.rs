//! Python bindings. Images cross the boundary as flat row-major RGB lists
//! of length `height * width * 3` with values in [0, 1].

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use nrm_aug::eval;
use nrm_aug::field::FieldParams;
use nrm_aug::image_ops::{self, DegradationKind, DegradationSpec, Image, ManipulationKind};
use nrm_aug::render::{render_image, CameraPose, QuadratureConfig};
use nrm_aug::Error;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::InvalidArgument(_) | Error::MalformedImage { .. } => PyValueError::new_err(err.to_string()),
        Error::Io { .. } | Error::Load { .. } | Error::Json { .. } | Error::Codec { .. } => {
            PyOSError::new_err(err.to_string())
        }
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn image(data: Vec<f64>, height: usize, width: usize) -> PyResult<Image> {
    Image::new(height, width, data).map_err(to_py)
}

fn manipulation(kind: &str) -> PyResult<ManipulationKind> {
    kind.parse().map_err(to_py)
}

#[pyfunction]
fn manipulation_kinds() -> Vec<&'static str> {
    ManipulationKind::ALL.iter().map(|k| k.name()).collect()
}

#[pyfunction]
fn degradation_kinds() -> Vec<&'static str> {
    DegradationKind::ALL.iter().map(|k| k.name()).collect()
}

/// Applies a color manipulation at intensity `p`.
#[pyfunction]
fn manipulate(data: Vec<f64>, height: usize, width: usize, kind: &str, p: f64) -> PyResult<Vec<f64>> {
    let img = image(data, height, width)?;
    let out = image_ops::apply_manipulation(&img, manipulation(kind)?, p).map_err(to_py)?;
    Ok(out.into_data())
}

#[pyfunction]
#[pyo3(signature = (data, height, width, kind, q, seed=0, image_index=0))]
fn degrade(
    data: Vec<f64>,
    height: usize,
    width: usize,
    kind: &str,
    q: f64,
    seed: u64,
    image_index: u64,
) -> PyResult<Vec<f64>> {
    let img = image(data, height, width)?;
    let kind: DegradationKind = kind.parse().map_err(to_py)?;
    let spec = DegradationSpec::new(kind, q, seed).map_err(to_py)?;
    Ok(image_ops::degrade_indexed(&img, &spec, image_index).map_err(to_py)?.into_data())
}

#[pyfunction]
fn psnr(a: Vec<f64>, b: Vec<f64>, height: usize, width: usize) -> PyResult<f64> {
    eval::psnr(&image(a, height, width)?, &image(b, height, width)?).map_err(to_py)
}

#[pyfunction]
fn ssim(a: Vec<f64>, b: Vec<f64>, height: usize, width: usize) -> PyResult<f64> {
    eval::ssim(&image(a, height, width)?, &image(b, height, width)?).map_err(to_py)
}

/// Sum of the two directed mean nearest-neighbor distances.
#[pyfunction]
fn chamfer(p: Vec<[f64; 3]>, q: Vec<[f64; 3]>) -> PyResult<f64> {
    eval::chamfer_sum(&eval::PointCloud::new(p), &eval::PointCloud::new(q)).map_err(to_py)
}

/// A trained field loaded from a checkpoint.
#[pyclass(frozen)]
struct Field {
    params: FieldParams,
}

#[pymethods]
impl Field {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            params: FieldParams::load(&path).map_err(to_py)?,
        })
    }

    #[getter]
    fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Renders a view; `transform` is the 4x4 camera-to-world matrix.
    #[pyo3(signature = (transform, fov_x, width, height, near, far, kind="identity", p=0.0, samples=64))]
    #[allow(clippy::too_many_arguments)]
    fn render(
        &self,
        py: Python<'_>,
        transform: [[f64; 4]; 4],
        fov_x: f64,
        width: usize,
        height: usize,
        near: f64,
        far: f64,
        kind: &str,
        p: f64,
        samples: usize,
    ) -> PyResult<Vec<f64>> {
        let kind = manipulation(kind)?;
        let pose = CameraPose::new(transform, fov_x).map_err(to_py)?;
        let quad = QuadratureConfig {
            samples_per_ray: samples,
            ..QuadratureConfig::default()
        };
        let img = py
            .detach(|| render_image(&self.params, &pose, kind, p, &quad, width, height, (near, far)))
            .map_err(to_py)?;
        Ok(img.into_data())
    }
}

#[pymodule]
fn nrm_aug_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(manipulation_kinds, m)?)?;
    m.add_function(wrap_pyfunction!(degradation_kinds, m)?)?;
    m.add_function(wrap_pyfunction!(manipulate, m)?)?;
    m.add_function(wrap_pyfunction!(degrade, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(ssim, m)?)?;
    m.add_function(wrap_pyfunction!(chamfer, m)?)?;
    m.add_class::<Field>()?;
    Ok(())
}
