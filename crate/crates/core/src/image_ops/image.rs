use crate::error::{Error, Result};

/// An RGB image with channel values in `[0, 1]`, stored row-major as
/// `height * width * 3` interleaved values.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Image {
    /// Builds an image from interleaved RGB data, rejecting wrong lengths and
    /// values outside `[0, 1]`.
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        let expected = height * width * 3;
        if data.len() != expected {
            return Err(Error::MalformedImage {
                height,
                width,
                expected,
                actual: data.len(),
            });
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!(
                "channel value {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Builds an image from arbitrary finite values, clamping into `[0, 1]`.
    pub fn from_unclipped(height: usize, width: usize, mut data: Vec<f64>) -> Result<Self> {
        let expected = height * width * 3;
        if data.len() != expected {
            return Err(Error::MalformedImage {
                height,
                width,
                expected,
                actual: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite channel value"));
        }
        clip_in_place(&mut data);
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, rgb: [f64; 3]) -> Self {
        let rgb = rgb.map(|v| v.clamp(0.0, 1.0));
        let data = (0..height * width).flat_map(|_| rgb).collect();
        Self {
            height,
            width,
            data,
        }
    }

    /// Builds an image by evaluating `f(row, col)` for every pixel. Values are clamped.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        let mut data = Vec::with_capacity(height * width * 3);
        for row in 0..height {
            for col in 0..width {
                data.extend(f(row, col).map(|v| v.clamp(0.0, 1.0)));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        let i = (row * self.width + col) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Pixel by flat row-major index.
    pub fn pixel_at(&self, index: usize) -> [f64; 3] {
        let i = index * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn same_dims(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width
    }

    /// Checks the structural invariant; used on images that arrive from
    /// outside the constructors (deserialization, foreign buffers).
    pub fn validate(&self) -> Result<()> {
        let expected = self.height * self.width * 3;
        if self.data.len() != expected {
            return Err(Error::MalformedImage {
                height: self.height,
                width: self.width,
                expected,
                actual: self.data.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn with_data(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            height: self.height,
            width: self.width,
            data,
        }
    }

    /// Wraps data that already satisfies the invariants.
    pub(crate) fn from_raw(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width * 3);
        Self {
            height,
            width,
            data,
        }
    }
}

pub(crate) fn clip_in_place(data: &mut [f64]) {
    for v in data {
        *v = v.clamp(0.0, 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length() {
        let err = Image::new(2, 2, vec![0.0; 11]).unwrap_err();
        assert!(matches!(err, Error::MalformedImage { expected: 12, actual: 11, .. }));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Image::new(1, 1, vec![0.0, 1.5, 0.0]).is_err());
        assert!(Image::new(1, 1, vec![0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn unclipped_constructor_clamps() {
        let img = Image::from_unclipped(1, 1, vec![-0.5, 0.5, 2.0]).unwrap();
        assert_eq!(img.data(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn pixel_accessor_is_row_major() {
        let img = Image::from_fn(2, 3, |r, c| [r as f64 / 2.0, c as f64 / 3.0, 0.0]);
        assert_eq!(img.pixel(1, 2), [0.5, 2.0 / 3.0, 0.0]);
        assert_eq!(img.pixel_at(5), img.pixel(1, 2));
    }
}
