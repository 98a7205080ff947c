//! Image ingestion, vectorization, block decomposition and dataset manifests.

mod blocks;
mod load;
mod manifest;
mod sampling;

pub(crate) use blocks::block_vectors;
pub use blocks::{block_decompose, BlockGrid};
pub use load::{load_image, save_png16};
pub use manifest::{load_manifest, parse_manifest, DatasetManifest, ManifestEntry};
pub use sampling::{downsample, parse_fraction, KeepFraction, Undersampling};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Grayscale raster with intensities in `[0, 1]`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T> {
    width: usize,
    height: usize,
    pixels: Vec<T>,
}

impl<T: Real> GrayImage<T> {
    pub fn new(width: usize, height: usize, pixels: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                found: pixels.len(),
            });
        }
        if let Some(bad) = pixels.iter().find(|&&p| !(p >= T::zero() && p <= T::one())) {
            return Err(Error::invalid(format!("intensity {bad} outside [0, 1]")));
        }
        Ok(Self { width, height, pixels })
    }

    /// Builds an image from `f(row, col)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn constant(width: usize, height: usize, value: T) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Inverse of [`GrayImage::to_vector`].
    pub fn reshape(width: usize, height: usize, v: Vec<T>) -> Result<Self> {
        Self::new(width, height, v)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.pixels[row * self.width + col]
    }

    /// Lexicographic (row-major) vectorization: element `i * width + j` is pixel `(i, j)`.
    pub fn to_vector(&self) -> Vec<T> {
        self.pixels.clone()
    }

    pub fn into_vector(self) -> Vec<T> {
        self.pixels
    }

    pub fn is_constant(&self) -> bool {
        let first = self.pixels[0];
        self.pixels.iter().all(|&p| p == first)
    }

    pub fn to_plane(&self) -> Plane<T> {
        Plane {
            width: self.width,
            height: self.height,
            data: self.pixels.clone(),
        }
    }

    pub fn cast<U: Real>(&self) -> GrayImage<U> {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self
                .pixels
                .iter()
                .map(|&p| U::lit(p.as_f64()).max(U::zero()).min(U::one()))
                .collect(),
        }
    }
}

/// Unconstrained real-valued raster (filter responses, subbands).
#[derive(Debug, Clone, PartialEq)]
pub struct Plane<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Real> Plane<T> {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![T::zero(); width * height],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: T) {
        self.data[row * self.width + col] = v;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectorization_is_row_major() {
        let img = GrayImage::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(img.to_vector(), vec![0.1, 0.2, 0.3, 0.4]);
        let one = GrayImage::new(1, 1, vec![0.7]).unwrap();
        assert_eq!(one.to_vector(), vec![0.7]);
    }

    #[test]
    fn three_by_two_layout() {
        // 3 rows, 2 columns: element 3 = row 1, col 1; element 2 = row 1, col 0
        let img = GrayImage::from_fn(2, 3, |r, c| (r * 2 + c) as f64 / 10.0).unwrap();
        let v = img.to_vector();
        assert_eq!(v.len(), 6);
        assert_eq!(v[2], img.get(1, 0));
        assert_eq!(v[3], img.get(1, 1));
    }

    #[test]
    fn rejects_out_of_range_and_bad_length() {
        assert!(GrayImage::new(2, 1, vec![0.0, 1.5]).is_err());
        assert!(GrayImage::new(2, 1, vec![0.0, f64::NAN]).is_err());
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn reshape_roundtrip() {
        let img = GrayImage::from_fn(5, 3, |r, c| ((r * 7 + c * 3) % 11) as f64 / 10.0).unwrap();
        let back = GrayImage::reshape(5, 3, img.to_vector()).unwrap();
        assert_eq!(back, img);
    }
}
