//! Undecimated (à-trous) Haar wavelet frames.

use serde::{Deserialize, Serialize};

use super::filter::{filter_cols, filter_rows, Boundary};
use crate::error::{Error, Result};
use crate::imgio::{GrayImage, Plane};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct WaveletConfig {
    pub maxlevel: usize,
    pub boundary: Boundary,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        Self {
            maxlevel: 3,
            boundary: Boundary::Symmetric,
        }
    }
}

/// One decomposition level. The first letter is the x (column) filter, the
/// second the y (row) filter: `GH` is high-pass along x, low-pass along y.
#[derive(Debug, Clone)]
pub struct FrameLevel<T> {
    pub level: usize,
    pub hh: Plane<T>,
    pub hg: Plane<T>,
    pub gh: Plane<T>,
    pub gg: Plane<T>,
}

#[derive(Debug, Clone)]
pub struct WaveletFrames<T> {
    pub levels: Vec<FrameLevel<T>>,
}

impl<T: Real> WaveletFrames<T> {
    /// Low-pass residual after the deepest level.
    pub fn residual(&self) -> &Plane<T> {
        &self.levels.last().expect("at least one level").hh
    }
}

fn haar_taps<T: Real>(dilation: usize) -> ([(isize, T); 2], [(isize, T); 2]) {
    let half = T::lit(0.5);
    let d = -(dilation as isize);
    ([(0, half), (d, half)], [(0, half), (d, -half)])
}

/// Splits `p` into the four separable subbands at dilation `d`.
pub(crate) fn split<T: Real>(p: &Plane<T>, dilation: usize, boundary: Boundary) -> [Plane<T>; 4] {
    let (h, g) = haar_taps::<T>(dilation);
    let lx = filter_rows(p, &h, boundary);
    let hx = filter_rows(p, &g, boundary);
    [
        filter_cols(&lx, &h, boundary),
        filter_cols(&lx, &g, boundary),
        filter_cols(&hx, &h, boundary),
        filter_cols(&hx, &g, boundary),
    ]
}

pub fn wavelet_frames<T: Real>(img: &GrayImage<T>, cfg: &WaveletConfig) -> Result<WaveletFrames<T>> {
    if cfg.maxlevel == 0 {
        return Err(Error::invalid("wavelet maxlevel must be at least 1"));
    }
    let span = 1usize
        .checked_shl(cfg.maxlevel as u32)
        .filter(|&s| s < img.width() && s < img.height())
        .ok_or_else(|| {
            Error::invalid(format!(
                "wavelet maxlevel {} too deep for a {}x{} image",
                cfg.maxlevel,
                img.width(),
                img.height()
            ))
        })?;
    debug_assert!(span > 1);
    let mut approx = img.to_plane();
    let mut levels = Vec::with_capacity(cfg.maxlevel);
    for level in 1..=cfg.maxlevel {
        let [hh, hg, gh, gg] = split(&approx, 1 << (level - 1), cfg.boundary);
        approx = hh.clone();
        levels.push(FrameLevel { level, hh, hg, gh, gg });
    }
    Ok(WaveletFrames { levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant_kills_high_pass() {
        let img = GrayImage::constant(16, 12, 0.7f64).unwrap();
        let f = wavelet_frames(&img, &WaveletConfig::default()).unwrap();
        assert_eq!(f.levels.len(), 3);
        for l in &f.levels {
            for band in [&l.hg, &l.gh, &l.gg] {
                assert!(band.data.iter().all(|&v| v.abs() < 1e-15));
            }
            assert!(l.hh.data.iter().all(|&v| (v - 0.7).abs() < 1e-15));
        }
    }

    #[test]
    fn step_edge_along_x() {
        // intensity jumps between columns 7 and 8
        let img = GrayImage::from_fn(16, 16, |_, c| if c < 8 { 0.0f64 } else { 1.0 }).unwrap();
        let cfg = WaveletConfig {
            maxlevel: 1,
            ..Default::default()
        };
        let l = &wavelet_frames(&img, &cfg).unwrap().levels[0];
        // hand convolution: GH(r, c) = (x[c] - x[c-1]) / 2, nonzero only at c = 8
        for r in 0..16 {
            for c in 0..16 {
                let expect = if c == 8 { 0.5 } else { 0.0 };
                assert!((l.gh.get(r, c) - expect).abs() < 1e-15);
                assert!(l.hg.get(r, c).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn periodic_level_one_preserves_energy() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let img = GrayImage::from_fn(8, 8, |_, _| rng.random::<f64>()).unwrap();
        let p = img.to_plane();
        let bands = split(&p, 1, Boundary::Periodic);
        // direct summation of the four subbands
        let mut band_energy = 0.0;
        for b in &bands {
            for &v in &b.data {
                band_energy += v * v;
            }
        }
        let input_energy: f64 = img.pixels().iter().map(|v| v * v).sum();
        assert!((band_energy - input_energy).abs() < 1e-9);
    }

    #[test]
    fn dilation_shifts_taps() {
        let p = Plane {
            width: 8,
            height: 1,
            data: (0..8).map(|i| i as f64).collect(),
        };
        let (_, g) = haar_taps::<f64>(4);
        let out = filter_rows(&p, &g, Boundary::Periodic);
        // (x[c] - x[c-4]) / 2
        assert_eq!(out.data[5], 2.0);
        assert_eq!(out.data[1], -2.0);
    }

    #[test]
    fn too_deep() {
        let img = GrayImage::constant(8, 8, 0.1f64).unwrap();
        let cfg = WaveletConfig {
            maxlevel: 3,
            ..Default::default()
        };
        assert!(wavelet_frames(&img, &cfg).is_err());
        assert!(wavelet_frames(&img, &WaveletConfig { maxlevel: 2, ..cfg }).is_ok());
    }
}
