//! Gray-level co-occurrence matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Pixel adjacency at distance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GlcmOffset {
    #[serde(rename = "0")]
    Deg0,
    #[serde(rename = "45")]
    Deg45,
    #[serde(rename = "90")]
    Deg90,
    #[serde(rename = "135")]
    Deg135,
}

impl GlcmOffset {
    pub const ALL: [GlcmOffset; 4] = [Self::Deg0, Self::Deg45, Self::Deg90, Self::Deg135];

    /// `(row, col)` displacement to the neighbor.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Self::Deg0 => (0, 1),
            Self::Deg45 => (-1, 1),
            Self::Deg90 => (-1, 0),
            Self::Deg135 => (-1, -1),
        }
    }

    pub fn degrees(self) -> u32 {
        match self {
            Self::Deg0 => 0,
            Self::Deg45 => 45,
            Self::Deg90 => 90,
            Self::Deg135 => 135,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct GlcmConfig {
    pub levels: usize,
    pub offsets: Vec<GlcmOffset>,
}

impl Default for GlcmConfig {
    fn default() -> Self {
        Self {
            levels: 8,
            offsets: GlcmOffset::ALL.to_vec(),
        }
    }
}

/// Normalized symmetric co-occurrence matrix, `levels × levels` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm<T> {
    pub levels: usize,
    pub offset: GlcmOffset,
    pub p: Vec<T>,
}

impl<T: Real> Glcm<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.p[i * self.levels + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlcmStats<T> {
    pub contrast: T,
    pub correlation: T,
    pub energy: T,
    pub homogeneity: T,
    /// Zero marginal variance: correlation is undefined and reported as 0.
    pub correlation_undefined: bool,
}

/// Equal-width quantization of `values` (over their own range) into `levels` bins.
pub(crate) fn quantize<T: Real>(values: &[T], levels: usize) -> Vec<usize> {
    let lo = values.iter().copied().fold(T::infinity(), T::min);
    let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
    if !(hi > lo) {
        return vec![0; values.len()];
    }
    let scale = T::from_usize_lossy(levels) / (hi - lo);
    values
        .iter()
        .map(|&v| ((v - lo) * scale).to_usize().unwrap_or(0).min(levels - 1))
        .collect()
}

fn accumulate<T: Real>(q: &[usize], width: usize, height: usize, levels: usize, offset: GlcmOffset) -> Glcm<T> {
    let (dr, dc) = offset.delta();
    let mut counts = vec![0u64; levels * levels];
    for r in 0..height {
        let nr = r as isize + dr;
        if nr < 0 || nr >= height as isize {
            continue;
        }
        for c in 0..width {
            let nc = c as isize + dc;
            if nc < 0 || nc >= width as isize {
                continue;
            }
            let a = q[r * width + c];
            let b = q[nr as usize * width + nc as usize];
            counts[a * levels + b] += 1;
            counts[b * levels + a] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    let p = if total == 0 {
        vec![T::zero(); levels * levels]
    } else {
        let t = T::lit(total as f64);
        counts.iter().map(|&n| T::lit(n as f64) / t).collect()
    };
    Glcm { levels, offset, p }
}

/// One matrix per configured offset, on a row-major raster.
pub fn glcm<T: Real>(values: &[T], width: usize, height: usize, cfg: &GlcmConfig) -> Result<Vec<Glcm<T>>> {
    if cfg.levels < 2 {
        return Err(Error::invalid("GLCM needs at least 2 gray levels"));
    }
    if values.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            found: values.len(),
        });
    }
    let q = quantize(values, cfg.levels);
    Ok(cfg
        .offsets
        .iter()
        .map(|&o| accumulate(&q, width, height, cfg.levels, o))
        .collect())
}

pub fn glcm_stats<T: Real>(m: &Glcm<T>) -> GlcmStats<T> {
    let n = m.levels;
    let (mut contrast, mut energy, mut homogeneity, mut mu) = (T::zero(), T::zero(), T::zero(), T::zero());
    for i in 0..n {
        for j in 0..n {
            let p = m.get(i, j);
            let d = T::from_usize_lossy(i.abs_diff(j));
            contrast += d * d * p;
            energy += p * p;
            homogeneity += p / (T::one() + d);
            mu += T::from_usize_lossy(i) * p;
        }
    }
    // symmetric matrix: row and column marginals coincide
    let mut var = T::zero();
    let mut cov = T::zero();
    for i in 0..n {
        for j in 0..n {
            let p = m.get(i, j);
            let di = T::from_usize_lossy(i) - mu;
            let dj = T::from_usize_lossy(j) - mu;
            var += di * di * p;
            cov += di * dj * p;
        }
    }
    let undefined = var <= T::lit(1e-12);
    GlcmStats {
        contrast,
        correlation: if undefined { T::zero() } else { cov / var },
        energy,
        homogeneity,
        correlation_undefined: undefined,
    }
}

/// GLCM contrast at 0° after quantizing `values` to `levels` bins.
pub(crate) fn horizontal_contrast<T: Real>(values: &[T], width: usize, height: usize, levels: usize) -> T {
    let q = quantize(values, levels);
    let m: Glcm<T> = accumulate(&q, width, height, levels, GlcmOffset::Deg0);
    glcm_stats(&m).contrast
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn two_by_two_hand_count() {
        let cfg = GlcmConfig {
            levels: 2,
            offsets: vec![GlcmOffset::Deg0],
        };
        let m = &glcm(&[0.0f64, 0.0, 1.0, 1.0], 2, 2, &cfg).unwrap()[0];
        assert_eq!(m.p, vec![0.5, 0.0, 0.0, 0.5]);
        let s = glcm_stats(m);
        assert_eq!(s.contrast, 0.0);
        assert!((s.correlation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vertical_offset_hand_count() {
        // rows differ: every vertical pair is (0,1)
        let cfg = GlcmConfig {
            levels: 2,
            offsets: vec![GlcmOffset::Deg90],
        };
        let m = &glcm(&[0.0f64, 0.0, 1.0, 1.0], 2, 2, &cfg).unwrap()[0];
        assert_eq!(m.p, vec![0.0, 0.5, 0.5, 0.0]);
        let s = glcm_stats(m);
        assert_eq!(s.contrast, 1.0);
        assert_eq!(s.homogeneity, 0.5);
        assert!((s.correlation + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_image() {
        let ms = glcm(&[0.3f64; 25], 5, 5, &GlcmConfig::default()).unwrap();
        assert_eq!(ms.len(), 4);
        for m in &ms {
            let s = glcm_stats(m);
            assert_eq!(s.energy, 1.0);
            assert_eq!(s.contrast, 0.0);
            assert_eq!(s.homogeneity, 1.0);
            assert!(s.correlation_undefined);
            assert_eq!(s.correlation, 0.0);
        }
    }

    #[test]
    fn matrices_are_normalized_and_symmetric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let v: Vec<f64> = (0..17 * 13).map(|_| rng.random()).collect();
        for m in glcm(&v, 17, 13, &GlcmConfig::default()).unwrap() {
            assert!((m.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for i in 0..8 {
                for j in 0..8 {
                    assert_eq!(m.get(i, j), m.get(j, i));
                }
            }
        }
    }

    #[test]
    fn too_few_levels() {
        let cfg = GlcmConfig {
            levels: 1,
            ..Default::default()
        };
        assert!(glcm(&[0.0f64; 4], 2, 2, &cfg).is_err());
    }
}
