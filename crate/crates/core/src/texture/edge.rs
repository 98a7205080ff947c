use crate::error::{Error, Result};
use crate::imgio::GrayImage;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeHistogram<T> {
    /// `p(r_k) = n_k / N` over equal-width bins on `[0, max |∇f|]`.
    pub bins: Vec<T>,
    pub max_magnitude: T,
    /// Zero gradient everywhere; all mass placed in bin 0.
    pub flat: bool,
}

/// Histogram of central-difference gradient magnitudes over interior pixels.
pub fn edge_histogram<T: Real>(img: &GrayImage<T>, bins: usize) -> Result<EdgeHistogram<T>> {
    if bins < 2 {
        return Err(Error::invalid("edge histogram needs at least 2 bins"));
    }
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::invalid("edge histogram needs at least 3x3 pixels"));
    }
    let half = T::lit(0.5);
    let mut mags = Vec::with_capacity((w - 2) * (h - 2));
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            let gx = (img.get(r, c + 1) - img.get(r, c - 1)) * half;
            let gy = (img.get(r + 1, c) - img.get(r - 1, c)) * half;
            mags.push((gx * gx + gy * gy).sqrt());
        }
    }
    let max = mags.iter().copied().fold(T::zero(), T::max);
    let mut counts = vec![0usize; bins];
    let flat = max <= T::zero();
    if flat {
        counts[0] = mags.len();
    } else {
        let scale = T::from_usize_lossy(bins) / max;
        for &m in &mags {
            counts[(m * scale).to_usize().unwrap_or(0).min(bins - 1)] += 1;
        }
    }
    let n = T::from_usize_lossy(mags.len());
    Ok(EdgeHistogram {
        bins: counts.iter().map(|&k| T::from_usize_lossy(k) / n).collect(),
        max_magnitude: max,
        flat,
    })
}
