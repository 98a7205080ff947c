//! Box-counting dimension and multi-level Otsu banding.

use crate::error::{Error, Result};
use crate::imgio::GrayImage;
use crate::scalar::Real;

/// Binary point set on a raster grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BinaryMask {
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                bits.push(f(r, c));
            }
        }
        Self { width, height, bits }
    }

    pub fn occupied(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone)]
pub struct BoxCountFit<T> {
    pub dimension: T,
    /// RMS deviation of `log N(ε)` from the fitted line.
    pub residual: T,
    /// `(ε, N(ε))` ladder; boxes cut by the far image edges count by the
    /// fraction of their area inside the image.
    pub counts: Vec<(usize, T)>,
}

/// Box-counting dimension: least-squares slope of `log N(ε)` against `−log ε`
/// over ε = 1, 2, 4, … ≤ min(W, H)/2. Boxes are aligned at the origin; a partial
/// box at the far edges contributes its covered area over ε².
pub fn box_count_dimension<T: Real>(mask: &BinaryMask) -> Result<BoxCountFit<T>> {
    if mask.occupied() < 2 {
        return Err(Error::Degenerate("box counting needs at least 2 occupied cells".into()));
    }
    let limit = mask.width.min(mask.height) / 2;
    let mut counts = Vec::new();
    let mut eps = 1usize;
    while eps <= limit {
        let bw = mask.width.div_ceil(eps);
        let bh = mask.height.div_ceil(eps);
        let mut hit = vec![false; bw * bh];
        for r in 0..mask.height {
            let row = &mask.bits[r * mask.width..(r + 1) * mask.width];
            let base = (r / eps) * bw;
            for (c, &b) in row.iter().enumerate() {
                if b {
                    hit[base + c / eps] = true;
                }
            }
        }
        let mut n = T::zero();
        for (i, _) in hit.iter().enumerate().filter(|(_, &h)| h) {
            let (br, bc) = (i / bw, i % bw);
            let rows = eps.min(mask.height - br * eps);
            let cols = eps.min(mask.width - bc * eps);
            n += T::from_usize_lossy(rows * cols) / T::from_usize_lossy(eps * eps);
        }
        counts.push((eps, n));
        eps *= 2;
    }
    if counts.len() < 3 {
        return Err(Error::Degenerate(format!(
            "only {} box sizes fit a {}x{} set",
            counts.len(),
            mask.width,
            mask.height
        )));
    }
    let xs: Vec<T> = counts.iter().map(|&(e, _)| -T::from_usize_lossy(e).ln()).collect();
    let ys: Vec<T> = counts.iter().map(|&(_, n)| n.ln()).collect();
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let ss: T = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let e = y - (icept + slope * x);
            e * e
        })
        .sum();
    Ok(BoxCountFit {
        dimension: slope,
        residual: (ss / n).sqrt(),
        counts,
    })
}

pub const OTSU_BINS: usize = 256;

#[derive(Debug, Clone)]
pub struct MultiOtsu<T> {
    /// Intensity thresholds; band `j` holds values in `(t[j-1], t[j]]`.
    pub thresholds: Vec<T>,
    pub sets: Vec<BinaryMask>,
    /// Image is constant; a single trivial set is returned.
    pub degenerate: bool,
    /// Fewer distinct gray values than requested sets.
    pub reduced: bool,
}

fn intensity_bin<T: Real>(v: T) -> usize {
    (v * T::lit((OTSU_BINS - 1) as f64))
        .round()
        .to_usize()
        .unwrap_or(0)
        .min(OTSU_BINS - 1)
}

/// Between-class variance (up to a constant) for thresholds over a histogram.
/// Class `j` covers bins `(t[j-1], t[j]]`.
pub(crate) fn between_class_variance(cum_p: &[f64], cum_s: &[f64], thresholds: &[usize]) -> f64 {
    let last = cum_p.len() - 1;
    let mut prev: Option<usize> = None;
    let mut total = 0.0;
    for &t in thresholds.iter().chain(std::iter::once(&last)) {
        let (p0, s0) = prev.map_or((0.0, 0.0), |q| (cum_p[q], cum_s[q]));
        let w = cum_p[t] - p0;
        if w > 0.0 {
            let s = cum_s[t] - s0;
            total += s * s / w;
        }
        prev = Some(t);
    }
    total
}

fn cumulative(hist: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut cp = Vec::with_capacity(hist.len());
    let mut cs = Vec::with_capacity(hist.len());
    let (mut p, mut s) = (0.0, 0.0);
    for (i, &h) in hist.iter().enumerate() {
        p += h;
        s += h * i as f64;
        cp.push(p);
        cs.push(s);
    }
    (cp, cs)
}

fn exhaustive(cp: &[f64], cs: &[f64], k: usize) -> Vec<usize> {
    fn rec(cp: &[f64], cs: &[f64], start: usize, left: usize, cur: &mut Vec<usize>, best: &mut (f64, Vec<usize>)) {
        if left == 0 {
            let v = between_class_variance(cp, cs, cur);
            if v > best.0 {
                *best = (v, cur.clone());
            }
            return;
        }
        let last = cp.len() - 1;
        for t in start..last + 1 - left {
            cur.push(t);
            rec(cp, cs, t + 1, left - 1, cur, best);
            cur.pop();
        }
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    rec(cp, cs, 0, k, &mut Vec::new(), &mut best);
    best.1
}

fn dynamic_program(cp: &[f64], cs: &[f64], k: usize) -> Vec<usize> {
    // best[j][t]: optimum over bins 0..=t split into j + 1 classes
    let nb = cp.len();
    let class = |lo: usize, hi: usize| {
        let (p0, s0) = if lo == 0 { (0.0, 0.0) } else { (cp[lo - 1], cs[lo - 1]) };
        let w = cp[hi] - p0;
        if w > 0.0 {
            let s = cs[hi] - s0;
            s * s / w
        } else {
            0.0
        }
    };
    let mut best = vec![vec![f64::NEG_INFINITY; nb]; k + 1];
    let mut arg = vec![vec![0usize; nb]; k + 1];
    for t in 0..nb {
        best[0][t] = class(0, t);
    }
    for j in 1..=k {
        for t in j..nb {
            for u in (j - 1)..t {
                let v = best[j - 1][u] + class(u + 1, t);
                if v > best[j][t] {
                    best[j][t] = v;
                    arg[j][t] = u;
                }
            }
        }
    }
    let mut cuts = vec![0; k];
    let mut t = nb - 1;
    for j in (1..=k).rev() {
        t = arg[j][t];
        cuts[j - 1] = t;
    }
    cuts
}

/// Thresholds (bin indices) maximizing between-class variance of `hist` into
/// `classes` classes. Exhaustive enumeration for up to 3 thresholds, an exact
/// dynamic program above.
pub(crate) fn otsu_thresholds(hist: &[f64], classes: usize) -> Vec<usize> {
    let (cp, cs) = cumulative(hist);
    let k = classes - 1;
    if k == 0 {
        Vec::new()
    } else if k <= 3 {
        exhaustive(&cp, &cs, k)
    } else {
        dynamic_program(&cp, &cs, k)
    }
}

/// Splits the image into `sets` intensity bands by multi-level Otsu thresholding.
pub fn multi_otsu<T: Real>(img: &GrayImage<T>, sets: usize) -> Result<MultiOtsu<T>> {
    if sets == 0 {
        return Err(Error::invalid("multi_otsu needs at least one set"));
    }
    let bins: Vec<usize> = img.pixels().iter().map(|&v| intensity_bin(v)).collect();
    let mut hist = vec![0.0f64; OTSU_BINS];
    for &b in &bins {
        hist[b] += 1.0;
    }
    let distinct: Vec<usize> = (0..OTSU_BINS).filter(|&b| hist[b] > 0.0).collect();
    let (w, h) = (img.width(), img.height());
    if distinct.len() <= 1 {
        return Ok(MultiOtsu {
            thresholds: Vec::new(),
            sets: vec![BinaryMask {
                width: w,
                height: h,
                bits: vec![true; w * h],
            }],
            degenerate: true,
            reduced: sets > 1,
        });
    }
    let reduced = distinct.len() < sets;
    let cuts: Vec<usize> = if reduced {
        distinct[..distinct.len() - 1].to_vec()
    } else {
        otsu_thresholds(&hist, sets)
    };
    let scale = T::lit((OTSU_BINS - 1) as f64);
    let thresholds = cuts
        .iter()
        .map(|&t| (T::from_usize_lossy(t) + T::lit(0.5)) / scale)
        .collect();
    let band_of = |b: usize| cuts.iter().take_while(|&&t| b > t).count();
    let mut masks: Vec<BinaryMask> = (0..=cuts.len())
        .map(|_| BinaryMask {
            width: w,
            height: h,
            bits: vec![false; w * h],
        })
        .collect();
    for (i, &b) in bins.iter().enumerate() {
        masks[band_of(b)].bits[i] = true;
    }
    Ok(MultiOtsu {
        thresholds,
        sets: masks,
        degenerate: false,
        reduced,
    })
}

/// Per-band (box-count dimension, area fraction, mean intensity), 8 bands by default.
#[derive(Debug, Clone)]
pub struct FractalFeatures<T> {
    pub dimension: Vec<T>,
    pub area: Vec<T>,
    pub mean_intensity: Vec<T>,
    /// Band indices whose values were set to zero.
    pub degenerate_sets: Vec<usize>,
    pub degenerate_image: bool,
}

pub fn fractal_features<T: Real>(img: &GrayImage<T>, sets: usize) -> Result<FractalFeatures<T>> {
    let bands = multi_otsu(img, sets)?;
    let total = T::from_usize_lossy(img.pixels().len());
    let mut out = FractalFeatures {
        dimension: vec![T::zero(); sets],
        area: vec![T::zero(); sets],
        mean_intensity: vec![T::zero(); sets],
        degenerate_sets: Vec::new(),
        degenerate_image: bands.degenerate,
    };
    if bands.degenerate {
        out.degenerate_sets = (0..sets).collect();
        return Ok(out);
    }
    for j in 0..sets {
        let Some(mask) = bands.sets.get(j) else {
            out.degenerate_sets.push(j);
            continue;
        };
        let occ = mask.occupied();
        if occ == 0 {
            out.degenerate_sets.push(j);
            continue;
        }
        out.area[j] = T::from_usize_lossy(occ) / total;
        out.mean_intensity[j] = img
            .pixels()
            .iter()
            .zip(&mask.bits)
            .filter(|(_, &b)| b)
            .map(|(&v, _)| v)
            .sum::<T>()
            / T::from_usize_lossy(occ);
        match box_count_dimension::<T>(mask) {
            Ok(fit) => out.dimension[j] = fit.dimension,
            Err(_) => out.degenerate_sets.push(j),
        }
    }
    Ok(out)
}
