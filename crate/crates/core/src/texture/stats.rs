use crate::scalar::Real;

/// Bins of the histogram behind [`SubbandStats::entropy`].
pub const ENTROPY_BINS: usize = 64;

/// Distribution signatures of a filtered map or coefficient set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubbandStats<T> {
    pub mean: T,
    /// Σ v²
    pub energy: T,
    /// Population variance.
    pub variance: T,
    /// Natural-log entropy of a 64-bin equal-width histogram over the value range.
    pub entropy: T,
    /// Third standardized moment; 0 when `degenerate`.
    pub skewness: T,
    /// Fourth standardized moment (normal = 3); 0 when `degenerate`.
    pub kurtosis: T,
    /// The input has (numerically) zero spread.
    pub degenerate: bool,
}

impl<T: Real> SubbandStats<T> {
    /// Values in the order used for feature names.
    pub fn named(&self) -> [(&'static str, T); 6] {
        [
            ("mean", self.mean),
            ("energy", self.energy),
            ("variance", self.variance),
            ("entropy", self.entropy),
            ("skewness", self.skewness),
            ("kurtosis", self.kurtosis),
        ]
    }
}

/// Computes energy, variance, entropy, skewness and kurtosis of `values`.
///
/// # Panics
/// Panics on an empty slice.
pub fn subband_stats<T: Real>(values: &[T]) -> SubbandStats<T> {
    assert!(!values.is_empty(), "subband_stats of empty collection");
    let n = T::from_usize_lossy(values.len());
    let mut energy = T::zero();
    let mut sum = T::zero();
    let mut lo = values[0];
    let mut hi = values[0];
    for &v in values {
        energy += v * v;
        sum += v;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let mean = sum / n;
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let scale = T::one().max(lo.abs()).max(hi.abs());
    let degenerate = m2.sqrt() <= T::lit(1e-9) * scale;
    let (skewness, kurtosis, entropy) = if degenerate {
        (T::zero(), T::zero(), T::zero())
    } else {
        (
            m3 / m2.powf(T::lit(1.5)),
            m4 / (m2 * m2),
            histogram_entropy(values, lo, hi, ENTROPY_BINS),
        )
    };
    SubbandStats {
        mean,
        energy,
        variance: if degenerate { T::zero() } else { m2 },
        entropy,
        skewness,
        kurtosis,
        degenerate,
    }
}

/// −Σ p ln p over an equal-width histogram of `values` on `[lo, hi]`.
pub(crate) fn histogram_entropy<T: Real>(values: &[T], lo: T, hi: T, bins: usize) -> T {
    if hi <= lo {
        return T::zero();
    }
    let mut counts = vec![0usize; bins];
    let width = (hi - lo) / T::from_usize_lossy(bins);
    for &v in values {
        let b = ((v - lo) / width).to_usize().unwrap_or(0).min(bins - 1);
        counts[b] += 1;
    }
    let n = T::from_usize_lossy(values.len());
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = T::from_usize_lossy(c) / n;
            -p * p.ln()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn constant_input() {
        let s = subband_stats(&[5.0f64, 5.0, 5.0, 5.0]);
        assert!(s.degenerate);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.entropy, 0.0);
        assert_eq!(s.skewness, 0.0);
        assert_eq!(s.energy, 100.0);
        assert_eq!(s.mean, 5.0);
    }

    #[test]
    fn symmetric_input_has_zero_skew() {
        let v: Vec<f64> = (0..50).flat_map(|_| [-1.0, 1.0]).collect();
        let s = subband_stats(&v);
        assert!(!s.degenerate);
        assert_eq!(s.skewness, 0.0);
        assert!((s.variance - 1.0).abs() < 1e-15);
        assert!((s.kurtosis - 1.0).abs() < 1e-15);
        // two equally filled bins
        assert!((s.entropy - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn gaussian_kurtosis_near_three() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let v: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = subband_stats(&v);
        assert!((s.kurtosis - 3.0).abs() < 0.1, "kurtosis {}", s.kurtosis);
        assert!(s.skewness.abs() < 0.05);
        assert!((s.variance - 1.0).abs() < 0.02);
    }

    #[test]
    fn hand_skewness() {
        // values 0,0,3: mean 1, m2 = (1+1+4)/3 = 2, m3 = (-1-1+8)/3 = 2
        let s = subband_stats(&[0.0f64, 0.0, 3.0]);
        assert!((s.skewness - 2.0 / 2f64.powf(1.5)).abs() < 1e-14);
    }

    #[test]
    fn single_precision() {
        let s = subband_stats(&[1.0f32, 2.0, 3.0, 4.0]);
        assert!((s.mean - 2.5).abs() < 1e-6);
        assert!((s.variance - 1.25).abs() < 1e-6);
    }
}
