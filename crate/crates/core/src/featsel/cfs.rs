use rayon::prelude::*;

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::scalar::{dot, l2_norm, Real};

/// Scores feature subsets; larger is better.
pub trait SubsetEvaluator<T: Real>: Sync {
    fn num_features(&self) -> usize;
    /// `subset` holds distinct indices in ascending order and may be empty.
    fn merit(&self, subset: &[usize]) -> T;
}

fn centered<T: Real>(v: &[T]) -> (Vec<T>, T) {
    let mean = v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len().max(1));
    let c: Vec<T> = v.iter().map(|&x| x - mean).collect();
    let norm = l2_norm(&c);
    (c, norm)
}

fn corr_centered<T: Real>(a: &(Vec<T>, T), b: &(Vec<T>, T)) -> T {
    if a.1 == T::zero() || b.1 == T::zero() {
        return T::zero();
    }
    (dot(&a.0, &b.0) / (a.1 * b.1)).max(-T::one()).min(T::one())
}

/// Pearson correlation; 0 when either input is constant.
pub fn pearson<T: Real>(a: &[T], b: &[T]) -> T {
    corr_centered(&centered(a), &centered(b))
}

/// `|r|` between a feature and the class. With more than two classes this is
/// the prior-weighted mean of the one-vs-rest point-biserial magnitudes; for
/// two classes both one-vs-rest terms coincide.
fn class_correlation<T: Real>(col: &(Vec<T>, T), indicators: &[((Vec<T>, T), T)]) -> T {
    indicators.iter().fold(T::zero(), |acc, (ind, prior)| {
        acc + *prior * corr_centered(col, ind).abs()
    })
}

fn indicators<T: Real>(data: &FeatureMatrix<T>) -> Vec<((Vec<T>, T), T)> {
    let n = T::from_usize_lossy(data.num_samples().max(1));
    (0..data.num_classes())
        .filter_map(|c| {
            let ind: Vec<T> = data
                .labels()
                .iter()
                .map(|&l| if l == c { T::one() } else { T::zero() })
                .collect();
            let count = ind.iter().copied().sum::<T>();
            (count > T::zero()).then(|| (centered(&ind), count / n))
        })
        .collect()
}

fn merit_from<T: Real>(subset: &[usize], rcf: impl Fn(usize) -> T, rff: impl Fn(usize, usize) -> T) -> T {
    if subset.is_empty() {
        return T::zero();
    }
    let num = subset.iter().map(|&i| rcf(i)).sum::<T>();
    let mut pairs = T::zero();
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            pairs += rff(i, j);
        }
    }
    let den = T::from_usize_lossy(subset.len()) + T::lit(2.0) * pairs;
    num / den.sqrt()
}

/// Correlation-based merit with all pairwise correlations precomputed:
/// `k·mean r_cf / sqrt(k + k(k−1)·mean r_ff)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CfsEvaluator<T> {
    class_corr: Vec<T>,
    /// `n × n`, row-major, `|r|` between features.
    feat_corr: Vec<T>,
}

impl<T: Real> CfsEvaluator<T> {
    pub fn new(data: &FeatureMatrix<T>) -> Self {
        let n = data.num_features();
        let cols: Vec<(Vec<T>, T)> = (0..n).into_par_iter().map(|j| centered(&data.column(j))).collect();
        let inds = indicators(data);
        let class_corr = cols.iter().map(|c| class_correlation(c, &inds)).collect();
        let feat_corr = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let cols = &cols;
                (0..n).map(move |j| {
                    if i == j {
                        T::one()
                    } else {
                        corr_centered(&cols[i], &cols[j]).abs()
                    }
                })
            })
            .collect();
        Self { class_corr, feat_corr }
    }

    /// From given correlation magnitudes; `feat_corr` is `n × n` row-major.
    pub fn from_correlations(class_corr: Vec<T>, feat_corr: Vec<T>) -> Result<Self> {
        let n = class_corr.len();
        if feat_corr.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: feat_corr.len(),
            });
        }
        Ok(Self { class_corr, feat_corr })
    }

    pub fn class_correlations(&self) -> &[T] {
        &self.class_corr
    }

    pub fn feature_correlation(&self, i: usize, j: usize) -> T {
        self.feat_corr[i * self.class_corr.len() + j]
    }
}

impl<T: Real> SubsetEvaluator<T> for CfsEvaluator<T> {
    fn num_features(&self) -> usize {
        self.class_corr.len()
    }

    fn merit(&self, subset: &[usize]) -> T {
        merit_from(subset, |i| self.class_corr[i], |i, j| self.feature_correlation(i, j))
    }
}

/// CFS merit of one subset, computing only the correlations it needs.
pub fn cfs_merit<T: Real>(subset: &[usize], data: &FeatureMatrix<T>) -> Result<T> {
    if subset.is_empty() {
        return Err(Error::invalid("CFS merit needs a non-empty subset"));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() {
        return Err(Error::invalid("CFS subset has repeated features"));
    }
    if let Some(&j) = sorted.last().filter(|&&j| j >= data.num_features()) {
        return Err(Error::invalid(format!(
            "feature index {j} out of range for {} features",
            data.num_features()
        )));
    }
    let cols: Vec<(Vec<T>, T)> = subset.iter().map(|&j| centered(&data.column(j))).collect();
    let inds = indicators(data);
    let local: Vec<usize> = (0..subset.len()).collect();
    Ok(merit_from(
        &local,
        |i| class_correlation(&cols[i], &inds),
        |i, j| corr_centered(&cols[i], &cols[j]).abs(),
    ))
}
