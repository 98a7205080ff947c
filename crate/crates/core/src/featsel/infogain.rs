use std::cmp::Ordering;

use rayon::prelude::*;

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const IG_BINS: usize = 10;

/// Equal-frequency bin index per value.
///
/// Cut points sit at the sorted values of rank `⌈j·n/bins⌉`, `j = 1..bins`;
/// a value's bin is the number of cut points at or below it, so equal values
/// always share a bin.
pub fn equal_frequency_bins<T: Real>(values: &[T], bins: usize) -> Vec<usize> {
    let n = values.len();
    if n == 0 || bins < 2 {
        return vec![0; n];
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let cuts: Vec<T> = (1..bins).map(|j| sorted[((j * n).div_ceil(bins)).min(n - 1)]).collect();
    values.iter().map(|&v| cuts.partition_point(|&c| c <= v)).collect()
}

fn entropy_bits<T: Real>(counts: &[usize]) -> T {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return T::zero();
    }
    let total = T::from_usize_lossy(total);
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = T::from_usize_lossy(c) / total;
            -p * p.log2()
        })
        .sum()
}

/// `H(Class) − H(Class | binned feature)` in bits, with the feature cut into
/// [`IG_BINS`] equal-frequency bins.
pub fn info_gain<T: Real>(feature: &[T], labels: &[usize], num_classes: usize) -> Result<T> {
    if feature.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: feature.len(),
            found: labels.len(),
        });
    }
    if let Some(&c) = labels.iter().find(|&&c| c >= num_classes) {
        return Err(Error::UnknownClass(c));
    }
    let bins = equal_frequency_bins(feature, IG_BINS);
    let mut class_counts = vec![0usize; num_classes];
    let mut table = vec![vec![0usize; num_classes]; IG_BINS];
    for (&b, &c) in bins.iter().zip(labels) {
        class_counts[c] += 1;
        table[b][c] += 1;
    }
    let h_class: T = entropy_bits(&class_counts);
    let n = T::from_usize_lossy(labels.len().max(1));
    let h_cond = table.iter().fold(T::zero(), |acc, row| {
        let w = T::from_usize_lossy(row.iter().sum()) / n;
        acc + w * entropy_bits::<T>(row)
    });
    Ok((h_class - h_cond).max(T::zero()))
}

pub fn info_gain_scores<T: Real>(data: &FeatureMatrix<T>) -> Vec<T> {
    (0..data.num_features())
        .into_par_iter()
        .map(|j| info_gain(&data.column(j), data.labels(), data.num_classes()).expect("validated matrix"))
        .collect()
}

/// Indices by descending score, ties by ascending index, keeping only
/// scores above `threshold`.
pub fn ranker<T: Real>(scores: &[T], threshold: T) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] > threshold).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    if order.is_empty() {
        log::warn!("ranker: no feature scores above threshold {threshold}");
    }
    order
}
