use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve<T> {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, one point per distinct score.
    pub points: Vec<(T, T)>,
    /// Area under the curve as a fraction.
    pub auc: T,
}

pub(crate) fn class_sizes(positives: &[bool]) -> Result<(usize, usize)> {
    let p = positives.iter().filter(|&&b| b).count();
    let n = positives.len() - p;
    if p == 0 || n == 0 {
        return Err(Error::invalid("ROC analysis needs both classes"));
    }
    Ok((p, n))
}

/// ROC curve from sweeping a threshold over the distinct scores, higher
/// scores meaning "positive". The trapezoidal area equals the Mann–Whitney
/// statistic with half credit for ties.
pub fn roc_auc<T: Real>(scores: &[T], positives: &[bool]) -> Result<RocCurve<T>> {
    if scores.len() != positives.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            found: positives.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("ROC scores"));
    }
    let (np, nn) = class_sizes(positives)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));
    let (fp_total, tp_total) = (T::from_usize_lossy(nn), T::from_usize_lossy(np));
    let mut points = vec![(T::zero(), T::zero())];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = T::zero();
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        let (tp0, fp0) = (tp, fp);
        while k < order.len() && scores[order[k]] == s {
            if positives[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        // trapezoid in count units: (fp − fp0)·(tp + tp0)/2
        auc += T::from_usize_lossy(fp - fp0) * T::from_usize_lossy(tp + tp0) / T::lit(2.0);
        points.push((T::from_usize_lossy(fp) / fp_total, T::from_usize_lossy(tp) / tp_total));
    }
    Ok(RocCurve {
        points,
        auc: auc / (fp_total * tp_total),
    })
}
