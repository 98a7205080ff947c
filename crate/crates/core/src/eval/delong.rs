use statrs::distribution::{ContinuousCDF, Normal};

use super::roc::class_sizes;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelongResult<T> {
    pub auc_a: T,
    pub auc_b: T,
    pub z: T,
    /// Two-sided.
    pub p: T,
    /// The variance of the AUC difference vanished; `z = 0` and `p = 1`.
    pub degenerate: bool,
}

fn psi<T: Real>(x: T, y: T) -> T {
    if x > y {
        T::one()
    } else if x == y {
        T::lit(0.5)
    } else {
        T::zero()
    }
}

/// Placement values: per positive the fraction of negatives it beats, per
/// negative the fraction of positives that beat it.
fn placements<T: Real>(scores: &[T], positives: &[bool]) -> (Vec<T>, Vec<T>) {
    let pos: Vec<T> = scores
        .iter()
        .zip(positives)
        .filter(|(_, &p)| p)
        .map(|(&s, _)| s)
        .collect();
    let neg: Vec<T> = scores
        .iter()
        .zip(positives)
        .filter(|(_, &p)| !p)
        .map(|(&s, _)| s)
        .collect();
    let v10 = pos
        .iter()
        .map(|&x| neg.iter().fold(T::zero(), |a, &y| a + psi(x, y)) / T::from_usize_lossy(neg.len()))
        .collect();
    let v01 = neg
        .iter()
        .map(|&y| pos.iter().fold(T::zero(), |a, &x| a + psi(x, y)) / T::from_usize_lossy(pos.len()))
        .collect();
    (v10, v01)
}

/// Sample covariance of two equally long sequences.
fn cov<T: Real>(a: &[T], b: &[T]) -> T {
    let n = T::from_usize_lossy(a.len());
    let ma = a.iter().copied().sum::<T>() / n;
    let mb = b.iter().copied().sum::<T>() / n;
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - ma) * (y - mb))
        / (n - T::one())
}

/// Paired test for the difference between two correlated AUCs.
pub fn delong_test<T: Real>(scores_a: &[T], scores_b: &[T], positives: &[bool]) -> Result<DelongResult<T>> {
    if scores_a.len() != positives.len() || scores_b.len() != positives.len() {
        return Err(Error::DimensionMismatch {
            expected: positives.len(),
            found: scores_a.len().max(scores_b.len()),
        });
    }
    if scores_a.iter().chain(scores_b).any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("DeLong scores"));
    }
    let (np, nn) = class_sizes(positives)?;
    if np < 2 || nn < 2 {
        return Err(Error::invalid("DeLong test needs at least two samples per class"));
    }
    let (a10, a01) = placements(scores_a, positives);
    let (b10, b01) = placements(scores_b, positives);
    let auc_a = a10.iter().copied().sum::<T>() / T::from_usize_lossy(np);
    let auc_b = b10.iter().copied().sum::<T>() / T::from_usize_lossy(np);
    let var = (cov(&a10, &a10) + cov(&b10, &b10) - T::lit(2.0) * cov(&a10, &b10)) / T::from_usize_lossy(np)
        + (cov(&a01, &a01) + cov(&b01, &b01) - T::lit(2.0) * cov(&a01, &b01)) / T::from_usize_lossy(nn);
    if !(var > T::lit(1e-14)) {
        return Ok(DelongResult {
            auc_a,
            auc_b,
            z: T::zero(),
            p: T::one(),
            degenerate: true,
        });
    }
    let z = (auc_a - auc_b) / var.sqrt();
    let normal = Normal::standard();
    let p = T::lit(2.0 * normal.cdf(-z.as_f64().abs()));
    Ok(DelongResult {
        auc_a,
        auc_b,
        z,
        p,
        degenerate: false,
    })
}
