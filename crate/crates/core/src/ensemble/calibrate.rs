use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of thresholds in the τ sweep.
const GRID_POINTS: usize = 1001;

/// Logistic map of an LLS score to `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdsParams<T> {
    pub slope: T,
    /// `τ*`
    pub center: T,
    pub pds_min: T,
    pub lls_min: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauPoint<T> {
    pub tau: T,
    pub tpr: T,
    pub tnr: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauCalibration<T> {
    pub tau: T,
    /// Every class-`m` score exceeds every class-`n` score; `tau` is the gap midpoint.
    pub separable: bool,
    /// TPR − TNR changed sign more than once; the crossing nearest 0 was kept.
    pub multiple_crossings: bool,
    pub curve: Vec<TauPoint<T>>,
}

fn rates<T: Real>(scores: &[T], is_m: &[bool], tau: T, pos: T, neg: T) -> (T, T) {
    let mut tp = 0usize;
    let mut tn = 0usize;
    for (&s, &m) in scores.iter().zip(is_m) {
        if m && s >= tau {
            tp += 1;
        } else if !m && s < tau {
            tn += 1;
        }
    }
    (T::from_usize_lossy(tp) / pos, T::from_usize_lossy(tn) / neg)
}

/// Threshold where the TPR and TNR curves meet.
///
/// `TPR(τ)` counts class-`m` scores `≥ τ`, `TNR(τ)` class-`n` scores `< τ`.
/// Both are evaluated on a uniform grid over the score range padded by 1 %
/// on each side, and the sign change of `TPR − TNR` is located by linear
/// interpolation between neighbouring grid points.
pub fn calibrate_tau<T: Real>(scores: &[T], is_m: &[bool]) -> Result<TauCalibration<T>> {
    if scores.len() != is_m.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            found: is_m.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("calibration scores"));
    }
    let npos = is_m.iter().filter(|&&m| m).count();
    let nneg = is_m.len() - npos;
    if npos == 0 || nneg == 0 {
        return Err(Error::Calibration("both classes must have calibration scores".into()));
    }
    let (pos, neg) = (T::from_usize_lossy(npos), T::from_usize_lossy(nneg));
    let lo = scores.iter().copied().fold(T::infinity(), T::min);
    let hi = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let range = hi - lo;
    let pad = if range > T::zero() {
        T::lit(0.01) * range
    } else {
        T::lit(0.01) * lo.abs().max(T::one())
    };
    let (start, end) = (lo - pad, hi + pad);
    let step = (end - start) / T::from_usize_lossy(GRID_POINTS - 1);
    let curve: Vec<TauPoint<T>> = (0..GRID_POINTS)
        .map(|k| {
            let tau = if k == GRID_POINTS - 1 {
                end
            } else {
                start + step * T::from_usize_lossy(k)
            };
            let (tpr, tnr) = rates(scores, is_m, tau, pos, neg);
            TauPoint { tau, tpr, tnr }
        })
        .collect();

    let min_m = scores
        .iter()
        .zip(is_m)
        .filter(|(_, &m)| m)
        .map(|(&s, _)| s)
        .fold(T::infinity(), T::min);
    let max_n = scores
        .iter()
        .zip(is_m)
        .filter(|(_, &m)| !m)
        .map(|(&s, _)| s)
        .fold(T::neg_infinity(), T::max);
    if min_m > max_n {
        return Ok(TauCalibration {
            tau: (min_m + max_n) / T::lit(2.0),
            separable: true,
            multiple_crossings: false,
            curve,
        });
    }

    let diff: Vec<T> = curve.iter().map(|p| p.tpr - p.tnr).collect();
    let mut crossings = Vec::new();
    let mut k = 0;
    while k < GRID_POINTS {
        if diff[k] == T::zero() {
            let first = k;
            while k + 1 < GRID_POINTS && diff[k + 1] == T::zero() {
                k += 1;
            }
            crossings.push((curve[first].tau + curve[k].tau) / T::lit(2.0));
        } else if k + 1 < GRID_POINTS && diff[k + 1] != T::zero() && (diff[k] > T::zero()) != (diff[k + 1] > T::zero())
        {
            let (a, b) = (curve[k].tau, curve[k + 1].tau);
            crossings.push(a + (b - a) * diff[k] / (diff[k] - diff[k + 1]));
        }
        k += 1;
    }
    let tau = crossings
        .iter()
        .copied()
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).expect("finite crossings"))
        .ok_or_else(|| Error::Calibration("TPR and TNR curves never cross".into()))?;
    Ok(TauCalibration {
        tau,
        separable: false,
        multiple_crossings: crossings.len() > 1,
        curve,
    })
}

/// Sigmoid centered at `τ*` that takes the value `pds_min` at `lls_min`.
pub fn fit_pds<T: Real>(tau: T, lls_min: T, pds_min: T) -> Result<PdsParams<T>> {
    if !(pds_min > T::zero() && pds_min < T::lit(0.5)) {
        return Err(Error::invalid(format!("pds_min must lie in (0, 0.5), got {pds_min}")));
    }
    if !tau.is_finite() || !lls_min.is_finite() {
        return Err(Error::NonFinite("PDS calibration input"));
    }
    if lls_min >= tau {
        return Err(Error::Calibration(format!(
            "smallest score {lls_min} is not below τ* = {tau}"
        )));
    }
    let slope = ((T::one() - pds_min) / pds_min).ln() / (tau - lls_min);
    Ok(PdsParams {
        slope,
        center: tau,
        pds_min,
        lls_min,
    })
}

/// `1 / (1 + exp(−m (score − c)))`
pub fn pds<T: Real>(score: T, p: &PdsParams<T>) -> T {
    T::one() / (T::one() + (-p.slope * (score - p.center)).exp())
}
