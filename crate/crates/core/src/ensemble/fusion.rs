use super::BlockSolve;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::src::LOG_FLOOR;

#[derive(Debug, Clone, PartialEq)]
pub struct BbmapDecision<T> {
    pub label: usize,
    /// Vote fraction per class over the blocks that solved.
    pub posterior: Vec<T>,
    pub votes: Vec<usize>,
    /// Several classes share the top vote count.
    pub tie: bool,
}

/// Averaged log-likelihood ratio. Positive values favor `positive`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlsScore<T> {
    pub value: T,
    /// Per block `(a, b)` with block score `a − b`: `(ln r_n, ln r_m)` for
    /// BBLL-R, `(ln ‖δ_m(x)‖₁, ln ‖δ_n(x)‖₁)` for BBLL-S. Both logs are floored.
    pub terms: Vec<(T, T)>,
    pub positive: usize,
    pub negative: usize,
}

/// Majority vote of block labels. A tie for the top count goes to `positive`
/// when it is among the leaders, otherwise to the lowest leading class.
pub fn bbmap<T: Real>(bs: &BlockSolve<T>, num_classes: usize, positive: usize) -> Result<BbmapDecision<T>> {
    if bs.outcomes.is_empty() {
        return Err(Error::AllBlocksFailed);
    }
    let mut votes = vec![0usize; num_classes];
    for o in &bs.outcomes {
        votes[o.label] += 1;
    }
    let total = T::from_usize_lossy(bs.outcomes.len());
    let posterior = votes.iter().map(|&v| T::from_usize_lossy(v) / total).collect();
    let top = *votes.iter().max().expect("at least one class");
    let leaders: Vec<usize> = (0..num_classes).filter(|&c| votes[c] == top).collect();
    let label = if leaders.contains(&positive) {
        positive
    } else {
        leaders[0]
    };
    Ok(BbmapDecision {
        label,
        posterior,
        votes,
        tie: leaders.len() > 1,
    })
}

fn floored_ln<T: Real>(v: T) -> T {
    v.max(T::lit(LOG_FLOOR)).ln()
}

fn average<T: Real>(terms: Vec<(T, T)>, positive: usize, negative: usize, sign: T) -> Result<LlsScore<T>> {
    if terms.is_empty() {
        return Err(Error::AllBlocksFailed);
    }
    let n = T::from_usize_lossy(terms.len());
    let value = sign * terms.iter().fold(T::zero(), |acc, &(a, b)| acc + (a - b)) / n;
    Ok(LlsScore {
        value,
        terms,
        positive,
        negative,
    })
}

/// BBLL-R: mean over blocks of `ln(r_n / r_m)`.
pub fn residual_lls<T: Real>(bs: &BlockSolve<T>, m: usize, n: usize) -> Result<LlsScore<T>> {
    let terms = bs
        .outcomes
        .iter()
        .map(|o| (floored_ln(o.residuals[n]), floored_ln(o.residuals[m])))
        .collect();
    average(terms, m, n, T::one())
}

/// BBLL-S: mean over blocks of `ln(‖δ_m(x)‖₁ / ‖δ_n(x)‖₁)`, negated when
/// `negated_sparsity_sign` is set.
pub fn sparsity_lls<T: Real>(
    bs: &BlockSolve<T>,
    m: usize,
    n: usize,
    negated_sparsity_sign: bool,
) -> Result<LlsScore<T>> {
    let terms = bs
        .outcomes
        .iter()
        .map(|o| (floored_ln(o.masses[m]), floored_ln(o.masses[n])))
        .collect();
    let sign = if negated_sparsity_sign { -T::one() } else { T::one() };
    average(terms, m, n, sign)
}

/// Class `m` when `score ≥ τ`, class `n` otherwise.
pub fn classify_bbll<T: Real>(score: &LlsScore<T>, tau: T) -> usize {
    if score.value >= tau {
        score.positive
    } else {
        score.negative
    }
}
