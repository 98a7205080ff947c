use super::Dictionary;
use crate::error::{Error, Result};
use crate::scalar::{l1_norm, Real};

/// `δ_i(x)`: the entries of `x` on class `class`'s columns, zero elsewhere.
pub fn delta<T: Real>(x: &[T], class: usize, d: &Dictionary<T>) -> Result<Vec<T>> {
    let cols = d.class_columns().get(class).ok_or(Error::UnknownClass(class))?;
    let mut out = vec![T::zero(); x.len()];
    for &j in cols {
        out[j] = x[j];
    }
    Ok(out)
}

/// `r_i = ‖y − D δ_i(x)‖₂` for every class.
pub fn class_residuals<T: Real>(d: &Dictionary<T>, x: &[T], y: &[T]) -> Vec<T> {
    d.class_columns()
        .iter()
        .map(|cols| {
            let mut r = y.to_vec();
            for &j in cols {
                let xj = x[j];
                if xj != T::zero() {
                    for (ri, &a) in r.iter_mut().zip(d.atom(j)) {
                        *ri -= xj * a;
                    }
                }
            }
            r.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
        })
        .collect()
}

/// Sparsity concentration index `(k · maxᵢ ‖δᵢ(x)‖₁ / ‖x‖₁ − 1) / (k − 1)`.
pub fn sci<T: Real>(x: &[T], d: &Dictionary<T>) -> Result<T> {
    let total = l1_norm(x);
    if !(total > T::zero()) {
        return Err(Error::Degenerate("SCI undefined for a zero coefficient vector".into()));
    }
    let k = d.num_classes();
    if k < 2 {
        return Err(Error::invalid("SCI needs at least two classes"));
    }
    let best = d
        .class_columns()
        .iter()
        .map(|cols| cols.iter().fold(T::zero(), |a, &j| a + x[j].abs()))
        .fold(T::zero(), T::max);
    let kf = T::from_usize_lossy(k);
    Ok((kf * best / total - T::one()) / (kf - T::one()))
}
