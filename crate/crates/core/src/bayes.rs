//! Gaussian naive Bayes with diagonal covariances.
//!
//! Persisted models are TOML:
//!
//! ```toml
//! format = 1
//! features = ["glcm_contrast_0", "lbp_3"]
//!
//! [[class]]
//! prior = 0.5
//! mean = [0.12, 0.4]
//! variance = [0.003, 0.01]
//! ```
//!
//! with one `[[class]]` table per class in class-index order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featsel::FeatureMatrix;
use crate::scalar::{mean as mean_of, Real};

/// Class variances are floored at this fraction of the feature's pooled variance.
pub const VARIANCE_FLOOR: f64 = 1e-9;

const FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassGaussian<T> {
    pub prior: T,
    pub mean: Vec<T>,
    pub variance: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NbModel<T> {
    feature_names: Vec<String>,
    classes: Vec<ClassGaussian<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NbDecision<T> {
    pub label: usize,
    /// `g_i(x)` per class.
    pub discriminants: Vec<T>,
    /// Several classes share the largest discriminant; the lowest index won.
    pub tie: bool,
}

impl<T: Real> NbDecision<T> {
    /// `g_positive(x) − max_{i≠positive} g_i(x)`; for two classes with
    /// `positive = 0` this is `g(x)`.
    pub fn score(&self, positive: usize) -> T {
        let other = self
            .discriminants
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != positive)
            .map(|(_, &g)| g)
            .fold(T::neg_infinity(), T::max);
        self.discriminants[positive] - other
    }
}

impl<T: Real> NbModel<T> {
    pub fn new(feature_names: Vec<String>, classes: Vec<ClassGaussian<T>>) -> Result<Self> {
        let d = feature_names.len();
        if classes.len() < 2 {
            return Err(Error::invalid("naive Bayes needs at least two classes"));
        }
        for c in &classes {
            if c.mean.len() != d || c.variance.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: c.mean.len().min(c.variance.len()),
                });
            }
            if !(c.prior > T::zero() && c.prior <= T::one()) {
                return Err(Error::invalid(format!("class prior {} outside (0, 1]", c.prior)));
            }
            if c.mean.iter().any(|v| !v.is_finite()) || c.variance.iter().any(|v| !(v.is_finite() && *v > T::zero())) {
                return Err(Error::invalid("class means must be finite and variances positive"));
            }
        }
        let total = classes.iter().map(|c| c.prior).sum::<T>();
        if (total - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::invalid(format!("class priors sum to {total}, not 1")));
        }
        Ok(Self { feature_names, classes })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn classes(&self) -> &[ClassGaussian<T>] {
        &self.classes
    }

    pub fn dims(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    fn check(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature vector"));
        }
        Ok(())
    }

    /// `g_i(x) = −½ Σ (x−μ)²/σ² − (D/2) ln 2π − ½ Σ ln σ² + ln P(ω_i)`,
    /// the log of the class-weighted density.
    pub fn log_discriminant(&self, class: usize, x: &[T]) -> Result<T> {
        self.check(x)?;
        let c = self.classes.get(class).ok_or(Error::UnknownClass(class))?;
        Ok(self.g(c, x))
    }

    fn g(&self, c: &ClassGaussian<T>, x: &[T]) -> T {
        let half = T::lit(0.5);
        let mut quad = T::zero();
        let mut logdet = T::zero();
        for ((&xi, &m), &v) in x.iter().zip(&c.mean).zip(&c.variance) {
            let r = xi - m;
            quad += r * r / v;
            logdet += v.ln();
        }
        let d = T::from_usize_lossy(x.len());
        -half * quad - half * d * T::TAU().ln() - half * logdet + c.prior.ln()
    }
}

/// Fits per-class sample means, unbiased sample variances and empirical priors.
pub fn fit_nb<T: Real>(data: &FeatureMatrix<T>) -> Result<NbModel<T>> {
    let k = data.num_classes();
    let d = data.num_features();
    let mut counts = vec![0usize; k];
    for &l in data.labels() {
        counts[l] += 1;
    }
    if k < 2 {
        return Err(Error::invalid("naive Bayes needs at least two classes"));
    }
    if let Some(c) = counts.iter().position(|&n| n < 2) {
        return Err(Error::Degenerate(format!(
            "class {c} has {} training samples; naive Bayes needs at least 2",
            counts[c]
        )));
    }
    let n = data.num_samples();
    let floors: Vec<T> = (0..d)
        .map(|j| {
            let col = data.column(j);
            let pooled = sample_variance(&col);
            T::lit(VARIANCE_FLOOR) * if pooled > T::zero() { pooled } else { T::one() }
        })
        .collect();
    let classes = (0..k)
        .map(|c| {
            let rows: Vec<usize> = (0..n).filter(|&i| data.labels()[i] == c).collect();
            let mut mean = Vec::with_capacity(d);
            let mut variance = Vec::with_capacity(d);
            for j in 0..d {
                let v: Vec<T> = rows.iter().map(|&i| data.row(i)[j]).collect();
                mean.push(mean_of(&v));
                variance.push(sample_variance(&v).max(floors[j]));
            }
            ClassGaussian {
                prior: T::from_usize_lossy(counts[c]) / T::from_usize_lossy(n),
                mean,
                variance,
            }
        })
        .collect();
    NbModel::new(data.names().to_vec(), classes)
}

fn sample_variance<T: Real>(v: &[T]) -> T {
    if v.len() < 2 {
        return T::zero();
    }
    let mean = mean_of(v);
    v.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / T::from_usize_lossy(v.len() - 1)
}

/// `g(x) = g₁(x) − g₂(x)` for a two-class model; positive favors class 0.
pub fn discriminant_g<T: Real>(model: &NbModel<T>, x: &[T]) -> Result<T> {
    if model.num_classes() != 2 {
        return Err(Error::invalid(format!(
            "the single discriminant needs two classes, model has {}",
            model.num_classes()
        )));
    }
    Ok(model.log_discriminant(0, x)? - model.log_discriminant(1, x)?)
}

/// Largest `g_i(x)`. With two classes: class 0 iff `g(x) > 0`, class 1 iff
/// `g(x) < 0`, and `g(x) = 0` goes to class 0 with `tie` set.
pub fn classify_nb<T: Real>(model: &NbModel<T>, x: &[T]) -> Result<NbDecision<T>> {
    model.check(x)?;
    let discriminants: Vec<T> = model.classes.iter().map(|c| model.g(c, x)).collect();
    let top = discriminants.iter().copied().fold(T::neg_infinity(), T::max);
    let leaders: Vec<usize> = (0..discriminants.len()).filter(|&i| discriminants[i] == top).collect();
    Ok(NbDecision {
        label: leaders[0],
        tie: leaders.len() > 1,
        discriminants,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassFile {
    prior: f64,
    mean: Vec<f64>,
    variance: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: u32,
    features: Vec<String>,
    class: Vec<ClassFile>,
}

pub fn save_nb<T: Real>(model: &NbModel<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = ModelFile {
        format: FORMAT,
        features: model.feature_names.clone(),
        class: model
            .classes
            .iter()
            .map(|c| ClassFile {
                prior: c.prior.as_f64(),
                mean: c.mean.iter().map(|v| v.as_f64()).collect(),
                variance: c.variance.iter().map(|v| v.as_f64()).collect(),
            })
            .collect(),
    };
    let text = toml::to_string(&file).map_err(|e| Error::Parse(format!("naive Bayes model: {e}")))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_nb<T: Real>(path: impl AsRef<Path>) -> Result<NbModel<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if file.format != FORMAT {
        return Err(Error::Parse(format!(
            "{}: unsupported model format {}",
            path.display(),
            file.format
        )));
    }
    let lift = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
    let classes = file
        .class
        .iter()
        .map(|c| ClassGaussian {
            prior: T::lit(c.prior),
            mean: lift(&c.mean),
            variance: lift(&c.variance),
        })
        .collect();
    NbModel::new(file.features, classes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
