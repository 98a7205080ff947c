//! Feature subset selection: CFS merit searched by best-first or a genetic
//! algorithm, and information gain with a threshold ranker.

mod cfs;
mod infogain;
mod search;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::texture::FeatureTable;

pub use cfs::{cfs_merit, pearson, CfsEvaluator, SubsetEvaluator};
pub use infogain::{equal_frequency_bins, info_gain, info_gain_scores, ranker, IG_BINS};
pub use search::{best_first, genetic_search, genetic_search_from, GaParams, DEFAULT_STALL_LIMIT};

/// Samples by named features, with one class label per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    names: Vec<String>,
    /// Row-major, one row per sample.
    values: Vec<T>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl<T: Real> FeatureMatrix<T> {
    pub fn new(names: Vec<String>, rows: Vec<Vec<T>>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::invalid(format!("duplicate feature name {n:?}")));
            }
        }
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        if let Some(&c) = labels.iter().find(|&&c| c >= num_classes) {
            return Err(Error::UnknownClass(c));
        }
        let mut values = Vec::with_capacity(rows.len() * names.len());
        for row in rows {
            if row.len() != names.len() {
                return Err(Error::DimensionMismatch {
                    expected: names.len(),
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("feature matrix"));
            }
            values.extend(row);
        }
        Ok(Self {
            names,
            values,
            labels,
            num_classes,
        })
    }

    pub fn from_table(table: &FeatureTable, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let rows = table
            .rows
            .iter()
            .map(|r| r.iter().map(|&v| T::lit(v)).collect())
            .collect();
        Self::new(table.names.clone(), rows, labels, num_classes)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn num_features(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        let d = self.num_features();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.num_samples()).map(|i| self.row(i)[j]).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            names: self.names.clone(),
            values: rows.iter().flat_map(|&i| self.row(i).iter().copied()).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
        }
    }

    /// Keeps the given columns in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        Self {
            names: columns.iter().map(|&c| self.names[c].clone()).collect(),
            values: (0..self.num_samples())
                .flat_map(|i| columns.iter().map(move |&c| self.row(i)[c]))
                .collect(),
            labels: self.labels.clone(),
            num_classes: self.num_classes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMethod {
    /// Keep every feature.
    #[default]
    None,
    CfsBestFirst,
    CfsGenetic,
    InfoGain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SelectionConfig {
    pub method: SelectionMethod,
    pub stall_limit: usize,
    pub ga: GaParams,
    /// Ranker drops features whose information gain is at or below this.
    pub threshold: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            method: SelectionMethod::None,
            stall_limit: DEFAULT_STALL_LIMIT,
            ga: GaParams::default(),
            threshold: 0.0,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stall_limit == 0 {
            return Err(Error::invalid("stall-limit must be positive"));
        }
        if !self.threshold.is_finite() {
            return Err(Error::invalid("ranker threshold must be finite"));
        }
        self.ga.validate()
    }
}

/// Selected column indices. Subsets come back in ascending index order,
/// ranked selections in rank order.
pub fn select_features<T: Real>(data: &FeatureMatrix<T>, cfg: &SelectionConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    Ok(match cfg.method {
        SelectionMethod::None => (0..data.num_features()).collect(),
        SelectionMethod::CfsBestFirst => best_first(&CfsEvaluator::new(data), cfg.stall_limit),
        SelectionMethod::CfsGenetic => genetic_search(&CfsEvaluator::new(data), &cfg.ga)?,
        SelectionMethod::InfoGain => ranker(&info_gain_scores(data), T::lit(cfg.threshold)),
    })
}

/// One feature name per line.
pub fn write_selection(names: &[String], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = names.join("\n");
    if !names.is_empty() {
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_selection(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

/// Column indices of `names` in `table_names`, in the order of `names`.
pub fn resolve_selection(table_names: &[String], names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            table_names
                .iter()
                .position(|t| t == n)
                .ok_or_else(|| Error::invalid(format!("selected feature {n:?} not in the feature table")))
        })
        .collect()
}
