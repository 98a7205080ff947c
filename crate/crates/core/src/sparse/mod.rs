//! Sparse approximation over class-labeled dictionaries.

mod bpdn;
mod class;
mod dictionary;
mod greedy;

pub use bpdn::bpdn;
pub use class::{class_residuals, delta, sci};
pub use dictionary::{normalize_columns, Dictionary};
pub use greedy::{mp, omp};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{l2_norm, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mp,
    #[default]
    Omp,
    Bpdn,
}

/// Residual bound ε for a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Epsilon {
    /// ε = factor · ‖y‖₂
    Relative(f64),
    Absolute(f64),
}

impl Default for Epsilon {
    fn default() -> Self {
        Epsilon::Relative(0.05)
    }
}

impl Epsilon {
    pub fn resolve<T: Real>(self, y_norm: T) -> T {
        match self {
            Epsilon::Relative(f) => T::lit(f) * y_norm,
            Epsilon::Absolute(e) => T::lit(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SolverConfig {
    pub method: Method,
    pub epsilon: Epsilon,
    /// Greedy iterations or coordinate-descent sweeps per λ. Defaults: `s`
    /// for OMP, `10·s` for MP and BPDN.
    pub max_iterations: Option<usize>,
    /// Coordinate-descent convergence: largest coefficient change per sweep.
    pub tolerance: f64,
    /// Smallest λ tried, relative to `‖Dᵀy‖∞`.
    pub lambda_floor: f64,
    /// Bisection stops once `|‖Dx − y‖ − ε|` is within this bound; `None`
    /// means `max(1e-4, 1e-3·ε)`.
    pub residual_tolerance: Option<f64>,
    pub max_bisections: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Omp,
            epsilon: Epsilon::default(),
            max_iterations: None,
            tolerance: 1e-8,
            lambda_floor: 1e-10,
            residual_tolerance: None,
            max_bisections: 100,
        }
    }
}

impl SolverConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let eps = match self.epsilon {
            Epsilon::Relative(e) | Epsilon::Absolute(e) => e,
        };
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be finite and ≥ 0, got {eps}")));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::invalid("max_iterations must be ≥ 1"));
        }
        if !(self.tolerance > 0.0) || !(self.lambda_floor > 0.0 && self.lambda_floor < 1.0) {
            return Err(Error::invalid("solver tolerances must be positive"));
        }
        Ok(())
    }

    pub(crate) fn iterations_for(&self, method: Method, atoms: usize) -> usize {
        self.max_iterations.unwrap_or(match method {
            Method::Omp => atoms,
            Method::Mp | Method::Bpdn => 10 * atoms,
        })
    }
}

/// Diagnostics raised by a solve; none of them abort it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverFlags {
    /// OMP met an atom dependent on the current support and stopped there.
    pub rank_deficient: bool,
    /// BPDN could not reach the ε ball even at the smallest λ.
    pub infeasible: bool,
    /// The iteration or sweep budget ran out before convergence.
    pub iteration_limit: bool,
    /// λ bisection ended without meeting its residual tolerance.
    pub bisection_incomplete: bool,
}

impl SolverFlags {
    pub fn any(&self) -> bool {
        self.rank_deficient || self.infeasible || self.iteration_limit || self.bisection_incomplete
    }
}

#[derive(Debug, Clone)]
pub struct SparseSolution<T> {
    pub x: Vec<T>,
    /// `‖Dx − y‖₂`
    pub residual_norm: T,
    /// Indices with `x_i ≠ 0`, ascending.
    pub support: Vec<usize>,
    pub iterations: usize,
    /// Residual norm before the first and after every greedy iteration.
    pub residual_trace: Vec<T>,
    /// Penalty weight of the returned BPDN solution.
    pub lambda: Option<T>,
    pub flags: SolverFlags,
}

impl<T: Real> SparseSolution<T> {
    pub(crate) fn finish(d: &Dictionary<T>, y: &[T], x: Vec<T>, iterations: usize) -> Self {
        let support = x
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != T::zero())
            .map(|(i, _)| i)
            .collect();
        let residual_norm = d.residual_norm(&x, y);
        Self {
            x,
            residual_norm,
            support,
            iterations,
            residual_trace: Vec::new(),
            lambda: None,
            flags: SolverFlags::default(),
        }
    }

    pub fn l1_norm(&self) -> T {
        crate::scalar::l1_norm(&self.x)
    }
}

pub(crate) fn check_signal<T: Real>(d: &Dictionary<T>, y: &[T]) -> Result<()> {
    if y.len() != d.rows() {
        return Err(Error::DimensionMismatch {
            expected: d.rows(),
            found: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("test signal"));
    }
    Ok(())
}

pub(crate) fn excluded_mask(cols: usize, excluded: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; cols];
    for &j in excluded {
        if j < cols {
            mask[j] = true;
        }
    }
    mask
}

/// Runs the configured method with ε resolved against `‖y‖₂`.
pub fn solve<T: Real>(d: &Dictionary<T>, y: &[T], cfg: &SolverConfig) -> Result<SparseSolution<T>> {
    solve_excluding(d, y, cfg, &[])
}

/// Like [`solve`] with the listed columns unavailable (their coefficients stay 0).
pub fn solve_excluding<T: Real>(
    d: &Dictionary<T>,
    y: &[T],
    cfg: &SolverConfig,
    excluded: &[usize],
) -> Result<SparseSolution<T>> {
    cfg.validate()?;
    check_signal(d, y)?;
    let eps = cfg.epsilon.resolve(l2_norm(y));
    match cfg.method {
        Method::Mp => greedy::mp_excluding(d, y, eps, cfg, excluded),
        Method::Omp => greedy::omp_excluding(d, y, eps, cfg, excluded),
        Method::Bpdn => bpdn::bpdn_excluding(d, y, eps, cfg, excluded),
    }
}
