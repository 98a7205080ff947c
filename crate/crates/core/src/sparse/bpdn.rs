//! Basis pursuit denoising: `min ‖x‖₁` subject to `‖Dx − y‖₂ ≤ ε`.
//!
//! Solved through the penalized form `½‖Dx − y‖² + λ‖x‖₁` by cyclic coordinate
//! descent, with λ located by a geometric sweep down from `‖Dᵀy‖∞` followed by
//! log-space bisection on the residual.

use super::{check_signal, excluded_mask, Dictionary, Method, SolverConfig, SparseSolution};
use crate::error::Result;
use crate::linalg::least_squares_on_support;
use crate::scalar::{dot, l2_norm, Real};

struct Lasso<'a, T> {
    d: &'a Dictionary<T>,
    c: Vec<T>,
    y_sq: T,
    blocked: Vec<bool>,
    tol: T,
    max_sweeps: usize,
    sweeps: usize,
    capped: bool,
}

#[inline]
fn soft<T: Real>(z: T, t: T) -> T {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        T::zero()
    }
}

impl<T: Real> Lasso<'_, T> {
    /// Coordinate descent at `lambda`, warm-started from `x`.
    fn run(&mut self, lambda: T, x: &mut [T]) {
        let s = self.d.cols();
        // g = G x
        let mut g = vec![T::zero(); s];
        for (j, &xj) in x.iter().enumerate() {
            if xj != T::zero() {
                for (gi, &v) in g.iter_mut().zip(self.d.gram_row(j)) {
                    *gi += xj * v;
                }
            }
        }
        for _ in 0..self.max_sweeps {
            self.sweeps += 1;
            let mut max_change = T::zero();
            for j in 0..s {
                if self.blocked[j] {
                    continue;
                }
                let gjj = self.d.gram(j, j);
                let z = x[j] * gjj + self.c[j] - g[j];
                let new = soft(z, lambda) / gjj;
                let diff = new - x[j];
                if diff != T::zero() {
                    x[j] = new;
                    for (gi, &v) in g.iter_mut().zip(self.d.gram_row(j)) {
                        *gi += diff * v;
                    }
                    max_change = max_change.max(diff.abs());
                }
            }
            if max_change < self.tol {
                return;
            }
        }
        self.capped = true;
    }

    /// `‖Dx − y‖` from inner products.
    fn residual(&self, x: &[T]) -> T {
        let mut quad = T::zero();
        for (i, &xi) in x.iter().enumerate() {
            if xi != T::zero() {
                let row = self.d.gram_row(i);
                let gx: T = x
                    .iter()
                    .zip(row)
                    .filter(|(&v, _)| v != T::zero())
                    .map(|(&v, &g)| v * g)
                    .sum();
                quad += xi * gx;
            }
        }
        (self.y_sq - T::lit(2.0) * dot(&self.c, x) + quad).max(T::zero()).sqrt()
    }
}

pub fn bpdn<T: Real>(d: &Dictionary<T>, y: &[T], epsilon: T, cfg: &SolverConfig) -> Result<SparseSolution<T>> {
    cfg.validate()?;
    check_signal(d, y)?;
    if !(epsilon >= T::zero()) {
        return Err(crate::Error::invalid("epsilon must be ≥ 0"));
    }
    bpdn_excluding(d, y, epsilon, cfg, &[])
}

pub(crate) fn bpdn_excluding<T: Real>(
    d: &Dictionary<T>,
    y: &[T],
    eps: T,
    cfg: &SolverConfig,
    excluded: &[usize],
) -> Result<SparseSolution<T>> {
    let s = d.cols();
    let y_norm = l2_norm(y);
    let mut lasso = Lasso {
        d,
        c: d.correlate(y),
        y_sq: y_norm * y_norm,
        blocked: excluded_mask(s, excluded),
        tol: T::lit(cfg.tolerance),
        max_sweeps: cfg.iterations_for(Method::Bpdn, s),
        sweeps: 0,
        capped: false,
    };
    let lambda_max = lasso
        .c
        .iter()
        .zip(&lasso.blocked)
        .filter(|(_, &b)| !b)
        .fold(T::zero(), |m, (&c, _)| m.max(c.abs()));
    let zero = vec![T::zero(); s];
    if eps >= y_norm || lambda_max == T::zero() {
        let mut sol = SparseSolution::finish(d, y, zero, 0);
        sol.lambda = Some(lambda_max);
        sol.flags.infeasible = sol.residual_norm > eps;
        return Ok(sol);
    }
    let tol_res = cfg
        .residual_tolerance
        .map(T::lit)
        .unwrap_or_else(|| T::lit(1e-4).max(T::lit(1e-3) * eps));
    let floor = lambda_max * T::lit(cfg.lambda_floor);
    let ten = T::lit(10.0);

    // sweep λ down by decades until the residual drops inside the ε ball
    let mut x = zero;
    let mut hi = (lambda_max, lasso.residual(&x), x.clone());
    let mut lo: Option<(T, T, Vec<T>)> = None;
    let mut lambda = lambda_max;
    while lambda > floor {
        lambda = (lambda / ten).max(floor);
        lasso.run(lambda, &mut x);
        let res = lasso.residual(&x);
        if eps > T::zero() && (res - eps).abs() <= tol_res {
            return Ok(finish(d, y, x, lambda, &lasso, false, false));
        }
        if res <= eps {
            lo = Some((lambda, res, x.clone()));
            break;
        }
        hi = (lambda, res, x.clone());
    }
    let Some(mut lo) = lo else {
        // even the smallest λ leaves the residual above ε
        let polished = polish(d, &lasso.c, x);
        let res = d.residual_norm(&polished, y);
        let infeasible = res > eps + tol_res;
        return Ok(finish(d, y, polished, floor, &lasso, infeasible, false));
    };
    if eps == T::zero() {
        let polished = polish(d, &lasso.c, lo.2);
        return Ok(finish(d, y, polished, lo.0, &lasso, false, false));
    }
    for _ in 0..cfg.max_bisections {
        let mid = (lo.0 * hi.0).sqrt();
        let mut xm = hi.2.clone();
        lasso.run(mid, &mut xm);
        let res = lasso.residual(&xm);
        if (res - eps).abs() <= tol_res {
            return Ok(finish(d, y, xm, mid, &lasso, false, false));
        }
        if res <= eps {
            lo = (mid, res, xm);
        } else {
            hi = (mid, res, xm);
        }
        if hi.0 <= lo.0 * (T::one() + T::epsilon() * ten) {
            break;
        }
    }
    Ok(finish(d, y, lo.2, lo.0, &lasso, false, true))
}

/// Least squares restricted to the support of `x`, for the λ → 0 limit.
fn polish<T: Real>(d: &Dictionary<T>, c: &[T], x: Vec<T>) -> Vec<T> {
    let support: Vec<usize> = (0..x.len()).filter(|&j| x[j] != T::zero()).collect();
    if support.is_empty() {
        return x;
    }
    let (coef, _) = least_squares_on_support(|i, j| d.gram(i, j), c, &support);
    let mut out = vec![T::zero(); x.len()];
    for (&j, &a) in support.iter().zip(&coef) {
        out[j] = a;
    }
    out
}

fn finish<T: Real>(
    d: &Dictionary<T>,
    y: &[T],
    x: Vec<T>,
    lambda: T,
    lasso: &Lasso<'_, T>,
    infeasible: bool,
    incomplete: bool,
) -> SparseSolution<T> {
    let mut sol = SparseSolution::finish(d, y, x, lasso.sweeps);
    sol.lambda = Some(lambda);
    sol.flags.infeasible = infeasible;
    sol.flags.bisection_incomplete = incomplete;
    sol.flags.iteration_limit = lasso.capped;
    sol
}
