//! Matching pursuit and orthogonal matching pursuit.

use super::{check_signal, excluded_mask, Dictionary, Method, SolverConfig, SparseSolution};
use crate::error::Result;
use crate::linalg::IncrementalCholesky;
use crate::scalar::{l2_norm, Real};

/// Correlations at or below this fraction of `‖y‖` count as zero.
const STALL: f64 = 1e-12;

/// Index of the largest `|c_j|` among available columns; lowest index on ties.
fn select<T: Real>(corr: &[T], blocked: &[bool]) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (j, &c) in corr.iter().enumerate() {
        if blocked[j] {
            continue;
        }
        if best.is_none_or(|(_, b)| c.abs() > b.abs()) {
            best = Some((j, c));
        }
    }
    best
}

pub fn mp<T: Real>(d: &Dictionary<T>, y: &[T], cfg: &SolverConfig) -> Result<SparseSolution<T>> {
    cfg.validate()?;
    check_signal(d, y)?;
    mp_excluding(d, y, cfg.epsilon.resolve(l2_norm(y)), cfg, &[])
}

pub fn omp<T: Real>(d: &Dictionary<T>, y: &[T], cfg: &SolverConfig) -> Result<SparseSolution<T>> {
    cfg.validate()?;
    check_signal(d, y)?;
    omp_excluding(d, y, cfg.epsilon.resolve(l2_norm(y)), cfg, &[])
}

pub(crate) fn mp_excluding<T: Real>(
    d: &Dictionary<T>,
    y: &[T],
    eps: T,
    cfg: &SolverConfig,
    excluded: &[usize],
) -> Result<SparseSolution<T>> {
    let blocked = excluded_mask(d.cols(), excluded);
    let max_iter = cfg.iterations_for(Method::Mp, d.cols());
    let y_norm = l2_norm(y);
    let stall = T::lit(STALL) * y_norm;
    let mut x = vec![T::zero(); d.cols()];
    let mut r = y.to_vec();
    let mut corr = d.correlate(y);
    let mut trace = vec![y_norm];
    let mut iterations = 0;
    let mut res = y_norm;
    while res > eps && iterations < max_iter {
        let Some((j, c)) = select(&corr, &blocked) else { break };
        if c.abs() <= stall {
            break;
        }
        x[j] += c;
        for (ri, &a) in r.iter_mut().zip(d.atom(j)) {
            *ri -= c * a;
        }
        for (ck, &g) in corr.iter_mut().zip(d.gram_row(j)) {
            *ck -= c * g;
        }
        iterations += 1;
        res = l2_norm(&r);
        trace.push(res);
    }
    let mut sol = SparseSolution::finish(d, y, x, iterations);
    sol.flags.iteration_limit = iterations == max_iter && sol.residual_norm > eps;
    sol.residual_trace = trace;
    Ok(sol)
}

pub(crate) fn omp_excluding<T: Real>(
    d: &Dictionary<T>,
    y: &[T],
    eps: T,
    cfg: &SolverConfig,
    excluded: &[usize],
) -> Result<SparseSolution<T>> {
    let mut blocked = excluded_mask(d.cols(), excluded);
    let max_iter = cfg.iterations_for(Method::Omp, d.cols());
    let y_norm = l2_norm(y);
    let stall = T::lit(STALL) * y_norm;
    let c0 = d.correlate(y);
    let mut corr = c0.clone();
    let mut support: Vec<usize> = Vec::new();
    let mut coef: Vec<T> = Vec::new();
    let mut chol = IncrementalCholesky::new();
    let mut trace = vec![y_norm];
    let mut res = y_norm;
    let mut rank_deficient = false;
    while res > eps && support.len() < max_iter {
        let Some((j, c)) = select(&corr, &blocked) else { break };
        if c.abs() <= stall {
            break;
        }
        let cross: Vec<T> = support.iter().map(|&k| d.gram(k, j)).collect();
        if !chol.push(&cross, d.gram(j, j), T::lit(1e-10)) {
            rank_deficient = true;
            break;
        }
        support.push(j);
        blocked[j] = true;
        let rhs: Vec<T> = support.iter().map(|&k| c0[k]).collect();
        coef = chol.solve(&rhs);
        // Dᵀr = Dᵀy − G[:, S] α
        corr.copy_from_slice(&c0);
        for (&k, &a) in support.iter().zip(&coef) {
            for (ci, &g) in corr.iter_mut().zip(d.gram_row(k)) {
                *ci -= a * g;
            }
        }
        let mut r = y.to_vec();
        for (&k, &a) in support.iter().zip(&coef) {
            for (ri, &v) in r.iter_mut().zip(d.atom(k)) {
                *ri -= a * v;
            }
        }
        res = l2_norm(&r);
        trace.push(res);
    }
    let mut x = vec![T::zero(); d.cols()];
    for (&k, &a) in support.iter().zip(&coef) {
        x[k] = a;
    }
    let iterations = support.len();
    let mut sol = SparseSolution::finish(d, y, x, iterations);
    sol.flags.rank_deficient = rank_deficient;
    sol.flags.iteration_limit = iterations == max_iter && sol.residual_norm > eps;
    sol.residual_trace = trace;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::dot;
    use crate::sparse::{normalize_columns, Epsilon};
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};

    fn exact() -> SolverConfig {
        SolverConfig {
            epsilon: Epsilon::Absolute(1e-12),
            ..Default::default()
        }
    }

    fn gaussian_dict(rng: &mut impl Rng, l: usize, s: usize) -> Dictionary<f64> {
        let cols: Vec<Vec<f64>> = (0..s)
            .map(|_| (0..l).map(|_| StandardNormal.sample(rng)).collect())
            .collect();
        let labels: Vec<usize> = (0..s).map(|j| j % 2).collect();
        normalize_columns(&cols, &labels, 2).unwrap()
    }

    #[test]
    fn mp_exact_atom() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let d = gaussian_dict(&mut rng, 8, 6);
        let y = d.atom(3).to_vec();
        let s = mp(&d, &y, &exact()).unwrap();
        assert_eq!(s.support, vec![3]);
        assert!((s.x[3] - 1.0).abs() < 1e-12);
        assert!(s.residual_norm < 1e-12);
        assert_eq!(s.iterations, 1);
    }

    #[test]
    fn orthogonal_signal_gives_empty_support() {
        let d = normalize_columns(&[vec![1.0f64, 0.0, 0.0], vec![0.0, 1.0, 0.0]], &[0, 1], 2).unwrap();
        let y = [0.0, 0.0, 2.0];
        for s in [mp(&d, &y, &exact()).unwrap(), omp(&d, &y, &exact()).unwrap()] {
            assert!(s.support.is_empty());
            assert_eq!(s.residual_norm, 2.0);
        }
    }

    #[test]
    fn mp_orthogonal_atoms_two_steps() {
        let d = normalize_columns(
            &[vec![1.0f64, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.6, 0.8]],
            &[0, 1, 1],
            2,
        )
        .unwrap();
        let y = [2.0, 1.0, 0.0];
        let s = mp(&d, &y, &exact()).unwrap();
        assert_eq!(s.iterations, 2);
        assert_eq!(s.support, vec![0, 1]);
        assert!((s.x[0] - 2.0).abs() < 1e-15 && (s.x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn omp_two_atom_span() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let d = gaussian_dict(&mut rng, 20, 30);
        let y: Vec<f64> = d
            .atom(4)
            .iter()
            .zip(d.atom(17))
            .map(|(a, b)| 1.5 * a - 0.7 * b)
            .collect();
        let s = omp(&d, &y, &exact()).unwrap();
        assert_eq!(s.iterations, 2);
        assert_eq!(s.support, vec![4, 17]);
        assert!(s.residual_norm < 1e-10);
    }

    #[test]
    fn omp_residual_orthogonal_each_iteration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let d = gaussian_dict(&mut rng, 30, 50);
        let y: Vec<f64> = (0..30).map(|_| StandardNormal.sample(&mut rng)).collect();
        for k in 1..=12 {
            let cfg = SolverConfig {
                epsilon: Epsilon::Absolute(0.0),
                max_iterations: Some(k),
                ..Default::default()
            };
            let s = omp(&d, &y, &cfg).unwrap();
            let rec = d.reconstruct(&s.x);
            let r: Vec<f64> = y.iter().zip(&rec).map(|(a, b)| a - b).collect();
            for &j in &s.support {
                assert!(dot(d.atom(j), &r).abs() < 1e-8);
            }
            assert!(s.residual_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
    }

    #[test]
    fn omp_planted_recovery() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let mut recovered = 0;
        for _ in 0..100 {
            let d = gaussian_dict(&mut rng, 64, 256);
            let mut plant = rand::seq::index::sample(&mut rng, 256, 5).into_vec();
            plant.sort_unstable();
            let mut y = vec![0.0; 64];
            for &j in &plant {
                let mag: f64 = rng.random_range(1.0..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                for (yi, a) in y.iter_mut().zip(d.atom(j)) {
                    *yi += mag * a;
                }
            }
            let cfg = SolverConfig {
                epsilon: Epsilon::Absolute(1e-9),
                ..Default::default()
            };
            let s = omp(&d, &y, &cfg).unwrap();
            if s.support == plant {
                recovered += 1;
            }
        }
        assert!(recovered >= 95, "recovered {recovered}/100");
    }

    #[test]
    fn ties_pick_lowest_index_and_exclusion_works() {
        let d = normalize_columns(&[vec![1.0f64, 1.0], vec![1.0, 1.0], vec![1.0, 0.0]], &[0, 1, 1], 2).unwrap();
        let y = [2.0, 2.0];
        let s = omp(&d, &y, &exact()).unwrap();
        assert_eq!(s.support, vec![0]);
        let s = omp_excluding(&d, &y, 0.0, &exact(), &[0]).unwrap();
        assert_eq!(s.support, vec![1]);
    }

    #[test]
    fn mp_residual_non_increasing() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let d = gaussian_dict(&mut rng, 16, 40);
        let y: Vec<f64> = (0..16).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = mp(
            &d,
            &y,
            &SolverConfig {
                epsilon: Epsilon::Absolute(0.0),
                max_iterations: Some(200),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(s.residual_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(s.residual_norm < 0.1 * l2_norm(&y));
    }

    #[test]
    fn rejects_bad_input() {
        let d = normalize_columns(&[vec![1.0f64, 0.0]], &[0], 1).unwrap();
        assert!(omp(&d, &[1.0], &exact()).is_err());
        assert!(mp(&d, &[f64::NAN, 0.0], &exact()).is_err());
    }
}
