use std::cmp::Ordering;
use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SubsetEvaluator;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_STALL_LIMIT: usize = 5;

/// Merit gains below this fraction of the current best do not count.
const IMPROVEMENT_TOL: f64 = 1e-12;

fn improves<T: Real>(candidate: T, best: T) -> bool {
    candidate > best + T::lit(IMPROVEMENT_TOL) * best.abs().max(T::one())
}

#[derive(Debug, Clone)]
struct Node<T> {
    subset: Vec<usize>,
    merit: T,
}

/// Higher merit first, then smaller subsets, then lexicographically smaller.
fn rank<T: Real>(a: &Node<T>, b: &Node<T>) -> Ordering {
    b.merit
        .partial_cmp(&a.merit)
        .unwrap_or(Ordering::Equal)
        .then(a.subset.len().cmp(&b.subset.len()))
        .then(a.subset.cmp(&b.subset))
}

/// Forward best-first search over the subset lattice.
///
/// The open node with the highest merit is expanded by every single-feature
/// addition. The search stops after `stall_limit` consecutive expansions that
/// fail to improve the best subset, or when no open nodes remain. Returns the
/// best subset in ascending index order; empty only when there are no features.
pub fn best_first<T: Real, E: SubsetEvaluator<T>>(eval: &E, stall_limit: usize) -> Vec<usize> {
    let n = eval.num_features();
    let stall_limit = stall_limit.max(1);
    let mut open = vec![Node {
        subset: Vec::new(),
        merit: T::neg_infinity(),
    }];
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    visited.insert(Vec::new());
    let mut best: Option<Node<T>> = None;
    let mut stall = 0;
    while stall < stall_limit && !open.is_empty() {
        let pick = (0..open.len())
            .min_by(|&a, &b| rank(&open[a], &open[b]))
            .expect("open list is non-empty");
        let node = open.swap_remove(pick);
        let fresh: Vec<Vec<usize>> = (0..n)
            .filter(|f| node.subset.binary_search(f).is_err())
            .map(|f| {
                let mut s = node.subset.clone();
                let at = s.partition_point(|&x| x < f);
                s.insert(at, f);
                s
            })
            .filter(|s| visited.insert(s.clone()))
            .collect();
        let children: Vec<Node<T>> = fresh
            .into_par_iter()
            .map(|subset| {
                let merit = eval.merit(&subset);
                Node { subset, merit }
            })
            .collect();
        let top = children.iter().min_by(|a, b| rank(a, b)).cloned();
        open.extend(children);
        match (top, &best) {
            (Some(t), None) => {
                best = Some(t);
                stall = 0;
            }
            (Some(t), Some(b)) if improves(t.merit, b.merit) => {
                best = Some(t);
                stall = 0;
            }
            _ => stall += 1,
        }
    }
    best.map(|b| b.subset).unwrap_or_default()
}

/// Genetic algorithm hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub crossover: f64,
    pub mutation: f64,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 50,
            generations: 20,
            crossover: 0.6,
            mutation: 0.033,
            seed: 0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::invalid("GA population must be at least 2"));
        }
        for (name, p) in [("crossover", self.crossover), ("mutation", self.mutation)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("GA {name} probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

fn members(chromosome: &[bool]) -> Vec<usize> {
    chromosome
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect()
}

fn fitness<T: Real, E: SubsetEvaluator<T>>(eval: &E, pop: &[Vec<bool>]) -> Vec<T> {
    pop.par_iter().map(|c| eval.merit(&members(c))).collect()
}

/// First index of the largest value.
fn argmax<T: Real>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Single feature with the highest individual merit, lowest index on ties.
fn best_single<T: Real, E: SubsetEvaluator<T>>(eval: &E) -> Option<usize> {
    let n = eval.num_features();
    let merits: Vec<T> = (0..n).into_par_iter().map(|f| eval.merit(&[f])).collect();
    (n > 0).then(|| argmax(&merits))
}

/// Genetic search from a random initial population.
///
/// Chromosomes are feature bitmasks with each bit set with probability ½.
/// The last initial chromosome is replaced by the best single feature, so the
/// result never scores below it.
pub fn genetic_search<T: Real, E: SubsetEvaluator<T>>(eval: &E, params: &GaParams) -> Result<Vec<usize>> {
    params.validate()?;
    let n = eval.num_features();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut pop: Vec<Vec<bool>> = (0..params.population)
        .map(|_| (0..n).map(|_| rng.random_bool(0.5)).collect())
        .collect();
    if let Some(f) = best_single(eval) {
        let last = pop.last_mut().expect("population of at least 2");
        last.iter_mut().for_each(|b| *b = false);
        last[f] = true;
    }
    evolve(eval, params, pop, rng)
}

/// Genetic search from a given initial population.
///
/// Each generation keeps the fittest chromosome unchanged and fills the rest
/// with offspring of size-2 tournament winners: single-point crossover with
/// probability `crossover`, then independent bit flips with probability
/// `mutation`. Returns the best chromosome ever seen; an empty one falls back
/// to the best single feature.
pub fn genetic_search_from<T: Real, E: SubsetEvaluator<T>>(
    eval: &E,
    params: &GaParams,
    initial: Vec<Vec<bool>>,
) -> Result<Vec<usize>> {
    params.validate()?;
    if initial.len() != params.population {
        return Err(Error::DimensionMismatch {
            expected: params.population,
            found: initial.len(),
        });
    }
    if let Some(c) = initial.iter().find(|c| c.len() != eval.num_features()) {
        return Err(Error::DimensionMismatch {
            expected: eval.num_features(),
            found: c.len(),
        });
    }
    evolve(eval, params, initial, ChaCha8Rng::seed_from_u64(params.seed))
}

fn evolve<T: Real, E: SubsetEvaluator<T>>(
    eval: &E,
    params: &GaParams,
    mut pop: Vec<Vec<bool>>,
    mut rng: ChaCha8Rng,
) -> Result<Vec<usize>> {
    let n = eval.num_features();
    let size = pop.len();
    let mut fit = fitness(eval, &pop);
    let mut elite = argmax(&fit);
    let mut best = (pop[elite].clone(), fit[elite]);
    for _ in 0..params.generations {
        let mut next = Vec::with_capacity(size);
        next.push(pop[elite].clone());
        while next.len() < size {
            let tournament = |rng: &mut ChaCha8Rng| {
                let (a, b) = (rng.random_range(0..size), rng.random_range(0..size));
                if fit[b] > fit[a] {
                    b
                } else {
                    a
                }
            };
            let (p1, p2) = (tournament(&mut rng), tournament(&mut rng));
            let (mut c1, mut c2) = (pop[p1].clone(), pop[p2].clone());
            if n >= 2 && rng.random_bool(params.crossover) {
                let cut = rng.random_range(1..n);
                for i in cut..n {
                    std::mem::swap(&mut c1[i], &mut c2[i]);
                }
            }
            for c in [&mut c1, &mut c2] {
                for bit in c.iter_mut() {
                    if rng.random_bool(params.mutation) {
                        *bit = !*bit;
                    }
                }
            }
            next.push(c1);
            if next.len() < size {
                next.push(c2);
            }
        }
        pop = next;
        fit = fitness(eval, &pop);
        elite = argmax(&fit);
        if fit[elite] > best.1 {
            best = (pop[elite].clone(), fit[elite]);
        }
    }
    let subset = members(&best.0);
    if subset.is_empty() {
        return Ok(best_single(eval).into_iter().collect());
    }
    Ok(subset)
}
