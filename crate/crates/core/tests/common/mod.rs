#![allow(dead_code)]

use std::sync::Arc;

use nnport::{AssetUniverse, FrontierRecord};
use rand::Rng;

/// Random universe with a factor-model covariance, which is positive
/// semidefinite and exactly symmetric by construction.
pub fn random_universe<R: Rng + ?Sized>(rng: &mut R, n: usize) -> AssetUniverse {
    let factors = 3;
    let loadings: Vec<f64> = (0..n * factors)
        .map(|_| rng.gen_range(-0.04..0.04))
        .collect();
    let idio: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0001..0.002)).collect();
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s: f64 = (0..factors)
                .map(|f| loadings[i * factors + f] * loadings[j * factors + f])
                .sum();
            if i == j {
                s += idio[i];
            }
            cov[i * n + j] = s;
        }
    }
    let mu = (0..n).map(|_| rng.gen_range(-0.005..0.015)).collect();
    AssetUniverse::new(mu, cov).expect("factor covariance is valid")
}

pub fn shared_universe<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Arc<AssetUniverse> {
    Arc::new(random_universe(rng, n))
}

pub fn record(variance: f64, mean_return: f64, source: &str) -> FrontierRecord {
    FrontierRecord {
        lambda: 0.5,
        mean_return,
        variance,
        objective: 0.5 * variance - 0.5 * mean_return,
        source: source.to_string(),
        weights: vec![(0, 1.0)],
    }
}

/// All `(variance, return)` pairs not dominated by any other pair, deduplicated
/// and sorted by variance. Quadratic reference for the Pareto filter.
pub fn brute_force_front(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(v, r)| {
            !points
                .iter()
                .any(|&(v2, r2)| v2 <= v && r2 >= r && (v2 < v || r2 > r))
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    out.dedup();
    out
}

/// Exhaustive search over the simplex grid with step `1/steps`, returning the
/// smallest value of `f`.
pub fn simplex_grid_min(n: usize, steps: usize, f: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
    fn recurse(
        x: &mut Vec<f64>,
        left: usize,
        n: usize,
        steps: usize,
        f: &mut dyn FnMut(&[f64]) -> f64,
        best: &mut f64,
    ) {
        if x.len() == n - 1 {
            x.push(left as f64 / steps as f64);
            *best = best.min(f(x));
            x.pop();
            return;
        }
        for units in 0..=left {
            x.push(units as f64 / steps as f64);
            recurse(x, left - units, n, steps, f, best);
            x.pop();
        }
    }
    let mut best = f64::INFINITY;
    recurse(&mut Vec::with_capacity(n), steps, n, steps, f, &mut best);
    best
}
