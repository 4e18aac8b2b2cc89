//! Exact standard frontier: `min λ·xᵀΣx − (1−λ)·μᵀx` over the unit simplex,
//! solved on a λ grid.
//!
//! The solver is Frank-Wolfe with away steps. The linear minimisation oracle
//! over the simplex is a coordinate argmin of the gradient, the line search
//! is closed-form for a quadratic, and the Frank-Wolfe duality gap
//! `gᵀ(x − s)` certifies suboptimality. Away steps give linear convergence
//! when the optimum sits on a face of the simplex, where the plain method
//! zig-zags.

use rayon::prelude::*;

use crate::data_io::{AssetUniverse, FrontierRecord};
use crate::error::{Error, Result};
use crate::model::{frontier_order, pareto_filter, portfolio_stats, scalarize};

pub const GAP_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100_000;
const CURVATURE_FLOOR: f64 = 1e-18;

/// Source tag of standard-frontier records.
pub const STANDARD_SOURCE: &str = "STD";

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution {
    pub weights: Vec<f64>,
    /// Frank-Wolfe duality gap at the returned point.
    pub gap: f64,
    pub iterations: usize,
}

/// Minimises `λ·xᵀΣx − (1−λ)·μᵀx` subject to `Σx = 1`, `x ≥ 0`.
pub fn solve_qp_simplex(universe: &AssetUniverse, lambda: f64) -> Result<SimplexSolution> {
    if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("lambda {lambda} outside [0, 1]")));
    }
    let n = universe.n();
    let mu = universe.mean_returns();
    let mut x = vec![1.0 / n as f64; n];
    let mut sigma_x = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut dir = vec![0.0; n];

    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        mat_vec(universe, &x, &mut sigma_x);
        for i in 0..n {
            grad[i] = 2.0 * lambda * sigma_x[i] - (1.0 - lambda) * mu[i];
        }
        let g_x: f64 = grad.iter().zip(&x).map(|(g, x)| g * x).sum();

        // Ties go to the lowest index in both oracles.
        let mut s = 0;
        for i in 1..n {
            if grad[i] < grad[s] {
                s = i;
            }
        }
        gap = g_x - grad[s];
        if gap <= GAP_TOLERANCE {
            break;
        }
        iterations += 1;

        let mut away = None;
        for i in (0..n).filter(|&i| x[i] > 0.0) {
            if away.is_none_or(|a: usize| grad[i] > grad[a]) {
                away = Some(i);
            }
        }
        let away = away.expect("simplex iterate has nonempty support");
        let away_gap = grad[away] - g_x;

        // A linear objective (λ = 0) is solved exactly by one toward step.
        let (max_step, toward) = if lambda == 0.0 || gap >= away_gap || x[away] >= 1.0 {
            for i in 0..n {
                dir[i] = -x[i];
            }
            dir[s] += 1.0;
            (1.0, true)
        } else {
            dir.copy_from_slice(&x);
            dir[away] -= 1.0;
            (x[away] / (1.0 - x[away]), false)
        };

        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        let curvature = lambda * quad_form(universe, &dir);
        let step = if curvature > CURVATURE_FLOOR {
            (-slope / (2.0 * curvature)).clamp(0.0, max_step)
        } else if slope < 0.0 {
            max_step
        } else {
            0.0
        };
        if step == 0.0 {
            // No descent along either direction: the gap is rounding noise.
            break;
        }

        if toward && step == 1.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            x[s] = 1.0;
        } else {
            for i in 0..n {
                x[i] = (x[i] + step * dir[i]).max(0.0);
            }
            if !toward && step == max_step {
                x[away] = 0.0;
            }
        }
    }

    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::domain("solver produced non-finite weights"));
    }
    Ok(SimplexSolution {
        weights: x,
        gap,
        iterations,
    })
}

fn mat_vec(universe: &AssetUniverse, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = universe.cov_row(i).iter().zip(x).map(|(s, x)| s * x).sum();
    }
}

fn quad_form(universe: &AssetUniverse, d: &[f64]) -> f64 {
    (0..d.len())
        .filter(|&i| d[i] != 0.0)
        .map(|i| {
            d[i] * universe
                .cov_row(i)
                .iter()
                .zip(d)
                .map(|(s, d)| s * d)
                .sum::<f64>()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveDiagnostics {
    pub lambda: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Pareto-filtered standard frontier, sorted by ascending variance.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFrontier {
    pub points: Vec<FrontierRecord>,
    /// One entry per solved λ, in grid order. Empty when loaded from CSV.
    pub diagnostics: Vec<SolveDiagnostics>,
}

impl StandardFrontier {
    /// Wraps externally produced frontier points (e.g. read back from CSV).
    pub fn from_records(records: &[FrontierRecord]) -> Self {
        let mut points = pareto_filter(records);
        points.sort_by(frontier_order);
        StandardFrontier {
            points,
            diagnostics: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lambda_count(&self) -> usize {
        self.diagnostics.len()
    }

    /// Largest duality gap over all solves.
    pub fn max_gap(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.gap).fold(0.0, f64::max)
    }
}

/// Solves at `λ_j = j / (lambda_count − 1)` and keeps the nondominated points.
pub fn trace_standard_frontier(
    universe: &AssetUniverse,
    lambda_count: usize,
) -> Result<StandardFrontier> {
    if lambda_count < 2 {
        return Err(Error::domain(format!(
            "lambda count {lambda_count} is below 2"
        )));
    }
    let last = (lambda_count - 1) as f64;
    let solved = (0..lambda_count)
        .into_par_iter()
        .map(|j| {
            let lambda = j as f64 / last;
            let sol = solve_qp_simplex(universe, lambda)?;
            let (mean_return, variance) = portfolio_stats(universe, &sol.weights)?;
            let record = FrontierRecord {
                lambda,
                mean_return,
                variance,
                objective: scalarize(lambda, mean_return, variance),
                source: STANDARD_SOURCE.to_string(),
                weights: sol
                    .weights
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(i, &w)| (i, w))
                    .collect(),
            };
            let diag = SolveDiagnostics {
                lambda,
                gap: sol.gap,
                iterations: sol.iterations,
            };
            Ok((record, diag))
        })
        .collect::<Result<Vec<_>>>()?;

    let (records, diagnostics): (Vec<_>, Vec<_>) = solved.into_iter().unzip();
    let mut frontier = StandardFrontier::from_records(&records);
    frontier.diagnostics = diagnostics;
    Ok(frontier)
}
