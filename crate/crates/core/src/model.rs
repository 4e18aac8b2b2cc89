//! The general mean-variance problem, portfolio statistics and Pareto dominance.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::data_io::{AssetUniverse, FrontierRecord};
use crate::error::{Error, Result};

/// Budget tolerance used by [`validate`].
pub const BUDGET_TOLERANCE: f64 = 1e-9;
/// Slack allowed on the per-asset bounds by [`validate`].
pub const BOUND_TOLERANCE: f64 = 1e-12;
/// Variances in `(-NEGATIVE_VARIANCE_SLACK, 0)` are rounding noise and clamp to zero.
pub const NEGATIVE_VARIANCE_SLACK: f64 = 1e-12;

/// Universe plus risk aversion λ, cardinality K and per-asset bounds `[ε_i, δ_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioProblem {
    universe: Arc<AssetUniverse>,
    lambda: f64,
    k: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PortfolioProblem {
    pub fn new(
        universe: Arc<AssetUniverse>,
        lambda: f64,
        k: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let n = universe.n();
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::domain(format!("lambda {lambda} outside [0, 1]")));
        }
        if k < 1 || k > n {
            return Err(Error::domain(format!("cardinality {k} outside 1..={n}")));
        }
        for bounds in [&lower, &upper] {
            if bounds.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: bounds.len(),
                });
            }
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::domain(format!(
                    "bounds [{lo}, {hi}] of asset {} violate 0 <= lower <= upper <= 1",
                    i + 1
                )));
            }
        }
        Ok(PortfolioProblem {
            universe,
            lambda,
            k,
            lower,
            upper,
        })
    }

    /// Same `ε` and `δ` for every asset.
    pub fn uniform(
        universe: Arc<AssetUniverse>,
        lambda: f64,
        k: usize,
        lower: f64,
        upper: f64,
    ) -> Result<Self> {
        let n = universe.n();
        PortfolioProblem::new(universe, lambda, k, vec![lower; n], vec![upper; n])
    }

    /// A copy of this problem at another risk aversion.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::domain(format!("lambda {lambda} outside [0, 1]")));
        }
        Ok(PortfolioProblem {
            lambda,
            ..self.clone()
        })
    }

    pub fn universe(&self) -> &AssetUniverse {
        &self.universe
    }

    pub fn shared_universe(&self) -> &Arc<AssetUniverse> {
        &self.universe
    }

    pub fn n(&self) -> usize {
        self.universe.n()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Objective of a dense weight vector at this problem's λ.
    pub fn objective(&self, weights: &[f64]) -> Result<f64> {
        objective(&self.universe, self.lambda, weights)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortfolioStats {
    pub mean_return: f64,
    pub variance: f64,
    pub objective: f64,
}

/// Selected assets (the `z_i = 1` set) with their proportions.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio {
    /// Ascending asset indices.
    pub selection: Vec<usize>,
    /// Proportion for each entry of `selection`.
    pub weights: Vec<f64>,
    pub stats: Option<PortfolioStats>,
}

impl Portfolio {
    pub fn new(selection: Vec<usize>, weights: Vec<f64>) -> Self {
        Portfolio {
            selection,
            weights,
            stats: None,
        }
    }

    /// Dense weight vector of length `n`.
    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (&i, &w) in self.selection.iter().zip(&self.weights) {
            x[i] = w;
        }
        x
    }

    /// Computes and stores return, variance and objective for `problem`.
    pub fn evaluate(&mut self, problem: &PortfolioProblem) -> Result<PortfolioStats> {
        let x = self.dense(problem.n());
        let (mean_return, variance) = portfolio_stats(problem.universe(), &x)?;
        let stats = PortfolioStats {
            mean_return,
            variance,
            objective: scalarize(problem.lambda(), mean_return, variance),
        };
        self.stats = Some(stats);
        Ok(stats)
    }

    /// Frontier record for an evaluated portfolio. Zero weights are dropped.
    pub fn to_record(&self, lambda: f64, source: &str) -> Option<FrontierRecord> {
        let stats = self.stats?;
        Some(FrontierRecord {
            lambda,
            mean_return: stats.mean_return,
            variance: stats.variance,
            objective: stats.objective,
            source: source.to_string(),
            weights: self
                .selection
                .iter()
                .zip(&self.weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(&i, &w)| (i, w))
                .collect(),
        })
    }
}

/// `λ·v − (1−λ)·r`.
#[inline]
pub fn scalarize(lambda: f64, mean_return: f64, variance: f64) -> f64 {
    lambda * variance - (1.0 - lambda) * mean_return
}

/// `λ·xᵀΣx − (1−λ)·μᵀx` for a dense weight vector.
pub fn objective(universe: &AssetUniverse, lambda: f64, weights: &[f64]) -> Result<f64> {
    let (r, v) = portfolio_stats(universe, weights)?;
    Ok(scalarize(lambda, r, v))
}

/// `(μᵀx, xᵀΣx)` for a dense weight vector.
pub fn portfolio_stats(universe: &AssetUniverse, weights: &[f64]) -> Result<(f64, f64)> {
    let n = universe.n();
    if weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    let mut mean_return = 0.0;
    let mut variance = 0.0;
    for (i, &xi) in weights.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        mean_return += universe.mean_return(i) * xi;
        let row = universe.cov_row(i);
        let mut acc = 0.0;
        for (&s, &xj) in row.iter().zip(weights) {
            acc += s * xj;
        }
        variance += xi * acc;
    }
    Ok((mean_return, clamp_variance(variance)?))
}

fn clamp_variance(variance: f64) -> Result<f64> {
    if variance >= 0.0 {
        Ok(variance)
    } else if variance > -NEGATIVE_VARIANCE_SLACK {
        Ok(0.0)
    } else {
        Err(Error::domain(format!(
            "portfolio variance {variance} is negative; covariance is not positive semidefinite"
        )))
    }
}

/// Strict Pareto dominance on `(variance, return)`: lower variance and higher
/// return are better.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    let (va, ra) = a;
    let (vb, rb) = b;
    va <= vb && ra >= rb && (va < vb || ra > rb)
}

/// Nondominated subset sorted by ascending variance. Exact `(v, r)`
/// duplicates keep the first record encountered.
pub fn pareto_filter(points: &[FrontierRecord]) -> Vec<FrontierRecord> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    // Stable: equal (v, r) keep input order.
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&points[a], &points[b]);
        pa.variance
            .total_cmp(&pb.variance)
            .then_with(|| pb.mean_return.total_cmp(&pa.mean_return))
    });
    let mut best_return = f64::NEG_INFINITY;
    let mut out = Vec::new();
    for idx in order {
        let p = &points[idx];
        if p.mean_return > best_return {
            best_return = p.mean_return;
            out.push(p.clone());
        }
    }
    out
}

/// Ordering used for frontiers: ascending variance, then descending return.
pub(crate) fn frontier_order(a: &FrontierRecord, b: &FrontierRecord) -> Ordering {
    a.variance
        .total_cmp(&b.variance)
        .then_with(|| b.mean_return.total_cmp(&a.mean_return))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Budget {
        sum: f64,
    },
    Cardinality {
        expected: usize,
        found: usize,
    },
    LowerBound {
        asset: usize,
        weight: f64,
        bound: f64,
    },
    UpperBound {
        asset: usize,
        weight: f64,
        bound: f64,
    },
    /// Selection index outside the universe, or listed twice.
    Selection {
        asset: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Budget { sum } => write!(f, "budget: weights sum to {sum}"),
            Violation::Cardinality { expected, found } => {
                write!(
                    f,
                    "cardinality: {found} assets selected, {expected} required"
                )
            }
            Violation::LowerBound {
                asset,
                weight,
                bound,
            } => {
                write!(f, "lower-bound {}: {weight} < {bound}", asset + 1)
            }
            Violation::UpperBound {
                asset,
                weight,
                bound,
            } => {
                write!(f, "upper-bound {}: {weight} > {bound}", asset + 1)
            }
            Violation::Selection { asset } => write!(f, "selection: invalid asset {}", asset + 1),
        }
    }
}

/// Checks budget, cardinality and per-asset bounds; empty means feasible.
pub fn validate(problem: &PortfolioProblem, portfolio: &Portfolio) -> Vec<Violation> {
    let mut violations = Vec::new();
    let n = problem.n();
    let mut seen = vec![false; n];
    for &i in &portfolio.selection {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            violations.push(Violation::Selection { asset: i });
        }
    }
    if portfolio.selection.len() != portfolio.weights.len() {
        violations.push(Violation::Cardinality {
            expected: portfolio.selection.len(),
            found: portfolio.weights.len(),
        });
        return violations;
    }
    let sum: f64 = portfolio.weights.iter().sum();
    if (sum - 1.0).abs() > BUDGET_TOLERANCE {
        violations.push(Violation::Budget { sum });
    }
    if portfolio.selection.len() != problem.k() {
        violations.push(Violation::Cardinality {
            expected: problem.k(),
            found: portfolio.selection.len(),
        });
    }
    for (&i, &w) in portfolio.selection.iter().zip(&portfolio.weights) {
        if i >= n {
            continue;
        }
        if w < problem.lower()[i] - BOUND_TOLERANCE {
            violations.push(Violation::LowerBound {
                asset: i,
                weight: w,
                bound: problem.lower()[i],
            });
        }
        if w > problem.upper()[i] + BOUND_TOLERANCE {
            violations.push(Violation::UpperBound {
                asset: i,
                weight: w,
                bound: problem.upper()[i],
            });
        }
    }
    violations
}
