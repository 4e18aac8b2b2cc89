//! The neural-network heuristic: a λ sweep where, for every λ, a population
//! of random K-asset portfolios is improved by relaxing a full-universe
//! Hopfield network, pruning its weakest neuron down to K, repairing the
//! result and archiving every nondominated `(variance, return)` point.
//!
//! Each `(repetition, λ)` cell owns its own RNG stream derived from the seed,
//! so cells run in parallel and the result does not depend on scheduling.

use rand::distributions::{Distribution, Open01};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data_io::FrontierRecord;
use crate::error::{Error, Result};
use crate::hopfield::HopfieldNetwork;
use crate::model::{dominates, frontier_order, Portfolio, PortfolioProblem};
use crate::repair::repair;

/// Source tag of heuristic records.
pub const NN_SOURCE: &str = "NN";

/// Gain used when the best initial objective is exactly zero.
pub const FALLBACK_GAIN: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicConfig {
    /// λ grid step Δλ.
    pub delta_lambda: f64,
    /// Population size M.
    pub pop_size: usize,
    /// Independent restarts of the whole λ sweep.
    pub repetitions: usize,
    pub seed: u64,
    /// The gain is divided by this after every outer iteration.
    pub gain_divisor: f64,
    /// Outer iterations T; `None` means `M / 2`.
    pub inner_t: Option<usize>,
    /// Candidates per outer iteration R; `None` means `2N`.
    pub inner_r: Option<usize>,
    /// Run `(repetition, λ)` cells on the rayon pool.
    pub parallel: bool,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            delta_lambda: 0.1,
            pop_size: 40,
            repetitions: 3,
            seed: 0,
            gain_divisor: 0.95,
            inner_t: None,
            inner_r: None,
            parallel: true,
        }
    }
}

impl HeuristicConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_lambda > 0.0 && self.delta_lambda <= 1.0) {
            return Err(Error::domain(format!(
                "delta lambda {} outside (0, 1]",
                self.delta_lambda
            )));
        }
        if self.pop_size < 2 {
            return Err(Error::domain(format!(
                "population size {} is below 2",
                self.pop_size
            )));
        }
        if !(self.gain_divisor > 0.0 && self.gain_divisor < 1.0) {
            return Err(Error::domain(format!(
                "gain divisor {} outside (0, 1)",
                self.gain_divisor
            )));
        }
        Ok(())
    }

    pub fn outer_iterations(&self) -> usize {
        self.inner_t.unwrap_or(self.pop_size / 2)
    }

    pub fn candidates_per_iteration(&self, n: usize) -> usize {
        self.inner_r.unwrap_or(2 * n)
    }

    /// Portfolios evaluated per λ: `M + T·R`.
    pub fn evaluations_per_lambda(&self, n: usize) -> u64 {
        (self.pop_size + self.outer_iterations() * self.candidates_per_iteration(n)) as u64
    }

    /// `{0, Δλ, 2Δλ, …} ∪ {1}`, built by index.
    pub fn lambda_grid(&self) -> Vec<f64> {
        let mut grid = Vec::new();
        let mut j = 0u32;
        loop {
            let lambda = j as f64 * self.delta_lambda;
            if lambda >= 1.0 - 1e-9 {
                break;
            }
            grid.push(lambda);
            j += 1;
        }
        grid.push(1.0);
        grid
    }
}

/// Nondominated records plus the number of portfolios evaluated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParetoArchive {
    /// Sorted by ascending variance.
    points: Vec<FrontierRecord>,
    evaluations: u64,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn points(&self) -> &[FrontierRecord] {
        &self.points
    }

    pub fn into_points(self) -> Vec<FrontierRecord> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn record_evaluation(&mut self) {
        self.evaluations += 1;
    }

    /// Inserts `record` unless an archived point dominates it or sits at the
    /// same `(v, r)`; evicts archived points it dominates. Returns whether it
    /// was inserted.
    pub fn insert(&mut self, record: FrontierRecord) -> bool {
        let p = record.point();
        if self
            .points
            .iter()
            .any(|q| q.point() == p || dominates(q.point(), p))
        {
            return false;
        }
        self.points.retain(|q| !dominates(p, q.point()));
        let at = self
            .points
            .partition_point(|q| frontier_order(q, &record).is_lt());
        self.points.insert(at, record);
        true
    }

    /// Pareto union; evaluation counts add.
    pub fn merge(&mut self, other: ParetoArchive) {
        self.evaluations += other.evaluations;
        for record in other.points {
            self.insert(record);
        }
    }
}

/// Initial gain `max(1, ⌊10 / |f_min|⌋)`, or [`FALLBACK_GAIN`] when `f_min = 0`.
pub fn starting_gain(f_min: f64) -> f64 {
    if f_min == 0.0 || !f_min.is_finite() {
        return FALLBACK_GAIN;
    }
    (10.0 / f_min.abs()).floor().max(1.0)
}

/// Repairs `raw` over `selection` and evaluates the result.
pub fn evaluate(
    problem: &PortfolioProblem,
    selection: Vec<usize>,
    raw: &[f64],
) -> Result<Portfolio> {
    let weights = repair(problem, &selection, raw)?;
    let mut portfolio = Portfolio::new(selection, weights);
    portfolio.evaluate(problem)?;
    Ok(portfolio)
}

/// Counts one evaluation and offers the (already evaluated) portfolio to the archive.
pub fn archive_portfolio(
    problem: &PortfolioProblem,
    portfolio: &Portfolio,
    archive: &mut ParetoArchive,
) {
    archive.record_evaluation();
    if let Some(record) = portfolio.to_record(problem.lambda(), NN_SOURCE) {
        archive.insert(record);
    }
}

/// Repairs, evaluates and archives a candidate.
pub fn evaluate_into_archive(
    problem: &PortfolioProblem,
    selection: Vec<usize>,
    raw: &[f64],
    archive: &mut ParetoArchive,
) -> Result<Portfolio> {
    let portfolio = evaluate(problem, selection, raw)?;
    archive_portfolio(problem, &portfolio, archive);
    Ok(portfolio)
}

/// `size` portfolios of K distinct uniformly drawn assets with uniform (0, 1)
/// raw weights, repaired and evaluated.
pub fn initialise_population<R: Rng + ?Sized>(
    problem: &PortfolioProblem,
    size: usize,
    rng: &mut R,
) -> Result<Vec<Portfolio>> {
    if size < 1 {
        return Err(Error::domain("population size must be at least 1"));
    }
    (0..size)
        .map(|_| {
            let mut selection = index::sample(rng, problem.n(), problem.k()).into_vec();
            selection.sort_unstable();
            let raw: Vec<f64> = (0..selection.len()).map(|_| Open01.sample(rng)).collect();
            evaluate(problem, selection, &raw)
        })
        .collect()
}

fn objective_of(p: &Portfolio) -> f64 {
    p.stats.map_or(f64::INFINITY, |s| s.objective)
}

/// Position of the population member with the largest objective (first on ties).
fn worst_member(population: &[Portfolio]) -> usize {
    let mut worst = 0;
    for (i, p) in population.iter().enumerate().skip(1) {
        if objective_of(p) > objective_of(&population[worst]) {
            worst = i;
        }
    }
    worst
}

/// One member lifted to a full-universe network state: selected assets keep
/// their weights, the rest start at their lower bound.
fn lifted_state(problem: &PortfolioProblem, member: &Portfolio) -> Vec<f64> {
    let mut state = problem.lower().to_vec();
    for (&i, &w) in member.selection.iter().zip(&member.weights) {
        state[i] = w.clamp(problem.lower()[i], problem.upper()[i]);
    }
    state
}

/// Relaxes the full network, prunes down to K neurons and relaxes once more.
/// Returns the surviving assets and their states.
pub fn prune_and_relax<R: Rng + ?Sized>(
    problem: &PortfolioProblem,
    initial_state: &[f64],
    gain: f64,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let all: Vec<usize> = (0..problem.n()).collect();
    let mut net = HopfieldNetwork::build(problem, &all, initial_state, gain)?;
    while net.len() > problem.k() {
        net.relax(rng);
        net.prune_worst()?;
    }
    net.relax(rng);
    Ok((net.active().to_vec(), net.state().to_vec()))
}

/// All evaluations for one λ: the initial population and `T·R` candidates.
pub fn run_lambda<R: Rng + ?Sized>(
    problem: &PortfolioProblem,
    config: &HeuristicConfig,
    rng: &mut R,
    archive: &mut ParetoArchive,
) -> Result<()> {
    config.validate()?;
    let mut population = initialise_population(problem, config.pop_size, rng)?;
    for member in &population {
        archive_portfolio(problem, member, archive);
    }

    let best = population
        .iter()
        .map(objective_of)
        .fold(f64::INFINITY, f64::min);
    let mut gain = starting_gain(best);
    for _ in 0..config.outer_iterations() {
        for _ in 0..config.candidates_per_iteration(problem.n()) {
            let pick = rng.gen_range(0..population.len());
            let state = lifted_state(problem, &population[pick]);
            let (selection, raw) = prune_and_relax(problem, &state, gain, rng)?;
            let candidate = evaluate_into_archive(problem, selection, &raw, archive)?;
            let worst = worst_member(&population);
            population[worst] = candidate;
        }
        gain /= config.gain_divisor;
    }
    Ok(())
}

/// RNG stream of one `(repetition, λ index)` cell.
pub fn cell_rng(seed: u64, repetition: usize, lambda_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((repetition as u64) << 32) | lambda_index as u64);
    rng
}

/// Sweeps λ over the grid `repetitions` times and returns the shared archive.
/// `family`'s own λ is ignored.
pub fn run(family: &PortfolioProblem, config: &HeuristicConfig) -> Result<ParetoArchive> {
    config.validate()?;
    let grid = config.lambda_grid();
    let cells: Vec<(usize, usize, f64)> = (0..config.repetitions)
        .flat_map(|rep| grid.iter().enumerate().map(move |(j, &l)| (rep, j, l)))
        .collect();

    let solve = |&(rep, j, lambda): &(usize, usize, f64)| -> Result<ParetoArchive> {
        let problem = family.with_lambda(lambda)?;
        let mut rng = cell_rng(config.seed, rep, j);
        let mut archive = ParetoArchive::new();
        run_lambda(&problem, config, &mut rng, &mut archive)?;
        Ok(archive)
    };
    let results: Vec<Result<ParetoArchive>> = if config.parallel {
        cells.par_iter().map(solve).collect()
    } else {
        cells.iter().map(solve).collect()
    };

    let mut archive = ParetoArchive::new();
    for cell in results {
        archive.merge(cell?);
    }
    Ok(archive)
}
