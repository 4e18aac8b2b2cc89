//! Continuous Hopfield network whose energy equals the portfolio objective.
//!
//! With `w_ij = −2λσ_ij` and `b_i = (1−λ)μ_i` the energy
//! `E(x) = −½ Σ_ij x_i w_ij x_j − Σ_i b_i x_i` is exactly
//! `λ·xᵀΣx − (1−λ)·μᵀx`. Each neuron's output lies in its asset's
//! `[ε_i, δ_i]` through a sigmoid with shared gain β.
//!
//! Updates are asynchronous and damped,
//! `x_i ← (1−α_i)·x_i + α_i·G_i(Σ_j w_ji x_j + b_i)`,
//! with `α_i` chosen so that `w_ii > −(2 − α_i)/(α_i β)`. Under that condition
//! the sequential dynamics of a symmetric network converge to fixed points
//! instead of 2-cycles.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::PortfolioProblem;

/// A sweep whose largest state change is at most this counts as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;
/// Sweep cap per relaxation.
pub const MAX_SWEEPS: usize = 100;
/// Safety factor applied to the largest admissible relaxation factor.
pub const ALPHA_SAFETY: f64 = 0.9;

/// Sigmoid `ε + (δ−ε) / (1 + exp(−β·y))`, saturating cleanly for large `|β·y|`.
#[inline]
pub fn activation(y: f64, lower: f64, upper: f64, gain: f64) -> f64 {
    let z = gain * y;
    let s = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    lower + (upper - lower) * s
}

/// Relaxation factor α for a neuron with self-weight `w_ii` at gain `β`.
///
/// Nonnegative self-weights satisfy the fixed-point condition for any α, so
/// α = 1. Otherwise the condition reads `α < 2 / (1 + β|w_ii|)` and α is that
/// bound times [`ALPHA_SAFETY`], capped at 1.
pub fn compute_alpha(self_weight: f64, gain: f64) -> Result<f64> {
    if !(gain > 0.0) || !gain.is_finite() {
        return Err(Error::domain(format!(
            "gain {gain} must be positive and finite"
        )));
    }
    if self_weight >= 0.0 {
        return Ok(1.0);
    }
    Ok((ALPHA_SAFETY * 2.0 / (1.0 + gain * self_weight.abs())).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxOutcome {
    pub converged: bool,
    pub sweeps: usize,
    /// Largest single-neuron change in the last sweep.
    pub last_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopfieldNetwork {
    /// Live asset indices; position `p` in every per-neuron vector refers to `active[p]`.
    active: Vec<usize>,
    /// Row-major `k × k`.
    weights: Vec<f64>,
    biases: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    alphas: Vec<f64>,
    state: Vec<f64>,
    gain: f64,
}

impl HopfieldNetwork {
    /// Builds the network for `problem` (its universe, λ and bounds) over the
    /// `active` assets, starting from `initial_state` (aligned with `active`).
    pub fn build(
        problem: &PortfolioProblem,
        active: &[usize],
        initial_state: &[f64],
        gain: f64,
    ) -> Result<Self> {
        if active.is_empty() {
            return Err(Error::Empty("active neuron set"));
        }
        if initial_state.len() != active.len() {
            return Err(Error::DimensionMismatch {
                expected: active.len(),
                got: initial_state.len(),
            });
        }
        let n = problem.n();
        let mut seen = vec![false; n];
        for &i in active {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::domain(format!(
                    "invalid or repeated active asset {}",
                    i + 1
                )));
            }
        }
        let universe = problem.universe();
        let lambda = problem.lambda();
        let k = active.len();

        let mut weights = vec![0.0; k * k];
        for (p, &i) in active.iter().enumerate() {
            for (q, &j) in active.iter().enumerate() {
                weights[p * k + q] = -2.0 * lambda * universe.cov(i, j);
            }
        }
        let biases = active
            .iter()
            .map(|&i| (1.0 - lambda) * universe.mean_return(i))
            .collect();
        let lower: Vec<f64> = active.iter().map(|&i| problem.lower()[i]).collect();
        let upper: Vec<f64> = active.iter().map(|&i| problem.upper()[i]).collect();
        for (p, &x) in initial_state.iter().enumerate() {
            if !(lower[p] <= x && x <= upper[p]) {
                return Err(Error::domain(format!(
                    "initial state {x} of asset {} outside [{}, {}]",
                    active[p] + 1,
                    lower[p],
                    upper[p]
                )));
            }
        }
        let alphas = (0..k)
            .map(|p| compute_alpha(weights[p * k + p], gain))
            .collect::<Result<Vec<_>>>()?;

        Ok(HopfieldNetwork {
            active: active.to_vec(),
            weights,
            biases,
            lower,
            upper,
            alphas,
            state: initial_state.to_vec(),
            gain,
        })
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn weight(&self, p: usize, q: usize) -> f64 {
        self.weights[p * self.len() + q]
    }

    /// Dense length-`n` embedding of the state; inactive assets are zero.
    pub fn dense_state(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (&i, &s) in self.active.iter().zip(&self.state) {
            x[i] = s;
        }
        x
    }

    /// Local field `Σ_q w_qp x_q + b_p` of neuron `p`.
    pub fn field(&self, p: usize) -> f64 {
        let k = self.len();
        let row = &self.weights[p * k..(p + 1) * k];
        row.iter().zip(&self.state).map(|(w, x)| w * x).sum::<f64>() + self.biases[p]
    }

    fn target(&self, p: usize, field: f64) -> f64 {
        activation(field, self.lower[p], self.upper[p], self.gain)
    }

    /// One damped asynchronous update of neuron `p`; returns its new state.
    pub fn step_async(&mut self, p: usize) -> f64 {
        let field = self.field(p);
        let next = self.damped(p, field);
        self.state[p] = next;
        next
    }

    fn damped(&self, p: usize, field: f64) -> f64 {
        let a = self.alphas[p];
        let next = (1.0 - a) * self.state[p] + a * self.target(p, field);
        // Rounding may step a hair outside the box; the convex combination cannot.
        next.clamp(self.lower[p], self.upper[p])
    }

    /// Largest `|G_p(field_p) − x_p|` over all neurons.
    pub fn fixed_point_residual(&self) -> f64 {
        (0..self.len())
            .map(|p| (self.target(p, self.field(p)) - self.state[p]).abs())
            .fold(0.0, f64::max)
    }

    /// Sweeps the neurons in fresh random orders until a sweep changes no
    /// state by more than [`CONVERGENCE_TOLERANCE`] (and the state is a fixed
    /// point to that tolerance), or [`MAX_SWEEPS`] sweeps have run.
    pub fn relax<R: Rng + ?Sized>(&mut self, rng: &mut R) -> RelaxOutcome {
        let k = self.len();
        let mut order: Vec<usize> = (0..k).collect();
        let mut fields: Vec<f64> = (0..k).map(|p| self.field(p)).collect();
        let mut last_change = f64::INFINITY;
        for sweep in 1..=MAX_SWEEPS {
            order.shuffle(rng);
            last_change = 0.0;
            for &p in &order {
                let next = self.damped(p, fields[p]);
                let delta = next - self.state[p];
                if delta != 0.0 {
                    self.state[p] = next;
                    let column = &self.weights[p * k..(p + 1) * k];
                    for (f, &w) in fields.iter_mut().zip(column) {
                        *f += w * delta;
                    }
                }
                last_change = last_change.max(delta.abs());
            }
            for (p, f) in fields.iter_mut().enumerate() {
                *f = self.field(p);
            }
            if last_change <= CONVERGENCE_TOLERANCE
                && self.fixed_point_residual() <= CONVERGENCE_TOLERANCE
            {
                return RelaxOutcome {
                    converged: true,
                    sweeps: sweep,
                    last_change,
                };
            }
        }
        RelaxOutcome {
            converged: false,
            sweeps: MAX_SWEEPS,
            last_change,
        }
    }

    /// `−½ Σ x_p w_pq x_q − Σ b_p x_p` for an arbitrary state over the active set.
    pub fn energy(&self, state: &[f64]) -> Result<f64> {
        let k = self.len();
        if state.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: state.len(),
            });
        }
        let mut quad = 0.0;
        for p in 0..k {
            let row = &self.weights[p * k..(p + 1) * k];
            quad += state[p] * row.iter().zip(state).map(|(w, x)| w * x).sum::<f64>();
        }
        let linear: f64 = self.biases.iter().zip(state).map(|(b, x)| b * x).sum();
        Ok(-0.5 * quad - linear)
    }

    /// Removes the neuron with the smallest output; ties go to the lowest
    /// asset index. Returns the removed asset.
    pub fn prune_worst(&mut self) -> Result<usize> {
        let k = self.len();
        if k < 2 {
            return Err(Error::domain(
                "cannot prune a network with fewer than 2 neurons",
            ));
        }
        let mut worst = 0;
        for p in 1..k {
            let (s, sw) = (self.state[p], self.state[worst]);
            if s < sw || (s == sw && self.active[p] < self.active[worst]) {
                worst = p;
            }
        }

        let mut weights = Vec::with_capacity((k - 1) * (k - 1));
        for p in (0..k).filter(|&p| p != worst) {
            let row = &self.weights[p * k..(p + 1) * k];
            weights.extend(
                row.iter()
                    .enumerate()
                    .filter(|(q, _)| *q != worst)
                    .map(|(_, w)| *w),
            );
        }
        self.weights = weights;
        let removed = self.active.remove(worst);
        self.biases.remove(worst);
        self.lower.remove(worst);
        self.upper.remove(worst);
        self.alphas.remove(worst);
        self.state.remove(worst);
        Ok(removed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_io::AssetUniverse;
    use crate::model::objective;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn u3_problem(lambda: f64) -> PortfolioProblem {
        let u = AssetUniverse::new(
            vec![0.1, 0.2, 0.3],
            vec![0.1, 0.0, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0, 0.1],
        )
        .unwrap();
        PortfolioProblem::uniform(Arc::new(u), lambda, 1, 0.01, 1.0).unwrap()
    }

    fn two_asset_problem(lambda: f64) -> PortfolioProblem {
        let u = AssetUniverse::new(vec![0.1, 0.2], vec![0.1, 0.04, 0.04, 0.2]).unwrap();
        PortfolioProblem::uniform(Arc::new(u), lambda, 1, 0.01, 1.0).unwrap()
    }

    // Independent logistic form: (1 + tanh(z/2)) / 2.
    fn sigmoid_oracle(y: f64, lo: f64, hi: f64, gain: f64) -> f64 {
        lo + (hi - lo) * 0.5 * (1.0 + (0.5 * gain * y).tanh())
    }

    #[test]
    fn activation_values() {
        for gain in [0.1, 1.0, 50.0] {
            assert!((activation(0.0, 0.01, 1.0, gain) - 0.505).abs() < 1e-15);
        }
        assert_eq!(activation(1e6, 0.01, 1.0, 10.0), 1.0);
        assert_eq!(activation(-1e6, 0.01, 1.0, 10.0), 0.01);
        assert_eq!(activation(f64::MAX, 0.01, 1.0, 10.0), 1.0);
        assert_eq!(activation(f64::MIN, 0.01, 1.0, 10.0), 0.01);
        // 0.01 + 0.99 / (1 + e^-2)
        let v = activation(1.0, 0.01, 1.0, 2.0);
        assert!((v - sigmoid_oracle(1.0, 0.01, 1.0, 2.0)).abs() < 1e-14);
        assert!((v - 0.881_989_1).abs() < 1e-7, "{v}");
    }

    #[test]
    fn activation_is_monotone() {
        let mut prev = f64::NEG_INFINITY;
        for i in -200..=200 {
            let v = activation(i as f64 * 0.05, 0.01, 1.0, 3.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn alpha_values() {
        assert_eq!(compute_alpha(0.0, 50.0).unwrap(), 1.0);
        assert!((compute_alpha(-0.1, 10.0).unwrap() - 0.9).abs() < 1e-15);
        assert!((compute_alpha(-0.1, 100.0).unwrap() - 1.8 / 11.0).abs() < 1e-15);
        assert!(compute_alpha(-0.1, 0.0).is_err());
        for (w, b) in [(-0.1, 10.0), (-0.1, 100.0), (-3.0, 7.0), (-1e-4, 1e4)] {
            let a = compute_alpha(w, b).unwrap();
            assert!(a > 0.0 && a <= 1.0);
            assert!(w > -(2.0 - a) / (a * b));
        }
    }

    #[test]
    fn weights_and_biases() {
        let net =
            HopfieldNetwork::build(&two_asset_problem(0.5), &[0, 1], &[0.5, 0.5], 1.0).unwrap();
        assert!((net.weight(0, 1) + 0.04).abs() < 1e-15);
        assert_eq!(net.weight(0, 1), net.weight(1, 0));
        assert!((net.biases()[0] - 0.05).abs() < 1e-15);

        let net =
            HopfieldNetwork::build(&two_asset_problem(0.0), &[0, 1], &[0.5, 0.5], 1.0).unwrap();
        assert!((0..2).all(|p| (0..2).all(|q| net.weight(p, q) == 0.0)));
        assert_eq!(net.biases(), &[0.1, 0.2]);

        let net =
            HopfieldNetwork::build(&two_asset_problem(1.0), &[0, 1], &[0.5, 0.5], 1.0).unwrap();
        assert_eq!(net.biases(), &[0.0, 0.0]);
    }

    #[test]
    fn build_errors() {
        let p = two_asset_problem(0.5);
        assert!(matches!(
            HopfieldNetwork::build(&p, &[], &[], 1.0),
            Err(Error::Empty(_))
        ));
        assert!(HopfieldNetwork::build(&p, &[0], &[0.0], 1.0).is_err());
        assert!(HopfieldNetwork::build(&p, &[0, 0], &[0.5, 0.5], 1.0).is_err());
        assert!(HopfieldNetwork::build(&p, &[0], &[0.5, 0.5], 1.0).is_err());
    }

    fn isolated_neuron(state: f64, alpha: f64) -> HopfieldNetwork {
        HopfieldNetwork {
            active: vec![0],
            weights: vec![0.0],
            biases: vec![0.0],
            lower: vec![0.01],
            upper: vec![1.0],
            alphas: vec![alpha],
            state: vec![state],
            gain: 5.0,
        }
    }

    #[test]
    fn step_examples() {
        for old in [0.01, 0.3, 1.0] {
            let mut net = isolated_neuron(old, 1.0);
            assert!((net.step_async(0) - 0.505).abs() < 1e-15);
        }
        let mut net = isolated_neuron(0.1, 0.5);
        assert!((net.step_async(0) - 0.3025).abs() < 1e-15);
        for alpha in [0.1, 0.5, 1.0] {
            let mut net = isolated_neuron(0.505, alpha);
            assert_eq!(net.step_async(0), 0.505);
        }
    }

    #[test]
    fn relax_decoupled_neurons() {
        let p = u3_problem(0.0);
        let mut net = HopfieldNetwork::build(&p, &[0, 1, 2], &[0.5; 3], 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = net.relax(&mut rng);
        // The first sweep lands on the fixed point, the second confirms it.
        assert!(out.converged);
        assert_eq!(out.sweeps, 2);
        // 0.01 + 0.99 / (1 + e^-3)
        let expected = sigmoid_oracle(0.3, 0.01, 1.0, 10.0);
        assert!((net.state()[2] - expected).abs() < 1e-15);
        assert!((net.state()[2] - 0.953_048_4).abs() < 1e-7);
    }

    #[test]
    fn relax_at_fixed_point() {
        let p = u3_problem(0.0);
        let fixed: Vec<f64> = [0.1, 0.2, 0.3]
            .iter()
            .map(|&m| activation(m, 0.01, 1.0, 10.0))
            .collect();
        let mut net = HopfieldNetwork::build(&p, &[0, 1, 2], &fixed, 10.0).unwrap();
        let out = net.relax(&mut ChaCha8Rng::seed_from_u64(3));
        assert!(out.converged && out.sweeps == 1);
        assert_eq!(net.state(), &fixed[..]);
    }

    #[test]
    fn relax_min_variance() {
        let p = u3_problem(1.0);
        let mut net = HopfieldNetwork::build(&p, &[0, 1, 2], &[0.2, 0.6, 0.9], 10.0).unwrap();
        let out = net.relax(&mut ChaCha8Rng::seed_from_u64(11));
        assert!(out.converged);
        assert!(net.fixed_point_residual() <= CONVERGENCE_TOLERANCE);
    }

    #[test]
    fn relax_is_deterministic() {
        let p = two_asset_problem(0.7);
        let run = |seed| {
            let mut net = HopfieldNetwork::build(&p, &[0, 1], &[0.3, 0.8], 40.0).unwrap();
            net.relax(&mut ChaCha8Rng::seed_from_u64(seed));
            net.state().to_vec()
        };
        assert_eq!(run(5), run(5));
    }

    #[test]
    fn energy_matches_objective() {
        let p = u3_problem(1.0);
        let third = 1.0 / 3.0;
        let net = HopfieldNetwork::build(&p, &[0, 1, 2], &[third; 3], 1.0).unwrap();
        let e = net.energy(&[third; 3]).unwrap();
        assert!((e - 0.1 / 3.0).abs() < 1e-15);
        assert!((e - objective(p.universe(), 1.0, &[third; 3]).unwrap()).abs() < 1e-15);
        assert!(net.energy(&[0.5]).is_err());

        let zero = isolated_neuron(0.7, 1.0);
        assert_eq!(zero.energy(&[0.7]).unwrap(), 0.0);
    }

    #[test]
    fn prune_examples() {
        let p = u3_problem(0.5);
        let mut net = HopfieldNetwork::build(&p, &[0, 1, 2], &[0.5, 0.02, 0.3], 1.0).unwrap();
        assert_eq!(net.prune_worst().unwrap(), 1);
        assert_eq!(net.active(), &[0, 2]);
        assert_eq!(net.state(), &[0.5, 0.3]);
        assert!((net.weight(1, 1) + 0.1).abs() < 1e-15);
        assert_eq!(net.weight(0, 1), 0.0);

        let mut net = HopfieldNetwork::build(&p, &[0, 1, 2], &[0.5, 0.02, 0.02], 1.0).unwrap();
        net.prune_worst().unwrap();
        assert_eq!(net.active(), &[0, 2]);

        net.prune_worst().unwrap();
        assert_eq!(net.len(), 1);
        assert!(net.prune_worst().is_err());
    }
}
