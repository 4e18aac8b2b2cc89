mod common;

use common::shared_universe;
use nnport::hopfield::{activation, compute_alpha, CONVERGENCE_TOLERANCE};
use nnport::{objective, HopfieldNetwork, PortfolioProblem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn network(seed: u64, n: usize, lambda: f64, gain: f64) -> (PortfolioProblem, HopfieldNetwork) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = shared_universe(&mut rng, n);
    let problem = PortfolioProblem::uniform(u, lambda, 1, 0.01, 1.0).unwrap();
    let all: Vec<usize> = (0..n).collect();
    let state: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..=1.0)).collect();
    let net = HopfieldNetwork::build(&problem, &all, &state, gain).unwrap();
    (problem, net)
}

proptest! {
    #[test]
    fn energy_equals_objective(seed in any::<u64>(), n in 1usize..15, lambda in 0.0..=1.0f64) {
        let (problem, net) = network(seed, n, lambda, 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        // Any state in the box, budget or not.
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let f = objective(problem.universe(), lambda, &x).unwrap();
        prop_assert!((net.energy(&x).unwrap() - f).abs() <= 1e-12);
    }

    #[test]
    fn weights_are_symmetric_and_survive_pruning(seed in any::<u64>(), n in 2usize..10, lambda in 0.0..=1.0f64) {
        let (problem, mut net) = network(seed, n, lambda, 3.0);
        while net.len() > 1 {
            let before = net.state().to_vec();
            let active = net.active().to_vec();
            let removed = net.prune_worst().unwrap();
            let min = before.iter().copied().fold(f64::INFINITY, f64::min);
            let pos = active.iter().position(|&i| i == removed).unwrap();
            prop_assert_eq!(before[pos], min);
            let k = net.len();
            for p in 0..k {
                for q in 0..k {
                    prop_assert_eq!(net.weight(p, q), net.weight(q, p));
                    let (i, j) = (net.active()[p], net.active()[q]);
                    prop_assert_eq!(net.weight(p, q), -2.0 * lambda * problem.universe().cov(i, j));
                }
            }
        }
    }

    #[test]
    fn steps_stay_in_the_box(seed in any::<u64>(), n in 1usize..10, lambda in 0.0..=1.0f64, gain in 0.1..1e4f64) {
        let (_, mut net) = network(seed, n, lambda, gain);
        for sweep in 0..3 {
            for p in 0..n {
                let x = net.step_async((p + sweep) % n);
                prop_assert!((0.01..=1.0).contains(&x));
            }
        }
    }

    #[test]
    fn alpha_satisfies_the_fixed_point_condition(w in -10.0..10.0f64, gain in 0.01..1e4f64) {
        let a = compute_alpha(w, gain).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0);
        if w < 0.0 {
            // w_ii > −(2 − α)/(α·β)
            prop_assert!(w > -(2.0 - a) / (a * gain));
        }
    }

    #[test]
    fn activation_is_bounded_and_monotone(y in -1e3..1e3f64, dy in 0.0..1.0f64, gain in 0.01..1e3f64) {
        let a = activation(y, 0.01, 0.7, gain);
        let b = activation(y + dy, 0.01, 0.7, gain);
        prop_assert!((0.01..=0.7).contains(&a));
        prop_assert!(a <= b);
    }
}

#[test]
fn relaxed_networks_are_fixed_points() {
    let mut converged = 0;
    for seed in 0..100u64 {
        let lambda = (seed % 11) as f64 / 10.0;
        let (_, mut net) = network(seed, 12, lambda, 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let outcome = net.relax(&mut rng);
        if outcome.converged {
            converged += 1;
            assert!(net.fixed_point_residual() <= CONVERGENCE_TOLERANCE);
        }
    }
    assert!(
        converged >= 90,
        "only {converged} of 100 relaxations converged"
    );
}
