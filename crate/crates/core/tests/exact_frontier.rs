mod common;

use common::{random_universe, simplex_grid_min};
use nnport::exact_frontier::GAP_TOLERANCE;
use nnport::model::dominates;
use nnport::{objective, portfolio_stats, solve_qp_simplex, trace_standard_frontier};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_simplex_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let u = random_universe(&mut rng, 3);
        for lambda in [0.0, 0.3, 0.8, 1.0] {
            let sol = solve_qp_simplex(&u, lambda).unwrap();
            assert!(sol.gap <= GAP_TOLERANCE);
            let f = objective(&u, lambda, &sol.weights).unwrap();
            let grid = simplex_grid_min(3, 200, &mut |x| objective(&u, lambda, x).unwrap());
            // The continuous optimum is never worse than a grid point.
            assert!(f <= grid + 1e-12, "solver {f} above grid {grid}");
            assert!(grid - f <= 1e-3);
        }
    }
}

#[test]
fn solutions_sit_on_the_simplex() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let n = rng.gen_range(1..25);
        let u = random_universe(&mut rng, n);
        let sol = solve_qp_simplex(&u, rng.gen_range(0.0..=1.0)).unwrap();
        assert!(sol.weights.iter().all(|&w| w >= 0.0));
        assert!((sol.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

/// No simplex portfolio lies strictly beyond the traced frontier.
#[test]
fn frontier_dominates_random_portfolios() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let u = random_universe(&mut rng, 8);
    let f = trace_standard_frontier(&u, 400).unwrap();
    assert!(f.max_gap() <= GAP_TOLERANCE);
    for _ in 0..2000 {
        let raw: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0f64..1.0).powi(4)).collect();
        let total: f64 = raw.iter().sum();
        let x: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let (r, v) = portfolio_stats(&u, &x).unwrap();
        assert!(
            !f.points.iter().any(|p| dominates((v, r), p.point())),
            "({v}, {r}) dominates a frontier point"
        );
    }
}
