mod common;

use common::shared_universe;
use nnport::heuristic::{run, run_lambda, HeuristicConfig, ParetoArchive};
use nnport::model::{dominates, validate};
use nnport::{Portfolio, PortfolioProblem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family(seed: u64, n: usize, k: usize) -> PortfolioProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PortfolioProblem::uniform(shared_universe(&mut rng, n), 0.0, k, 0.01, 1.0).unwrap()
}

fn small_config(seed: u64) -> HeuristicConfig {
    HeuristicConfig {
        delta_lambda: 0.25,
        pop_size: 8,
        repetitions: 2,
        seed,
        ..HeuristicConfig::default()
    }
}

fn assert_nondominated(archive: &ParetoArchive) {
    for a in archive.points() {
        for b in archive.points() {
            assert!(
                !dominates(a.point(), b.point()),
                "{:?} dominates {:?}",
                a.point(),
                b.point()
            );
        }
    }
}

#[test]
fn archived_points_are_feasible_and_nondominated() {
    let fam = family(1, 9, 3);
    let archive = run(&fam, &small_config(4)).unwrap();
    assert!(!archive.is_empty());
    assert_nondominated(&archive);
    for rec in archive.points() {
        let problem = fam.with_lambda(rec.lambda).unwrap();
        let (selection, weights): (Vec<usize>, Vec<f64>) = rec.weights.iter().copied().unzip();
        let v = validate(&problem, &Portfolio::new(selection, weights));
        assert!(v.is_empty(), "{v:?}");
        assert!(
            (rec.objective - (rec.lambda * rec.variance - (1.0 - rec.lambda) * rec.mean_return))
                .abs()
                < 1e-12
        );
    }
}

#[test]
fn evaluation_count_follows_the_schedule() {
    let fam = family(2, 9, 3);
    let cfg = small_config(5);
    let archive = run(&fam, &cfg).unwrap();
    // 2 repetitions × 5 λ values × (8 + 4 · 18)
    assert_eq!(archive.evaluations(), 2 * 5 * (8 + 4 * 18));
    assert_eq!(
        archive.evaluations(),
        cfg.repetitions as u64 * 5 * cfg.evaluations_per_lambda(9)
    );
}

#[test]
fn full_cardinality_skips_pruning() {
    let fam = family(3, 5, 5);
    let archive = run(&fam, &small_config(6)).unwrap();
    for rec in archive.points() {
        assert_eq!(rec.weights.len(), 5);
    }
}

#[test]
fn runs_are_reproducible() {
    let fam = family(4, 8, 2);
    let cfg = small_config(77);
    let a = run(&fam, &cfg).unwrap();
    let b = run(
        &fam,
        &HeuristicConfig {
            parallel: false,
            ..cfg.clone()
        },
    )
    .unwrap();
    assert_eq!(a, b);
    let c = run(&fam, &HeuristicConfig { seed: 78, ..cfg }).unwrap();
    assert_ne!(a.points(), c.points());
}

#[test]
fn archive_stays_clean_during_a_lambda_run() {
    let fam = family(5, 7, 2);
    let problem = fam.with_lambda(0.5).unwrap();
    let cfg = small_config(0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut archive = ParetoArchive::new();
    run_lambda(&problem, &cfg, &mut rng, &mut archive).unwrap();
    assert_eq!(archive.evaluations(), cfg.evaluations_per_lambda(7));
    assert_nondominated(&archive);
}
