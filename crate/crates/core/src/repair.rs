//! Greedy budget and bounds repair.
//!
//! Every selected asset first receives its lower bound plus a share of the
//! free mass `1 − Σ ε` proportional to its raw weight. Assets that overshoot
//! their upper bound are then pinned there and the remaining free mass is
//! redistributed over the unpinned assets, again proportionally to their raw
//! weights, until no asset exceeds its upper bound.
//!
//! A weight vector that already satisfies the budget and every bound is
//! returned unchanged, which makes the repair idempotent.

use crate::error::{Error, Result};
use crate::model::PortfolioProblem;

const MASS_TOLERANCE: f64 = 1e-12;

/// Repairs `raw_weights` (aligned with `selection`) so that they sum to one
/// and respect each selected asset's `[ε_i, δ_i]`.
///
/// Raw weights only matter through their proportions. If they sum to zero
/// every asset gets an equal share.
pub fn repair(
    problem: &PortfolioProblem,
    selection: &[usize],
    raw_weights: &[f64],
) -> Result<Vec<f64>> {
    let k = selection.len();
    if k != problem.k() {
        return Err(Error::domain(format!(
            "repair needs {} selected assets, got {k}",
            problem.k()
        )));
    }
    if raw_weights.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: raw_weights.len(),
        });
    }
    if let Some(&i) = selection.iter().find(|&&i| i >= problem.n()) {
        return Err(Error::domain(format!(
            "asset index {} outside universe",
            i + 1
        )));
    }
    if raw_weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::domain("raw weights must be finite and nonnegative"));
    }

    let lower: Vec<f64> = selection.iter().map(|&i| problem.lower()[i]).collect();
    let upper: Vec<f64> = selection.iter().map(|&i| problem.upper()[i]).collect();
    let lower_sum: f64 = lower.iter().sum();
    let upper_sum: f64 = upper.iter().sum();
    if lower_sum > 1.0 + MASS_TOLERANCE || upper_sum < 1.0 - MASS_TOLERANCE {
        return Err(Error::Infeasible(format!(
            "selected bounds sum to [{lower_sum}, {upper_sum}], which excludes 1"
        )));
    }

    let raw_sum: f64 = raw_weights.iter().sum();
    let within_bounds = raw_weights
        .iter()
        .zip(lower.iter().zip(&upper))
        .all(|(&w, (&lo, &hi))| lo <= w && w <= hi);
    if within_bounds && (raw_sum - 1.0).abs() <= MASS_TOLERANCE {
        return Ok(raw_weights.to_vec());
    }

    let shares: Vec<f64> = if raw_sum > 0.0 {
        raw_weights.to_vec()
    } else {
        vec![1.0 / k as f64; k]
    };

    let mut pinned = vec![false; k];
    let mut x = vec![0.0; k];
    loop {
        let free_share: f64 = (0..k).filter(|&i| !pinned[i]).map(|i| shares[i]).sum();
        let free_count = pinned.iter().filter(|p| !**p).count();
        if free_count == 0 {
            break;
        }
        let pinned_mass: f64 = (0..k).filter(|&i| pinned[i]).map(|i| upper[i]).sum();
        let free_floor: f64 = (0..k).filter(|&i| !pinned[i]).map(|i| lower[i]).sum();
        let free_mass = 1.0 - pinned_mass - free_floor;
        debug_assert!(free_mass > -1e-9, "negative free mass {free_mass}");
        let free_mass = free_mass.max(0.0);

        for i in (0..k).filter(|&i| !pinned[i]) {
            let fraction = if free_share > 0.0 {
                shares[i] / free_share
            } else {
                1.0 / free_count as f64
            };
            x[i] = lower[i] + fraction * free_mass;
        }

        let mut newly_pinned = false;
        for i in 0..k {
            if !pinned[i] && x[i] > upper[i] {
                pinned[i] = true;
                x[i] = upper[i];
                newly_pinned = true;
            }
        }
        if !newly_pinned {
            break;
        }
    }
    Ok(x)
}
