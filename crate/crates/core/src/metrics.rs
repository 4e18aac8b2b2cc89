//! Frontier comparison: persistence, interpolated distances to the standard
//! frontier, range occupancy, and merging of tagged frontiers.
//!
//! Distances are oriented so that points behind the standard frontier give
//! nonnegative values: `φ = v − v̂(r)` and `ψ = r̂(v) − r`, where `v̂` and `r̂`
//! are linear interpolations along the standard frontier. Queries outside
//! the frontier's range clamp to the nearest endpoint.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::data_io::FrontierRecord;
use crate::error::{Error, Result};
use crate::exact_frontier::StandardFrontier;
use crate::heuristic::ParetoArchive;
use crate::model::pareto_filter;

/// Number of equal sub-intervals used by [`occupancy`].
pub const OCCUPANCY_BINS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Query a return, get the interpolated variance.
    Return,
    /// Query a variance, get the interpolated return.
    Variance,
}

/// Piecewise-linear value of the paired coordinate at `query`.
pub fn interpolate(frontier: &StandardFrontier, axis: Axis, query: f64) -> Result<f64> {
    let pts = &frontier.points;
    if pts.len() < 2 {
        return Err(Error::domain(
            "interpolation needs at least 2 frontier points",
        ));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = match axis {
        Axis::Return => pts.iter().map(|p| (p.mean_return, p.variance)).unzip(),
        Axis::Variance => pts.iter().map(|p| (p.variance, p.mean_return)).unzip(),
    };
    Ok(interpolate_sorted(&xs, &ys, query))
}

fn interpolate_sorted(xs: &[f64], ys: &[f64], q: f64) -> f64 {
    let last = xs.len() - 1;
    if q <= xs[0] {
        return ys[0];
    }
    if q >= xs[last] {
        return ys[last];
    }
    let k = xs.partition_point(|&x| x <= q);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = (q - x0) / (x1 - x0);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    /// Mean of `ψ_i = r̂(v_i) − r_i`, negatives clamped to zero.
    pub mean_return_distance: f64,
    /// Mean of `φ_i = v_i − v̂(r_i)`, negatives clamped to zero.
    pub variance_distance: f64,
    pub point_count: usize,
    /// Smallest `ψ_i` before clamping.
    pub min_raw_return_gap: f64,
    /// Smallest `φ_i` before clamping.
    pub min_raw_variance_gap: f64,
}

pub fn average_distances(
    standard: &StandardFrontier,
    heuristic: &[FrontierRecord],
) -> Result<DistanceReport> {
    if heuristic.is_empty() {
        return Err(Error::Empty("heuristic frontier"));
    }
    let mut psi_sum = 0.0;
    let mut phi_sum = 0.0;
    let mut psi_min = f64::INFINITY;
    let mut phi_min = f64::INFINITY;
    for p in heuristic {
        let v_hat = interpolate(standard, Axis::Return, p.mean_return)?;
        let r_hat = interpolate(standard, Axis::Variance, p.variance)?;
        let phi = p.variance - v_hat;
        let psi = r_hat - p.mean_return;
        phi_min = phi_min.min(phi);
        psi_min = psi_min.min(psi);
        phi_sum += phi.max(0.0);
        psi_sum += psi.max(0.0);
    }
    let count = heuristic.len() as f64;
    Ok(DistanceReport {
        mean_return_distance: psi_sum / count,
        variance_distance: phi_sum / count,
        point_count: heuristic.len(),
        min_raw_return_gap: psi_min,
        min_raw_variance_gap: phi_min,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupancy {
    pub return_pct: f64,
    pub variance_pct: f64,
}

/// Bin of `x` among [`OCCUPANCY_BINS`] half-open bins over `[lo, hi]`
/// (the last bin closed); `None` outside the range.
fn bin_of(x: f64, lo: f64, hi: f64) -> Option<usize> {
    if !(lo <= x && x <= hi) {
        return None;
    }
    let k = ((x - lo) / (hi - lo) * OCCUPANCY_BINS as f64).floor() as usize;
    Some(k.min(OCCUPANCY_BINS - 1))
}

fn occupied_pct(values: impl Iterator<Item = f64>, lo: f64, hi: f64) -> f64 {
    let mut hit = [false; OCCUPANCY_BINS];
    for x in values {
        if let Some(k) = bin_of(x, lo, hi) {
            hit[k] = true;
        }
    }
    100.0 * hit.iter().filter(|h| **h).count() as f64 / OCCUPANCY_BINS as f64
}

/// Percentage of the standard frontier's return and variance sub-intervals
/// touched by at least one heuristic point.
pub fn occupancy(standard: &StandardFrontier, heuristic: &[FrontierRecord]) -> Result<Occupancy> {
    let pts = &standard.points;
    if pts.len() < 2 {
        return Err(Error::domain(
            "occupancy needs at least 2 standard frontier points",
        ));
    }
    let range = |f: fn(&FrontierRecord) -> f64| {
        pts.iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            })
    };
    let (v_lo, v_hi) = range(|p| p.variance);
    let (r_lo, r_hi) = range(|p| p.mean_return);
    if !(v_hi > v_lo) || !(r_hi > r_lo) {
        return Err(Error::domain("standard frontier has a degenerate range"));
    }
    Ok(Occupancy {
        return_pct: occupied_pct(heuristic.iter().map(|p| p.mean_return), r_lo, r_hi),
        variance_pct: occupied_pct(heuristic.iter().map(|p| p.variance), v_lo, v_hi),
    })
}

/// `(cardinal, percentage)` of evaluated portfolios that survived in the archive.
pub fn persistence(archive: &ParetoArchive) -> Result<(usize, f64)> {
    persistence_from_counts(archive.len(), archive.evaluations())
}

pub fn persistence_from_counts(cardinal: usize, evaluations: u64) -> Result<(usize, f64)> {
    if evaluations == 0 {
        return Err(Error::domain("persistence needs at least one evaluation"));
    }
    Ok((cardinal, 100.0 * cardinal as f64 / evaluations as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSurvival {
    pub initial: usize,
    pub surviving: usize,
    /// `100 · surviving / initial` (zero for an empty input).
    pub survival_pct: f64,
    /// `100 · surviving / |merged|`.
    pub contribution_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergedFrontier {
    /// Nondominated union, ascending variance; `source` holds the input tag.
    pub points: Vec<FrontierRecord>,
    pub per_source: BTreeMap<String, SourceSurvival>,
}

/// Pareto-filters the tagged union of several frontiers. Identical `(v, r)`
/// points from different inputs are credited to the lexicographically
/// smallest tag.
pub fn merge_frontiers(named: &BTreeMap<String, Vec<FrontierRecord>>) -> Result<MergedFrontier> {
    if named.values().all(|v| v.is_empty()) {
        return Err(Error::Empty("all merge inputs"));
    }
    let union: Vec<FrontierRecord> = named
        .iter()
        .flat_map(|(tag, records)| {
            records.iter().map(move |r| FrontierRecord {
                source: tag.clone(),
                ..r.clone()
            })
        })
        .collect();
    let points = pareto_filter(&union);

    let total = points.len() as f64;
    let per_source = named
        .iter()
        .map(|(tag, records)| {
            let surviving = points.iter().filter(|p| &p.source == tag).count();
            let survival_pct = if records.is_empty() {
                0.0
            } else {
                100.0 * surviving as f64 / records.len() as f64
            };
            let stats = SourceSurvival {
                initial: records.len(),
                surviving,
                survival_pct,
                contribution_pct: 100.0 * surviving as f64 / total,
            };
            (tag.clone(), stats)
        })
        .collect();
    Ok(MergedFrontier { points, per_source })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceStats {
    /// Absent when the source has no point in the partition.
    pub distances: Option<DistanceReport>,
    pub occupancy: Occupancy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeStats {
    pub all: SourceStats,
    pub per_source: BTreeMap<String, SourceStats>,
}

fn source_stats(standard: &StandardFrontier, points: &[FrontierRecord]) -> Result<SourceStats> {
    let distances = if points.is_empty() {
        None
    } else {
        Some(average_distances(standard, points)?)
    };
    Ok(SourceStats {
        distances,
        occupancy: occupancy(standard, points)?,
    })
}

/// Distances and occupancy of the merged frontier as a whole and of each
/// source's surviving part.
pub fn per_source_stats(
    merged: &MergedFrontier,
    standard: &StandardFrontier,
) -> Result<MergeStats> {
    let all = source_stats(standard, &merged.points)?;
    let per_source = merged
        .per_source
        .keys()
        .map(|tag| {
            let part: Vec<FrontierRecord> = merged
                .points
                .iter()
                .filter(|p| &p.source == tag)
                .cloned()
                .collect();
            Ok((tag.clone(), source_stats(standard, &part)?))
        })
        .collect::<Result<_>>()?;
    Ok(MergeStats { all, per_source })
}

/// One cell of a report table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Count(u64),
    Percent(f64),
    Real(f64),
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Machine-readable id used in the CSV `table` column.
    pub id: &'static str,
    pub title: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<(String, Vec<Cell>)>,
}

/// Tables for a single heuristic frontier: persistence (when the evaluation
/// count is known), average distance and occupancy.
pub fn single_source_tables(
    source: &str,
    persistence: Option<(usize, f64)>,
    distances: &DistanceReport,
    occupancy: &Occupancy,
) -> Vec<Table> {
    let mut tables = Vec::new();
    if let Some((cardinal, pct)) = persistence {
        tables.push(Table {
            id: "persistence",
            title: "Persistence",
            columns: vec!["Cardinal", "Percentage"],
            rows: vec![(
                source.to_string(),
                vec![Cell::Count(cardinal as u64), Cell::Percent(pct)],
            )],
        });
    }
    tables.push(Table {
        id: "average_distance",
        title: "Average distance",
        columns: vec!["Mean return", "Variance"],
        rows: vec![(
            source.to_string(),
            vec![
                Cell::Real(distances.mean_return_distance),
                Cell::Real(distances.variance_distance),
            ],
        )],
    });
    tables.push(Table {
        id: "occupancy",
        title: "Occupancy",
        columns: vec!["Mean return", "Variance"],
        rows: vec![(
            source.to_string(),
            vec![
                Cell::Percent(occupancy.return_pct),
                Cell::Percent(occupancy.variance_pct),
            ],
        )],
    });
    tables
}

/// Survival, contribution, and post-merge distance and occupancy tables.
pub fn merge_tables(merged: &MergedFrontier, stats: &MergeStats) -> Vec<Table> {
    let survival = merged
        .per_source
        .iter()
        .map(|(tag, s)| {
            (
                tag.clone(),
                vec![
                    Cell::Count(s.initial as u64),
                    Cell::Count(s.surviving as u64),
                    Cell::Percent(s.survival_pct),
                ],
            )
        })
        .collect();
    let contribution = merged
        .per_source
        .iter()
        .map(|(tag, s)| {
            (
                tag.clone(),
                vec![
                    Cell::Count(s.surviving as u64),
                    Cell::Percent(s.contribution_pct),
                ],
            )
        })
        .collect();

    let rows_of = |f: &dyn Fn(&SourceStats) -> Vec<Cell>| {
        std::iter::once(("All".to_string(), f(&stats.all)))
            .chain(stats.per_source.iter().map(|(tag, s)| (tag.clone(), f(s))))
            .collect::<Vec<_>>()
    };
    let distance_cells = |s: &SourceStats| match &s.distances {
        Some(d) => vec![
            Cell::Real(d.mean_return_distance),
            Cell::Real(d.variance_distance),
        ],
        None => vec![Cell::Missing, Cell::Missing],
    };
    let occupancy_cells = |s: &SourceStats| {
        vec![
            Cell::Percent(s.occupancy.return_pct),
            Cell::Percent(s.occupancy.variance_pct),
        ]
    };

    vec![
        Table {
            id: "merge_survival",
            title: "Points surviving the merge process",
            columns: vec!["Initial cardinal", "Final cardinal", "Percentage"],
            rows: survival,
        },
        Table {
            id: "merge_contribution",
            title: "Contribution to the merge process",
            columns: vec!["Cardinal", "Percentage"],
            rows: contribution,
        },
        Table {
            id: "merged_distance",
            title: "Average distance after the merge process",
            columns: vec!["Mean return", "Variance"],
            rows: rows_of(&distance_cells),
        },
        Table {
            id: "merged_occupancy",
            title: "Occupancy after the merge process",
            columns: vec!["Mean return", "Variance"],
            rows: rows_of(&occupancy_cells),
        },
    ]
}

/// Tab-separated plain-text rendering, one block per table.
pub fn render_text(tables: &[Table]) -> String {
    let mut out = String::new();
    for (k, t) in tables.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "{}", t.title);
        let _ = writeln!(out, "Heuristic\t{}", t.columns.join("\t"));
        for (source, cells) in &t.rows {
            out.push_str(source);
            for c in cells {
                out.push('\t');
                match c {
                    Cell::Count(n) => {
                        let _ = write!(out, "{n}");
                    }
                    Cell::Percent(p) => {
                        let _ = write!(out, "{p:.2}%");
                    }
                    Cell::Real(x) => {
                        let _ = write!(out, "{x:.6}");
                    }
                    Cell::Missing => out.push('-'),
                }
            }
            out.push('\n');
        }
    }
    out
}

/// `table,source,metric,value` rows; absent values are left empty.
pub fn render_csv(tables: &[Table]) -> String {
    let mut out = String::from("table,source,metric,value\n");
    for t in tables {
        for (source, cells) in &t.rows {
            for (column, c) in t.columns.iter().zip(cells) {
                let value = match c {
                    Cell::Count(n) => n.to_string(),
                    Cell::Percent(x) | Cell::Real(x) => format!("{x:?}"),
                    Cell::Missing => String::new(),
                };
                let _ = writeln!(out, "{},{},{},{}", t.id, source, column, value);
            }
        }
    }
    out
}
