use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use nnport::exact_frontier::StandardFrontier;
use nnport::heuristic::{self, HeuristicConfig};
use nnport::metrics;
use nnport::{
    parse_frontier, parse_orlib, serialize_frontier, trace_standard_frontier, FrontierRecord,
    PortfolioProblem,
};

use crate::manifest::{self, Manifest};
use crate::{ExactArgs, MergeArgs, MetricsArgs, NnArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<nnport::Error> for CliError {
    fn from(e: nnport::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn finish(manifest: &Manifest, output: &Path, started: Instant) -> CliResult<()> {
    manifest.write(output, started.elapsed()).map_err(|e| {
        CliError::Data(format!(
            "{}: {e}",
            manifest::manifest_path(output).display()
        ))
    })
}

fn appended(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn read_frontier(path: &Path) -> CliResult<(String, Vec<FrontierRecord>)> {
    let text = read(path)?;
    let records =
        parse_frontier(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok((text, records))
}

pub fn exact(args: &ExactArgs) -> CliResult<()> {
    if args.lambdas < 2 {
        return Err(usage("--lambdas must be at least 2"));
    }
    let started = Instant::now();
    let text = read(&args.data)?;
    let universe = parse_orlib(&text)?;
    let frontier = trace_standard_frontier(&universe, args.lambdas)?;
    let csv = serialize_frontier(&frontier.points);
    write(&args.out, &csv)?;

    let mut m = Manifest::new("exact");
    m.input("data", &args.data, text.as_bytes());
    m.set("param.lambdas", args.lambdas);
    m.set("assets", universe.n());
    m.set("points", frontier.len());
    m.set("max_duality_gap", format!("{:e}", frontier.max_gap()));
    m.output("frontier", &args.out, csv.as_bytes());
    finish(&m, &args.out, started)
}

fn read_bounds(path: &Path, lower: &mut [f64], upper: &mut [f64]) -> CliResult<String> {
    let text = read(path)?;
    let n = lower.len();
    for (no, line) in text.lines().enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let bad = || {
            CliError::Data(format!(
                "{}:{}: expected `i eps delta`",
                path.display(),
                no + 1
            ))
        };
        if tokens.len() != 3 {
            return Err(bad());
        }
        let i: usize = tokens[0].parse().map_err(|_| bad())?;
        if i == 0 || i > n {
            return Err(CliError::Data(format!(
                "{}:{}: asset {i} outside 1..={n}",
                path.display(),
                no + 1
            )));
        }
        lower[i - 1] = tokens[1].parse().map_err(|_| bad())?;
        upper[i - 1] = tokens[2].parse().map_err(|_| bad())?;
    }
    Ok(text)
}

pub fn nn(args: &NnArgs) -> CliResult<()> {
    if args.k < 1 {
        return Err(usage("--k must be at least 1"));
    }
    if !(args.dlambda > 0.0 && args.dlambda <= 1.0) {
        return Err(usage("--dlambda must lie in (0, 1]"));
    }
    if args.pop < 2 {
        return Err(usage("--pop must be at least 2"));
    }
    if args.reps < 1 {
        return Err(usage("--reps must be at least 1"));
    }
    if !(0.0 <= args.eps && args.eps <= args.delta_max && args.delta_max <= 1.0) {
        return Err(usage("bounds must satisfy 0 <= --eps <= --delta-max <= 1"));
    }
    if !(args.gain_divisor > 0.0 && args.gain_divisor < 1.0) {
        return Err(usage("--gain-divisor must lie in (0, 1)"));
    }

    let started = Instant::now();
    let text = read(&args.data)?;
    let universe = Arc::new(parse_orlib(&text)?);
    let n = universe.n();
    let mut lower = vec![args.eps; n];
    let mut upper = vec![args.delta_max; n];
    let bounds_text = match &args.bounds {
        Some(path) => Some(read_bounds(path, &mut lower, &mut upper)?),
        None => None,
    };
    let family = PortfolioProblem::new(universe, 0.0, args.k, lower, upper)?;

    let config = HeuristicConfig {
        delta_lambda: args.dlambda,
        pop_size: args.pop,
        repetitions: args.reps,
        seed: args.seed,
        gain_divisor: args.gain_divisor,
        ..HeuristicConfig::default()
    };
    let archive = heuristic::run(&family, &config)?;
    let csv = serialize_frontier(archive.points());
    write(&args.out, &csv)?;

    let mut m = Manifest::new("nn");
    m.input("data", &args.data, text.as_bytes());
    if let (Some(path), Some(t)) = (&args.bounds, &bounds_text) {
        m.input("bounds", path, t.as_bytes());
    }
    m.set("param.k", args.k);
    m.set("param.eps", args.eps);
    m.set("param.delta_max", args.delta_max);
    m.set("param.dlambda", args.dlambda);
    m.set("param.pop", args.pop);
    m.set("param.reps", args.reps);
    m.set("param.gain_divisor", args.gain_divisor);
    m.set("param.inner_t", config.outer_iterations());
    m.set("param.inner_r", config.candidates_per_iteration(n));
    m.set("seed", args.seed);
    m.set("lambda_values", config.lambda_grid().len());
    m.set("evaluations", archive.evaluations());
    m.set("points", archive.len());
    m.output("frontier", &args.out, csv.as_bytes());
    finish(&m, &args.out, started)
}

fn evaluations_from_manifest(heuristic: &Path) -> Option<u64> {
    let text = fs::read_to_string(manifest::manifest_path(heuristic)).ok()?;
    manifest::lookup(&text, "evaluations")?.parse().ok()
}

pub fn metrics(args: &MetricsArgs) -> CliResult<()> {
    let started = Instant::now();
    let (std_text, std_records) = read_frontier(&args.standard)?;
    let (heu_text, heu_records) = read_frontier(&args.heuristic)?;
    if heu_records.is_empty() {
        return Err(CliError::Data(format!(
            "{}: heuristic frontier is empty",
            args.heuristic.display()
        )));
    }
    let standard = StandardFrontier::from_records(&std_records);
    let distances = metrics::average_distances(&standard, &heu_records)?;
    let occupancy = metrics::occupancy(&standard, &heu_records)?;
    let evaluations = args
        .evaluations
        .or_else(|| evaluations_from_manifest(&args.heuristic));
    let persistence = match evaluations {
        Some(e) => Some(metrics::persistence_from_counts(heu_records.len(), e)?),
        None => None,
    };

    let tables = metrics::single_source_tables(&args.source, persistence, &distances, &occupancy);
    let text = metrics::render_text(&tables);
    let csv = metrics::render_csv(&tables);
    let csv_path = appended(&args.out, ".csv");
    write(&args.out, &text)?;
    write(&csv_path, &csv)?;

    let mut m = Manifest::new("metrics");
    m.input("standard", &args.standard, std_text.as_bytes());
    m.input("heuristic", &args.heuristic, heu_text.as_bytes());
    if let Some(e) = evaluations {
        m.set("evaluations", e);
    }
    m.set("param.source", &args.source);
    m.output("report", &args.out, text.as_bytes());
    m.output("report_csv", &csv_path, csv.as_bytes());
    finish(&m, &args.out, started)?;
    finish(&m, &csv_path, started)
}

fn parse_inputs(specs: &[String]) -> CliResult<BTreeMap<String, PathBuf>> {
    let mut inputs = BTreeMap::new();
    for spec in specs {
        let (tag, path) = spec
            .split_once('=')
            .ok_or_else(|| usage(format!("input `{spec}` is not of the form TAG=path")))?;
        let tag = tag.trim();
        if tag.is_empty() || tag.contains(',') || path.is_empty() {
            return Err(usage(format!("input `{spec}` has an invalid tag or path")));
        }
        if inputs
            .insert(tag.to_string(), PathBuf::from(path))
            .is_some()
        {
            return Err(usage(format!("duplicate input tag `{tag}`")));
        }
    }
    Ok(inputs)
}

pub fn merge(args: &MergeArgs) -> CliResult<()> {
    let inputs = parse_inputs(&args.inputs)?;
    let started = Instant::now();
    let (std_text, std_records) = read_frontier(&args.standard)?;
    let standard = StandardFrontier::from_records(&std_records);

    let mut m = Manifest::new("merge");
    m.input("standard", &args.standard, std_text.as_bytes());
    let mut named = BTreeMap::new();
    for (tag, path) in &inputs {
        let (text, records) = read_frontier(path)?;
        m.input(tag, path, text.as_bytes());
        named.insert(tag.clone(), records);
    }

    let merged = metrics::merge_frontiers(&named)?;
    let stats = metrics::per_source_stats(&merged, &standard)?;
    let tables = metrics::merge_tables(&merged, &stats);
    let csv = serialize_frontier(&merged.points);
    let text = metrics::render_text(&tables);
    let report_csv = metrics::render_csv(&tables);
    let report_csv_path = appended(&args.report, ".csv");
    write(&args.out, &csv)?;
    write(&args.report, &text)?;
    write(&report_csv_path, &report_csv)?;

    m.set("points", merged.points.len());
    m.output("frontier", &args.out, csv.as_bytes());
    m.output("report", &args.report, text.as_bytes());
    m.output("report_csv", &report_csv_path, report_csv.as_bytes());
    finish(&m, &args.out, started)?;
    finish(&m, &args.report, started)?;
    finish(&m, &report_csv_path, started)
}
