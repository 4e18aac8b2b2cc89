//! OR-Library portfolio files and frontier CSV files.
//!
//! OR-Library portfolio instances (`port1` … `port5`) are plain text:
//!
//! ```text
//! N
//! mean_return_1 std_dev_1
//! ...
//! mean_return_N std_dev_N
//! i j correlation_ij        (1-based, one line per pair)
//! ```
//!
//! Frontier CSV files use the header `lambda,return,variance,objective,source,weights`
//! with weights encoded as `i:w` pairs (1-based asset index) joined by `;`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Header line of every frontier CSV file.
pub const FRONTIER_HEADER: &str = "lambda,return,variance,objective,source,weights";

/// Mean returns and covariances of `n` assets.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetUniverse {
    mean_returns: Vec<f64>,
    /// Row-major `n × n`.
    covariance: Vec<f64>,
}

impl AssetUniverse {
    /// Builds a universe from a row-major covariance matrix.
    ///
    /// The matrix must be exactly symmetric with a nonnegative diagonal.
    pub fn new(mean_returns: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let n = mean_returns.len();
        if n == 0 {
            return Err(Error::domain("asset count must be at least 1"));
        }
        if covariance.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: covariance.len(),
            });
        }
        if mean_returns
            .iter()
            .chain(&covariance)
            .any(|v| !v.is_finite())
        {
            return Err(Error::domain("non-finite mean return or covariance"));
        }
        for i in 0..n {
            if covariance[i * n + i] < 0.0 {
                return Err(Error::domain(format!(
                    "negative variance for asset {}",
                    i + 1
                )));
            }
            for j in 0..i {
                if covariance[i * n + j] != covariance[j * n + i] {
                    return Err(Error::domain(format!(
                        "covariance not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(AssetUniverse {
            mean_returns,
            covariance,
        })
    }

    /// Builds `σ_ij = ρ_ij · s_i · s_j` from standard deviations and a
    /// row-major correlation matrix. Only the lower triangle of
    /// `correlation` is read, so the result is symmetric by construction.
    pub fn from_correlations(
        mean_returns: Vec<f64>,
        std_devs: &[f64],
        correlation: &[f64],
    ) -> Result<Self> {
        let n = mean_returns.len();
        if std_devs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: std_devs.len(),
            });
        }
        if correlation.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: correlation.len(),
            });
        }
        let mut covariance = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let c = correlation[i * n + j] * std_devs[i] * std_devs[j];
                covariance[i * n + j] = c;
                covariance[j * n + i] = c;
            }
        }
        AssetUniverse::new(mean_returns, covariance)
    }

    pub fn n(&self) -> usize {
        self.mean_returns.len()
    }

    pub fn mean_returns(&self) -> &[f64] {
        &self.mean_returns
    }

    pub fn mean_return(&self, i: usize) -> f64 {
        self.mean_returns[i]
    }

    #[inline]
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.covariance[i * self.n() + j]
    }

    /// Row `i` of the covariance matrix.
    pub fn cov_row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.covariance[i * n..(i + 1) * n]
    }

    /// The full row-major covariance matrix.
    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }
}

/// One point of a frontier together with the portfolio that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierRecord {
    pub lambda: f64,
    pub mean_return: f64,
    pub variance: f64,
    pub objective: f64,
    /// Provenance tag such as `NN`, `GA` or `STD`.
    pub source: String,
    /// Sparse `(asset index, weight)` pairs, 0-based, weight > 0.
    pub weights: Vec<(usize, f64)>,
}

impl FrontierRecord {
    /// The `(variance, return)` point.
    pub fn point(&self) -> (f64, f64) {
        (self.variance, self.mean_return)
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(self.variance >= 0.0) {
            return Err(format!("variance {} is negative", self.variance));
        }
        let mut seen = BTreeSet::new();
        for &(i, w) in &self.weights {
            if !(w > 0.0) {
                return Err(format!("weight {} for asset {} is not positive", w, i + 1));
            }
            if !seen.insert(i) {
                return Err(format!("asset {} listed twice", i + 1));
            }
        }
        Ok(())
    }
}

/// Parses an OR-Library portfolio instance.
pub fn parse_orlib(text: &str) -> Result<AssetUniverse> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, tokens)| !tokens.is_empty());

    let (line_no, tokens) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing asset count"))?;
    if tokens.len() != 1 {
        return Err(Error::parse(line_no, "expected a single asset count"));
    }
    let n: i64 = tokens[0]
        .parse()
        .map_err(|_| Error::parse(line_no, format!("invalid asset count `{}`", tokens[0])))?;
    if n < 1 {
        return Err(Error::domain(format!("asset count {n} is below 1")));
    }
    let n = n as usize;

    let mut means = Vec::with_capacity(n);
    let mut std_devs = Vec::with_capacity(n);
    for asset in 0..n {
        let (line_no, tokens) = lines.next().ok_or_else(|| {
            Error::IncompleteData(format!("missing statistics for asset {}", asset + 1))
        })?;
        if tokens.len() != 2 {
            return Err(Error::parse(
                line_no,
                "expected `mean_return standard_deviation`",
            ));
        }
        let mean = parse_real(tokens[0], line_no)?;
        let sd = parse_real(tokens[1], line_no)?;
        if sd < 0.0 {
            return Err(Error::domain(format!(
                "negative standard deviation at line {line_no}"
            )));
        }
        means.push(mean);
        std_devs.push(sd);
    }

    let mut correlation = vec![0.0; n * n];
    let mut diagonal = vec![false; n];
    for (line_no, tokens) in lines {
        if tokens.len() != 3 {
            return Err(Error::parse(line_no, "expected `i j correlation`"));
        }
        let i = parse_index(tokens[0], n, line_no)?;
        let j = parse_index(tokens[1], n, line_no)?;
        let rho = parse_real(tokens[2], line_no)?;
        if rho.abs() > 1.0 {
            return Err(Error::domain(format!(
                "correlation {rho} at line {line_no} outside [-1, 1]"
            )));
        }
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        correlation[hi * n + lo] = rho;
        if i == j {
            diagonal[i] = true;
        }
    }
    if let Some(missing) = diagonal.iter().position(|seen| !seen) {
        return Err(Error::IncompleteData(format!(
            "no correlation triple for pair ({0}, {0})",
            missing + 1
        )));
    }

    AssetUniverse::from_correlations(means, &std_devs, &correlation)
}

fn parse_real(token: &str, line: usize) -> Result<f64> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, format!("invalid number `{token}`"))),
    }
}

fn parse_index(token: &str, n: usize, line: usize) -> Result<usize> {
    let i: usize = token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid asset index `{token}`")))?;
    if i == 0 || i > n {
        return Err(Error::parse(
            line,
            format!("asset index {i} outside 1..={n}"),
        ));
    }
    Ok(i - 1)
}

/// Renders records as frontier CSV. Numbers use the shortest representation
/// that parses back to the identical `f64`.
pub fn serialize_frontier(points: &[FrontierRecord]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(FRONTIER_HEADER);
    out.push('\n');
    for p in points {
        let _ = write!(
            out,
            "{:?},{:?},{:?},{:?},{},",
            p.lambda, p.mean_return, p.variance, p.objective, p.source
        );
        for (k, (i, w)) in p.weights.iter().enumerate() {
            if k > 0 {
                out.push(';');
            }
            let _ = write!(out, "{}:{:?}", i + 1, w);
        }
        out.push('\n');
    }
    out
}

/// Parses frontier CSV produced by [`serialize_frontier`].
pub fn parse_frontier(text: &str) -> Result<Vec<FrontierRecord>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    match lines.next() {
        Some((_, header)) if header.trim() == FRONTIER_HEADER => {}
        Some((line_no, _)) => return Err(Error::parse(line_no, "missing frontier header")),
        None => return Err(Error::parse(1, "missing frontier header")),
    }

    let mut records = Vec::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 6 {
            return Err(Error::parse(
                line_no,
                format!("expected 6 fields, found {}", fields.len()),
            ));
        }
        let num = |k: usize| parse_real(fields[k].trim(), line_no);
        let weights_field = fields[fields.len() - 1].trim();
        let source = fields[4..fields.len() - 1].join(",");

        let mut weights = Vec::new();
        if !weights_field.is_empty() {
            for pair in weights_field.split(';') {
                let (i, w) = pair.split_once(':').ok_or_else(|| {
                    Error::parse(line_no, format!("weight entry `{pair}` lacks `:`"))
                })?;
                let i: usize =
                    i.trim().parse().ok().filter(|&i| i >= 1).ok_or_else(|| {
                        Error::parse(line_no, format!("invalid asset index `{i}`"))
                    })?;
                weights.push((i - 1, parse_real(w.trim(), line_no)?));
            }
        }

        let record = FrontierRecord {
            lambda: num(0)?,
            mean_return: num(1)?,
            variance: num(2)?,
            objective: num(3)?,
            source,
            weights,
        };
        record
            .check()
            .map_err(|m| Error::domain(format!("line {line_no}: {m}")))?;
        records.push(record);
    }
    Ok(records)
}
