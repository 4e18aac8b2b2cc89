#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::Rng;

pub fn nnport() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nnport"))
}

pub fn run(args: &[&str]) -> Output {
    nnport().args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// OR-Library text for a random universe: uniform means and standard
/// deviations, correlations from a one-factor model.
pub fn random_orlib<R: Rng + ?Sized>(rng: &mut R, n: usize) -> String {
    let beta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..0.9)).collect();
    let mut text = format!("{n}\n");
    for _ in 0..n {
        text += &format!(
            "{:.6} {:.6}\n",
            rng.gen_range(-0.002..0.01),
            rng.gen_range(0.02..0.08)
        );
    }
    for i in 0..n {
        for j in i..n {
            let rho = if i == j { 1.0 } else { beta[i] * beta[j] };
            text += &format!("{} {} {:.6}\n", i + 1, j + 1, rho);
        }
    }
    text
}

pub fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p
}

/// `key=value` lookup in a manifest file.
pub fn manifest_value(output: &Path, key: &str) -> Option<String> {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest");
    let text = fs::read_to_string(PathBuf::from(name)).ok()?;
    text.lines()
        .filter_map(|l| l.split_once('='))
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v.to_string())
}

/// Value of one `table,source,metric` cell in a metrics CSV report.
pub fn report_value(csv: &str, table: &str, source: &str, metric: &str) -> Option<f64> {
    csv.lines().skip(1).find_map(|line| {
        let f: Vec<&str> = line.split(',').collect();
        (f.len() == 4 && f[0] == table && f[1] == source && f[2] == metric)
            .then(|| f[3].parse().ok())?
    })
}

pub const TOY3: &str =
    "3\n0.1 0.3\n0.2 0.3\n0.3 0.3\n1 1 1.0\n2 2 1.0\n3 3 1.0\n1 2 0.0\n1 3 0.0\n2 3 0.0\n";
