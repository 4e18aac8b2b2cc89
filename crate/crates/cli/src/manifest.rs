//! Flat `key=value` run manifests written next to every output file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

pub const TOOL: &str = concat!("nnport ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Manifest::default();
        m.set("command", command);
        m.set("tool", TOOL);
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace('\n', " ");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn input(&mut self, name: &str, path: &Path, contents: &[u8]) {
        self.set(&format!("input.{name}.path"), path.display());
        self.set(&format!("input.{name}.sha256"), sha256_hex(contents));
    }

    pub fn output(&mut self, name: &str, path: &Path, contents: &[u8]) {
        self.set(&format!("output.{name}.path"), path.display());
        self.set(&format!("output.{name}.sha256"), sha256_hex(contents));
    }

    pub fn render(&self, elapsed: Duration) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        let _ = writeln!(out, "wall_clock_seconds={:.3}", elapsed.as_secs_f64());
        out
    }

    pub fn write(&self, output: &Path, elapsed: Duration) -> std::io::Result<()> {
        fs::write(manifest_path(output), self.render(elapsed))
    }
}

/// `<output>.manifest`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Looks up `key` in a manifest's text.
pub fn lookup<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .find(|(k, _)| k.trim() == key)
        .map(|(_, v)| v.trim())
}
