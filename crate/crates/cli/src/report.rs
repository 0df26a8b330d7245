use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use trihyper::hilbert::StateVector;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub version: &'static str,
    pub command: &'static str,
    pub config: C,
    pub results: R,
    pub duration_ms: Option<u64>,
}

/// A named internal check.
#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: &'static str,
    pub passed: bool,
}

impl Assertion {
    pub fn new(name: &'static str, passed: bool) -> Self {
        Self { name, passed }
    }
}

pub enum Outcome {
    Passed,
    Failed(Vec<String>),
}

pub fn outcome(assertions: &[Assertion]) -> Outcome {
    let failed: Vec<String> = assertions
        .iter()
        .filter(|a| !a.passed)
        .map(|a| a.name.to_string())
        .collect();
    if failed.is_empty() {
        Outcome::Passed
    } else {
        Outcome::Failed(failed)
    }
}

pub struct Timer {
    start: Option<Instant>,
}

impl Timer {
    pub fn start(disabled: bool) -> Self {
        Self {
            start: (!disabled).then(Instant::now),
        }
    }

    pub fn elapsed_ms(&self) -> Option<u64> {
        self.start.map(|s| s.elapsed().as_millis() as u64)
    }
}

/// Amplitudes as `[re, im]` pairs.
pub fn amp_pairs(s: &StateVector) -> Vec<[f64; 2]> {
    s.amps().iter().map(|c| [c.re, c.im]).collect()
}

pub fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).context("writing stdout")
        }
    }
}

pub fn emit_json<T: Serialize>(out: Option<&Path>, report: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    emit(out, &text)
}
