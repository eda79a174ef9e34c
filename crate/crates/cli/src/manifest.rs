//! Run manifests: a flat `key=value` record of what produced the outputs,
//! written alongside them after a successful run.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Result;

use crate::outdir::OutputDir;

pub const SCHEMA_VERSION: u32 = 1;

pub struct Manifest {
    subcommand: &'static str,
    seed: u64,
    threads: usize,
    inputs: Vec<(String, PathBuf)>,
    params: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(subcommand: &'static str, seed: u64, threads: usize) -> Self {
        Manifest {
            subcommand,
            seed,
            threads,
            inputs: Vec::new(),
            params: Vec::new(),
        }
    }

    pub fn input(&mut self, name: &str, path: &Path) -> &mut Self {
        self.inputs.push((name.to_string(), path.to_path_buf()));
        self
    }

    pub fn param(&mut self, name: &str, value: impl ToString) -> &mut Self {
        self.params.push((name.to_string(), value.to_string()));
        self
    }

    /// Write `manifest.txt` into the output directory. The wall-clock field
    /// is informational and varies run to run; every other line is a pure
    /// function of the command line.
    pub fn write(&self, out: &mut OutputDir, elapsed: Duration) -> Result<()> {
        let mut w = out.create_file("manifest.txt")?;
        writeln!(w, "schema_version={SCHEMA_VERSION}")?;
        writeln!(w, "tool=deltacom {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "subcommand={}", self.subcommand)?;
        writeln!(w, "seed={}", self.seed)?;
        writeln!(w, "threads={}", self.threads)?;
        for (name, path) in &self.inputs {
            writeln!(w, "input.{name}={}", path.display())?;
        }
        for (name, value) in &self.params {
            writeln!(w, "param.{name}={value}")?;
        }
        for path in out.outputs() {
            if path.file_name().is_some_and(|n| n == "manifest.txt") {
                continue;
            }
            writeln!(w, "output={}", path.display())?;
        }
        writeln!(w, "duration_ms={}", elapsed.as_millis())?;
        Ok(())
    }
}
