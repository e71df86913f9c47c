use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// Machine output goes to `--out` when given, otherwise stdout.
/// The human summary goes to whichever stream the machine output did not take.
pub struct Sink<'a> {
    out: Option<&'a Path>,
}

impl<'a> Sink<'a> {
    pub fn new(out: Option<&'a Path>) -> Self {
        Sink { out }
    }

    pub fn machine(&self, bytes: &[u8]) -> Result<()> {
        match self.out {
            Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
            None => io::stdout().write_all(bytes).context("writing stdout"),
        }
    }

    pub fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.machine(s.as_bytes())
    }

    pub fn csv<T: Serialize>(&self, rows: impl IntoIterator<Item = T>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?;
        self.machine(&bytes)
    }

    pub fn summary(&self, line: impl AsRef<str>) {
        if self.out.is_some() {
            println!("{}", line.as_ref());
        } else {
            eprintln!("{}", line.as_ref());
        }
    }
}
