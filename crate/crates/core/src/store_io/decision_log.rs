//! Line-oriented decision log, one `key=value` record per line:
//!
//! ```text
//! frame_id=0 density=0.8312 tau=0.91 verdict=Spare store_revision=1
//! ```
//!
//! Floats use Rust's shortest round-trip formatting (`inf` for infinity), so a
//! parsed record is bit-identical to the one written.

use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use super::FormatError;
use crate::policy::{DecisionRecord, Verdict};

const KEYS: [&str; 5] = ["frame_id", "density", "tau", "verdict", "store_revision"];

pub fn format_record(r: &DecisionRecord<f64>) -> String {
    format!(
        "frame_id={} density={} tau={} verdict={} store_revision={}",
        r.frame_id, r.density, r.tau, r.verdict, r.store_revision
    )
}

pub fn parse_record(line: &str) -> Result<DecisionRecord<f64>, String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != KEYS.len() {
        return Err(format!(
            "expected {} fields, found {}",
            KEYS.len(),
            fields.len()
        ));
    }
    let mut values = [""; 5];
    for ((field, key), slot) in fields.iter().zip(KEYS).zip(values.iter_mut()) {
        *slot = field
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| format!("expected `{key}=`, found `{field}`"))?;
    }
    let float = |s: &str| s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    let int = |s: &str| s.parse::<u64>().map_err(|e| format!("`{s}`: {e}"));
    let verdict = match values[3] {
        "Mow" => Verdict::Mow,
        "Spare" => Verdict::Spare,
        other => return Err(format!("unknown verdict `{other}`")),
    };
    Ok(DecisionRecord {
        frame_id: int(values[0])?,
        density: float(values[1])?,
        tau: float(values[2])?,
        verdict,
        store_revision: int(values[4])?,
    })
}

pub struct DecisionLogWriter<W: Write> {
    inner: W,
    written: u64,
}

impl<W: Write> DecisionLogWriter<W> {
    pub fn new(inner: W) -> Self {
        Self { inner, written: 0 }
    }

    pub fn write(&mut self, record: &DecisionRecord<f64>) -> io::Result<()> {
        writeln!(self.inner, "{}", format_record(record))?;
        self.written += 1;
        Ok(())
    }

    pub fn records_written(&self) -> u64 {
        self.written
    }

    pub fn into_inner(mut self) -> io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub fn read_decision_log(path: impl AsRef<Path>) -> Result<Vec<DecisionRecord<f64>>, FormatError> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            parse_record(&line).map_err(|message| FormatError::BadRecord {
                line: i + 1,
                message,
            })?,
        );
    }
    Ok(out)
}
