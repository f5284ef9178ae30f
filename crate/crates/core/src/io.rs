//! Sample ingestion: CSV (`prediction,label[,weight]` with header), JSONL
//! (`{"p": .., "y": 0|1, "w": ..}` per line) and finite-instance JSON.

use std::io::{BufRead, Read};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::joint::{EmpiricalJoint, FiniteInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Jsonl,
    Instance,
}

impl InputFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "jsonl" | "ndjson" => Some(Self::Jsonl),
            "json" => Some(Self::Instance),
            _ => None,
        }
    }
}

fn malformed(msg: impl std::fmt::Display) -> Error {
    Error::Malformed(msg.to_string())
}

/// Reads weighted samples from CSV with a required header.
pub fn read_csv<R: Read>(reader: R) -> Result<EmpiricalJoint> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(malformed)?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let p_col = col("prediction").ok_or_else(|| malformed("missing `prediction` column"))?;
    let y_col = col("label").ok_or_else(|| malformed("missing `label` column"))?;
    let w_col = col("weight");

    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(malformed)?;
        let field = |i: usize| -> Result<f64> {
            let s = rec
                .get(i)
                .ok_or_else(|| malformed(format!("row {}: missing field", line + 2)))?;
            s.parse::<f64>()
                .map_err(|e| malformed(format!("row {}: `{s}`: {e}", line + 2)))
        };
        pairs.push((field(p_col)?, field(y_col)?));
        if let Some(w) = w_col {
            weights.push(field(w)?);
        }
    }
    EmpiricalJoint::from_samples(&pairs, w_col.map(|_| weights.as_slice()))
}

#[derive(Deserialize)]
struct JsonlRecord {
    p: f64,
    y: f64,
    w: Option<f64>,
}

/// Reads one JSON object per non-blank line.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<EmpiricalJoint> {
    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    let mut any_weight = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlRecord =
            serde_json::from_str(&line).map_err(|e| malformed(format!("line {}: {e}", i + 1)))?;
        pairs.push((rec.p, rec.y));
        any_weight |= rec.w.is_some();
        weights.push(rec.w.unwrap_or(1.0));
    }
    EmpiricalJoint::from_samples(&pairs, any_weight.then_some(weights.as_slice()))
}

/// Reads a finite instance: a JSON array of `{"id", "mass", "pred", "cond_mean"}`.
pub fn read_instance<R: Read>(reader: R) -> Result<FiniteInstance> {
    serde_json::from_reader(reader).map_err(malformed)
}

/// Writes the atoms of a joint as weighted CSV.
pub fn write_csv<W: std::io::Write>(joint: &EmpiricalJoint, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    wtr.write_record(["prediction", "label", "weight"]).map_err(io)?;
    for a in joint.atoms() {
        wtr.write_record([
            crate::report::format_float(a.v),
            a.y.to_string(),
            crate::report::format_float(a.mass),
        ])
        .map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}
