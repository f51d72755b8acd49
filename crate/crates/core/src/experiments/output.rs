use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::Result;

/// One pass/fail verdict with the measured value and its threshold.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

/// Reproducibility record written next to every CSV table.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub experiment: String,
    pub version: String,
    pub seed: Option<u64>,
    pub degree: Option<u32>,
    pub cond: Option<f64>,
    pub config: serde_json::Value,
    pub thresholds: serde_json::Value,
    pub verdicts: Vec<Verdict>,
}

impl Metadata {
    pub fn new(experiment: &str, config: serde_json::Value) -> Self {
        Metadata {
            experiment: experiment.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: None,
            degree: None,
            cond: None,
            config,
            thresholds: serde_json::Value::Null,
            verdicts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

/// Writes `rows` as CSV with a header derived from the row type.
pub fn write_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the metadata record as pretty-printed JSON.
pub fn write_metadata(meta: &Metadata, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(meta)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
