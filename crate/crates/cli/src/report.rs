//! Output envelopes. Every file carries the schema tag, the library version
//! and the resolved configuration.

use std::io::Write;

use anyhow::{bail, Result};
use serde::Serialize;

pub const SCHEMA: &str = "bohm-qubits/result/v1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    schema: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
    result: &'a R,
}

pub fn json_document<C: Serialize, R: Serialize>(command: &str, config: &C, result: &R) -> Result<String> {
    let env = Envelope { schema: SCHEMA, version: VERSION, command, config, result };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

/// A numeric table; `None` cells are written empty.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    /// Extra `# key: value` lines written after the provenance header.
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) -> Result<()> {
        if row.len() != self.columns.len() {
            bail!("row has {} cells, table has {} columns", row.len(), self.columns.len());
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn push_values(&mut self, row: &[f64]) -> Result<()> {
        self.push(row.iter().map(|&v| Some(v)).collect())
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.notes.push((key.into(), value.to_string()));
    }

    pub fn render<C: Serialize>(&self, command: &str, config: &C) -> Result<String> {
        let mut out = Vec::new();
        writeln!(out, "# schema: {SCHEMA}")?;
        writeln!(out, "# version: {VERSION}")?;
        writeln!(out, "# command: {command}")?;
        writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
        for (k, v) in &self.notes {
            writeln!(out, "# {k}: {v}")?;
        }
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.columns)?;
            for row in &self.rows {
                w.write_record(row.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()))?;
            }
            w.flush()?;
        }
        Ok(String::from_utf8(out)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(["mu", "density"]);
        t.push(vec![Some(0.5), None]).unwrap();
        t.push_values(&[1.0, 2.5e-7]).unwrap();
        assert!(t.push_values(&[1.0]).is_err());
        t.note("mean", 0.25);
        let s = t.render("dist", &serde_json::json!({"theta": 1.0})).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "# schema: bohm-qubits/result/v1");
        assert_eq!(lines[3], "# config: {\"theta\":1.0}");
        assert_eq!(lines[4], "# mean: 0.25");
        assert_eq!(&lines[5..], ["mu,density", "0.5,", "1,0.00000025"]);
    }

    #[test]
    fn json_envelope() {
        let s = json_document("corr", &1, &[1.5]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["command"], "corr");
        assert_eq!(v["result"][0], 1.5);
    }
}
