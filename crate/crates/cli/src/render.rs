//! Table, CSV and JSON rendering of experiment reports.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Fixed six-decimal formatting, with negative zero printed as zero.
pub fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
}

impl Verdict {
    pub fn new(check: impl Into<String>, pass: bool) -> Self {
        Self {
            check: check.into(),
            pass,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Field {
    Real(f64),
    Int(i128),
    Text(String),
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Real(x) => fmt6(*x),
            Field::Int(n) => n.to_string(),
            Field::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Real(x)
    }
}

impl From<u64> for Field {
    fn from(n: u64) -> Self {
        Field::Int(n.into())
    }
}

impl From<i64> for Field {
    fn from(n: i64) -> Self {
        Field::Int(n.into())
    }
}

impl From<bool> for Field {
    fn from(b: bool) -> Self {
        Field::Text(b.to_string())
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Text(s)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.to_string())
    }
}

/// A rectangular table of reals, rendered as the whole CSV body when present.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Output {
    pub config: RunConfig,
    pub report: Value,
    pub fields: Vec<(String, Field)>,
    pub table: Option<Table>,
    pub verdicts: Vec<Verdict>,
}

impl Output {
    pub fn new(config: RunConfig, report: Value) -> Self {
        Self {
            config,
            report,
            fields: Vec::new(),
            table: None,
            verdicts: Vec::new(),
        }
    }

    pub fn field(&mut self, name: impl Into<String>, value: impl Into<Field>) -> &mut Self {
        self.fields.push((name.into(), value.into()));
        self
    }

    pub fn verdict(&mut self, check: impl Into<String>, pass: bool) -> &mut Self {
        self.verdicts.push(Verdict::new(check, pass));
        self
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        match format {
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
            Format::Table => Ok(self.render_table()),
        }
    }

    fn render_json(&self) -> anyhow::Result<String> {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "report": self.report,
            "verdicts": self.verdicts,
        });
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    fn render_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        match &self.table {
            Some(table) => {
                w.write_record(&table.header)?;
                for row in &table.rows {
                    w.write_record(row.iter().map(|x| fmt6(*x)))?;
                }
            }
            None => {
                w.write_record(["field", "value"])?;
                for (name, value) in &self.fields {
                    w.write_record([name.as_str(), value.render().as_str()])?;
                }
                for v in &self.verdicts {
                    w.write_record([
                        format!("verdict:{}", v.check),
                        pass_fail(v.pass).to_string(),
                    ])?;
                }
            }
        }
        Ok(String::from_utf8(
            w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?,
        )?)
    }

    fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {}", self.config.experiment);
        let width = self.fields.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
        for (name, value) in &self.fields {
            let _ = writeln!(s, "  {name:<width$}  {}", value.render());
        }
        if let Some(table) = &self.table {
            let _ = writeln!(s);
            let header: Vec<String> = table.header.iter().map(|h| format!("{h:>14}")).collect();
            let _ = writeln!(s, "{}", header.join(""));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|x| format!("{:>14}", fmt6(*x))).collect();
                let _ = writeln!(s, "{}", cells.join(""));
            }
        }
        if !self.verdicts.is_empty() {
            let _ = writeln!(s);
            for v in &self.verdicts {
                let _ = writeln!(s, "{}: {}", pass_fail(v.pass), v.check);
            }
        }
        s
    }
}

fn pass_fail(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Rounds the named top-level numeric members of `value` to six decimals.
pub fn round_members(value: &mut Value, keys: &[&str]) {
    if let Value::Object(map) = value {
        for key in keys {
            if let Some(Value::Number(n)) = map.get(*key) {
                if let Some(x) = n.as_f64() {
                    let rounded: f64 = fmt6(x).parse().expect("formatted float parses");
                    map.insert((*key).to_string(), json!(rounded));
                }
            }
        }
    }
}
