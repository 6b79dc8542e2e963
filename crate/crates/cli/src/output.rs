use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Jsonl,
}

/// One output row. `reference` carries the comparison value and verdict
/// when the row is checked against something.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub quantity: String,
    pub params: String,
    pub value: Value,
    pub error_bound: Value,
    pub method: String,
    pub reference: String,
    #[serde(skip)]
    pub failed: bool,
}

impl Record {
    pub fn new(quantity: impl Into<String>, params: impl Into<String>, value: f64, error_bound: f64, method: impl ToString) -> Self {
        Self {
            quantity: quantity.into(),
            params: params.into(),
            value: number(value),
            error_bound: number(error_bound),
            method: method.to_string(),
            reference: String::new(),
            failed: false,
        }
    }

    /// Exact integer result (rendered as a string when it exceeds u64).
    pub fn integer(quantity: impl Into<String>, params: impl Into<String>, value: &num_bigint::BigUint, method: &str) -> Self {
        let value = match u64::try_from(value) {
            Ok(v) => Value::from(v),
            Err(_) => Value::from(value.to_string()),
        };
        Self {
            quantity: quantity.into(),
            params: params.into(),
            value,
            error_bound: Value::from(0),
            method: method.into(),
            reference: String::new(),
            failed: false,
        }
    }

    pub fn with_reference(mut self, reference: impl Into<String>) -> Self {
        self.reference = reference.into();
        self
    }

    /// Attaches a PASS/FAIL verdict to the reference column.
    pub fn check(mut self, pass: bool, against: impl std::fmt::Display) -> Self {
        self.reference = format!("{} {against}", if pass { "PASS" } else { "FAIL" });
        self.failed = !pass;
        self
    }
}

fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or_else(|| Value::from(v.to_string()))
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

const HEADER: [&str; 6] = ["quantity", "params", "value", "error_bound", "method", "reference"];

fn row(r: &Record) -> [String; 6] {
    [
        r.quantity.clone(),
        r.params.clone(),
        cell(&r.value),
        cell(&r.error_bound),
        r.method.clone(),
        r.reference.clone(),
    ]
}

pub fn emit<W: Write>(records: &[Record], format: Format, out: W) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(HEADER)?;
            for r in records {
                w.write_record(row(r))?;
            }
            w.flush()
        }
        Format::Jsonl => {
            let mut out = out;
            for r in records {
                serde_json::to_writer(&mut out, r)?;
                writeln!(out)?;
            }
            Ok(())
        }
        Format::Table => {
            let mut out = out;
            let rows: Vec<[String; 6]> = records.iter().map(row).collect();
            let mut widths = HEADER.map(str::len);
            for r in &rows {
                for (w, c) in widths.iter_mut().zip(r) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let line = |cells: [&str; 6]| {
                let mut s = String::new();
                for (i, c) in cells.iter().enumerate() {
                    if i > 0 {
                        s.push_str("  ");
                    }
                    s.push_str(c);
                    if i < 5 {
                        s.extend(std::iter::repeat_n(' ', widths[i] - c.chars().count()));
                    }
                }
                s.trim_end().to_string()
            };
            writeln!(out, "{}", line(HEADER))?;
            for r in &rows {
                writeln!(out, "{}", line(r.each_ref().map(String::as_str)))?;
            }
            Ok(())
        }
    }
}
