//! Rendering of command results as text, CSV or JSON.

use std::io::Write;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// One output row; field order is kept.
#[derive(Clone, Debug, Default)]
pub struct Record(pub Vec<(String, Value)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.0.push((key.to_string(), v.into()));
        self
    }

    pub fn float(self, key: &str, x: f64) -> Self {
        self.with(key, Value::from(x))
    }
}

pub struct Renderer {
    pub format: Format,
    /// decimal places for floats in text and CSV
    pub precision: usize,
}

impl Renderer {
    fn scalar(&self, v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            Value::Number(n) if n.is_f64() => {
                let x = n.as_f64().unwrap_or(f64::NAN);
                format!("{:.*}", self.precision.min(17), x)
            }
            Value::Null => String::new(),
            other => other.to_string(),
        }
    }

    pub fn render(&self, records: &[Record], out: &mut impl Write) -> std::io::Result<()> {
        match self.format {
            Format::Json => {
                let objs: Vec<Value> = records
                    .iter()
                    .map(|r| Value::Object(r.0.iter().cloned().collect::<Map<_, _>>()))
                    .collect();
                let v = if objs.len() == 1 {
                    objs.into_iter().next().unwrap_or(Value::Null)
                } else {
                    Value::Array(objs)
                };
                writeln!(out, "{}", serde_json::to_string_pretty(&v)?)
            }
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
                if let Some(first) = records.first() {
                    w.write_record(first.0.iter().map(|(k, _)| k.as_str()))?;
                }
                for r in records {
                    w.write_record(r.0.iter().map(|(_, v)| self.scalar(v)))?;
                }
                let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
                out.write_all(&bytes)
            }
            Format::Text => match records {
                [] => Ok(()),
                [one] if one.0.len() == 1 => writeln!(out, "{}", self.scalar(&one.0[0].1)),
                [one] => {
                    let width = one.0.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
                    for (k, v) in &one.0 {
                        writeln!(out, "{k:<width$}  {}", self.scalar(v))?;
                    }
                    Ok(())
                }
                many => {
                    let head: Vec<&str> = many[0].0.iter().map(|(k, _)| k.as_str()).collect();
                    writeln!(out, "{}", head.join("\t"))?;
                    for r in many {
                        let row: Vec<String> = r.0.iter().map(|(_, v)| self.scalar(v)).collect();
                        writeln!(out, "{}", row.join("\t"))?;
                    }
                    Ok(())
                }
            },
        }
    }
}
