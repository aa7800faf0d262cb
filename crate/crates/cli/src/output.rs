//! Report rendering: 12 significant digits, JSON or versioned CSV.

use std::fmt::Write as _;

use mahler_core::mahler::round_value;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone)]
pub struct Report {
    /// CSV version header, e.g. "# mahler-volume v1".
    pub header: String,
    pub config: RunConfig,
    pub result: Value,
    /// Column line followed by data rows.
    pub csv: Vec<String>,
    pub pass: bool,
}

impl Report {
    pub fn render(&self) -> String {
        let mut config = serde_json::to_value(&self.config).expect("config serializes");
        round_value(&mut config);
        match self.config.format {
            Format::Json => {
                let mut v = json!({ "config": config, "pass": self.pass, "result": self.result });
                round_value(&mut v);
                let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = String::new();
                let _ = writeln!(s, "{}", self.header);
                let _ = writeln!(s, "# config {config}");
                let _ = writeln!(s, "# pass {}", self.pass);
                for line in &self.csv {
                    let _ = writeln!(s, "{line}");
                }
                s
            }
        }
    }
}

/// A number as printed in reports: 12 significant digits, empty when absent.
pub fn csv_number(x: Option<f64>) -> String {
    match x {
        Some(x) if x.is_finite() => {
            serde_json::to_string(&mahler_core::mahler::round_sig(x, 12)).unwrap_or_default()
        }
        _ => String::new(),
    }
}
