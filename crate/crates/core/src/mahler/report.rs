//! Report formatting: 12 significant digits and a flat CSV view.

use serde_json::Value;

use super::chain::ChainReport;
use super::StepRecord;

/// First line of every CSV report.
pub const CSV_HEADER: &str = "# mahler-chain-report v1";

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// Rounds every number in a JSON tree to 12 significant digits.
pub fn round_value(v: &mut Value) {
    match v {
        Value::Number(num) => {
            if num.is_f64() {
                if let Some(x) = num.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(round_sig(x, 12)) {
                        *num = r;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        serde_json::to_string(&round_sig(x, 12)).unwrap_or_default()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl StepRecord {
    pub fn csv_row(&self) -> String {
        [
            self.level.to_string(),
            csv_field(&self.name),
            serde_json::to_value(self.comparison)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            num(self.measured_lhs),
            num(self.measured_rhs),
            opt(self.ci),
            num(self.tolerance),
            self.pass.to_string(),
            self.samples.map(|s| s.to_string()).unwrap_or_default(),
            csv_field(self.note.as_deref().unwrap_or("")),
        ]
        .join(",")
    }
}

pub const CSV_COLUMNS: &str =
    "level,name,comparison,measured_lhs,measured_rhs,ci,tolerance,pass,samples,note";

impl ChainReport {
    /// JSON with numbers rounded to 12 significant digits.
    pub fn to_json_value(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        round_value(&mut v);
        v
    }

    /// One row per step, followed by summary rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for note in &self.notes {
            out.push_str(&format!("# note: {note}\n"));
        }
        out.push_str(CSV_COLUMNS);
        out.push('\n');
        for s in &self.steps {
            out.push_str(&s.csv_row());
            out.push('\n');
        }
        let summary = [
            ("summary: final bound", Some(self.final_bound)),
            ("summary: telescoped bound", Some(self.telescoped_bound)),
            ("summary: measured s(K)", self.measured_product_ratio),
        ];
        for (name, value) in summary {
            out.push_str(&format!(
                ",{},,{},,{},,{},,\n",
                csv_field(name),
                opt(value),
                opt(self.measured_ci95.filter(|_| name.contains("measured"))),
                self.pass
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.438_015_242_866_531_6, 12), 0.438015242867);
        assert_eq!(round_sig(8.0, 12), 8.0);
        assert_eq!(round_sig(-1.234_567_890_123_45e-20, 12), -1.23456789012e-20);
        let mut v = serde_json::json!({"a": [1.0000000000001, 3], "b": {"c": 0.1234567890123456}});
        round_value(&mut v);
        assert_eq!(v.to_string(), r#"{"a":[1.0,3],"b":{"c":0.123456789012}}"#);
    }

    #[test]
    fn csv_quotes() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
