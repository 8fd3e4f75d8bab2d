use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<"`, `"<="`, `">="`, `">"`, `"=="` or `"within"` (|value − target| ≤ threshold).
    pub comparison: String,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, comparison: &str, threshold: f64) -> Self {
        let pass = match comparison {
            "<" => value < threshold,
            "<=" => value <= threshold,
            ">=" => value >= threshold,
            ">" => value > threshold,
            "==" => value == threshold,
            _ => unreachable!("comparison {comparison}"),
        };
        Self { name: name.into(), value, comparison: comparison.into(), threshold, target: None, pass }
    }

    pub fn within(name: &str, value: f64, target: f64, tol: f64) -> Self {
        let pass = (value - target).abs() <= tol;
        Self { name: name.into(), value, comparison: "within".into(), threshold: tol, target: Some(target), pass }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, "==", 1.0)
    }
}

#[derive(Debug, Default)]
pub struct RunReport {
    pub command: String,
    pub scenario: Value,
    pub checks: Vec<Check>,
    pub data: serde_json::Map<String, Value>,
    /// Set when a step stopped early; the report is partial.
    pub aborted: Option<String>,
    pub timings: Vec<(String, f64)>,
}

impl RunReport {
    pub fn pass(&self) -> bool {
        self.aborted.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn add(&mut self, key: &str, v: impl Serialize) {
        self.data.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "scenario": self.scenario,
            "checks": self.checks,
            "data": self.data,
            "aborted": self.aborted,
            "pass": self.pass(),
            "version": env!("CARGO_PKG_VERSION"),
        })
    }
}

/// Floats in scientific notation with 17 significant digits; non-finite values become null.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

/// JSON with sorted keys and fixed float formatting, so equal inputs give equal bytes.
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else {
                out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &m[*k], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

pub const SWEEP_HEADER: &str = "epsilon,gap,fidelity,offdiag_residual,garbage_norm";

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub gap: f64,
    pub fidelity: f64,
    pub offdiag_residual: f64,
    /// NaN when the local expansion does not fit the register budget.
    pub garbage_norm: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let cell = |x: f64| if x.is_finite() { format!("{x:.16e}") } else { "nan".into() };
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(s, "{},{},{},{},{}", cell(r.epsilon), cell(r.gap), cell(r.fidelity), cell(r.offdiag_residual), cell(r.garbage_norm)).unwrap();
    }
    s
}

pub fn write_outputs(dir: &Path, report: &RunReport, csv: Option<&str>) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), to_canonical_json(&report.to_value()))?;
    if let Some(c) = csv {
        std::fs::write(dir.join("sweep.csv"), c)?;
    }
    let timings: serde_json::Map<String, Value> = report.timings.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    std::fs::write(dir.join("timings.json"), to_canonical_json(&Value::Object(timings)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_json_sorts_keys_and_fixes_floats() {
        let v = json!({"b": 0.1, "a": [1, -0.5], "c": {"z": null, "y": f64::NAN}});
        let s = to_canonical_json(&v);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("-5.0000000000000000e-1"));
        assert_eq!(to_canonical_json(&v), s);
    }

    #[test]
    fn checks_record_their_thresholds() {
        assert!(Check::within("slope", 5.9, 6.0, 0.15).pass);
        assert!(!Check::within("slope", 2.0, 6.0, 0.15).pass);
        assert!(!Check::new("r", f64::NAN, "<", 1.0).pass);
        assert!(Check::flag("ok", true).pass);
    }
}
