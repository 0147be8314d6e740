//! CSV traces and the JSON report.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};

pub const REPORT_SCHEMA: &str = "fdelab-report/1";

/// 17 significant digits, so values round-trip exactly.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Writes a header row and one row per entry of the equally long columns.
pub fn write_csv(path: &Path, header: &[&str], columns: &[&[f64]]) -> io::Result<()> {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut out = String::with_capacity(rows * columns.len() * 24);
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..rows {
        for (k, c) in columns.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&num(c[i]));
        }
        out.push('\n');
    }
    fs::write(path, out)
}

/// Rows of preformatted cells, for tables with non-numeric columns.
pub fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.join(","));
    }
    fs::write(path, out)
}

/// `value` serialized as an object with a `source` field naming the
/// operation that produced its numbers.
pub fn sourced(source: &str, value: impl Serialize) -> Value {
    let mut obj = Map::new();
    obj.insert("source".into(), Value::String(source.into()));
    match serde_json::to_value(value).expect("report values serialize") {
        Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("value".into(), other);
        }
    }
    Value::Object(obj)
}

/// Unix seconds of the run: `SOURCE_DATE_EPOCH` when set, else the clock.
pub fn timestamp() -> (u64, &'static str) {
    if let Some(s) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
    {
        return (s, "SOURCE_DATE_EPOCH");
    }
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    (now, "system_clock")
}

/// Accumulates report blocks and writes `report.json`.
#[derive(Debug, Default)]
pub struct Report {
    blocks: Map<String, Value>,
}

impl Report {
    pub fn insert(&mut self, key: &str, block: Value) {
        self.blocks.insert(key.to_string(), block);
    }

    pub fn write(mut self, dir: &Path, metadata: Value, failure: Option<&str>) -> io::Result<()> {
        let (generated_at, timestamp_source) = timestamp();
        let mut meta = match metadata {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        meta.insert("generated_at".into(), json!(generated_at));
        meta.insert("timestamp_source".into(), json!(timestamp_source));
        meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        self.blocks.insert("schema".into(), json!(REPORT_SCHEMA));
        self.blocks.insert("metadata".into(), Value::Object(meta));
        self.blocks.insert(
            "status".into(),
            json!(if failure.is_some() { "numerical_failure" } else { "ok" }),
        );
        self.blocks.insert("partial".into(), json!(failure.is_some()));
        self.blocks
            .insert("error".into(), failure.map_or(Value::Null, |e| json!(e)));
        let mut text = serde_json::to_string_pretty(&Value::Object(self.blocks)).expect("report serializes");
        text.push('\n');
        fs::write(dir.join("report.json"), text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn sourced_blocks_carry_source() {
        let v = sourced("kamenev_average", json!({"k": 1.5}));
        assert_eq!(v["source"], "kamenev_average");
        assert_eq!(v["k"], 1.5);
        assert_eq!(sourced("x", 2.0)["value"], 2.0);
    }
}
