//! CSV and JSON rendering.
//!
//! CSV: UTF-8, LF line endings, a `#` comment line echoing the effective
//! configuration, then a mandatory header row. Floats carry 12 significant
//! digits. Multi-valued cells (directions, intervals) join their parts with
//! `;` so no quoting is ever needed.
//!
//! JSON: one object `{"command", "config", "rows"}` (see
//! `schema/output.schema.json`).

use lpp_core::numfmt::sig12;
use serde_json::{json, Value};

use crate::config::Format;

/// A rendered-to-be command result.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    /// Effective configuration, minus settings that cannot affect results
    /// (output path, thread count).
    pub config: Value,
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json_rows: Vec<Value>,
    /// Extra top-level JSON members.
    pub json_extra: Vec<(String, Value)>,
}

impl Report {
    pub fn new(command: &'static str, config: Value) -> Self {
        Self {
            command,
            config,
            comments: Vec::new(),
            header: Vec::new(),
            rows: Vec::new(),
            json_rows: Vec::new(),
            json_extra: Vec::new(),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut s = format!("# lpp {} {}\n", self.command, self.config);
        for c in &self.comments {
            s.push_str("# ");
            s.push_str(c);
            s.push('\n');
        }
        s.push_str(&self.header.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    fn render_json(&self) -> String {
        let mut obj = json!({
            "command": self.command,
            "config": self.config,
            "rows": self.json_rows,
        });
        let map = obj.as_object_mut().expect("object");
        for (k, v) in &self.json_extra {
            map.insert(k.clone(), v.clone());
        }
        let mut s = serde_json::to_string_pretty(&obj).expect("serializable");
        s.push('\n');
        s
    }
}

pub fn float(x: f64) -> String {
    sig12(x)
}

/// `[1, 0.5]` → `1;0.5`
pub fn float_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| sig12(x)).collect::<Vec<_>>().join(";")
}

pub fn int_list<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}
