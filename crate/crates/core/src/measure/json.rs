//! The kernel interchange format:
//! `{"labels_in": [...], "labels_out": [...], "mu": [...], "matrix": [[...], ...]}`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::measure::{KernelMorphism, MeasuredSpace};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelJson {
    pub labels_in: Vec<String>,
    pub labels_out: Vec<String>,
    pub mu: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
}

impl KernelJson {
    pub fn from_kernel(kernel: &KernelMorphism) -> Self {
        let m = kernel.matrix();
        Self {
            labels_in: kernel.source().labels().to_vec(),
            labels_out: kernel.target().labels().to_vec(),
            mu: kernel.source().weights().to_vec(),
            matrix: (0..m.nrows()).map(|k| kernel.row(k)).collect(),
        }
    }

    /// Parses the JSON text; syntax errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::InvalidArgument(format!("kernel JSON, line {} column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn into_kernel(self) -> Result<KernelMorphism> {
        let field = |name: &str, e: Error| Error::InvalidArgument(format!("kernel JSON field `{name}`: {e}"));
        if self.mu.len() != self.labels_in.len() {
            return Err(field(
                "mu",
                Error::IndexMismatch {
                    expected: self.labels_in.len(),
                    actual: self.mu.len(),
                },
            ));
        }
        if self.matrix.len() != self.labels_in.len() {
            return Err(field(
                "matrix",
                Error::IndexMismatch {
                    expected: self.labels_in.len(),
                    actual: self.matrix.len(),
                },
            ));
        }
        let cols = self.labels_out.len();
        if let Some((k, row)) = self.matrix.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(field(
                &format!("matrix[{k}]"),
                Error::IndexMismatch {
                    expected: cols,
                    actual: row.len(),
                },
            ));
        }
        let source = MeasuredSpace::new(self.labels_in, self.mu).map_err(|e| field("mu", e))?;
        let matrix = DMatrix::from_fn(self.matrix.len(), cols, |k, l| self.matrix[k][l]);
        KernelMorphism::new(source, self.labels_out, matrix).map_err(|e| field("matrix", e))
    }

    /// Serializes with 17 significant digits per number.
    pub fn to_json_string(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"labels_in\": {},", string_array(&self.labels_in));
        let _ = writeln!(out, "  \"labels_out\": {},", string_array(&self.labels_out));
        let _ = writeln!(out, "  \"mu\": {},", number_array(&self.mu));
        out.push_str("  \"matrix\": [\n");
        for (k, row) in self.matrix.iter().enumerate() {
            let sep = if k + 1 == self.matrix.len() { "" } else { "," };
            let _ = writeln!(out, "    {}{sep}", number_array(row));
        }
        out.push_str("  ]\n}\n");
        out
    }
}

/// Formats a float with 17 significant digits in JSON-compatible exponent form.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn number_array(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|&v| format_f64(v)).collect();
    format!("[{}]", items.join(", "))
}

fn string_array(values: &[String]) -> String {
    let items: Vec<String> = values
        .iter()
        .map(|s| serde_json::to_string(s).expect("strings serialize"))
        .collect();
    format!("[{}]", items.join(", "))
}
