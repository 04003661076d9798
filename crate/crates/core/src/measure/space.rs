use std::collections::HashSet;

use crate::error::{Error, Result};

/// Absolute tolerance for exact finite algebra.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance used wherever a division by a small mass is involved.
pub const DIVISION_TOL: f64 = 1e-9;
/// Largest deviation from unit mass that constructors silently renormalize.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// A finite set of cells carrying a probability weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl MeasuredSpace {
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::IndexMismatch {
                expected: labels.len(),
                actual: weights.len(),
            });
        }
        if labels.is_empty() {
            return Err(Error::InvalidSpace("a space needs at least one cell".into()));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate label {label:?}")));
            }
        }
        let weights = normalize_weights(weights, "weight vector")?;
        Ok(Self { labels, weights })
    }

    /// A space whose labels are the cell indices `0..n`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let labels = (0..weights.len()).map(|k| k.to_string()).collect();
        Self::new(labels, weights)
    }

    pub fn uniform(labels: Vec<String>) -> Result<Self> {
        let n = labels.len().max(1) as f64;
        let weights = vec![1.0 / n; labels.len()];
        Self::new(labels, weights)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self, cell: usize) -> f64 {
        self.weights[cell]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Product space with product weights; labels are `(a,b)` pairs in row-major order.
    pub fn product(&self, other: &MeasuredSpace) -> MeasuredSpace {
        let mut labels = Vec::with_capacity(self.len() * other.len());
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for (a, wa) in self.labels.iter().zip(&self.weights) {
            for (b, wb) in other.labels.iter().zip(&other.weights) {
                labels.push(format!("({a},{b})"));
                weights.push(wa * wb);
            }
        }
        MeasuredSpace { labels, weights }
    }

    /// Same labels in the same order and weights equal within `tol`.
    pub fn same_as(&self, other: &MeasuredSpace, tol: f64) -> bool {
        self.labels == other.labels
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    pub(crate) fn ensure_same(&self, other: &MeasuredSpace, what: &str) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::SpaceMismatch(format!("{what}: labels differ")));
        }
        if let Some((k, (a, b))) = self
            .weights
            .iter()
            .zip(&other.weights)
            .enumerate()
            .find(|(_, (a, b))| (*a - *b).abs() > EXACT_TOL)
        {
            return Err(Error::SpaceMismatch(format!(
                "{what}: weight of cell {k} differs ({a} vs {b})"
            )));
        }
        Ok(())
    }

    pub(crate) fn ensure_len(&self, actual: usize) -> Result<()> {
        if actual != self.len() {
            return Err(Error::IndexMismatch {
                expected: self.len(),
                actual,
            });
        }
        Ok(())
    }
}

/// Checks a probability vector and rescales it to unit mass when it is off by
/// at most [`RENORMALIZE_TOL`].
pub(crate) fn normalize_weights(mut weights: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    for (k, w) in weights.iter_mut().enumerate() {
        if !w.is_finite() {
            return Err(Error::InvalidSpace(format!("{what}: entry {k} is not finite")));
        }
        if *w < 0.0 {
            // round-off from differences of nearly equal CDF values
            if *w >= -EXACT_TOL {
                *w = 0.0;
            } else {
                return Err(Error::InvalidSpace(format!("{what}: entry {k} is negative ({w})")));
            }
        }
    }
    let total: f64 = weights.iter().sum();
    let deviation = (total - 1.0).abs();
    if deviation > RENORMALIZE_TOL {
        return Err(Error::InvalidSpace(format!(
            "{what}: sums to {total}, deviation {deviation:e} exceeds {RENORMALIZE_TOL:e}"
        )));
    }
    if deviation > 0.0 {
        weights.iter_mut().for_each(|w| *w /= total);
    }
    Ok(weights)
}
