use std::collections::HashSet;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a normalized measure.
pub const MASS_TOL: f64 = 1e-12;

/// Finite atomic measure. The σ-algebra is the power set of the atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    labels: Vec<String>,
    coords: Option<Vec<Vec<f64>>>,
    weights: Vec<f64>,
    normalized: bool,
}

impl DiscreteMeasure {
    pub fn new(labels: Vec<String>, weights: Vec<f64>, normalized: bool) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!("{} labels for {} weights", labels.len(), weights.len())));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidMeasure(format!("duplicate atom `{l}`")));
            }
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidMeasure(format!("weight {w} is not positive")));
        }
        if normalized {
            let total: f64 = weights.iter().sum();
            if (total - 1.0).abs() > MASS_TOL {
                return Err(Error::InvalidMeasure(format!("total mass {total} is not 1")));
            }
        }
        Ok(Self { labels, coords: None, weights, normalized })
    }

    /// Probability measure with atoms labeled `x0, x1, ...`.
    pub fn probability(weights: Vec<f64>) -> Result<Self> {
        let labels = (0..weights.len()).map(|i| format!("x{i}")).collect();
        Self::new(labels, weights, true)
    }

    /// Counting measure on `m` atoms labeled `n0, n1, ...`.
    pub fn counting(m: usize) -> Self {
        Self {
            labels: (0..m).map(|i| format!("n{i}")).collect(),
            coords: None,
            weights: vec![1.0; m],
            normalized: false,
        }
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            labels: (0..m).map(|i| format!("x{i}")).collect(),
            coords: None,
            weights: vec![1.0 / m as f64; m],
            normalized: true,
        }
    }

    pub fn with_coords(mut self, coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.len() != self.labels.len() {
            return Err(Error::InvalidMeasure(format!("{} coordinates for {} atoms", coords.len(), self.labels.len())));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::LabelMismatch(format!("unknown atom `{label}`")))
    }
}
