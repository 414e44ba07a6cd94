//! Order relation between factorizations over finite atomic spaces.
//!
//! With power-set σ-algebras, `φ⁻¹(𝓑₁) = 𝓑₂` holds exactly when `φ` is
//! injective on atoms. For non-atomic spaces the two conditions differ; this
//! module only models the atomic case.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{l2_norm_sqr, BoundaryFactorization, DiscreteMeasure, MASS_TOL};
use crate::linalg::C64;

/// Entrywise tolerance of the commuting-diagram check.
pub const DIAGRAM_TOL: f64 = 1e-12;

/// `φ: B₂ → B₁`, stored as the target index of every source atom.
#[derive(Debug, Clone)]
pub struct MeasureMorphism {
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    map: Vec<usize>,
}

impl MeasureMorphism {
    pub fn new(source: DiscreteMeasure, target: DiscreteMeasure, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.len() {
            return Err(Error::LabelMismatch(format!("map covers {} of {} source atoms", map.len(), source.len())));
        }
        if let Some(&bad) = map.iter().find(|&&a| a >= target.len()) {
            return Err(Error::LabelMismatch(format!("target atom index {bad} out of range")));
        }
        Ok(Self { source, target, map })
    }

    /// Map given as the target label of each source atom, in source order.
    pub fn from_labels(source: DiscreteMeasure, target: DiscreteMeasure, map: &[&str]) -> Result<Self> {
        let idx = map.iter().map(|l| target.index_of(l)).collect::<Result<Vec<_>>>()?;
        Self::new(source, target, idx)
    }

    pub fn identity(measure: DiscreteMeasure) -> Self {
        let map = (0..measure.len()).collect();
        Self { source: measure.clone(), target: measure, map }
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_injective(&self) -> bool {
        let mut hit = vec![false; self.target.len()];
        self.map.iter().all(|&a| !std::mem::replace(&mut hit[a], true))
    }

    /// `μ₂ ∘ φ⁻¹` as weights on the target atoms.
    pub fn pushforward(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.target.len()];
        for (x, &a) in self.map.iter().enumerate() {
            out[a] += self.source.weights()[x];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismReport {
    pub pushforward_ok: bool,
    pub sigma_ok: bool,
    pub diagram_ok: bool,
}

/// Checks `μ₂∘φ⁻¹ = μ₁`, the σ-algebra condition and `k²_s = k¹_s ∘ φ`.
/// `f1` lives on the target `B₁`, `f2` on the source `B₂`.
pub fn check_morphism(
    m: &MeasureMorphism,
    f1: &BoundaryFactorization,
    f2: &BoundaryFactorization,
) -> Result<MorphismReport> {
    if f1.kernel().as_ref() != f2.kernel().as_ref() {
        return Err(Error::BaseMismatch);
    }
    if f2.measure().labels() != m.source.labels() || f1.measure().labels() != m.target.labels() {
        return Err(Error::LabelMismatch("morphism endpoints do not match the factorizations".into()));
    }
    let pushed = m.pushforward();
    let pushforward_ok = pushed.iter().zip(f1.measure().weights()).all(|(a, b)| (a - b).abs() <= MASS_TOL);
    let sigma_ok = m.is_injective();
    let (a, b) = (f1.features(), f2.features());
    let diagram_ok =
        (0..b.nrows()).all(|i| m.map.iter().enumerate().all(|(x, &t)| (b[(i, x)] - a[(i, t)]).norm() <= DIAGRAM_TOL));
    Ok(MorphismReport { pushforward_ok, sigma_ok, diagram_ok })
}

/// `W₂₁ f = f ∘ φ`.
pub fn w21_apply(m: &MeasureMorphism, f: &[C64]) -> Result<Vec<C64>> {
    if f.len() != m.target.len() {
        return Err(Error::ShapeMismatch(format!("function on {} atoms, target has {}", f.len(), m.target.len())));
    }
    Ok(m.map.iter().map(|&a| f[a]).collect())
}

/// `|‖f∘φ‖²_{μ₂} - ‖f‖²_{μ₁}|`.
pub fn w21_isometry_residual(m: &MeasureMorphism, f: &[C64]) -> Result<f64> {
    let pulled = w21_apply(m, f)?;
    Ok((l2_norm_sqr(&m.source, &pulled) - l2_norm_sqr(&m.target, f)).abs())
}
