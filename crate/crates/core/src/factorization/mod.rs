//! Boundary factorizations `K(s,t) = Σ_x k_s(x) conj(k_t(x)) μ(x)` over finite
//! atomic measures, the isometry/co-isometry pair between the RKHS and
//! `L²(μ)`, and the order relation between factorizations.
//!
//! Transform convention. With the factorization written as above and the
//! RKHS inner product `⟨f, g⟩ = η* G ξ` (linear in `f`), the linear isometry
//! is `W K(·,s) = conj(k_s)` and its adjoint is
//! `(V g)(s) = Σ_x g(x) k_s(x) μ(x)`. Then `V W K(·,t) = K(·,t)` and
//! `|Σ_i ξ_i (Vg)(s_i)|² <= ‖g‖² Σ_ij ξ_i conj(ξ_j) K(s_i,s_j)`. For real
//! features the conjugation is invisible.

mod measure;
mod morphism;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use measure::{DiscreteMeasure, MASS_TOL};
pub use morphism::{check_morphism, w21_apply, w21_isometry_residual, MeasureMorphism, MorphismReport};

use crate::error::{Error, Result};
use crate::kernel::FiniteKernel;
use crate::linalg::{max_abs_diff, numerical_rank, CMatrix, CVector, HermitianEigen, C64};
use crate::rkhs::{default_rank_tol, ParsevalFrame, RkhsElement};

/// Default absolute tolerance on the factorization residual.
pub const DEFAULT_FACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct BoundaryFactorization {
    kernel: Arc<FiniteKernel>,
    measure: DiscreteMeasure,
    features: CMatrix,
    tol: f64,
}

impl BoundaryFactorization {
    /// `features[i][x] = k_{s_i}(x)`; shapes are checked, the identity is not.
    pub fn new(kernel: Arc<FiniteKernel>, measure: DiscreteMeasure, features: CMatrix) -> Result<Self> {
        if features.nrows() != kernel.len() || features.ncols() != measure.len() {
            return Err(Error::ShapeMismatch(format!(
                "features are {}x{}, expected {}x{}",
                features.nrows(),
                features.ncols(),
                kernel.len(),
                measure.len()
            )));
        }
        Ok(Self { kernel, measure, features, tol: DEFAULT_FACT_TOL })
    }

    /// Builds the kernel from the features themselves: `G = Φ D_μ Φ*`.
    pub fn from_features(points: crate::kernel::PointSet, measure: DiscreteMeasure, features: CMatrix) -> Result<Self> {
        if features.ncols() != measure.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature columns for {} atoms",
                features.ncols(),
                measure.len()
            )));
        }
        let gram = weighted_gram(&features, measure.weights());
        let kernel = Arc::new(FiniteKernel::from_gram(points, gram)?);
        Self::new(kernel, measure, features)
    }

    /// Parseval frame rows as features over the counting measure.
    pub fn from_frame(frame: &ParsevalFrame) -> Self {
        let m = frame.retained_rank();
        Self {
            kernel: frame.base().clone(),
            measure: DiscreteMeasure::counting(m),
            features: frame.features(),
            tol: DEFAULT_FACT_TOL,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn kernel(&self) -> &Arc<FiniteKernel> {
        &self.kernel
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn features(&self) -> &CMatrix {
        &self.features
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Feature row `k_{s_i}(·)` as a vector over the atoms.
    pub fn feature_row(&self, i: usize) -> CVector {
        self.features.row(i).transpose()
    }

    fn require_verified(&self) -> Result<()> {
        let residual = verify_factorization(self);
        if residual <= self.tol {
            Ok(())
        } else {
            Err(Error::NotAFactorization { residual, tol: self.tol })
        }
    }
}

/// `Φ D_μ Φ*`.
pub fn weighted_gram(features: &CMatrix, weights: &[f64]) -> CMatrix {
    let scaled = CMatrix::from_fn(features.nrows(), features.ncols(), |i, x| features[(i, x)] * weights[x]);
    scaled * features.adjoint()
}

/// Max-abs entry of `Φ D_μ Φ* - G`.
pub fn verify_factorization(f: &BoundaryFactorization) -> f64 {
    max_abs_diff(&weighted_gram(&f.features, f.measure.weights()), f.kernel.gram())
}

/// `L²(μ)` inner product `Σ_x a(x) conj(b(x)) μ(x)`.
pub fn l2_inner(measure: &DiscreteMeasure, a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).zip(measure.weights()).map(|((a, b), w)| a * b.conj() * *w).sum()
}

pub fn l2_norm_sqr(measure: &DiscreteMeasure, a: &[C64]) -> f64 {
    a.iter().zip(measure.weights()).map(|(a, w)| a.norm_sqr() * w).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub is_minimal: bool,
    pub feature_rank: usize,
}

/// Minimal iff the weighted features `Φ D_μ^{1/2}` have rank equal to the
/// number of atoms (their span is all of `L²(μ)`).
pub fn minimality_test(f: &BoundaryFactorization, rank_tol: f64) -> MinimalityReport {
    let w = f.measure.weights();
    let weighted = CMatrix::from_fn(f.features.nrows(), f.features.ncols(), |i, x| f.features[(i, x)] * w[x].sqrt());
    let feature_rank = numerical_rank(&weighted, rank_tol);
    MinimalityReport { is_minimal: feature_rank == f.measure.len(), feature_rank }
}

/// `W (Σ ξ_i K(·,s_i)) = Σ ξ_i conj(k_{s_i})`, a vector over the atoms.
pub fn apply_w(f: &BoundaryFactorization, elem: &RkhsElement) -> Result<CVector> {
    if elem.base().as_ref() != f.kernel.as_ref() {
        return Err(Error::BaseMismatch);
    }
    f.require_verified()?;
    Ok(f.features.adjoint() * elem.coeffs())
}

/// `(V g)(s_i) = Σ_x g(x) k_{s_i}(x) μ(x)` at every base point.
pub fn apply_v(f: &BoundaryFactorization, g: &[C64]) -> Result<CVector> {
    if g.len() != f.measure.len() {
        return Err(Error::ShapeMismatch(format!("vector of length {} for {} atoms", g.len(), f.measure.len())));
    }
    let w = f.measure.weights();
    Ok(CVector::from_fn(f.features.nrows(), |i, _| (0..g.len()).map(|x| g[x] * f.features[(i, x)] * w[x]).sum()))
}

/// `P = W V` on `L²(μ)` in atom coordinates: `P = Φ* G⁺ Φ D_μ`.
pub fn projection_matrix(f: &BoundaryFactorization) -> CMatrix {
    let g = f.kernel.gram();
    let pinv = HermitianEigen::new(g).pseudo_inverse(default_rank_tol(g.nrows()));
    let w = f.measure.weights();
    let phi_d = CMatrix::from_fn(f.features.nrows(), f.features.ncols(), |i, x| f.features[(i, x)] * w[x]);
    f.features.adjoint() * pinv * phi_d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    /// `W*W = I` on generators reduces to `⟨W K_t, W K_s⟩ = K(s,t)`, which is
    /// the factorization residual.
    pub wstar_w_residual: f64,
    /// Max of `‖P² - P‖` and `‖P† - P‖`, adjoint taken in `L²(μ)`.
    pub projection_residual: f64,
    pub projection_trace: f64,
    /// Max distance of an eigenvalue of `P` from `{0, 1}`.
    pub spectrum_defect: f64,
}

pub fn check_isometry(f: &BoundaryFactorization) -> Result<IsometryReport> {
    f.require_verified()?;
    let wstar_w_residual = verify_factorization(f);
    let p = projection_matrix(f);
    let w = f.measure.weights();
    let m = w.len();
    let idempotent = max_abs_diff(&(&p * &p), &p);
    // μ-adjoint: D⁻¹ P* D
    let p_star = p.adjoint();
    let adj = CMatrix::from_fn(m, m, |x, y| p_star[(x, y)] * w[y] / w[x]);
    let selfadj = max_abs_diff(&adj, &p);
    let projection_trace = p.trace().re;
    // D^{1/2} P D^{-1/2} is Hermitian and similar to P.
    let h = CMatrix::from_fn(m, m, |x, y| p[(x, y)] * (w[x] / w[y]).sqrt());
    let h = (&h + h.adjoint()).unscale(2.0);
    let spectrum_defect =
        HermitianEigen::new(&h).values.iter().map(|&l| l.abs().min((l - 1.0).abs())).fold(0.0, f64::max);
    Ok(IsometryReport {
        wstar_w_residual,
        projection_residual: idempotent.max(selfadj),
        projection_trace,
        spectrum_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Relative slack of the Schwarz inequality test.
pub const SCHWARZ_SLACK: f64 = 1e-9;

/// `|Σ ξ_i (Vg)(s_i)|² <= ‖g‖²_μ · Σ_ij ξ_i conj(ξ_j) K(s_i,s_j)`.
pub fn schwarz_bound_check(f: &BoundaryFactorization, g: &[C64], xi: &[C64]) -> Result<SchwarzReport> {
    let n = f.kernel.len();
    if xi.len() != n {
        return Err(Error::ShapeMismatch(format!("{} coefficients for {} points", xi.len(), n)));
    }
    let vg = apply_v(f, g)?;
    let lhs = xi.iter().zip(vg.iter()).map(|(a, b)| a * b).sum::<C64>().norm_sqr();
    let gram = f.kernel.gram();
    let form: C64 =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| xi[i] * xi[j].conj() * gram[(i, j)]).sum();
    let g_norm = l2_norm_sqr(&f.measure, g);
    let rhs = g_norm * form.re;
    // Rounding floor for the degenerate case rhs ≈ 0.
    let xi_norm: f64 = xi.iter().map(|z| z.norm_sqr()).sum();
    let floor = 1e-14 * g_norm * xi_norm * crate::linalg::max_abs(gram).max(1.0) * n as f64;
    Ok(SchwarzReport { lhs, rhs, holds: lhs <= rhs * (1.0 + SCHWARZ_SLACK) + floor })
}
