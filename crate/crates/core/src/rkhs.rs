//! Elements of the reproducing kernel Hilbert space in kernel coordinates,
//! and spectral Parseval frames.
//!
//! An element `f = Σ ξ_i K(·, s_i)` is stored by its coefficient vector `ξ`.
//! When the Gram matrix `G` is singular the coefficients are not unique, so
//! every operation goes through `G`: values are `Gξ`, inner products `η* G ξ`.
//!
//! A frame is an `m x n` matrix whose row `k` holds the values `β_k(s_i)`.
//! The factorization identity is `K(s_i, s_j) = Σ_k β_k(s_i) conj(β_k(s_j))`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::{psd_report, FiniteKernel, DEFAULT_PSD_TOL};
use crate::linalg::{numerical_rank, CMatrix, CVector, HermitianEigen, C64};

/// Relative singular-value threshold used for span and rank tests on
/// feature and frame matrices.
pub const DEFAULT_SPAN_TOL: f64 = 1e-9;

/// Eigenvalue threshold for `n` points: `1e-12 * n`, relative to `λ_max`.
pub fn default_rank_tol(n: usize) -> f64 {
    1e-12 * n as f64
}

fn same_base(a: &Arc<FiniteKernel>, b: &Arc<FiniteKernel>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

#[derive(Debug, Clone)]
pub struct RkhsElement {
    base: Arc<FiniteKernel>,
    coeffs: CVector,
}

impl RkhsElement {
    pub fn new(base: Arc<FiniteKernel>, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != base.len() {
            return Err(Error::ShapeMismatch(format!("{} coefficients for {} points", coeffs.len(), base.len())));
        }
        Ok(Self { base, coeffs: CVector::from_vec(coeffs) })
    }

    /// The kernel section `K(·, s_i)`.
    pub fn generator(base: Arc<FiniteKernel>, i: usize) -> Result<Self> {
        let n = base.len();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        let mut coeffs = CVector::zeros(n);
        coeffs[i] = C64::new(1.0, 0.0);
        Ok(Self { base, coeffs })
    }

    pub fn zero(base: Arc<FiniteKernel>) -> Self {
        let n = base.len();
        Self { base, coeffs: CVector::zeros(n) }
    }

    pub fn base(&self) -> &Arc<FiniteKernel> {
        &self.base
    }

    pub fn coeffs(&self) -> &CVector {
        &self.coeffs
    }

    /// Values at every base point: `Gξ`.
    pub fn values(&self) -> CVector {
        self.base.gram() * &self.coeffs
    }

    pub fn squared_norm(&self) -> f64 {
        crate::linalg::quadratic_form(self.base.gram(), &self.coeffs, &self.coeffs).re
    }
}

/// `⟨f, g⟩ = η* G ξ` for `f = Σ ξ_i K(·,s_i)`, `g = Σ η_j K(·,s_j)`.
pub fn rkhs_inner(f: &RkhsElement, g: &RkhsElement) -> Result<C64> {
    if !same_base(&f.base, &g.base) {
        return Err(Error::BaseMismatch);
    }
    Ok(crate::linalg::quadratic_form(f.base.gram(), &g.coeffs, &f.coeffs))
}

/// `f(s) = Σ ξ_i K(s, s_i)`.
pub fn evaluate(f: &RkhsElement, label: &str) -> Result<C64> {
    let s = f.base.points().index_of(label)?;
    Ok((f.base.gram().row(s) * &f.coeffs)[(0, 0)])
}

#[derive(Debug, Clone)]
pub struct ParsevalFrame {
    base: Arc<FiniteKernel>,
    frame: CMatrix,
}

impl ParsevalFrame {
    /// Wraps arbitrary frame rows over `base`; nothing is verified here.
    pub fn from_rows(base: Arc<FiniteKernel>, frame: CMatrix) -> Result<Self> {
        if frame.ncols() != base.len() {
            return Err(Error::ShapeMismatch(format!("frame has {} columns for {} points", frame.ncols(), base.len())));
        }
        Ok(Self { base, frame })
    }

    pub fn base(&self) -> &Arc<FiniteKernel> {
        &self.base
    }

    /// Row `k` holds `β_k(s_i)`.
    pub fn rows(&self) -> &CMatrix {
        &self.frame
    }

    pub fn retained_rank(&self) -> usize {
        self.frame.nrows()
    }

    /// Feature matrix over the counting measure: `features[i][k] = β_k(s_i)`.
    pub fn features(&self) -> CMatrix {
        self.frame.transpose()
    }
}

/// Spectral Parseval frame `β_k = √λ_k v_k` over eigenvalues above
/// `rank_tol * λ_max`.
pub fn parseval_factorize(k: &Arc<FiniteKernel>, rank_tol: f64) -> Result<ParsevalFrame> {
    let report = psd_report(k.gram(), DEFAULT_PSD_TOL)?;
    if !report.is_psd {
        return Err(Error::NotPsd(report.min_eigenvalue));
    }
    let eig = HermitianEigen::new(k.gram());
    let r = eig.retained(rank_tol);
    let n = k.len();
    let frame = CMatrix::from_fn(r, n, |row, i| eig.vectors[(i, row)] * eig.values[row].sqrt());
    Ok(ParsevalFrame { base: k.clone(), frame })
}

/// Max-abs entry of `Σ_k β_k(s_i) conj(β_k(s_j)) - G[i][j]`.
pub fn verify_parseval(frame: &ParsevalFrame) -> f64 {
    let f = &frame.frame;
    let recon = f.transpose() * f.map(|z| z.conj());
    crate::linalg::max_abs_diff(&recon, frame.base.gram())
}

/// Frame coefficients `c_k = ⟨f, β_k⟩`, computed from the values of `f`
/// through the pseudo-inverse of `G`.
pub fn frame_expand(f: &RkhsElement, frame: &ParsevalFrame) -> Result<Vec<C64>> {
    if !same_base(&f.base, &frame.base) {
        return Err(Error::BaseMismatch);
    }
    let g = frame.base.gram();
    let pinv = HermitianEigen::new(g).pseudo_inverse(default_rank_tol(g.nrows()));
    let projected = pinv * f.values();
    Ok((0..frame.frame.nrows())
        .map(|k| frame.frame.row(k).iter().zip(projected.iter()).map(|(b, p)| b.conj() * p).sum())
        .collect())
}

/// Values of `Σ_k c_k β_k` at the base points.
pub fn frame_synthesize(frame: &ParsevalFrame, c: &[C64]) -> Result<CVector> {
    if c.len() != frame.frame.nrows() {
        return Err(Error::ShapeMismatch(format!("{} coefficients for {} frame rows", c.len(), frame.frame.nrows())));
    }
    Ok(frame.frame.transpose() * CVector::from_column_slice(c))
}

/// `|‖f‖² - Σ_k |⟨f, β_k⟩|²|`.
pub fn norm_identity_residual(frame: &ParsevalFrame, f: &RkhsElement) -> Result<f64> {
    let c = frame_expand(f, frame)?;
    let energy: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    Ok((f.squared_norm() - energy).abs())
}

/// True iff the frame rows are linearly independent (full row rank), so
/// that the features span all of `l²` over the row index.
pub fn tightness_test(frame: &ParsevalFrame) -> bool {
    let m = frame.frame.nrows();
    m == 0 || numerical_rank(&frame.frame, DEFAULT_SPAN_TOL) == m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{assemble_gram, PointSet, Szego};
    use crate::linalg::ZERO;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn szego_base() -> Arc<FiniteKernel> {
        Arc::new(assemble_gram(&Szego, &PointSet::from_scalars(&[c(0.0), c(0.5)])).unwrap())
    }

    fn table(vals: &[f64], n: usize) -> Arc<FiniteKernel> {
        let g = CMatrix::from_row_slice(n, n, &vals.iter().map(|&v| c(v)).collect::<Vec<_>>());
        Arc::new(FiniteKernel::from_matrix(g).unwrap())
    }

    #[test]
    fn inner_product_examples() {
        let k = szego_base();
        let k0 = RkhsElement::generator(k.clone(), 0).unwrap();
        let k1 = RkhsElement::generator(k.clone(), 1).unwrap();
        assert_eq!(rkhs_inner(&k0, &k1).unwrap(), k.entry(1, 0));
        assert_eq!(rkhs_inner(&k0, &k0).unwrap(), c(1.0));
        let f = RkhsElement::new(k.clone(), vec![c(-1.0), c(1.0)]).unwrap();
        assert!((rkhs_inner(&f, &f).unwrap() - 1.0 / 3.0).norm() < 1e-15);
    }

    #[test]
    fn base_mismatch() {
        let a = RkhsElement::zero(szego_base());
        let b = RkhsElement::zero(table(&[1.0, 0.0, 0.0, 1.0], 2));
        assert!(matches!(rkhs_inner(&a, &b), Err(Error::BaseMismatch)));
    }

    #[test]
    fn evaluation_examples() {
        let k = szego_base();
        let k1 = RkhsElement::generator(k.clone(), 1).unwrap();
        assert_eq!(evaluate(&k1, "s0").unwrap(), k.entry(0, 1));
        let z = RkhsElement::zero(k.clone());
        assert_eq!(evaluate(&z, "s1").unwrap(), ZERO);
        let f = RkhsElement::new(k.clone(), vec![c(1.0), c(1.0)]).unwrap();
        assert_eq!(evaluate(&f, "s0").unwrap(), c(2.0));
        assert!(matches!(evaluate(&f, "t"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn factorize_identity_and_two_by_two() {
        let id = table(&[1.0, 0.0, 0.0, 1.0], 2);
        let fr = parseval_factorize(&id, default_rank_tol(2)).unwrap();
        assert_eq!(fr.retained_rank(), 2);
        assert!(verify_parseval(&fr) < 1e-15);

        let g = table(&[2.0, 1.0, 1.0, 2.0], 2);
        let fr = parseval_factorize(&g, default_rank_tol(2)).unwrap();
        assert_eq!(fr.retained_rank(), 2);
        // rows √3 (1,1)/√2 and (1,-1)/√2 up to phase
        let norms: Vec<f64> = (0..2).map(|k| fr.rows().row(k).norm_squared()).collect();
        assert!((norms[0] - 3.0).abs() < 1e-14 && (norms[1] - 1.0).abs() < 1e-14);
        assert!(verify_parseval(&fr) < 1e-14);

        let g = table(&[1.0, 1.0, 1.0, 1.0], 2);
        let fr = parseval_factorize(&g, default_rank_tol(2)).unwrap();
        assert_eq!(fr.retained_rank(), 1);
        let row = fr.rows().row(0);
        assert!((row[0].norm() - 1.0).abs() < 1e-14 && (row[0] - row[1]).norm() < 1e-14);
    }

    #[test]
    fn indefinite_is_not_psd() {
        let g = table(&[1.0, 2.0, 2.0, 1.0], 2);
        assert!(matches!(parseval_factorize(&g, 1e-12), Err(Error::NotPsd(_))));
    }

    #[test]
    fn verify_parseval_examples() {
        let id = table(&[1.0, 0.0, 0.0, 1.0], 2);
        let mut rows = CMatrix::identity(2, 2);
        rows[(1, 1)] = ZERO;
        let fr = ParsevalFrame::from_rows(id, rows).unwrap();
        assert!((verify_parseval(&fr) - 1.0).abs() < 1e-15);

        let zero = table(&[0.0, 0.0, 0.0, 0.0], 2);
        let fr = parseval_factorize(&zero, default_rank_tol(2)).unwrap();
        assert_eq!(fr.retained_rank(), 0);
        assert_eq!(verify_parseval(&fr), 0.0);
        assert!(tightness_test(&fr));
    }

    #[test]
    fn expansion_examples() {
        // f with the values of β_k has coefficient vector e_k
        let g = table(&[2.0, 1.0, 1.0, 2.0], 2);
        let fr = parseval_factorize(&g, default_rank_tol(2)).unwrap();
        for k in 0..2 {
            let b: Vec<C64> = fr.rows().row(k).iter().copied().collect();
            let eig = HermitianEigen::new(g.gram());
            let xi = eig.pseudo_inverse(1e-12) * CVector::from_vec(b);
            let f = RkhsElement::new(g.clone(), xi.iter().copied().collect()).unwrap();
            let coeffs = frame_expand(&f, &fr).unwrap();
            for (j, cj) in coeffs.iter().enumerate() {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((cj - want).norm() < 1e-12, "k={k} j={j} {cj}");
            }
        }

        let zero = RkhsElement::zero(g.clone());
        assert!(frame_expand(&zero, &fr).unwrap().iter().all(|z| z.norm() == 0.0));

        let id = table(&[1.0, 0.0, 0.0, 1.0], 2);
        let fr = parseval_factorize(&id, default_rank_tol(2)).unwrap();
        let f = RkhsElement::generator(id.clone(), 0).unwrap();
        let coeffs = frame_expand(&f, &fr).unwrap();
        for (k, ck) in coeffs.iter().enumerate() {
            assert!((ck - fr.rows()[(k, 0)].conj()).norm() < 1e-15);
        }
        let back = frame_synthesize(&fr, &coeffs).unwrap();
        assert!((back[0] - 1.0).norm() < 1e-15 && back[1].norm() < 1e-15);
    }

    #[test]
    fn tightness_examples() {
        let g = table(&[2.0, 1.0, 1.0, 2.0], 2);
        let fr = parseval_factorize(&g, default_rank_tol(2)).unwrap();
        assert!(tightness_test(&fr));

        let padded = fr.rows().clone().insert_row(2, ZERO);
        assert!(!tightness_test(&ParsevalFrame::from_rows(g.clone(), padded).unwrap()));

        let row0 = fr.rows().row(0).clone_owned();
        let mut dup = fr.rows().clone().insert_row(2, ZERO);
        dup.set_row(2, &row0);
        assert!(!tightness_test(&ParsevalFrame::from_rows(g, dup).unwrap()));
    }
}
