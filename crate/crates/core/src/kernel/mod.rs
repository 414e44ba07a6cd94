//! Kernels, finite point sets and Gram matrices.
//!
//! A [`Kernel`] is any rule producing the entries `K(s_i, s_j)` over a
//! [`PointSet`]. Closed-form kernels live in [`szego`]; tabulated Gram
//! matrices in [`table`]. Kernels are built by name from a [`KernelSpec`]
//! through the [`registry`].

pub mod registry;
pub mod szego;
pub mod table;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, CMatrix, HermitianEigen, C64};

pub use registry::{KernelRegistry, KernelSpec};
pub use szego::{polydisk_szego_eval, szego_eval, PolydiskSzego, Szego};
pub use table::TableKernel;

/// Default relative PSD tolerance.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

/// Points with `|z| >= 1 - DISK_MARGIN` are rejected by disk kernels.
pub const DISK_MARGIN: f64 = 1e-15;

/// Hermitian defect tolerated on tabulated input, relative to `max(1, max|G|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Ordered set of labeled points, each with `dim` complex coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    labels: Vec<String>,
    coords: Vec<Vec<C64>>,
    dim: usize,
}

impl PointSet {
    pub fn new(labels: Vec<String>, coords: Vec<Vec<C64>>) -> Result<Self> {
        if labels.len() != coords.len() {
            return Err(Error::InvalidPoints(format!(
                "{} labels for {} coordinate tuples",
                labels.len(),
                coords.len()
            )));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidPoints(format!("duplicate label `{l}`")));
            }
        }
        let dim = coords.first().map_or(1, Vec::len);
        if dim == 0 {
            return Err(Error::InvalidPoints("points need at least one coordinate".into()));
        }
        if let Some(bad) = coords.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch(dim, bad.len()));
        }
        Ok(Self { labels, coords, dim })
    }

    /// One-dimensional points labeled `s0, s1, ...`.
    pub fn from_scalars(zs: &[C64]) -> Self {
        let labels = (0..zs.len()).map(|i| format!("s{i}")).collect();
        let coords = zs.iter().map(|&z| vec![z]).collect();
        Self { labels, coords, dim: 1 }
    }

    pub fn from_tuples(zs: Vec<Vec<C64>>) -> Result<Self> {
        let labels = (0..zs.len()).map(|i| format!("s{i}")).collect();
        Self::new(labels, zs)
    }

    /// Abstract points for tabulated kernels; the coordinate is the index.
    pub fn from_labels(labels: Vec<String>) -> Result<Self> {
        let coords = (0..labels.len()).map(|i| vec![C64::new(i as f64, 0.0)]).collect();
        Self::new(labels, coords)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coords(&self, i: usize) -> &[C64] {
        &self.coords[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Points at the given indices, in order.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        for &i in idx {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange { index: i, len: self.len() });
            }
        }
        Self::new(
            idx.iter().map(|&i| self.labels[i].clone()).collect(),
            idx.iter().map(|&i| self.coords[i].clone()).collect(),
        )
    }
}

/// A kernel tabulated over a finite point set.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKernel {
    points: PointSet,
    gram: CMatrix,
    field: Field,
}

impl FiniteKernel {
    /// Wraps a Gram matrix, rejecting non-Hermitian input and mirroring the
    /// upper triangle so that the stored matrix is exactly Hermitian.
    pub fn from_gram(points: PointSet, gram: CMatrix) -> Result<Self> {
        let n = points.len();
        if gram.nrows() != n || gram.ncols() != n {
            return Err(Error::ShapeMismatch(format!("gram is {}x{} for {} points", gram.nrows(), gram.ncols(), n)));
        }
        let scale = crate::linalg::max_abs(&gram).max(1.0);
        let defect = hermitian_defect(&gram);
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(defect));
        }
        let mut g = gram;
        for i in 0..n {
            g[(i, i)] = C64::new(g[(i, i)].re, 0.0);
            for j in i + 1..n {
                g[(j, i)] = g[(i, j)].conj();
            }
        }
        let field = detect_field(&g);
        Ok(Self { points, gram: g, field })
    }

    /// Unlabeled convenience constructor (labels `s0, s1, ...`).
    pub fn from_matrix(gram: CMatrix) -> Result<Self> {
        let labels = (0..gram.nrows()).map(|i| format!("s{i}")).collect();
        Self::from_gram(PointSet::from_labels(labels)?, gram)
    }

    pub fn with_field(mut self, field: Field) -> Result<Self> {
        if field == Field::Real && self.gram.iter().any(|z| z.im != 0.0) {
            return Err(Error::DomainViolation("real field tag on a complex gram matrix".into()));
        }
        self.field = field;
        Ok(self)
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.gram[(i, j)]
    }

    /// Restriction to the points at `idx` (principal submatrix).
    pub fn restrict(&self, idx: &[usize]) -> Result<Self> {
        let points = self.points.subset(idx)?;
        let gram = CMatrix::from_fn(idx.len(), idx.len(), |a, b| self.gram[(idx[a], idx[b])]);
        Ok(Self { points, gram, field: self.field })
    }
}

fn detect_field(g: &CMatrix) -> Field {
    if g.iter().all(|z| z.im == 0.0) {
        Field::Real
    } else {
        Field::Complex
    }
}

/// A positive definite kernel evaluated entrywise over a point set.
pub trait Kernel: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Rejects point sets outside the kernel's domain.
    fn check_points(&self, points: &PointSet) -> Result<()>;

    /// `K(s_i, s_j)`; only called with `i <= j` by [`assemble_gram`].
    fn entry(&self, points: &PointSet, i: usize, j: usize) -> Result<C64>;

    fn field(&self) -> Option<Field> {
        None
    }
}

/// Evaluates `kernel` on the upper triangle of `points` and mirrors
/// conjugates, so the result is Hermitian bit for bit.
pub fn assemble_gram(kernel: &dyn Kernel, points: &PointSet) -> Result<FiniteKernel> {
    kernel.check_points(points)?;
    let n = points.len();
    let mut gram = CMatrix::zeros(n, n);
    for i in 0..n {
        let d = kernel.entry(points, i, i)?;
        gram[(i, i)] = C64::new(d.re, 0.0);
        for j in i + 1..n {
            let v = kernel.entry(points, i, j)?;
            gram[(i, j)] = v;
            gram[(j, i)] = v.conj();
        }
    }
    let field = kernel.field().unwrap_or_else(|| detect_field(&gram));
    Ok(FiniteKernel { points: points.clone(), gram, field })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub is_psd: bool,
}

/// Spectral PSD test: passes iff `min_eig >= -tol * max(1, max_eig)`.
pub fn check_positive_definite(k: &FiniteKernel, tol: f64) -> Result<PsdReport> {
    psd_report(k.gram(), tol)
}

pub(crate) fn psd_report(g: &CMatrix, tol: f64) -> Result<PsdReport> {
    let scale = crate::linalg::max_abs(g).max(1.0);
    let defect = hermitian_defect(g);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    let eig = HermitianEigen::new(g);
    let (min, max) = (eig.min(), eig.max());
    Ok(PsdReport { min_eigenvalue: min, max_eigenvalue: max, is_psd: min >= -tol * max.max(1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn duplicate_labels_rejected() {
        let r = PointSet::new(vec!["a".into(), "a".into()], vec![vec![c(0.0)], vec![c(0.1)]]);
        assert!(matches!(r, Err(Error::InvalidPoints(_))));
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let r = PointSet::from_tuples(vec![vec![c(0.0)], vec![c(0.1), c(0.2)]]);
        assert!(matches!(r, Err(Error::DimensionMismatch(1, 2))));
    }

    #[test]
    fn psd_examples() {
        let g = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(4.0 / 3.0)]);
        let r = psd_report(&g, DEFAULT_PSD_TOL).unwrap();
        assert!(r.is_psd);
        // det = 1/3 = product of the eigenvalues
        assert!((r.min_eigenvalue * r.max_eigenvalue - 1.0 / 3.0).abs() < 1e-14);

        let r = psd_report(&CMatrix::identity(2, 2), DEFAULT_PSD_TOL).unwrap();
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-15 && r.is_psd);

        let g = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(1.0)]);
        let r = psd_report(&g, DEFAULT_PSD_TOL).unwrap();
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-14);
        assert!((r.max_eigenvalue - 3.0).abs() < 1e-14);
        assert!(!r.is_psd);
    }

    #[test]
    fn non_hermitian_rejected() {
        let g = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.5), c(0.0), c(1.0)]);
        assert!(matches!(psd_report(&g, 1e-10), Err(Error::NotHermitian(_))));
        assert!(matches!(FiniteKernel::from_matrix(g), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn restriction_takes_principal_submatrix() {
        let k = assemble_gram(&Szego, &PointSet::from_scalars(&[c(0.0), c(0.5), c(-0.3)])).unwrap();
        let r = k.restrict(&[2, 0]).unwrap();
        assert_eq!(r.entry(0, 1), k.entry(2, 0));
        assert_eq!(r.points().labels(), &["s2".to_string(), "s0".to_string()]);
        assert!(matches!(k.restrict(&[3]), Err(Error::IndexOutOfRange { index: 3, len: 3 })));
    }
}
