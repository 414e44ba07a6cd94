//! Renormalized kernels `K^ren(s,t) = K(s,t) / (E_s conj(E_t))` with
//! `E_s = Σ_x k_s(x) μ(x)`, and the normalized transform `V_μ`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{apply_v, minimality_test, verify_factorization, BoundaryFactorization};
use crate::kernel::{psd_report, FiniteKernel, PsdReport, DEFAULT_PSD_TOL};
use crate::linalg::{CMatrix, CVector, C64};

/// Expectations with modulus at or below this make renormalization undefined.
pub const ZERO_EXPECTATION_TOL: f64 = 1e-12;

/// `E_i = Σ_x features[i][x] μ(x)`.
pub fn expectation_vector(f: &BoundaryFactorization) -> Vec<C64> {
    let w = f.measure().weights();
    let phi = f.features();
    (0..phi.nrows()).map(|i| (0..phi.ncols()).map(|x| phi[(i, x)] * w[x]).sum()).collect()
}

#[derive(Debug, Clone)]
pub struct RenormContext {
    original: BoundaryFactorization,
    expectations: Vec<C64>,
    renormalized: BoundaryFactorization,
}

impl RenormContext {
    pub fn original(&self) -> &BoundaryFactorization {
        &self.original
    }

    pub fn expectations(&self) -> &[C64] {
        &self.expectations
    }

    /// `K^ren` together with the features `k_s / E_s` over the same measure.
    pub fn renormalized(&self) -> &BoundaryFactorization {
        &self.renormalized
    }

    pub fn kren_gram(&self) -> &CMatrix {
        self.renormalized.kernel().gram()
    }

    pub fn kren_features(&self) -> &CMatrix {
        self.renormalized.features()
    }

    /// Max-abs residual of `K^ren = Σ_x k^ren_s conj(k^ren_t) μ`.
    pub fn identity_residual(&self) -> f64 {
        verify_factorization(&self.renormalized)
    }

    pub fn psd(&self) -> Result<PsdReport> {
        psd_report(self.kren_gram(), DEFAULT_PSD_TOL)
    }
}

pub fn renormalize(f: &BoundaryFactorization) -> Result<RenormContext> {
    let ex = expectation_vector(f);
    if let Some(index) = ex.iter().position(|e| e.norm() <= ZERO_EXPECTATION_TOL) {
        return Err(Error::ZeroExpectation { index });
    }
    let g = f.kernel().gram();
    let n = g.nrows();
    let kren = CMatrix::from_fn(n, n, |i, j| g[(i, j)] / (ex[i] * ex[j].conj()));
    let phi = f.features();
    let feats = CMatrix::from_fn(phi.nrows(), phi.ncols(), |i, x| phi[(i, x)] / ex[i]);
    let kernel = Arc::new(FiniteKernel::from_gram(f.kernel().points().clone(), kren)?);
    let renormalized = BoundaryFactorization::new(kernel, f.measure().clone(), feats)?.with_tolerance(f.tolerance());
    Ok(RenormContext { original: f.clone(), expectations: ex, renormalized })
}

/// `(V_μ g)(s_i) = (1/E_i) Σ_x g(x) k_{s_i}(x) μ(x)`, the transform `V` of
/// the renormalized factorization.
pub fn normalized_transform_v(ctx: &RenormContext, g: &[C64]) -> Result<CVector> {
    let raw = apply_v(&ctx.original, g)?;
    Ok(CVector::from_fn(raw.len(), |i, _| raw[i] / ctx.expectations[i]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityReport {
    pub is_dense: bool,
    pub rank: usize,
    pub deficiency: usize,
}

/// Whether the features span `L²(μ)`; `V_μ` is then unitary.
pub fn density_criterion(f: &BoundaryFactorization, rank_tol: f64) -> DensityReport {
    let m = minimality_test(f, rank_tol);
    let atoms = f.measure().len();
    DensityReport { is_dense: m.is_minimal, rank: m.feature_rank, deficiency: atoms - m.feature_rank.min(atoms) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clark::{build_kb_factorization, cauchy_transform, e, CircleMeasure, InnerFunction};
    use crate::factorization::DiscreteMeasure;
    use crate::kernel::PointSet;
    use crate::linalg::{max_abs_diff, ONE};
    use crate::rkhs::{parseval_factorize, DEFAULT_SPAN_TOL};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn quarter_example() -> BoundaryFactorization {
        let feats = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]);
        let mu = DiscreteMeasure::probability(vec![0.75, 0.25]).unwrap();
        BoundaryFactorization::from_features(PointSet::from_labels(vec!["a".into(), "b".into()]).unwrap(), mu, feats)
            .unwrap()
    }

    #[test]
    fn worked_example() {
        let f = quarter_example();
        let g = f.kernel().gram();
        let want_g = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0)]);
        assert!(max_abs_diff(g, &want_g) < 1e-15);
        let ex = expectation_vector(&f);
        assert!((ex[0] - 1.0).norm() < 1e-15 && (ex[1] - 0.5).norm() < 1e-15);
        let ctx = renormalize(&f).unwrap();
        let want = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(4.0, 0.0)]);
        assert!(max_abs_diff(ctx.kren_gram(), &want) <= 1e-12);
        assert!((ctx.kren_features()[(1, 0)] - 2.0).norm() < 1e-15);
        assert!((ctx.kren_features()[(1, 1)] + 2.0).norm() < 1e-15);
        assert!(ctx.identity_residual() <= 1e-10);
        assert!(ctx.psd().unwrap().is_psd);
    }

    #[test]
    fn clark_expectation_is_one() {
        let b = InnerFunction::new(CircleMeasure::new(vec![0.0, 0.5], vec![0.5, 0.5]).unwrap());
        let f = build_kb_factorization(&b, &PointSet::from_scalars(&[c(0.3, 0.1), c(-0.2, 0.6)])).unwrap();
        assert!(expectation_vector(&f).iter().all(|e| (e - ONE).norm() < 1e-15));
        let ctx = renormalize(&f).unwrap();
        assert!(max_abs_diff(ctx.kren_gram(), f.kernel().gram()) < 1e-15);
    }

    #[test]
    fn szego_features_reproduce_one_minus_b() {
        let mu = CircleMeasure::new(vec![0.1, 0.45, 0.8], vec![0.2, 0.5, 0.3]).unwrap();
        let zs = [c(0.3, 0.1), c(-0.2, 0.6), c(0.0, -0.4)];
        let feats = CMatrix::from_fn(3, 3, |i, x| ONE / (ONE - zs[i] * e(mu.atoms()[x]).conj()));
        let f = BoundaryFactorization::from_features(PointSet::from_scalars(&zs), mu.to_discrete(), feats).unwrap();
        let b = InnerFunction::new(mu.clone());
        for (i, ex) in expectation_vector(&f).iter().enumerate() {
            assert!((ex - cauchy_transform(&mu, zs[i]).unwrap()).norm() < 1e-14);
            assert!((ONE / ex - (ONE - b.eval(zs[i]).unwrap())).norm() <= 1e-12);
        }
    }

    #[test]
    fn zero_expectation_rejected() {
        let feats = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(-1.0, 0.0)]);
        let f = BoundaryFactorization::from_features(
            PointSet::from_labels(vec!["a".into()]).unwrap(),
            DiscreteMeasure::uniform(2),
            feats,
        )
        .unwrap();
        assert!(expectation_vector(&f)[0].norm() == 0.0);
        assert!(matches!(renormalize(&f), Err(Error::ZeroExpectation { index: 0 })));
    }

    #[test]
    fn small_expectation_residual_is_relative() {
        let feats = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(-1.0 + 2e-6, 0.0)]);
        let f = BoundaryFactorization::from_features(
            PointSet::from_labels(vec!["a".into()]).unwrap(),
            DiscreteMeasure::uniform(2),
            feats,
        )
        .unwrap();
        let ctx = renormalize(&f).unwrap();
        assert!((ctx.expectations()[0].re - 1e-6).abs() < 1e-16);
        let scale = crate::linalg::max_abs(ctx.kren_gram());
        assert!(scale > 1e11);
        assert!(ctx.identity_residual() <= 1e-10 * scale);
    }

    #[test]
    fn normalized_transform_examples() {
        let f = quarter_example();
        let ctx = renormalize(&f).unwrap();
        let kren = ctx.kren_gram().clone();
        for t in 0..2 {
            // W_μ K^ren(·,t) = conj(k^ren_t)
            let g: Vec<C64> = ctx.kren_features().row(t).iter().map(|z| z.conj()).collect();
            let v = normalized_transform_v(&ctx, &g).unwrap();
            let via_v = crate::factorization::apply_v(ctx.renormalized(), &g).unwrap();
            for s in 0..2 {
                assert!((v[s] - kren[(s, t)]).norm() < 1e-12);
                assert!((v[s] - via_v[s]).norm() < 1e-12);
            }
        }
        assert!(normalized_transform_v(&ctx, &[c(0.0, 0.0); 2]).unwrap().iter().all(|z| z.norm() == 0.0));

        // one point, three atoms: g orthogonal to the feature lies in ker V_μ
        let feats = CMatrix::from_row_slice(1, 3, &[c(1.0, 0.0), c(2.0, 1.0), c(0.5, 0.0)]);
        let f = BoundaryFactorization::from_features(
            PointSet::from_labels(vec!["a".into()]).unwrap(),
            DiscreteMeasure::uniform(3),
            feats.clone(),
        )
        .unwrap();
        let ctx = renormalize(&f).unwrap();
        // Σ g(x) k(x) = 0
        let g = [feats[(0, 1)], -feats[(0, 0)], c(0.0, 0.0)];
        assert!(normalized_transform_v(&ctx, &g).unwrap()[0].norm() < 1e-15);
    }

    #[test]
    fn density_examples() {
        let b = InnerFunction::new(CircleMeasure::new(vec![0.0, 0.5], vec![0.5, 0.5]).unwrap());
        let f = build_kb_factorization(&b, &PointSet::from_scalars(&[c(0.3, 0.1), c(-0.2, 0.6)])).unwrap();
        assert_eq!(density_criterion(&f, DEFAULT_SPAN_TOL), DensityReport { is_dense: true, rank: 2, deficiency: 0 });

        let f = build_kb_factorization(&b, &PointSet::from_scalars(&[c(0.3, 0.1)])).unwrap();
        assert_eq!(density_criterion(&f, DEFAULT_SPAN_TOL).deficiency, 1);

        let g = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let k = Arc::new(FiniteKernel::from_matrix(g).unwrap());
        let f = BoundaryFactorization::from_frame(&parseval_factorize(&k, 1e-12).unwrap());
        assert!(density_criterion(&f, DEFAULT_SPAN_TOL).is_dense);
    }
}
