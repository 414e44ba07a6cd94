//! Zero-mean Gaussian processes with a prescribed covariance kernel, realized
//! over finite point sets.
//!
//! The covariance `G` is factored as `L L*` with `L = V_r diag(√λ)` from the
//! eigendecomposition (eigenvalues below the rank threshold are clipped), so
//! singular kernels can be sampled. Draws are `L w` with `w` standard normal:
//! real normals for real kernels, circular complex normals
//! (`E|w|² = 1`, `E w² = 0`) otherwise.
//!
//! Sampling is split into fixed-size chunks. Chunk `c` draws from a ChaCha8
//! stream keyed by `(seed, c)`, so a batch depends only on the seed, the
//! chunk size and the sample count, never on thread scheduling.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{psd_report, Field, FiniteKernel, DEFAULT_PSD_TOL};
use crate::linalg::{from_real, max_abs_diff, CMatrix, HermitianEigen, C64};
use crate::rkhs::default_rank_tol;

pub const DEFAULT_CHUNK_SIZE: usize = 8192;

#[derive(Debug, Clone)]
pub struct GaussianRealization {
    kernel: Arc<FiniteKernel>,
    factor: CMatrix,
    field: Field,
    seed: u64,
}

impl GaussianRealization {
    pub fn kernel(&self) -> &Arc<FiniteKernel> {
        &self.kernel
    }

    /// `n x r` factor with `L L* = G`.
    pub fn factor(&self) -> &CMatrix {
        &self.factor
    }

    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn factor_residual(&self) -> f64 {
        max_abs_diff(&(&self.factor * self.factor.adjoint()), self.kernel.gram())
    }
}

pub fn realize(k: &Arc<FiniteKernel>, seed: u64) -> Result<GaussianRealization> {
    let report = psd_report(k.gram(), DEFAULT_PSD_TOL)?;
    if !report.is_psd {
        return Err(Error::NotPsd(report.min_eigenvalue));
    }
    let n = k.len();
    let rank_tol = default_rank_tol(n);
    let factor = match k.field() {
        Field::Real => {
            let g = DMatrix::from_fn(n, n, |i, j| k.gram()[(i, j)].re);
            let eig = SymmetricEigen::new(g);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            let top = order.first().map_or(0.0, |&i| eig.eigenvalues[i]);
            let keep: Vec<usize> = order
                .into_iter()
                .filter(|&i| eig.eigenvalues[i] > rank_tol * top && eig.eigenvalues[i] > 0.0)
                .collect();
            let l = DMatrix::from_fn(n, keep.len(), |i, c| {
                eig.eigenvectors[(i, keep[c])] * eig.eigenvalues[keep[c]].sqrt()
            });
            from_real(&l)
        }
        Field::Complex => {
            let eig = HermitianEigen::new(k.gram());
            let r = eig.retained(rank_tol);
            CMatrix::from_fn(n, r, |i, c| eig.vectors[(i, c)] * eig.values[c].sqrt())
        }
    };
    Ok(GaussianRealization { kernel: k.clone(), factor, field: k.field(), seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub chunk_size: usize,
    pub chunks: usize,
}

/// `N x n` matrix of draws; row `k` is one sample of the process.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub draws: CMatrix,
    pub field: Field,
    pub seed_record: SeedRecord,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.draws.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.nrows() == 0
    }

    /// Keeps only the given coordinates.
    pub fn project(&self, idx: &[usize]) -> Result<SampleBatch> {
        let n = self.draws.ncols();
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        Ok(SampleBatch {
            draws: CMatrix::from_fn(self.draws.nrows(), idx.len(), |k, j| self.draws[(k, idx[j])]),
            field: self.field,
            seed_record: self.seed_record,
        })
    }
}

pub fn sample(r: &GaussianRealization, count: usize) -> Result<SampleBatch> {
    sample_chunked(r, count, DEFAULT_CHUNK_SIZE)
}

pub fn sample_chunked(r: &GaussianRealization, count: usize, chunk_size: usize) -> Result<SampleBatch> {
    if count == 0 || chunk_size == 0 {
        return Err(Error::ShapeMismatch("sample count and chunk size must be at least 1".into()));
    }
    let n = r.factor.nrows();
    let rank = r.factor.ncols();
    let chunks = count.div_ceil(chunk_size);
    let parts: Vec<CMatrix> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let rows = chunk_size.min(count - c * chunk_size);
            let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
            rng.set_stream(c as u64);
            let w = CMatrix::from_fn(rank, rows, |_, _| match r.field {
                Field::Real => C64::new(rng.sample(StandardNormal), 0.0),
                Field::Complex => {
                    let a: f64 = rng.sample(StandardNormal);
                    let b: f64 = rng.sample(StandardNormal);
                    C64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
                }
            });
            (&r.factor * w).transpose()
        })
        .collect();
    let mut draws = CMatrix::zeros(count, n);
    let mut row = 0;
    for part in parts {
        draws.rows_mut(row, part.nrows()).copy_from(&part);
        row += part.nrows();
    }
    Ok(SampleBatch { draws, field: r.field, seed_record: SeedRecord { seed: r.seed, chunk_size, chunks } })
}

/// `(1/N) Σ_k x_k x_k*` (the process mean is known to be zero).
pub fn empirical_covariance(batch: &SampleBatch) -> Result<CMatrix> {
    let count = batch.draws.nrows();
    if count < 2 {
        return Err(Error::ShapeMismatch("empirical covariance needs at least two draws".into()));
    }
    let x = &batch.draws;
    Ok((x.transpose() * x.map(|z| z.conj())).unscale(count as f64))
}

pub fn sample_means(batch: &SampleBatch) -> Vec<C64> {
    let count = batch.draws.nrows() as f64;
    batch.draws.column_iter().map(|c| c.sum() / count).collect()
}

/// Log density of the zero-mean Gaussian with covariance `M` at `z`, with
/// respect to Lebesgue measure on `R^n` (real field) or `C^n ≅ R^{2n}`
/// (circular complex field).
pub fn log_density(m: &FiniteKernel, z: &[C64]) -> Result<f64> {
    let n = m.len();
    if z.len() != n {
        return Err(Error::DimensionMismatch(n, z.len()));
    }
    let eig = HermitianEigen::new(m.gram());
    let min = eig.min();
    if n > 0 && min <= DEFAULT_PSD_TOL * eig.max().max(1.0) {
        return Err(Error::SingularCovariance(min));
    }
    let chol = m.gram().clone().cholesky().ok_or(Error::SingularCovariance(min))?;
    let logdet: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.re.ln()).sum::<f64>();
    let zv = crate::linalg::CVector::from_column_slice(z);
    let sol = chol.solve(&zv);
    let quad = zv.dotc(&sol).re;
    match m.field() {
        Field::Real => {
            if z.iter().any(|v| v.im != 0.0) {
                return Err(Error::DomainViolation("complex point for a real Gaussian density".into()));
            }
            Ok(-0.5 * (n as f64 * (2.0 * PI).ln() + logdet + quad))
        }
        Field::Complex => Ok(-(n as f64 * PI.ln() + logdet + quad)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub exact_ok: bool,
    pub exact_residual: f64,
    pub empirical_deviation: f64,
    /// `4 max_i G_ii / √N`, the single-estimate CLT scale.
    pub clt_bound: f64,
    /// Deviation within twice the CLT scale (two independent estimates).
    pub within_bound: bool,
}

/// Restriction vs. direct realization on a subset of points.
pub fn consistency_check(
    k: &Arc<FiniteKernel>,
    subset: &[usize],
    count: usize,
    seed: u64,
) -> Result<ConsistencyReport> {
    let sub = Arc::new(k.restrict(subset)?);
    let full = realize(k, seed)?;
    let lf = CMatrix::from_fn(subset.len(), full.rank(), |a, c| full.factor[(subset[a], c)]);
    let exact_residual = max_abs_diff(&(&lf * lf.adjoint()), sub.gram());
    let scale = crate::linalg::max_abs(sub.gram()).max(1.0);

    let projected = sample(&full, count)?.project(subset)?;
    let direct = sample(&realize(&sub, seed.wrapping_add(1))?, count)?;
    let empirical_deviation = max_abs_diff(&empirical_covariance(&projected)?, &empirical_covariance(&direct)?);
    let gmax = (0..sub.len()).map(|i| sub.entry(i, i).re).fold(0.0, f64::max);
    let clt_bound = 4.0 * gmax / (count as f64).sqrt();
    Ok(ConsistencyReport {
        exact_ok: exact_residual <= 1e-12 * scale,
        exact_residual,
        empirical_deviation,
        clt_bound,
        within_bound: empirical_deviation <= 2.0 * clt_bound,
    })
}
