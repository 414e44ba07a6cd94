//! Monomial density on the torus: the characters
//! `e_n(x) = e(n_1 x_1) ··· e(n_k x_k)`, `n ∈ N₀^k`, are dense in `L²(μ)` for
//! a finite atomic `μ` iff their restrictions to the atoms span `C^m`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clark::e;
use crate::error::{Error, Result};
use crate::factorization::DiscreteMeasure;
use crate::linalg::{numerical_rank, CMatrix, C64};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityScan {
    /// Rank for `|n|_∞ <= d`, `d = 0..=max_degree`.
    pub rank_sequence: Vec<usize>,
    pub saturated: bool,
    pub saturation_degree: Option<usize>,
}

/// All multi-indices in `{0..=d}^k`, lexicographic.
fn multi_indices(k: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=d).map(move |n| {
                    let mut p = prefix.clone();
                    p.push(n);
                    p
                })
            })
            .collect();
    }
    out
}

/// Rank of the weighted moment matrix `√μ(x) e_n(x)` for each degree cap.
/// `mu` must carry coordinates in `[0,1)^k`, pairwise distinct.
pub fn polydisk_density_test(mu: &DiscreteMeasure, max_degree: usize, rank_tol: f64) -> Result<DensityScan> {
    let coords = mu.coords().ok_or_else(|| Error::InvalidMeasure("torus atoms need coordinates".into()))?;
    let k = coords.first().map_or(0, Vec::len);
    if k == 0 || coords.iter().any(|c| c.len() != k) {
        return Err(Error::InvalidMeasure("atom coordinates must share a dimension k >= 1".into()));
    }
    if let Some(x) = coords.iter().flatten().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(Error::InvalidMeasure(format!("coordinate {x} is outside [0,1)")));
    }
    for (i, a) in coords.iter().enumerate() {
        if coords[..i].contains(a) {
            return Err(Error::InvalidMeasure(format!("atom {a:?} repeated")));
        }
    }
    let w = mu.weights();
    let m = coords.len();
    let rank_sequence: Vec<usize> = (0..=max_degree)
        .into_par_iter()
        .map(|d| {
            let idx = multi_indices(k, d);
            let mat = CMatrix::from_fn(m, idx.len(), |x, col| {
                let phase: C64 = idx[col].iter().zip(&coords[x]).map(|(&n, &t)| e(n as f64 * t)).product();
                phase * w[x].sqrt()
            });
            numerical_rank(&mat, rank_tol)
        })
        .collect();
    let saturation_degree = rank_sequence.iter().position(|&r| r == m);
    Ok(DensityScan { saturated: saturation_degree.is_some(), rank_sequence, saturation_degree })
}
