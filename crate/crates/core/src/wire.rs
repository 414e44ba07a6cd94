//! JSON wire types: complex scalars as `{re, im}`, matrices row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireComplex {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<C64> for WireComplex {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<WireComplex> for C64 {
    fn from(w: WireComplex) -> Self {
        C64::new(w.re, w.im)
    }
}

pub type WireVector = Vec<WireComplex>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WireMatrix(pub Vec<Vec<WireComplex>>);

impl WireMatrix {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect())
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged matrix rows".into()));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| self.0[i][j].into()))
    }

    pub fn nrows(&self) -> usize {
        self.0.len()
    }
}

pub fn to_wire_vec(v: &[C64]) -> WireVector {
    v.iter().map(|&z| z.into()).collect()
}

pub fn from_wire_vec(v: &[WireComplex]) -> Vec<C64> {
    v.iter().map(|&w| w.into()).collect()
}
