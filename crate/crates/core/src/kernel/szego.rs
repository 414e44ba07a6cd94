//! Szegő kernel of the disk and its product over the polydisk.

use crate::error::{Error, Result};
use crate::kernel::{Kernel, PointSet, DISK_MARGIN};
use crate::linalg::{C64, ONE};

pub(crate) fn check_disk(z: C64) -> Result<()> {
    if z.norm() < 1.0 - DISK_MARGIN {
        Ok(())
    } else {
        Err(Error::DomainViolation(format!("|{z}| = {} is not inside the unit disk", z.norm())))
    }
}

/// `1 / (1 - z conj(w))` on the open unit disk.
pub fn szego_eval(z: C64, w: C64) -> Result<C64> {
    check_disk(z)?;
    check_disk(w)?;
    Ok(ONE / (ONE - z * w.conj()))
}

/// Product of one-variable Szegő kernels over the coordinates.
pub fn polydisk_szego_eval(z: &[C64], w: &[C64]) -> Result<C64> {
    if z.len() != w.len() {
        return Err(Error::DimensionMismatch(z.len(), w.len()));
    }
    z.iter().zip(w).try_fold(ONE, |acc, (&a, &b)| Ok(acc * szego_eval(a, b)?))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Szego;

impl Kernel for Szego {
    fn name(&self) -> &'static str {
        "szego"
    }

    fn check_points(&self, points: &PointSet) -> Result<()> {
        if points.dim() != 1 {
            return Err(Error::DimensionMismatch(1, points.dim()));
        }
        (0..points.len()).try_for_each(|i| check_disk(points.coords(i)[0]))
    }

    fn entry(&self, points: &PointSet, i: usize, j: usize) -> Result<C64> {
        szego_eval(points.coords(i)[0], points.coords(j)[0])
    }
}

/// Szegő kernel of the polydisk `D^k`.
#[derive(Debug, Clone, Copy)]
pub struct PolydiskSzego {
    pub k: usize,
}

impl Kernel for PolydiskSzego {
    fn name(&self) -> &'static str {
        "polydisk-szego"
    }

    fn check_points(&self, points: &PointSet) -> Result<()> {
        if points.dim() != self.k {
            return Err(Error::DimensionMismatch(self.k, points.dim()));
        }
        (0..points.len()).try_for_each(|i| points.coords(i).iter().try_for_each(|&z| check_disk(z)))
    }

    fn entry(&self, points: &PointSet, i: usize, j: usize) -> Result<C64> {
        polydisk_szego_eval(points.coords(i), points.coords(j))
    }
}
