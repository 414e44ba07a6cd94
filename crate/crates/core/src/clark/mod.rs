//! Clark measures on the circle and the kernels built from them.
//!
//! A finite atomic probability measure `μ = Σ_j w_j δ_{x_j}` on `[0,1) ≅ T`
//! has Cauchy transform `C(z) = Σ_j w_j / (1 - z conj(e(x_j)))` with
//! `e(x) = exp(2πix)`. The associated inner function is `b = 1 - 1/C`, which
//! gives `Re[(1+b)/(1-b)] = P_z[μ]` and `1/C = 1 - b`. The kernel
//! `K^(b)(z,w) = (1 - b(z) conj(b(w))) / (1 - z conj(w))` factors exactly
//! over `μ` with features `k_z(x_j) = (1 - b(z)) / (1 - z conj(e(x_j)))`,
//! using the boundary value `b(e(x_j)) = 1` at every atom.
//!
//! The alternative form `b = 1 - C` is available as [`BForm::Printed`] for
//! comparison only. It is not inner (for `μ = δ₀` it equals `-z/(1-z)`) and
//! has no finite boundary value at atoms, so factorizations reject it.

mod density;
mod renorm;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use density::{polydisk_density_test, DensityScan};
pub use renorm::{
    density_criterion, expectation_vector, normalized_transform_v, renormalize, DensityReport, RenormContext,
};

use crate::error::{Error, Result};
use crate::factorization::{BoundaryFactorization, DiscreteMeasure};
use crate::kernel::szego::check_disk;
use crate::kernel::{assemble_gram, Kernel, PointSet};
use crate::linalg::{CMatrix, C64, ONE};

/// `|C(z)|` below this is treated as a zero of the Cauchy transform.
pub const CAUCHY_ZERO_TOL: f64 = 1e-14;

/// Minimum circular distance between a modulus-test angle and any atom.
pub const ATOM_MARGIN: f64 = 1e-3;

/// `e(x) = exp(2πix)`.
pub fn e(x: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * x)
}

/// Distance on `[0,1)` viewed as the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl CircleMeasure {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!("{} atoms with {} weights", atoms.len(), weights.len())));
        }
        if let Some(x) = atoms.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(Error::InvalidMeasure(format!("atom {x} is outside [0,1)")));
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].contains(a) {
                return Err(Error::InvalidMeasure(format!("atom {a} repeated")));
            }
        }
        // also validates positivity and total mass
        DiscreteMeasure::probability(weights.clone())?;
        Ok(Self { atoms, weights })
    }

    /// Dirac mass at `x`.
    pub fn dirac(x: f64) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The same measure as a generic atomic measure with coordinates.
    pub fn to_discrete(&self) -> DiscreteMeasure {
        let labels = self.atoms.iter().map(|x| format!("{x}")).collect();
        DiscreteMeasure::new(labels, self.weights.clone(), true)
            .and_then(|m| m.with_coords(self.atoms.iter().map(|&x| vec![x]).collect()))
            .expect("validated on construction")
    }

    /// Evenly spaced angles keeping at least `margin` from every atom.
    pub fn non_atom_grid(&self, count: usize, margin: f64) -> Vec<f64> {
        (0..count)
            .map(|k| (k as f64 + 0.5) / count as f64)
            .filter(|&t| self.atoms.iter().all(|&a| circular_distance(t, a) >= margin))
            .collect()
    }
}

/// `C(z) = Σ_j w_j / (1 - z conj(e(x_j)))`.
pub fn cauchy_transform(mu: &CircleMeasure, z: C64) -> Result<C64> {
    check_disk(z)?;
    Ok(mu.atoms.iter().zip(&mu.weights).map(|(&x, &w)| w / (ONE - z * e(x).conj())).sum())
}

/// Poisson integral `Σ_j w_j (1 - |z|²) / |e(x_j) - z|²`.
pub fn poisson_integral(mu: &CircleMeasure, z: C64) -> Result<f64> {
    check_disk(z)?;
    let num = 1.0 - z.norm_sqr();
    Ok(mu.atoms.iter().zip(&mu.weights).map(|(&x, &w)| w * num / (e(x) - z).norm_sqr()).sum())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BForm {
    /// `b = 1 - 1/C`.
    #[default]
    Reciprocal,
    /// `b = 1 - C`.
    Printed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerFunction {
    measure: CircleMeasure,
    form: BForm,
}

impl InnerFunction {
    pub fn new(measure: CircleMeasure) -> Self {
        Self { measure, form: BForm::Reciprocal }
    }

    pub fn with_form(measure: CircleMeasure, form: BForm) -> Self {
        Self { measure, form }
    }

    pub fn measure(&self) -> &CircleMeasure {
        &self.measure
    }

    pub fn form(&self) -> BForm {
        self.form
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        b_eval(self, z)
    }

    /// Boundary value at atom `j`: the radial limit, which is 1.
    fn atom_value(&self) -> Result<C64> {
        match self.form {
            BForm::Reciprocal => Ok(ONE),
            BForm::Printed => Err(Error::DomainViolation("the printed form of b has a pole at every atom".into())),
        }
    }
}

pub fn b_eval(b: &InnerFunction, z: C64) -> Result<C64> {
    let c = cauchy_transform(&b.measure, z)?;
    match b.form {
        BForm::Reciprocal => {
            if c.norm() < CAUCHY_ZERO_TOL {
                return Err(Error::CauchyZero(z.to_string()));
            }
            Ok(ONE - ONE / c)
        }
        BForm::Printed => Ok(ONE - c),
    }
}

/// Max over the angles of `|1 - |b(r e(θ))||`.
pub fn inner_modulus_check(b: &InnerFunction, thetas: &[f64], r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::DomainViolation(format!("radius {r} is not in (0,1)")));
    }
    let mut worst: f64 = 0.0;
    for &t in thetas {
        if b.measure.atoms.iter().any(|&a| circular_distance(t, a) < ATOM_MARGIN) {
            return Err(Error::DomainViolation(format!("angle {t} is within {ATOM_MARGIN} of an atom")));
        }
        worst = worst.max((1.0 - b_eval(b, e(t) * r)?.norm()).abs());
    }
    Ok(worst)
}

/// `(1 - b(z) conj(b(w))) / (1 - z conj(w))`.
pub fn kb_eval(b: &InnerFunction, z: C64, w: C64) -> Result<C64> {
    let (bz, bw) = (b_eval(b, z)?, b_eval(b, w)?);
    Ok((ONE - bz * bw.conj()) / (ONE - z * w.conj()))
}

/// `k_z(x_j) = (1 - b(z) conj(b(e(x_j)))) / (1 - z conj(e(x_j)))`.
pub fn kb_feature(b: &InnerFunction, z: C64, atom: usize) -> Result<C64> {
    let x = *b.measure.atoms.get(atom).ok_or(Error::IndexOutOfRange { index: atom, len: b.measure.len() })?;
    let bz = b_eval(b, z)?;
    let bx = b.atom_value()?;
    Ok((ONE - bz * bx.conj()) / (ONE - z * e(x).conj()))
}

/// `K^(b)` as a registered kernel on one-dimensional disk points.
#[derive(Debug, Clone)]
pub struct DeBrangesRovnyak {
    b: InnerFunction,
}

impl DeBrangesRovnyak {
    pub fn new(measure: CircleMeasure, form: BForm) -> Self {
        Self { b: InnerFunction::with_form(measure, form) }
    }

    pub fn inner(&self) -> &InnerFunction {
        &self.b
    }
}

impl Kernel for DeBrangesRovnyak {
    fn name(&self) -> &'static str {
        "debranges-rovnyak"
    }

    fn check_points(&self, points: &PointSet) -> Result<()> {
        if points.dim() != 1 {
            return Err(Error::DimensionMismatch(1, points.dim()));
        }
        (0..points.len()).try_for_each(|i| check_disk(points.coords(i)[0]))
    }

    fn entry(&self, points: &PointSet, i: usize, j: usize) -> Result<C64> {
        kb_eval(&self.b, points.coords(i)[0], points.coords(j)[0])
    }
}

/// The exact finite-sum factorization of `K^(b)` over `μ`.
pub fn build_kb_factorization(b: &InnerFunction, points: &PointSet) -> Result<BoundaryFactorization> {
    let kernel = DeBrangesRovnyak { b: b.clone() };
    let gram = assemble_gram(&kernel, points)?;
    let m = b.measure.len();
    let mut features = CMatrix::zeros(points.len(), m);
    for i in 0..points.len() {
        for x in 0..m {
            features[(i, x)] = kb_feature(b, points.coords(i)[0], x)?;
        }
    }
    BoundaryFactorization::new(Arc::new(gram), b.measure.to_discrete(), features)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HerglotzReport {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_error: f64,
}

/// Compares `Re[(1+b)/(1-b)]` with the Poisson integral of `μ`.
pub fn herglotz_poisson_check(b: &InnerFunction, z: C64) -> Result<HerglotzReport> {
    let bz = b_eval(b, z)?;
    if (ONE - bz).norm() < CAUCHY_ZERO_TOL {
        return Err(Error::BAtOne(z.to_string()));
    }
    let lhs = ((ONE + bz) / (ONE - bz)).re;
    let rhs = poisson_integral(&b.measure, z)?;
    Ok(HerglotzReport { lhs, rhs, abs_error: (lhs - rhs).abs() })
}
