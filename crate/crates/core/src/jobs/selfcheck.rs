//! The repository self-check run by `verify-all`.
//!
//! Each criterion draws its inputs from its own ChaCha stream of the job
//! seed, so criteria are independent and the whole run is reproducible.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clark::{
    b_eval, build_kb_factorization, e, expectation_vector, herglotz_poisson_check, inner_modulus_check, kb_eval,
    polydisk_density_test, renormalize, CircleMeasure, InnerFunction, ATOM_MARGIN,
};
use crate::corpus::{
    complex_matrix, complex_vec, random_atoms, random_circle_measure, random_disk_points, random_psd,
    random_torus_atoms, random_weights,
};
use crate::error::Result;
use crate::factorization::{
    apply_v, apply_w, check_isometry, check_morphism, minimality_test, schwarz_bound_check, verify_factorization,
    w21_isometry_residual, BoundaryFactorization, DiscreteMeasure, MeasureMorphism, MorphismReport,
};
use crate::gaussian::{consistency_check, empirical_covariance, realize, sample, sample_means};
use crate::jobs::pipeline::{MODULUS_GRID, MODULUS_RADIUS};
use crate::jobs::report::{Check, Report};
use crate::kernel::{assemble_gram, FiniteKernel, PointSet, Szego};
use crate::linalg::{max_abs_diff, CMatrix, C64, ONE};
use crate::rkhs::{default_rank_tol, parseval_factorize, verify_parseval, RkhsElement, DEFAULT_SPAN_TOL};

pub const C1_RESIDUAL: f64 = 1e-10;
pub const C2_RESIDUAL: f64 = 1e-9;
pub const C2_SPECTRUM: f64 = 1e-7;
pub const C3_SLACK: f64 = 1e-9;
pub const C4_W21: f64 = 1e-12;
pub const C5_SAMPLES: usize = 200_000;
pub const C5_COVARIANCE: f64 = 0.02;
pub const C5_MEAN: f64 = 0.012;
pub const C5_CONSISTENCY: f64 = 0.03;
pub const C6_EXACT: f64 = 1e-12;
pub const C6_RESIDUAL: f64 = 1e-10;
pub const C7_HERGLOTZ: f64 = 1e-10;
pub const C8_MODULUS: f64 = 1e-3;
pub const C8_EXACT: f64 = 1e-12;
pub const C9_KREN: f64 = 1e-12;
pub const C9_RESIDUAL: f64 = 1e-10;
pub const C9_MIN_EXPECTATION: f64 = 1e-3;
pub const C9_CROSS: f64 = 1e-12;

/// Interior test points are drawn from this disk.
const DISK_RADIUS: f64 = 0.95;

pub const TITLES: [&str; 11] = [
    "factorization reconstruction",
    "transform pair",
    "schwarz bound",
    "morphism checker",
    "gaussian realization",
    "clark exactness",
    "poisson-herglotz identity",
    "inner modulus",
    "renormalization",
    "polydisk density",
    "determinism",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub checks: Vec<Check>,
}

impl CriterionResult {
    fn new(id: u8) -> Self {
        Self { id, title: TITLES[id as usize - 1].to_string(), checks: Vec::new() }
    }

    fn le(&mut self, name: &str, value: f64, threshold: f64) {
        let v = value.is_finite().then_some(value);
        self.checks.push(Check { name: name.into(), passed: value <= threshold, value: v, threshold: Some(threshold) });
    }

    fn flag(&mut self, name: &str, passed: bool) {
        self.checks.push(Check { name: name.into(), passed, value: None, threshold: None });
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// `criterion N <title>: PASS|FAIL` followed by each check.
    pub fn summary(&self) -> String {
        let mut s = format!("criterion {:>2} {}: {}", self.id, self.title, if self.passed() { "PASS" } else { "FAIL" });
        for c in &self.checks {
            match (c.value, c.threshold) {
                (v, Some(t)) => {
                    s.push_str(&format!(" [{} {} <= {t:e}]", c.name, v.map_or("nan".into(), |v| format!("{v:e}"))))
                }
                _ => s.push_str(&format!(" [{} {}]", c.name, c.passed)),
            }
        }
        s
    }
}

fn rng(seed: u64, id: u8) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(100 + id as u64);
    r
}

/// 200 random PSD matrices, `n <= 20`, random rank.
pub fn psd_corpus(seed: u64) -> Vec<Arc<FiniteKernel>> {
    let mut r = rng(seed, 1);
    (0..200)
        .map(|_| {
            let n = r.random_range(1..=20);
            let rank = r.random_range(1..=n);
            Arc::new(FiniteKernel::from_matrix(random_psd(&mut r, n, rank)).expect("A A* is Hermitian"))
        })
        .collect()
}

pub fn criterion_1(seed: u64) -> Result<CriterionResult> {
    let mut out = CriterionResult::new(1);
    let mut worst: f64 = 0.0;
    for k in psd_corpus(seed) {
        worst = worst.max(verify_parseval(&parseval_factorize(&k, default_rank_tol(k.len()))?));
    }
    out.le("max_residual", worst, C1_RESIDUAL);
    Ok(out)
}

pub fn criterion_2(seed: u64) -> Result<CriterionResult> {
    let mut out = CriterionResult::new(2);
    let (mut iso, mut vw, mut proj, mut spec): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for k in psd_corpus(seed) {
        let f = BoundaryFactorization::from_frame(&parseval_factorize(&k, default_rank_tol(k.len()))?);
        let rep = check_isometry(&f)?;
        iso = iso.max(rep.wstar_w_residual);
        proj = proj.max(rep.projection_residual);
        spec = spec.max(rep.spectrum_defect);
        for t in 0..k.len() {
            let w = apply_w(&f, &RkhsElement::generator(k.clone(), t)?)?;
            let v = apply_v(&f, w.as_slice())?;
            for s in 0..k.len() {
                vw = vw.max((v[s] - k.entry(s, t)).norm());
            }
        }
    }
    out.le("w_isometry", iso, C2_RESIDUAL);
    out.le("vw_generator", vw, C2_RESIDUAL);
    out.le("projection", proj, C2_RESIDUAL);
    out.le("projection_spectrum", spec, C2_SPECTRUM);
    Ok(out)
}

pub fn criterion_3(seed: u64) -> Result<CriterionResult> {
    let mut out = CriterionResult::new(3);
    let mut r = rng(seed, 3);
    let mut failures = 0usize;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_equality: f64 = 0.0;
    for _ in 0..500 {
        let n = r.random_range(1..=8);
        let m = r.random_range(1..=10);
        let feats = complex_matrix(&mut r, n, m);
        let mu = DiscreteMeasure::probability(random_weights(&mut r, m))?;
        let points = PointSet::from_labels((0..n).map(|i| format!("s{i}")).collect())?;
        let f = BoundaryFactorization::from_features(points, mu, feats.clone())?;
        let g = complex_vec(&mut r, m);
        let xi = complex_vec(&mut r, n);
        let rep = schwarz_bound_check(&f, &g, &xi)?;
        if !rep.holds {
            failures += 1;
        }
        if rep.rhs > 0.0 {
            worst_ratio = worst_ratio.max(rep.lhs / rep.rhs - 1.0);
        }
        // g = conj(Σ ξ_i k_i) attains equality
        let g_eq: Vec<C64> = (0..m).map(|x| (0..n).map(|i| xi[i] * feats[(i, x)]).sum::<C64>().conj()).collect();
        let eq = schwarz_bound_check(&f, &g_eq, &xi)?;
        if eq.rhs > 0.0 {
            worst_equality = worst_equality.max((eq.lhs - eq.rhs).abs() / eq.rhs);
        }
    }
    out.le("violations", failures as f64, 0.0);
    out.le("max_relative_excess", worst_ratio, C3_SLACK);
    out.le("equality_case", worst_equality, C3_SLACK);
    Ok(out)
}

fn labelled(labels: &[&str], w: &[f64]) -> Result<DiscreteMeasure> {
    DiscreteMeasure::new(labels.iter().map(|s| s.to_string()).collect(), w.to_vec(), true)
}

pub fn criterion_4(seed: u64) -> Result<CriterionResult> {
    let mut out = CriterionResult::new(4);
    let mut r = rng(seed, 4);
    let feats1 = complex_matrix(&mut r, 3, 2);
    let points = || PointSet::from_labels(vec!["s0".into(), "s1".into(), "s2".into()]);
    let pulled = |map: &[usize]| CMatrix::from_fn(3, map.len(), |i, x| feats1[(i, map[x])]);

    let mu = labelled(&["a", "b"], &[0.5, 0.5])?;
    let f1 = BoundaryFactorization::from_features(points()?, mu.clone(), feats1.clone())?;
    let identity = MeasureMorphism::identity(mu);
    let v_id = check_morphism(&identity, &f1, &f1)?;

    let mu2 = labelled(&["0", "1", "2"], &[0.25, 0.25, 0.5])?;
    let collapse = MeasureMorphism::from_labels(mu2.clone(), f1.measure().clone(), &["a", "a", "b"])?;
    let f2 = BoundaryFactorization::new(f1.kernel().clone(), mu2, pulled(collapse.map()))?;
    let v_collapse = check_morphism(&collapse, &f1, &f2)?;

    let mu_wrong = labelled(&["a", "b"], &[0.6, 0.4])?;
    let f1_wrong = BoundaryFactorization::new(f1.kernel().clone(), mu_wrong.clone(), feats1.clone())?;
    let src = labelled(&["0", "1"], &[0.5, 0.5])?;
    let wrong = MeasureMorphism::from_labels(src.clone(), mu_wrong, &["a", "b"])?;
    let f2_wrong = BoundaryFactorization::new(f1.kernel().clone(), src, pulled(wrong.map()))?;
    let v_wrong = check_morphism(&wrong, &f1_wrong, &f2_wrong)?;

    let all = MorphismReport { pushforward_ok: true, sigma_ok: true, diagram_ok: true };
    out.flag("identity_verdict", v_id == all);
    out.flag("collapse_verdict", v_collapse == MorphismReport { sigma_ok: false, ..all });
    out.flag("wrong_weight_verdict", v_wrong == MorphismReport { pushforward_ok: false, ..all });

    let mut w21: f64 = 0.0;
    for m in [&identity, &collapse] {
        for _ in 0..100 {
            w21 = w21.max(w21_isometry_residual(m, &complex_vec(&mut r, m.target().len()))?);
        }
    }
    out.le("w21_isometry", w21, C4_W21);
    Ok(out)
}

/// Real part of the Szegő Gram matrix at `0.5 e(k/4)`, `k = 0..4`.
pub fn szego_real_four() -> Result<Arc<FiniteKernel>> {
    let zs: Vec<C64> = (0..4).map(|k| e(k as f64 / 4.0) * 0.5).collect();
    let g = assemble_gram(&Szego, &PointSet::from_scalars(&zs))?;
    let re = g.gram().map(|z| C64::new(z.re, 0.0));
    Ok(Arc::new(FiniteKernel::from_matrix(re)?))
}

pub fn criterion_5(seed: u64) -> Result<CriterionResult> {
    let mut out = CriterionResult::new(5);
    let identity = Arc::new(FiniteKernel::from_matrix(CMatrix::identity(2, 2))?);
    for (name, k, subset) in [("szego4", szego_real_four()?, vec![0, 2]), ("identity2", identity, vec![1])] {
        let s = seed.wrapping_add(5);
        let batch = sample(&realize(&k, s)?, C5_SAMPLES)?;
        let cov = empirical_covariance(&batch)?;
        out.le(&format!("{name}.covariance"), max_abs_diff(&cov, k.gram()), C5_COVARIANCE);
        let mean = sample_means(&batch).iter().map(|z| z.norm()).fold(0.0, f64::max);
        out.le(&format!("{name}.mean"), mean, C5_MEAN);
        let c = consistency_check(&k, &subset, C5_SAMPLES, s)?;
        out.flag(&format!("{name}.consistency_exact"), c.exact_ok);
        out.le(&format!("{name}.consistency"), c.empirical_deviation, C5_CONSISTENCY);
    }
    Ok(out)
}

pub fn criterion_6(seed: u64) -> Result<CriterionResult> {
    let mut out = CriterionResult::new(6);
    let mut r = rng(seed, 6);
    let delta = InnerFunction::new(CircleMeasure::dirac(0.0)?);
    let two = InnerFunction::new(CircleMeasure::new(vec![0.0, 0.5], vec![0.5, 0.5])?);
    let zs = random_disk_points(&mut r, 100, DISK_RADIUS);
    let ws = random_disk_points(&mut r, 100, DISK_RADIUS);
    let (mut b1, mut k1, mut b2, mut k2): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (&z, &w) in zs.iter().zip(&ws) {
        b1 = b1.max((b_eval(&delta, z)? - z).norm());
        k1 = k1.max((kb_eval(&delta, z, w)? - ONE).norm());
        b2 = b2.max((b_eval(&two, z)? - z * z).norm());
        k2 = k2.max((kb_eval(&two, z, w)? - (ONE + z * w.conj())).norm());
    }
    out.le("dirac.b", b1, C6_EXACT);
    out.le("dirac.kernel", k1, C6_EXACT);
    out.le("two_atom.b", b2, C6_EXACT);
    out.le("two_atom.kernel", k2, C6_EXACT);
    let points = PointSet::from_scalars(&zs[..10]);
    for (name, b) in [("dirac", &delta), ("two_atom", &two)] {
        let f = build_kb_factorization(b, &points)?;
        out.le(&format!("{name}.residual"), verify_factorization(&f), C6_RESIDUAL);
        let min = minimality_test(&f, DEFAULT_SPAN_TOL);
        out.flag(&format!("{name}.rank_equals_atoms"), min.feature_rank == b.measure().len());
    }
    Ok(out)
}

pub fn criterion_7(seed: u64) -> Result<CriterionResult> {
    let mut out = CriterionResult::new(7);
    let mut r = rng(seed, 7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let b = InnerFunction::new(random_circle_measure(&mut r, 6));
        for z in random_disk_points(&mut r, 100, DISK_RADIUS) {
            worst = worst.max(herglotz_poisson_check(&b, z)?.abs_error);
        }
    }
    out.le("max_abs_error", worst, C7_HERGLOTZ);
    Ok(out)
}

pub fn criterion_8(seed: u64) -> Result<CriterionResult> {
    let mut out = CriterionResult::new(8);
    let mut r = rng(seed, 8);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mu = random_circle_measure(&mut r, 6);
        let grid = mu.non_atom_grid(MODULUS_GRID, ATOM_MARGIN);
        worst = worst.max(inner_modulus_check(&InnerFunction::new(mu), &grid, MODULUS_RADIUS)?);
    }
    out.le("random_corpus", worst, C8_MODULUS);
    let rr = MODULUS_RADIUS;
    for (name, mu, power) in
        [("dirac", CircleMeasure::dirac(0.0)?, 1), ("two_atom", CircleMeasure::new(vec![0.0, 0.5], vec![0.5, 0.5])?, 2)]
    {
        let grid = mu.non_atom_grid(MODULUS_GRID, ATOM_MARGIN);
        let dev = inner_modulus_check(&InnerFunction::new(mu), &grid, rr)?;
        out.le(&format!("{name}.exact"), (dev - (1.0 - rr.powi(power))).abs(), C8_EXACT);
    }
    Ok(out)
}

pub fn criterion_9(seed: u64) -> Result<CriterionResult> {
    let mut out = CriterionResult::new(9);
    let mut r = rng(seed, 9);
    let c = |re: f64| C64::new(re, 0.0);
    let worked = BoundaryFactorization::from_features(
        PointSet::from_labels(vec!["s0".into(), "s1".into()])?,
        DiscreteMeasure::probability(vec![0.75, 0.25])?,
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(-1.0)]),
    )?;
    let want = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(4.0)]);
    out.le("worked_kren", max_abs_diff(renormalize(&worked)?.kren_gram(), &want), C9_KREN);

    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    while accepted < 100 {
        let n = r.random_range(1..=6);
        let m = r.random_range(1..=8);
        let mu = DiscreteMeasure::probability(random_weights(&mut r, m))?;
        let points = PointSet::from_labels((0..n).map(|i| format!("s{i}")).collect())?;
        let f = BoundaryFactorization::from_features(points, mu, complex_matrix(&mut r, n, m))?;
        if expectation_vector(&f).iter().any(|z| z.norm() < C9_MIN_EXPECTATION) {
            continue;
        }
        accepted += 1;
        worst = worst.max(renormalize(&f)?.identity_residual());
    }
    out.le("random_identity", worst, C9_RESIDUAL);

    let mut cross: f64 = 0.0;
    for _ in 0..20 {
        let mu = random_circle_measure(&mut r, 6);
        let zs = random_disk_points(&mut r, 10, DISK_RADIUS);
        let atoms = mu.atoms().to_vec();
        let feats = CMatrix::from_fn(zs.len(), atoms.len(), |i, x| ONE / (ONE - zs[i] * e(atoms[x]).conj()));
        let f = BoundaryFactorization::from_features(PointSet::from_scalars(&zs), mu.to_discrete(), feats)?;
        let b = InnerFunction::new(mu);
        for (z, ex) in zs.iter().zip(expectation_vector(&f)) {
            cross = cross.max((ONE / ex - (ONE - b_eval(&b, *z)?)).norm());
        }
    }
    out.le("one_minus_b", cross, C9_CROSS);
    Ok(out)
}

pub fn criterion_10(seed: u64) -> Result<CriterionResult> {
    let mut out = CriterionResult::new(10);
    let mut r = rng(seed, 10);
    let mut off_target = 0usize;
    for _ in 0..50 {
        let m = r.random_range(1..=8);
        let atoms: Vec<Vec<f64>> = random_atoms(&mut r, m, 0.02).into_iter().map(|x| vec![x]).collect();
        let mu = DiscreteMeasure::probability(random_weights(&mut r, m))?.with_coords(atoms)?;
        let scan = polydisk_density_test(&mu, m, DEFAULT_SPAN_TOL)?;
        if scan.saturation_degree != Some(m - 1) {
            off_target += 1;
        }
    }
    out.le("k1_not_at_m_minus_1", off_target as f64, 0.0);
    let mut unsaturated = 0usize;
    for _ in 0..50 {
        let m = r.random_range(1..=8);
        let atoms = random_torus_atoms(&mut r, m, 2, 0.02);
        let mu = DiscreteMeasure::probability(random_weights(&mut r, m))?.with_coords(atoms)?;
        if !polydisk_density_test(&mu, m, DEFAULT_SPAN_TOL)?.saturated {
            unsaturated += 1;
        }
    }
    out.le("k2_unsaturated", unsaturated as f64, 0.0);
    Ok(out)
}

pub fn criterion(id: u8, seed: u64) -> Result<CriterionResult> {
    match id {
        1 => criterion_1(seed),
        2 => criterion_2(seed),
        3 => criterion_3(seed),
        4 => criterion_4(seed),
        5 => criterion_5(seed),
        6 => criterion_6(seed),
        7 => criterion_7(seed),
        8 => criterion_8(seed),
        9 => criterion_9(seed),
        10 => criterion_10(seed),
        11 => criterion_11(seed),
        _ => Err(crate::error::Error::Config(format!("no criterion {id}"))),
    }
}

/// Criteria 1 through 10.
pub fn run_criteria(seed: u64) -> Result<Vec<CriterionResult>> {
    (1..=10).map(|id| criterion(id, seed)).collect()
}

/// Runs criteria 1 through 10 twice and compares the serialized results.
pub fn criterion_11(seed: u64) -> Result<CriterionResult> {
    let mut out = CriterionResult::new(11);
    let a = serde_json::to_string(&run_criteria(seed)?)?;
    let b = serde_json::to_string(&run_criteria(seed)?)?;
    out.flag("rerun_identical", a == b);
    Ok(out)
}

pub fn verify_all(seed: u64) -> Result<Report> {
    let mut results = run_criteria(seed)?;
    let again = run_criteria(seed)?;
    let mut c11 = CriterionResult::new(11);
    c11.flag("rerun_identical", serde_json::to_string(&results)? == serde_json::to_string(&again)?);
    results.push(c11);

    let mut report = Report::new("verify-all", seed);
    for res in &results {
        log::info!("{}", res.summary());
        for c in &res.checks {
            report.checks.push(Check { name: format!("c{:02}.{}", res.id, c.name), ..c.clone() });
        }
        report.rank(&format!("c{:02}.passed", res.id), res.passed() as usize);
    }
    Ok(report)
}
