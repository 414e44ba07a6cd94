//! Invariants as property tests. Numerical inputs are drawn from a ChaCha
//! stream keyed by a proptest-chosen seed; statistical properties run over
//! a fixed seed list so they stay deterministic.

use std::collections::BTreeMap;
use std::sync::Arc;

use kbound::clark::{
    b_eval, build_kb_factorization, circular_distance, e, expectation_vector, herglotz_poisson_check, renormalize,
    CircleMeasure, InnerFunction, ATOM_MARGIN,
};
use kbound::corpus::{
    complex_matrix, complex_vec, random_circle_measure, random_disk_points, random_psd, random_weights,
};
use kbound::factorization::{
    apply_v, apply_w, check_isometry, l2_norm_sqr, minimality_test, verify_factorization, w21_isometry_residual,
    BoundaryFactorization, DiscreteMeasure, MeasureMorphism,
};
use kbound::gaussian::{consistency_check, empirical_covariance, realize, sample, sample_means};
use kbound::jobs::{run, Check, JobConfig, Report};
use kbound::kernel::{assemble_gram, check_positive_definite, FiniteKernel, PointSet, PolydiskSzego, Szego};
use kbound::linalg::{max_abs, max_abs_diff, CMatrix, C64, ONE};
use kbound::rkhs::{
    default_rank_tol, evaluate, norm_identity_residual, parseval_factorize, rkhs_inner, verify_parseval, RkhsElement,
    DEFAULT_SPAN_TOL,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_kernel(r: &mut ChaCha8Rng, max_n: usize) -> Arc<FiniteKernel> {
    let n = r.random_range(1..=max_n);
    let rank = r.random_range(1..=n);
    Arc::new(FiniteKernel::from_matrix(random_psd(r, n, rank)).unwrap())
}

fn labels(n: usize) -> PointSet {
    PointSet::from_labels((0..n).map(|i| format!("s{i}")).collect()).unwrap()
}

/// A unitary from the QR factorization of a complex Gaussian matrix.
fn random_unitary(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    complex_matrix(r, n, n).qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn szego_grams_are_psd_and_exactly_hermitian(seed in any::<u64>(), n in 1usize..=20) {
        let mut r = rng(seed);
        let pts = PointSet::from_scalars(&random_disk_points(&mut r, n, 0.95));
        let k = assemble_gram(&Szego, &pts).unwrap();
        prop_assert!(check_positive_definite(&k, 1e-10).unwrap().is_psd);
        let g = k.gram();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(g[(i, j)], g[(j, i)].conj());
            }
        }
        // principal submatrices stay PSD
        let idx: Vec<usize> = (0..n).filter(|_| r.random_bool(0.5)).collect();
        if !idx.is_empty() {
            prop_assert!(check_positive_definite(&k.restrict(&idx).unwrap(), 1e-10).unwrap().is_psd);
        }
    }

    #[test]
    fn polydisk_grams_are_psd(seed in any::<u64>(), n in 1usize..=12, dim in 1usize..=3) {
        let mut r = rng(seed);
        let tuples = (0..n).map(|_| random_disk_points(&mut r, dim, 0.9)).collect();
        let k = assemble_gram(&PolydiskSzego { k: dim }, &PointSet::from_tuples(tuples).unwrap()).unwrap();
        prop_assert!(check_positive_definite(&k, 1e-10).unwrap().is_psd);
    }

    #[test]
    fn reproducing_identity_is_exact(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_kernel(&mut r, 10);
        for j in 0..k.len() {
            let kj = RkhsElement::generator(k.clone(), j).unwrap();
            for i in 0..k.len() {
                prop_assert_eq!(evaluate(&kj, &k.points().labels()[i]).unwrap(), k.entry(i, j));
            }
        }
    }

    #[test]
    fn parseval_norm_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_kernel(&mut r, 20);
        let frame = parseval_factorize(&k, default_rank_tol(k.len())).unwrap();
        prop_assert!(verify_parseval(&frame) <= 1e-10);
        let f = RkhsElement::new(k.clone(), complex_vec(&mut r, k.len())).unwrap();
        let scale = f.squared_norm().max(1.0);
        prop_assert!(norm_identity_residual(&frame, &f).unwrap() <= 1e-9 * scale);
    }

    #[test]
    fn retained_rank_is_unitarily_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_kernel(&mut r, 12);
        let u = random_unitary(&mut r, k.len());
        let rotated = &u * k.gram() * u.adjoint();
        let rotated = Arc::new(FiniteKernel::from_matrix((&rotated + rotated.adjoint()).unscale(2.0)).unwrap());
        let tol = default_rank_tol(k.len());
        prop_assert_eq!(
            parseval_factorize(&k, tol).unwrap().retained_rank(),
            parseval_factorize(&rotated, tol).unwrap().retained_rank()
        );
    }

    #[test]
    fn transform_pair_on_parseval_factorizations(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_kernel(&mut r, 12);
        let f = BoundaryFactorization::from_frame(&parseval_factorize(&k, default_rank_tol(k.len())).unwrap());
        prop_assert!(verify_factorization(&f) <= 1e-10);
        prop_assert!(minimality_test(&f, DEFAULT_SPAN_TOL).is_minimal);

        let elem = RkhsElement::new(k.clone(), complex_vec(&mut r, k.len())).unwrap();
        let w = apply_w(&f, &elem).unwrap();
        let norm = rkhs_inner(&elem, &elem).unwrap().re;
        prop_assert!((l2_norm_sqr(f.measure(), w.as_slice()) - norm).abs() <= 1e-9 * norm.max(1.0));
        for t in 0..k.len() {
            let v = apply_v(&f, apply_w(&f, &RkhsElement::generator(k.clone(), t).unwrap()).unwrap().as_slice()).unwrap();
            for s in 0..k.len() {
                prop_assert!((v[s] - k.entry(s, t)).norm() <= 1e-9);
            }
        }
        prop_assert!(check_isometry(&f).unwrap().spectrum_defect <= 1e-7);
    }

    #[test]
    fn pushforward_morphisms_are_isometric(seed in any::<u64>(), m2 in 1usize..=8) {
        let mut r = rng(seed);
        let m1 = r.random_range(1..=m2);
        // surjective map onto the first m1 atoms
        let map: Vec<usize> = (0..m2).map(|x| if x < m1 { x } else { r.random_range(0..m1) }).collect();
        let source = DiscreteMeasure::probability(random_weights(&mut r, m2)).unwrap();
        let mut pushed = vec![0.0; m1];
        for (x, &a) in map.iter().enumerate() {
            pushed[a] += source.weights()[x];
        }
        let target = DiscreteMeasure::new((0..m1).map(|a| format!("t{a}")).collect(), pushed, true).unwrap();
        let m = MeasureMorphism::new(source, target, map).unwrap();
        let f = complex_vec(&mut r, m1);
        prop_assert!(w21_isometry_residual(&m, &f).unwrap() <= 1e-12);
    }

    #[test]
    fn clark_herglotz_and_exact_factorization(seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = InnerFunction::new(random_circle_measure(&mut r, 6));
        let zs = random_disk_points(&mut r, 12, 0.95);
        for &z in &zs {
            prop_assert!(herglotz_poisson_check(&b, z).unwrap().abs_error <= 1e-10);
        }
        let f = build_kb_factorization(&b, &PointSet::from_scalars(&zs)).unwrap();
        prop_assert!(verify_factorization(&f) <= 1e-10);
    }

    #[test]
    fn szego_expectations_reproduce_one_minus_b(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mu = random_circle_measure(&mut r, 6);
        let zs = random_disk_points(&mut r, 8, 0.95);
        let atoms = mu.atoms().to_vec();
        let feats = CMatrix::from_fn(zs.len(), atoms.len(), |i, x| ONE / (ONE - zs[i] * e(atoms[x]).conj()));
        let f = BoundaryFactorization::from_features(PointSet::from_scalars(&zs), mu.to_discrete(), feats).unwrap();
        let b = InnerFunction::new(mu);
        for (z, ex) in zs.iter().zip(expectation_vector(&f)) {
            prop_assert!((ONE / ex - (ONE - b_eval(&b, *z).unwrap())).norm() <= 1e-12);
        }
    }

    #[test]
    fn renormalized_identity_holds(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (n, m) = (r.random_range(1..=6), r.random_range(1..=8));
        let mu = DiscreteMeasure::probability(random_weights(&mut r, m)).unwrap();
        let f = BoundaryFactorization::from_features(labels(n), mu, complex_matrix(&mut r, n, m)).unwrap();
        prop_assume!(expectation_vector(&f).iter().all(|z| z.norm() >= 1e-6));
        let ctx = renormalize(&f).unwrap();
        // relative to the largest renormalized entry, which grows like 1/|E|²
        prop_assert!(ctx.identity_residual() <= 1e-10, "{} {}", ctx.identity_residual(), max_abs(ctx.kren_gram()));
    }

    #[test]
    fn boundary_modulus_increases_towards_the_circle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mu = random_circle_measure(&mut r, 6);
        let b = InnerFunction::new(mu.clone());
        let theta: f64 = r.random_range(0.0..1.0);
        prop_assume!(mu.atoms().iter().all(|&a| circular_distance(a, theta) >= ATOM_MARGIN));
        let radii: Vec<f64> = (0..50).map(|k| 0.9 + 0.0999 * k as f64 / 49.0).collect();
        let moduli: Vec<f64> = radii.iter().map(|&rad| b_eval(&b, e(theta) * rad).unwrap().norm()).collect();
        for w in moduli.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-15, "{:?}", w);
        }
    }

    #[test]
    fn report_json_round_trips(
        metrics in prop::collection::btree_map("[a-z_.]{1,12}", prop::option::of(-1e300f64..1e300), 0..6),
        ranks in prop::collection::btree_map("[a-z]{1,8}", any::<usize>(), 0..4),
        values in prop::collection::vec((any::<bool>(), prop::option::of(any::<f64>().prop_filter("finite", |v| v.is_finite()))), 0..5),
        entries in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..9),
        seed in any::<u64>(),
    ) {
        let mut rep = Report::new("factorize", seed);
        rep.metrics = metrics;
        rep.ranks = ranks;
        rep.checks = values
            .into_iter()
            .enumerate()
            .map(|(i, (passed, value))| Check { name: format!("c{i}"), passed, value, threshold: Some(1e-9) })
            .collect();
        let side = (entries.len() as f64).sqrt() as usize;
        let m = CMatrix::from_fn(side, side, |i, j| C64::new(entries[i * side + j].0, entries[i * side + j].1));
        rep.matrix("m", &m);
        let text = rep.to_json().unwrap();
        prop_assert_eq!(Report::from_json(&text).unwrap(), rep.clone());
        prop_assert_eq!(rep.to_csv().lines().filter(|l| !l.starts_with('#') && *l != "i,j,re,im").count(), side * side);
    }

    #[test]
    fn arbitrary_configs_never_panic(text in "\\{(\"[a-z_]{1,10}\":(1|\"x\"|\\[\\]|\\{\\}|null),?){0,3}\\}") {
        // exit status is 0, 2 or 1: a report or an error, never a panic
        if let Ok(cfg) = JobConfig::from_json(&text) {
            if cfg.command.is_some() {
                let _ = run(&cfg);
            }
        }
    }
}

#[test]
fn kb_factorizations_are_minimal_almost_surely() {
    let mut r = rng(17);
    let mut minimal = 0;
    for _ in 0..200 {
        let mu = random_circle_measure(&mut r, 6);
        let count = r.random_range(mu.len()..=mu.len() + 4);
        let f = build_kb_factorization(
            &InnerFunction::new(mu.clone()),
            &PointSet::from_scalars(&random_disk_points(&mut r, count, 0.95)),
        )
        .unwrap();
        minimal += minimality_test(&f, DEFAULT_SPAN_TOL).is_minimal as usize;
    }
    assert!(minimal >= 198, "{minimal}/200 minimal");
}

#[test]
fn gaussian_statistics_over_seeds() {
    let mut r = rng(23);
    let count = 20_000;
    for seed in 0..12u64 {
        let k = random_kernel(&mut r, 5);
        let batch = sample(&realize(&k, seed).unwrap(), count).unwrap();
        let nf = count as f64;
        for (i, m) in sample_means(&batch).iter().enumerate() {
            assert!(m.norm() <= 5.0 * (k.entry(i, i).re / nf).sqrt(), "seed {seed}: mean {m}");
        }
        let gmax = max_abs(k.gram());
        let err = max_abs_diff(&empirical_covariance(&batch).unwrap(), k.gram());
        assert!(err <= 4.0 * gmax / nf.sqrt(), "seed {seed}: covariance error {err}");
        let subset: Vec<usize> = (0..k.len()).step_by(2).collect();
        let c = consistency_check(&k, &subset, count, seed).unwrap();
        assert!(c.exact_ok && c.within_bound, "seed {seed}: {c:?}");
    }
}

#[test]
fn sample_atoms_are_not_minimal() {
    let g = CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(2.0, 0.0), C64::new(1.0, 0.5), C64::new(1.0, -0.5), C64::new(1.0, 0.0)],
    );
    let k = Arc::new(FiniteKernel::from_matrix(g).unwrap());
    let count = 500;
    let batch = sample(&realize(&k, 8).unwrap(), count).unwrap();
    // atoms are the draws; features k_s(x) = x(s) under the empirical measure
    let features = batch.draws.transpose();
    let f = BoundaryFactorization::new(k, DiscreteMeasure::uniform(count), features).unwrap();
    assert!(!minimality_test(&f, DEFAULT_SPAN_TOL).is_minimal);
    assert!(verify_factorization(&f) > 0.0);
}

#[test]
fn verify_all_report_is_deterministic_in_process() {
    let cfg = JobConfig { command: Some(kbound::jobs::Command::VerifyAll), seed: 3, ..JobConfig::default() };
    let a = run(&cfg).unwrap().without_timing();
    let b = run(&cfg).unwrap().without_timing();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    assert!(a.passed());
    let per_criterion: BTreeMap<_, _> = a.ranks.iter().filter(|(k, _)| k.ends_with(".passed")).collect();
    assert_eq!(per_criterion.len(), 11);
}

#[test]
fn measures_reject_bad_weights() {
    assert!(CircleMeasure::new(vec![0.0, 0.5], vec![0.7, 0.7]).is_err());
    assert!(DiscreteMeasure::probability(vec![0.5, -0.1, 0.6]).is_err());
}
