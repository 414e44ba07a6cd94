//! Named pipelines behind a common trait, selected at runtime by command.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use crate::clark::{
    b_eval, build_kb_factorization, density_criterion, e, herglotz_poisson_check, inner_modulus_check,
    polydisk_density_test, renormalize, BForm, InnerFunction, ATOM_MARGIN,
};
use crate::error::{Error, Result};
use crate::factorization::{
    check_isometry, check_morphism, minimality_test, verify_factorization, w21_isometry_residual,
    BoundaryFactorization, MeasureMorphism,
};
use crate::gaussian::{consistency_check, empirical_covariance, realize, sample, sample_means};
use crate::jobs::config::{Command, JobConfig};
use crate::jobs::report::{Report, Timing};
use crate::jobs::selfcheck;
use crate::kernel::{assemble_gram, check_positive_definite, FiniteKernel, PointSet};
use crate::linalg::{max_abs, max_abs_diff, numerical_rank, CMatrix, C64, ONE};
use crate::rkhs::{default_rank_tol, parseval_factorize, tightness_test, verify_parseval};

/// Idempotency and μ-self-adjointness of `P = WV`.
pub const PROJECTION_TOL: f64 = 1e-9;
/// Distance of the spectrum of `P` from `{0, 1}`.
pub const SPECTRUM_TOL: f64 = 1e-7;
/// Radius and bound for the boundary modulus test.
pub const MODULUS_RADIUS: f64 = 1.0 - 1e-6;
pub const MODULUS_TOL: f64 = 1e-3;
pub const MODULUS_GRID: usize = 360;
/// `1/E = 1 - b` for Szegő features under a Clark measure.
pub const CROSS_CHECK_TOL: f64 = 1e-12;
/// `‖f∘φ‖ = ‖f‖` on morphisms.
pub const W21_TOL: f64 = 1e-12;
pub const DEFAULT_SAMPLE_COUNT: usize = 10_000;

pub trait Pipeline: Send + Sync {
    fn command(&self) -> Command;

    fn run(&self, cfg: &JobConfig) -> Result<Report>;
}

#[derive(Default)]
pub struct PipelineRegistry {
    pipelines: BTreeMap<&'static str, Box<dyn Pipeline>>,
}

impl PipelineRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// All built-in pipelines.
    pub fn standard() -> Self {
        let mut r = Self::new();
        r.register(Box::new(Validate));
        r.register(Box::new(Factorize));
        r.register(Box::new(GaussianSample));
        r.register(Box::new(Clark));
        r.register(Box::new(Renorm));
        r.register(Box::new(MorphismCheck));
        r.register(Box::new(VerifyAll));
        r
    }

    /// Replaces any pipeline registered under the same command.
    pub fn register(&mut self, p: Box<dyn Pipeline>) {
        self.pipelines.insert(p.command().as_str(), p);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Pipeline> {
        self.pipelines.get(name).map(|p| p.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.pipelines.keys().copied().collect()
    }

    pub fn run(&self, cfg: &JobConfig) -> Result<Report> {
        cfg.validate()?;
        let cmd = cfg.command()?;
        let p = self
            .get(cmd.as_str())
            .ok_or_else(|| Error::Config(format!("no pipeline registered for {}", cmd.as_str())))?;
        let start = Instant::now();
        let mut report = p.run(cfg)?;
        report.timing = Some(Timing { elapsed_ms: start.elapsed().as_secs_f64() * 1e3 });
        Ok(report)
    }
}

/// Runs `cfg` with the standard pipelines.
pub fn run(cfg: &JobConfig) -> Result<Report> {
    PipelineRegistry::standard().run(cfg)
}

/// Gram matrix of the configured kernel at the configured points. A table
/// kernel without points gets abstract labels `s0, s1, ...`.
fn finite_kernel(cfg: &JobConfig) -> Result<Arc<FiniteKernel>> {
    let spec = cfg.kernel_spec()?;
    let kernel = spec.build()?;
    let points = if cfg.points.is_empty() && cfg.random_points.is_none() {
        let n = spec.params.get("gram").and_then(|g| g.as_array()).map(Vec::len);
        match n {
            Some(n) => PointSet::from_labels((0..n).map(|i| format!("s{i}")).collect())?,
            None => return Err(Error::Config("no points given".into())),
        }
    } else {
        cfg.point_set()?
    };
    Ok(Arc::new(assemble_gram(kernel.as_ref(), &points)?))
}

fn abstract_points(n: usize) -> Result<PointSet> {
    PointSet::from_labels((0..n).map(|i| format!("s{i}")).collect())
}

fn features(cfg: &JobConfig) -> Result<Option<CMatrix>> {
    cfg.features.as_ref().map(|f| f.to_matrix()).transpose()
}

struct Validate;

impl Pipeline for Validate {
    fn command(&self) -> Command {
        Command::Validate
    }

    fn run(&self, cfg: &JobConfig) -> Result<Report> {
        let mut r = Report::new(self.command().as_str(), cfg.seed);
        let k = finite_kernel(cfg)?;
        let psd = check_positive_definite(&k, cfg.tolerances.psd_tol)?;
        r.metric("min_eigenvalue", psd.min_eigenvalue);
        r.metric("max_eigenvalue", psd.max_eigenvalue);
        r.check_flag("psd", psd.is_psd);
        r.rank("gram", numerical_rank(k.gram(), cfg.tolerances.rank_tol));
        r.matrix("gram", k.gram());
        Ok(r)
    }
}

struct Factorize;

impl Pipeline for Factorize {
    fn command(&self) -> Command {
        Command::Factorize
    }

    fn run(&self, cfg: &JobConfig) -> Result<Report> {
        let tol = &cfg.tolerances;
        let mut r = Report::new(self.command().as_str(), cfg.seed);
        let k = finite_kernel(cfg)?;
        let f = match features(cfg)? {
            Some(feats) => BoundaryFactorization::new(k.clone(), cfg.measure()?.discrete()?, feats)?,
            None => {
                let frame = parseval_factorize(&k, default_rank_tol(k.len()))?;
                r.check_le("parseval_residual", verify_parseval(&frame), tol.fact_tol);
                r.check_flag("tight", tightness_test(&frame));
                r.rank("frame", frame.retained_rank());
                r.matrix("frame", frame.rows());
                BoundaryFactorization::from_frame(&frame)
            }
        };
        let f = f.with_tolerance(tol.fact_tol);
        let residual = verify_factorization(&f);
        if r.check_le("factorization_residual", residual, tol.fact_tol) {
            let iso = check_isometry(&f)?;
            r.check_le("projection_residual", iso.projection_residual, PROJECTION_TOL);
            r.check_le("projection_spectrum", iso.spectrum_defect, SPECTRUM_TOL);
            r.metric("projection_trace", iso.projection_trace);
        }
        let min = minimality_test(&f, tol.rank_tol);
        r.rank("features", min.feature_rank);
        r.rank("atoms", f.measure().len());
        r.metric("minimal", if min.is_minimal { 1.0 } else { 0.0 });
        r.matrix("gram", k.gram());
        Ok(r)
    }
}

struct GaussianSample;

impl Pipeline for GaussianSample {
    fn command(&self) -> Command {
        Command::GaussianSample
    }

    fn run(&self, cfg: &JobConfig) -> Result<Report> {
        let mut r = Report::new(self.command().as_str(), cfg.seed);
        let k = finite_kernel(cfg)?;
        let count = cfg.sample_count.unwrap_or(DEFAULT_SAMPLE_COUNT);
        if count < 2 {
            return Err(Error::Config("gaussian-sample needs sample_count >= 2".into()));
        }
        let real = realize(&k, cfg.seed)?;
        let scale = max_abs(k.gram()).max(1.0);
        r.check_le("factor_residual", real.factor_residual(), cfg.tolerances.fact_tol * scale);
        r.rank("factor", real.rank());

        let batch = sample(&real, count)?;
        r.seed_record = Some(batch.seed_record);
        let cov = empirical_covariance(&batch)?;
        let gmax = (0..k.len()).map(|i| k.entry(i, i).re).fold(0.0, f64::max);
        let n = count as f64;
        r.check_le("covariance_error", max_abs_diff(&cov, k.gram()), 5.0 * gmax / n.sqrt());
        let mean = sample_means(&batch).iter().map(|z| z.norm()).fold(0.0, f64::max);
        r.check_le("mean_modulus", mean, 5.0 * (gmax / n).sqrt());
        if let Some(subset) = &cfg.subset {
            let c = consistency_check(&k, subset, count, cfg.seed)?;
            r.check_le("consistency_exact", c.exact_residual, 1e-12 * scale);
            r.check_le("consistency_empirical", c.empirical_deviation, 2.0 * c.clt_bound);
        }
        r.matrix("covariance", &cov);
        Ok(r)
    }
}

struct Clark;

impl Pipeline for Clark {
    fn command(&self) -> Command {
        Command::Clark
    }

    fn run(&self, cfg: &JobConfig) -> Result<Report> {
        let tol = &cfg.tolerances;
        let mut r = Report::new(self.command().as_str(), cfg.seed);
        let mu = cfg.measure()?.circle()?;
        let b = InnerFunction::with_form(mu.clone(), cfg.b_form);
        let points = cfg.point_set()?;
        if points.dim() != 1 {
            return Err(Error::Config("clark needs one-dimensional points".into()));
        }

        let mut herglotz: f64 = 0.0;
        for i in 0..points.len() {
            herglotz = herglotz.max(herglotz_poisson_check(&b, points.coords(i)[0])?.abs_error);
        }
        r.check_le("herglotz_error", herglotz, tol.fact_tol);
        let grid = mu.non_atom_grid(MODULUS_GRID, ATOM_MARGIN);
        r.check_le("inner_modulus", inner_modulus_check(&b, &grid, MODULUS_RADIUS)?, MODULUS_TOL);

        if cfg.b_form == BForm::Printed {
            // no boundary value at atoms, so no finite-sum factorization
            r.check_flag("factorization_defined", false);
            return Ok(r);
        }
        let f = build_kb_factorization(&b, &points)?;
        r.check_le("factorization_residual", verify_factorization(&f), tol.fact_tol);
        let min = minimality_test(&f, tol.rank_tol);
        r.rank("features", min.feature_rank);
        r.rank("atoms", mu.len());
        if points.len() >= mu.len() {
            r.check_flag("minimal", min.is_minimal);
        }
        r.matrix("kb_gram", f.kernel().gram());
        Ok(r)
    }
}

struct Renorm;

impl Pipeline for Renorm {
    fn command(&self) -> Command {
        Command::Renorm
    }

    fn run(&self, cfg: &JobConfig) -> Result<Report> {
        let tol = &cfg.tolerances;
        let mut r = Report::new(self.command().as_str(), cfg.seed);
        let f = match features(cfg)? {
            Some(feats) => {
                let mu = cfg.measure()?.discrete()?;
                if cfg.kernel.is_some() {
                    let f = BoundaryFactorization::new(finite_kernel(cfg)?, mu, feats)?;
                    r.check_le("factorization_residual", verify_factorization(&f), tol.fact_tol);
                    f
                } else {
                    let points = if cfg.points.is_empty() && cfg.random_points.is_none() {
                        abstract_points(feats.nrows())?
                    } else {
                        cfg.point_set()?
                    };
                    BoundaryFactorization::from_features(points, mu, feats)?
                }
            }
            None => {
                // Szegő features 1/(1 - z conj(e(x))) under a Clark measure
                let circle = cfg.measure()?.circle()?;
                let points = cfg.point_set()?;
                let zs: Vec<C64> = (0..points.len()).map(|i| points.coords(i)[0]).collect();
                let atoms = circle.atoms();
                let feats = CMatrix::from_fn(zs.len(), atoms.len(), |i, x| ONE / (ONE - zs[i] * e(atoms[x]).conj()));
                let f = BoundaryFactorization::from_features(points, circle.to_discrete(), feats)?;
                let b = InnerFunction::new(circle);
                let ex = crate::clark::expectation_vector(&f);
                let mut cross: f64 = 0.0;
                for (z, ex) in zs.iter().zip(&ex) {
                    cross = cross.max((ONE / ex - (ONE - b_eval(&b, *z)?)).norm());
                }
                r.check_le("one_minus_b_cross_check", cross, CROSS_CHECK_TOL);
                f
            }
        };
        let ctx = renormalize(&f)?;
        let min_e = ctx.expectations().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        r.metric("min_expectation_modulus", min_e);
        r.check_le("kren_identity_residual", ctx.identity_residual(), tol.fact_tol);
        let psd = crate::kernel::check_positive_definite(ctx.renormalized().kernel(), tol.psd_tol)?;
        r.check_flag("kren_psd", psd.is_psd);
        let d = density_criterion(&f, tol.rank_tol);
        r.rank("features", d.rank);
        r.rank("deficiency", d.deficiency);
        r.metric("dense", if d.is_dense { 1.0 } else { 0.0 });
        if f.measure().coords().is_some() {
            let degree = cfg.max_degree.unwrap_or(f.measure().len());
            let scan = polydisk_density_test(f.measure(), degree, tol.rank_tol)?;
            for (d, rank) in scan.rank_sequence.iter().enumerate() {
                r.rank(&format!("monomials_degree_{d}"), *rank);
            }
            r.check_flag("monomials_dense", scan.saturated);
        }
        r.matrix("kren_gram", ctx.kren_gram());
        Ok(r)
    }
}

struct MorphismCheck;

impl Pipeline for MorphismCheck {
    fn command(&self) -> Command {
        Command::MorphismCheck
    }

    fn run(&self, cfg: &JobConfig) -> Result<Report> {
        let mut r = Report::new(self.command().as_str(), cfg.seed);
        let mc = cfg.morphism.as_ref().ok_or_else(|| Error::Config("no morphism section".into()))?;
        let (source, target) = (mc.source.discrete()?, mc.target.discrete()?);
        let map: Vec<&str> = mc.map.iter().map(String::as_str).collect();
        let m = MeasureMorphism::from_labels(source.clone(), target.clone(), &map)?;
        let tf = mc.target_features.to_matrix()?;
        let f1 = BoundaryFactorization::from_features(abstract_points(tf.nrows())?, target, tf.clone())?;
        let sf = match &mc.source_features {
            Some(s) => s.to_matrix()?,
            None => CMatrix::from_fn(tf.nrows(), source.len(), |i, x| tf[(i, m.map()[x])]),
        };
        let f2 = BoundaryFactorization::new(f1.kernel().clone(), source, sf)?;
        r.metric("source_factorization_residual", verify_factorization(&f2));
        let v = check_morphism(&m, &f1, &f2)?;
        r.check_flag("pushforward", v.pushforward_ok);
        r.check_flag("sigma", v.sigma_ok);
        r.check_flag("diagram", v.diagram_ok);
        // a fixed nonconstant test function on the target atoms
        let probe: Vec<C64> = (0..m.target().len()).map(|a| C64::new(1.0 + a as f64, 0.5 * a as f64)).collect();
        let w21 = w21_isometry_residual(&m, &probe)?;
        if v.pushforward_ok {
            r.check_le("w21_isometry", w21, W21_TOL);
        } else {
            r.metric("w21_isometry", w21);
        }
        Ok(r)
    }
}

struct VerifyAll;

impl Pipeline for VerifyAll {
    fn command(&self) -> Command {
        Command::VerifyAll
    }

    fn run(&self, cfg: &JobConfig) -> Result<Report> {
        selfcheck::verify_all(cfg.seed)
    }
}
