//! Job configuration files. Parsing is strict: unknown keys are errors.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clark::{BForm, CircleMeasure};
use crate::corpus::random_disk_points;
use crate::error::{Error, Result};
use crate::factorization::DiscreteMeasure;
use crate::kernel::{KernelSpec, PointSet, DEFAULT_PSD_TOL};
use crate::linalg::C64;
use crate::rkhs::DEFAULT_SPAN_TOL;
use crate::wire::{WireComplex, WireMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Validate,
    Factorize,
    GaussianSample,
    Clark,
    Renorm,
    MorphismCheck,
    VerifyAll,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Validate,
        Command::Factorize,
        Command::GaussianSample,
        Command::Clark,
        Command::Renorm,
        Command::MorphismCheck,
        Command::VerifyAll,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Factorize => "factorize",
            Command::GaussianSample => "gaussian-sample",
            Command::Clark => "clark",
            Command::Renorm => "renorm",
            Command::MorphismCheck => "morphism-check",
            Command::VerifyAll => "verify-all",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == name)
            .ok_or_else(|| Error::Config(format!("unknown command {name:?}")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Residual thresholds applied by the pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub psd_tol: f64,
    pub fact_tol: f64,
    pub rank_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { psd_tol: DEFAULT_PSD_TOL, fact_tol: 1e-10, rank_tol: DEFAULT_SPAN_TOL }
    }
}

/// A point given as one complex number or as a tuple of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointConfig {
    Scalar(WireComplex),
    Tuple(Vec<WireComplex>),
}

/// An atom given as one coordinate in `[0,1)` or a tuple of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomConfig {
    Scalar(f64),
    Tuple(Vec<f64>),
}

impl AtomConfig {
    fn coords(&self) -> Vec<f64> {
        match self {
            AtomConfig::Scalar(x) => vec![*x],
            AtomConfig::Tuple(v) => v.clone(),
        }
    }
}

/// Parallel atom and weight arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(default)]
    pub atoms: Option<Vec<AtomConfig>>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    pub weights: Vec<f64>,
    #[serde(default = "yes")]
    pub normalized: bool,
}

fn yes() -> bool {
    true
}

impl MeasureConfig {
    pub fn discrete(&self) -> Result<DiscreteMeasure> {
        let m = self.weights.len();
        let coords = self.atoms.as_ref().map(|a| a.iter().map(AtomConfig::coords).collect::<Vec<_>>());
        if coords.as_ref().is_some_and(|c| c.len() != m) {
            return Err(Error::Config(format!("{} atoms with {m} weights", coords.map_or(0, |c| c.len()))));
        }
        let labels = match (&self.labels, &coords) {
            (Some(l), _) => l.clone(),
            (None, Some(c)) => c.iter().map(|x| label_of(x)).collect(),
            (None, None) => (0..m).map(|i| format!("x{i}")).collect(),
        };
        let mu = DiscreteMeasure::new(labels, self.weights.clone(), self.normalized)?;
        match coords {
            Some(c) => mu.with_coords(c),
            None => Ok(mu),
        }
    }

    /// The measure as a Clark measure: scalar atoms in `[0,1)`.
    pub fn circle(&self) -> Result<CircleMeasure> {
        let atoms = self
            .atoms
            .as_ref()
            .ok_or_else(|| Error::Config("a circle measure needs atoms".into()))?
            .iter()
            .map(|a| match a {
                AtomConfig::Scalar(x) => Ok(*x),
                AtomConfig::Tuple(v) if v.len() == 1 => Ok(v[0]),
                AtomConfig::Tuple(v) => Err(Error::Config(format!("circle atom {v:?} is not a scalar"))),
            })
            .collect::<Result<Vec<_>>>()?;
        CircleMeasure::new(atoms, self.weights.clone())
    }
}

fn label_of(x: &[f64]) -> String {
    x.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

/// `count` seeded points uniform in the disk of the given radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPoints {
    pub count: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "one")]
    pub dim: usize,
}

fn default_radius() -> f64 {
    0.9
}

fn one() -> usize {
    1
}

/// `map[x]` is the target label of source atom `x`. Source features
/// default to the pull-back of the target features along the map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismConfig {
    pub source: MeasureConfig,
    pub target: MeasureConfig,
    pub map: Vec<String>,
    pub target_features: WireMatrix,
    #[serde(default)]
    pub source_features: Option<WireMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub points: Vec<PointConfig>,
    #[serde(default)]
    pub random_points: Option<RandomPoints>,
    #[serde(default)]
    pub measure: Option<MeasureConfig>,
    /// Rows are points, columns are atoms.
    #[serde(default)]
    pub features: Option<WireMatrix>,
    #[serde(default)]
    pub morphism: Option<MorphismConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sample_count: Option<usize>,
    /// Point indices for the Gaussian consistency check.
    #[serde(default)]
    pub subset: Option<Vec<usize>>,
    #[serde(default)]
    pub b_form: BForm,
    #[serde(default)]
    pub max_degree: Option<usize>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: JobConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [("psd_tol", t.psd_tol), ("fact_tol", t.fact_tol), ("rank_tol", t.rank_tol)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance {name} = {v} must be finite and nonnegative")));
            }
        }
        if self.sample_count == Some(0) {
            return Err(Error::Config("sample_count must be at least 1".into()));
        }
        if let Some(r) = &self.random_points {
            if !(r.radius > 0.0 && r.radius < 1.0) || r.dim == 0 {
                return Err(Error::Config("random_points needs radius in (0,1) and dim >= 1".into()));
            }
        }
        if !self.points.is_empty() && self.random_points.is_some() {
            return Err(Error::Config("give either points or random_points, not both".into()));
        }
        Ok(())
    }

    pub fn command(&self) -> Result<Command> {
        self.command.ok_or_else(|| Error::Config("no command given".into()))
    }

    /// Explicit points, or seeded random points drawn from stream 1 of `seed`.
    pub fn point_set(&self) -> Result<PointSet> {
        if let Some(r) = &self.random_points {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(1);
            let tuples = (0..r.count).map(|_| random_disk_points(&mut rng, r.dim, r.radius)).collect();
            return PointSet::from_tuples(tuples);
        }
        if self.points.is_empty() {
            return Err(Error::Config("no points given".into()));
        }
        let tuples: Vec<Vec<C64>> = self
            .points
            .iter()
            .map(|p| match p {
                PointConfig::Scalar(z) => vec![C64::from(*z)],
                PointConfig::Tuple(v) => v.iter().map(|&z| z.into()).collect(),
            })
            .collect();
        PointSet::from_tuples(tuples)
    }

    pub fn kernel_spec(&self) -> Result<&KernelSpec> {
        self.kernel.as_ref().ok_or_else(|| Error::Config("no kernel given".into()))
    }

    pub fn measure(&self) -> Result<&MeasureConfig> {
        self.measure.as_ref().ok_or_else(|| Error::Config("no measure given".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_parse() {
        let ok = r#"{"command":"validate","kernel":{"name":"szego"},"points":[{"re":0.1},{"re":0,"im":0.5}]}"#;
        let cfg = JobConfig::from_json(ok).unwrap();
        assert_eq!(cfg.command, Some(Command::Validate));
        assert_eq!(cfg.point_set().unwrap().len(), 2);
        assert_eq!(cfg.tolerances, Tolerances::default());

        let extra = r#"{"command":"validate","bogus":1}"#;
        assert!(matches!(JobConfig::from_json(extra), Err(Error::Config(_))));
        let nested = r#"{"tolerances":{"psd_tol":1e-9,"fact":1}}"#;
        assert!(JobConfig::from_json(nested).is_err());
        let negative = r#"{"tolerances":{"psd_tol":-1}}"#;
        assert!(JobConfig::from_json(negative).is_err());
        assert!(JobConfig::from_json(r#"{"sample_count":0}"#).is_err());
        assert!(JobConfig::from_json("{not json").is_err());
        assert!(JobConfig::from_json(r#"{"command":"explode"}"#).is_err());
    }

    #[test]
    fn commands_round_trip() {
        for c in Command::ALL {
            assert_eq!(Command::parse(c.as_str()).unwrap(), c);
            let s = serde_json::to_string(&c).unwrap();
            assert_eq!(s, format!("\"{}\"", c.as_str()));
        }
    }

    #[test]
    fn measures() {
        let m: MeasureConfig = serde_json::from_str(r#"{"atoms":[0,0.5],"weights":[0.5,0.5]}"#).unwrap();
        assert_eq!(m.discrete().unwrap().labels(), ["0", "0.5"]);
        assert_eq!(m.circle().unwrap().atoms(), [0.0, 0.5]);
        let m: MeasureConfig = serde_json::from_str(r#"{"atoms":[[0.1,0.2]],"weights":[1]}"#).unwrap();
        assert_eq!(m.discrete().unwrap().coords().unwrap()[0], vec![0.1, 0.2]);
        assert!(m.circle().is_err());
        let m: MeasureConfig = serde_json::from_str(r#"{"weights":[1,1],"normalized":false}"#).unwrap();
        assert_eq!(m.discrete().unwrap().labels(), ["x0", "x1"]);
        let bad: MeasureConfig = serde_json::from_str(r#"{"atoms":[0],"weights":[0.5,0.5]}"#).unwrap();
        assert!(bad.discrete().is_err());
    }

    #[test]
    fn random_points_are_seeded() {
        let text = r#"{"random_points":{"count":5},"seed":9}"#;
        let a = JobConfig::from_json(text).unwrap().point_set().unwrap();
        let b = JobConfig::from_json(text).unwrap().point_set().unwrap();
        assert_eq!(a, b);
        assert!((0..5).all(|i| a.coords(i)[0].norm() <= 0.9));
        let both = r#"{"random_points":{"count":5},"points":[{"re":0}]}"#;
        assert!(JobConfig::from_json(both).is_err());
    }
}
