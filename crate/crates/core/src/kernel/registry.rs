//! Name-keyed registry of kernel constructors.
//!
//! Each entry turns the `params` object of a [`KernelSpec`] into a boxed
//! [`Kernel`]. Parameter objects are parsed strictly: unknown keys fail.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::clark::{BForm, CircleMeasure, DeBrangesRovnyak};
use crate::error::{Error, Result};
use crate::kernel::{Field, Kernel, PolydiskSzego, Szego, TableKernel};
use crate::wire::WireMatrix;

/// Kernel descriptor as it appears in job configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub name: String,
    #[serde(default)]
    pub params: Value,
}

impl KernelSpec {
    pub fn named(name: &str) -> Self {
        Self { name: name.to_string(), params: Value::Null }
    }

    pub fn build(&self) -> Result<Box<dyn Kernel>> {
        KernelRegistry::construct(self)
    }
}

type Constructor = fn(&Value) -> Result<Box<dyn Kernel>>;

struct Entry {
    name: &'static str,
    aliases: &'static [&'static str],
    construct: Constructor,
}

const ENTRIES: &[Entry] = &[
    Entry { name: "szego", aliases: &["szegő", "hardy"], construct: build_szego },
    Entry { name: "polydisk-szego", aliases: &["polydisk"], construct: build_polydisk },
    Entry { name: "debranges-rovnyak", aliases: &["kb", "clark"], construct: build_debranges },
    Entry { name: "table", aliases: &["gram"], construct: build_table },
];

pub struct KernelRegistry;

impl KernelRegistry {
    /// Canonical names with their aliases.
    pub fn list() -> Vec<(&'static str, &'static [&'static str])> {
        ENTRIES.iter().map(|e| (e.name, e.aliases)).collect()
    }

    pub fn construct(spec: &KernelSpec) -> Result<Box<dyn Kernel>> {
        let entry = ENTRIES
            .iter()
            .find(|e| e.name == spec.name || e.aliases.contains(&spec.name.as_str()))
            .ok_or_else(|| Error::UnknownKernel(spec.name.clone()))?;
        (entry.construct)(&spec.params)
    }
}

fn params<T: DeserializeOwned>(kernel: &str, v: &Value) -> Result<T> {
    let v = if v.is_null() { Value::Object(Default::default()) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| Error::Config(format!("kernel `{kernel}` params: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

fn build_szego(v: &Value) -> Result<Box<dyn Kernel>> {
    let NoParams {} = params("szego", v)?;
    Ok(Box::new(Szego))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolydiskParams {
    k: usize,
}

fn build_polydisk(v: &Value) -> Result<Box<dyn Kernel>> {
    let p: PolydiskParams = params("polydisk-szego", v)?;
    if p.k == 0 {
        return Err(Error::Config("polydisk-szego needs k >= 1".into()));
    }
    Ok(Box::new(PolydiskSzego { k: p.k }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeBrangesParams {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    #[serde(default)]
    b_form: BForm,
}

fn build_debranges(v: &Value) -> Result<Box<dyn Kernel>> {
    let p: DeBrangesParams = params("debranges-rovnyak", v)?;
    let mu = CircleMeasure::new(p.atoms, p.weights)?;
    Ok(Box::new(DeBrangesRovnyak::new(mu, p.b_form)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableParams {
    gram: WireMatrix,
    #[serde(default)]
    field: Option<Field>,
}

fn build_table(v: &Value) -> Result<Box<dyn Kernel>> {
    let p: TableParams = params("table", v)?;
    Ok(Box::new(TableKernel::new(p.gram.to_matrix()?, p.field)?))
}
