//! Sweep descriptions and the name-based model registry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groundstate::SolverOptions;
use crate::lattice::{Boundary, Indexing, Lattice};
use crate::model::ModelTerms;
use crate::shadow::DEFAULT_SHOTS;

/// Registered model names with their parameters in column order.
pub const MODELS: [(&str, &[&str]); 5] = [
    ("tfim-1d", &["h"]),
    ("cluster-ising", &["g0", "g1", "g2"]),
    ("xxz-alternating", &["delta", "Delta"]),
    ("tfim-2d", &["h"]),
    ("kitaev", &["Jx", "Jy", "Jz"]),
];

pub fn model_params(name: &str) -> Result<&'static [&'static str]> {
    MODELS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, p)| *p)
        .ok_or_else(|| {
            let known: Vec<&str> = MODELS.iter().map(|(n, _)| *n).collect();
            Error::Config(format!("unknown model {name:?}; known models: {}", known.join(", ")))
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LatticeSpec {
    Chain {
        length: usize,
        #[serde(default)]
        boundary: Boundary,
    },
    Square {
        cols: usize,
        rows: usize,
        #[serde(default)]
        boundary: Boundary,
        #[serde(default)]
        indexing: Indexing,
    },
    Honeycomb {
        cols: usize,
        rows: usize,
        #[serde(default = "periodic")]
        boundary: Boundary,
    },
}

fn periodic() -> Boundary {
    Boundary::Periodic
}

impl LatticeSpec {
    /// Lattice implied by a bare size: an open chain of `l` sites, an open
    /// `l x l` square, or an `l x l`-cell periodic honeycomb.
    pub fn default_for(model: &str, l: usize) -> Result<LatticeSpec> {
        model_params(model)?;
        Ok(match model {
            "tfim-2d" => LatticeSpec::Square {
                cols: l,
                rows: l,
                boundary: Boundary::Open,
                indexing: Indexing::Snake,
            },
            "kitaev" => LatticeSpec::Honeycomb { cols: l, rows: l, boundary: Boundary::Periodic },
            _ => LatticeSpec::Chain { length: l, boundary: Boundary::Open },
        })
    }

    pub fn build(&self) -> Result<Lattice> {
        match *self {
            LatticeSpec::Chain { length, boundary } => Lattice::chain(length, boundary),
            LatticeSpec::Square { cols, rows, boundary, indexing } => {
                Lattice::square_with(cols, rows, boundary, indexing)
            }
            LatticeSpec::Honeycomb { cols, rows, boundary } => {
                Lattice::honeycomb(cols, rows, boundary)
            }
        }
    }
}

/// Build a registered model. Every parameter of the model must be present
/// and no others.
pub fn build_model(name: &str, params: &BTreeMap<String, f64>, lattice: &Lattice) -> Result<ModelTerms> {
    let names = model_params(name)?;
    if let Some(extra) = params.keys().find(|k| !names.contains(&k.as_str())) {
        return Err(Error::Config(format!(
            "{name} has no parameter {extra:?} (expects {})",
            names.join(", ")
        )));
    }
    let get = |k: &str| {
        params
            .get(k)
            .copied()
            .ok_or_else(|| Error::Config(format!("{name} needs parameter {k}")))
    };
    match name {
        "tfim-1d" => ModelTerms::tfim_1d(lattice, get("h")?),
        "cluster-ising" => ModelTerms::cluster_ising(lattice, get("g0")?, get("g1")?, get("g2")?),
        "xxz-alternating" => ModelTerms::xxz_alternating(lattice, get("delta")?, get("Delta")?),
        "tfim-2d" => ModelTerms::tfim_2d(lattice, get("h")?),
        "kitaev" => ModelTerms::kitaev(lattice, get("Jx")?, get("Jy")?, get("Jz")?),
        _ => unreachable!("model_params accepted {name}"),
    }
}

/// Parse `k=v,k=v` into a parameter record.
pub fn parse_params(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {item:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("parameter {k} has non-numeric value {v:?}")))?;
        if out.insert(k.trim().to_string(), v).is_some() {
            return Err(Error::Config(format!("parameter {k} given twice")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    /// Parameters held fixed across the grid.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// `param = total - sum(other grid parameters)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Remainder {
    pub param: String,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGrid {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    /// Further parameters set equal to `param` at every point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tied: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remainder: Option<Remainder>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TernaryGrid {
    pub params: [String; 3],
    pub total: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    Linear(LinearGrid),
    Ternary(TernaryGrid),
    /// Explicit parameter points, in order.
    Path(Vec<BTreeMap<String, f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    Sampled,
    #[default]
    OracleExact,
    OraclePaper,
    /// Sampled and oracle-exact rows for every point.
    Both,
}

/// Value of the `mode` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowMode {
    Sampled,
    OracleExact,
    OraclePaper,
}

impl RowMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RowMode::Sampled => "sampled",
            RowMode::OracleExact => "oracle-exact",
            RowMode::OraclePaper => "oracle-paper",
        }
    }

    pub fn parse(s: &str) -> Result<RowMode> {
        match s {
            "sampled" => Ok(RowMode::Sampled),
            "oracle-exact" => Ok(RowMode::OracleExact),
            "oracle-paper" => Ok(RowMode::OraclePaper),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

impl SweepMode {
    pub fn row_modes(self) -> &'static [RowMode] {
        match self {
            SweepMode::Sampled => &[RowMode::Sampled],
            SweepMode::OracleExact => &[RowMode::OracleExact],
            SweepMode::OraclePaper => &[RowMode::OraclePaper],
            SweepMode::Both => &[RowMode::Sampled, RowMode::OracleExact],
        }
    }
}

fn default_shots() -> usize {
    DEFAULT_SHOTS
}

fn default_k() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub model: ModelSpec,
    /// Shorthand for the model's default lattice of this size.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    pub grid: Grid,
    #[serde(rename = "N", default = "default_shots")]
    pub shots: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: SweepMode,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub solver: SolverOptions,
    /// Concurrent grid points (0 = one per available core).
    #[serde(default)]
    pub workers: usize,
    /// Record wall-clock times. Off by default so repeated runs produce
    /// identical files.
    #[serde(default)]
    pub timing: bool,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<SweepSpec> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid sweep spec: {e}")))
    }

    pub fn lattice_spec(&self) -> Result<LatticeSpec> {
        match (&self.lattice, self.size) {
            (Some(spec), None) => Ok(spec.clone()),
            (None, Some(l)) => LatticeSpec::default_for(&self.model.name, l),
            (Some(_), Some(_)) => Err(Error::Config("give either L or lattice, not both".into())),
            (None, None) => Err(Error::Config("sweep spec needs L or lattice".into())),
        }
    }

    /// Column order of the parameter columns.
    pub fn param_names(&self) -> Result<Vec<String>> {
        Ok(model_params(&self.model.name)?.iter().map(|s| s.to_string()).collect())
    }
}
