//! Run configuration read from a TOML file.
//!
//! ```toml
//! seed = 7
//! dataset = "data.csv"        # relative to this file
//! response = "y"              # or ["y1", "y2"] for a matrix response
//!
//! [[model]]
//! label = "m1"
//! columns = ["x1", "x2"]
//! g = 100.0
//! sigma2 = 1.0                # or sigma = [[..], [..]] with a matrix response
//! kappa_exponent = "paper"    # or "per-response" (alias "pq"), matrix responses only
//! prior = 1.0                 # optional, default 1
//! family = "A"                # optional
//!
//! [compare]
//! first = "m1"
//! second = "m2"
//! families = false
//!
//! [dgp]
//! mean = "mu"                 # column(s) holding the true mean
//! sigma2 = 4.0                # or sigma = [[..]] or variance = "column"
//!
//! [bootstrap]
//! scheme = "circular"         # or "iid"
//! replicates = 1000
//! block_length = 5
//! thresholds = [0.9, 0.95, 0.99]
//! sort_by = "m1"
//!
//! [oracle]
//! simulations = 200000
//!
//! [evidence]
//! thresholds = [2.0, 6.0, 10.0]   # on 2 ln BF
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Columns {
    One(String),
    Many(Vec<String>),
}

impl Columns {
    pub fn names(&self) -> Vec<String> {
        match self {
            Columns::One(c) => vec![c.clone()],
            Columns::Many(c) => c.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KappaConvention {
    #[default]
    Paper,
    #[serde(alias = "pq")]
    PerResponse,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub label: String,
    pub columns: Vec<String>,
    pub g: f64,
    pub sigma2: Option<f64>,
    pub sigma: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub kappa_exponent: KappaConvention,
    pub prior: Option<f64>,
    pub family: Option<String>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub first: String,
    pub second: String,
    #[serde(default)]
    pub families: bool,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DgpConfig {
    pub mean: Columns,
    pub sigma2: Option<f64>,
    pub sigma: Option<Vec<Vec<f64>>>,
    /// Column of per-row noise variances.
    pub variance: Option<String>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    #[default]
    Circular,
    Iid,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct BootstrapConfig {
    #[serde(default)]
    pub scheme: SchemeName,
    pub replicates: Option<usize>,
    pub block_length: Option<usize>,
    pub thresholds: Option<Vec<f64>>,
    pub sort_by: Option<String>,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub simulations: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct EvidenceConfig {
    pub thresholds: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub dataset: PathBuf,
    pub response: Option<Columns>,
    #[serde(rename = "model")]
    pub models: Vec<ModelConfig>,
    pub compare: Option<CompareConfig>,
    pub dgp: Option<DgpConfig>,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub evidence: EvidenceConfig,
}

impl RunConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::input(format!("{source}: {e}")))?;
        if cfg.models.is_empty() {
            return Err(CliError::input(format!("{source}: no [[model]] entries")));
        }
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.dataset = base.join(&cfg.dataset);
        if let Some(out) = &cfg.out {
            cfg.out = Some(base.join(out));
        }
        Ok(cfg)
    }

    pub fn compare(&self) -> Result<&CompareConfig> {
        self.compare
            .as_ref()
            .ok_or_else(|| CliError::input("this command needs a [compare] table"))
    }

    pub fn dgp(&self) -> Result<&DgpConfig> {
        self.dgp
            .as_ref()
            .ok_or_else(|| CliError::input("this command needs a [dgp] table"))
    }
}
