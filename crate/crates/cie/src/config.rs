//! Run configuration: one JSON file plus command-line overrides.
//!
//! Flags win over the file. Relative paths are resolved against the
//! directory holding the config file. The config hash covers every setting
//! that can change a result, so `threads` and `out_dir` are left out of it.

use std::path::{Path, PathBuf};

use cie_core::binning::Column;
use cie_core::{ColumnKind, ConfidenceVariant, FeatureBins, MiningConfig, NumericKind, ObjectiveConfig, TabularSchema};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Tabular,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Categorical,
    Integer,
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: ColumnType,
    /// Bin edges for numeric columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cuts: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Label used in reports; defaults to the data file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub format: DataFormat,
    pub path: PathBuf,
    /// CSV column holding the black-box prediction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction_column: Option<String>,
    /// Sidecar file with one prediction per line, aligned with the rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions: Option<PathBuf>,
    /// Separate evaluation split; without it `evaluate` splits `path`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_predictions: Option<PathBuf>,
    /// Fixed class order; inferred from first occurrence otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<String>>,
    #[serde(default)]
    pub columns: Vec<ColumnSpec>,
    #[serde(default = "yes")]
    pub case_fold: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum VariantName {
    #[default]
    Rule,
    Lift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MiningSection {
    pub min_conf: f64,
    pub max_k: usize,
    pub min_class_count: usize,
    pub confidence_variant: VariantName,
}

impl Default for MiningSection {
    fn default() -> Self {
        let d = MiningConfig::default();
        MiningSection {
            min_conf: d.min_conf,
            max_k: d.max_k,
            min_class_count: d.min_class_count,
            confidence_variant: VariantName::Rule,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectiveSection {
    pub weights: [f64; 6],
    pub theta: [usize; 3],
    pub delta: f64,
    pub k: usize,
    /// Folds for weight cross-validation; 0 keeps `weights` as given.
    pub cv_folds: usize,
}

impl Default for ObjectiveSection {
    fn default() -> Self {
        let d = ObjectiveConfig::default();
        ObjectiveSection { weights: d.weights, theta: d.theta, delta: d.delta, k: d.k, cv_folds: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cie,
    Greedy,
    Random,
    Frequent,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cie => "cie",
            Method::Greedy => "greedy",
            Method::Random => "random",
            Method::Frequent => "frequent",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "cie" => Ok(Method::Cie),
            "greedy" => Ok(Method::Greedy),
            "random" => Ok(Method::Random),
            "frequent" => Ok(Method::Frequent),
            other => Err(CliError::Usage(format!("unknown method `{other}` (expected cie, greedy, random or frequent)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationSection {
    pub methods: Vec<Method>,
    pub k_grid: Vec<usize>,
    /// Share of instances used for mining when no evaluation file is given.
    pub train_fraction: f64,
    /// Class-support threshold of the frequent-itemset baseline.
    pub min_support: f64,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            methods: vec![Method::Cie, Method::Greedy, Method::Random],
            k_grid: (1..=10).map(|i| 5 * i).collect(),
            train_fraction: 0.8,
            min_support: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    #[serde(default)]
    pub mining: MiningSection,
    #[serde(default)]
    pub objective: ObjectiveSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_seed() -> u64 {
    42
}

/// Command-line values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub min_conf: Option<f64>,
    pub max_k: Option<usize>,
    pub theta1: Option<usize>,
    pub theta2: Option<usize>,
    pub theta3: Option<usize>,
    pub weights: Option<[f64; 6]>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub methods: Option<Vec<Method>>,
    pub k_grid: Option<Vec<usize>>,
}

impl RunConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.base_dir = base_dir.to_path_buf();
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        RunConfig::from_json(&text, &base).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.min_conf {
            self.mining.min_conf = v;
        }
        if let Some(v) = o.max_k {
            self.mining.max_k = v;
        }
        for (slot, v) in [o.theta1, o.theta2, o.theta3].into_iter().enumerate() {
            if let Some(v) = v {
                self.objective.theta[slot] = v;
            }
        }
        if let Some(v) = o.weights {
            self.objective.weights = v;
        }
        if let Some(v) = o.delta {
            self.objective.delta = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.threads {
            self.threads = Some(v);
        }
        if let Some(v) = &o.out_dir {
            // flags are relative to the working directory
            self.out_dir = Some(std::path::absolute(v).unwrap_or_else(|_| v.clone()));
        }
        if let Some(v) = &o.methods {
            self.evaluation.methods = v.clone();
        }
        if let Some(v) = &o.k_grid {
            self.evaluation.k_grid = v.clone();
        }
    }

    /// Checks everything that can be checked before touching the data.
    pub fn validate(&self) -> Result<()> {
        self.mining_config()?;
        self.objective_config().validate_for(self.mining.max_k)?;
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        let e = &self.evaluation;
        if e.methods.is_empty() {
            return Err(CliError::Usage("no evaluation methods selected".into()));
        }
        if e.k_grid.is_empty() || e.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config("k_grid must be non-empty and strictly increasing".into()));
        }
        if !(e.train_fraction > 0.0 && e.train_fraction < 1.0) {
            return Err(CliError::Config("train_fraction must lie strictly between 0 and 1".into()));
        }
        if !(0.0..=1.0).contains(&e.min_support) {
            return Err(CliError::Config("min_support must lie in [0, 1]".into()));
        }
        if self.objective.cv_folds == 1 {
            return Err(CliError::Config("cv_folds must be 0 (off) or at least 2".into()));
        }
        match self.data.format {
            DataFormat::Tabular => {
                self.schema()?;
            }
            DataFormat::Text => {
                if !self.data.columns.is_empty() {
                    return Err(CliError::Config("`columns` only applies to tabular data".into()));
                }
                if self.data.prediction_column.is_some() {
                    return Err(CliError::Config("`prediction_column` only applies to tabular data".into()));
                }
            }
        }
        Ok(())
    }

    pub fn mining_config(&self) -> Result<MiningConfig> {
        let config = MiningConfig {
            min_conf: self.mining.min_conf,
            max_k: self.mining.max_k,
            min_class_count: self.mining.min_class_count,
            variant: match self.mining.confidence_variant {
                VariantName::Rule => ConfidenceVariant::Rule,
                VariantName::Lift => ConfidenceVariant::Lift,
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn objective_config(&self) -> ObjectiveConfig {
        let o = &self.objective;
        ObjectiveConfig { weights: o.weights, theta: o.theta, delta: o.delta, k: o.k }
    }

    pub fn schema(&self) -> Result<TabularSchema> {
        if self.data.columns.is_empty() {
            return Err(CliError::Config("tabular data needs a `columns` list".into()));
        }
        let columns = self
            .data
            .columns
            .iter()
            .map(|c| {
                let kind = match (c.kind, &c.cuts) {
                    (ColumnType::Categorical, None) => ColumnKind::Categorical,
                    (ColumnType::Categorical, Some(_)) => {
                        return Err(CliError::Config(format!("categorical column `{}` cannot have cuts", c.name)))
                    }
                    (_, None) => return Err(CliError::Config(format!("numeric column `{}` needs cuts", c.name))),
                    (t, Some(cuts)) => {
                        let kind = if t == ColumnType::Integer { NumericKind::Integer } else { NumericKind::Real };
                        ColumnKind::Numeric(FeatureBins::new(&c.name, kind, cuts.clone())?)
                    }
                };
                Ok(Column { name: c.name.clone(), kind })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TabularSchema::new(columns)?)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(self.out_dir.as_deref().unwrap_or(Path::new("out")))
    }

    pub fn threads(&self) -> usize {
        self.threads.unwrap_or(1)
    }

    pub fn dataset_name(&self) -> String {
        self.data.name.clone().unwrap_or_else(|| {
            self.data.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into())
        })
    }

    /// SHA-256 over the effective settings, without `threads` and `out_dir`.
    pub fn hash(&self) -> String {
        let mut view = self.clone();
        view.threads = None;
        view.out_dir = None;
        let bytes = serde_json::to_vec(&view).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Settings echoed into output files.
    pub fn echo(&self) -> serde_json::Value {
        let mut view = self.clone();
        view.threads = None;
        view.out_dir = None;
        serde_json::to_value(&view).expect("config serializes")
    }
}

/// Parses `a,b,c,d,e,f`.
pub fn parse_weights(s: &str) -> Result<[f64; 6]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 6 {
        return Err(CliError::Usage(format!("--weights needs six comma-separated values, got {}", parts.len())));
    }
    let mut out = [0.0; 6];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.trim().parse().map_err(|_| CliError::Usage(format!("bad weight `{p}`")))?;
    }
    Ok(out)
}

/// Parses `start:end:step` (inclusive) or a comma list.
pub fn parse_k_grid(s: &str) -> Result<Vec<usize>> {
    let bad = || CliError::Usage(format!("bad K grid `{s}` (use start:end:step or a comma list)"));
    if s.contains(':') {
        let parts: Vec<usize> = s.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        let [start, end, step] = parts[..] else { return Err(bad()) };
        if step == 0 || start > end {
            return Err(bad());
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
    }
}

pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let m = Method::parse(part)?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("empty method list".into()));
    }
    Ok(out)
}
