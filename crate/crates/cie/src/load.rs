//! Tabular (CSV) and text (JSON Lines) loaders.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use cie_core::text::tokenize;
use cie_core::{Item, LabeledDataset, TabularSchema, TokenizerOptions};
use serde::Deserialize;

use crate::config::{DataFormat, RunConfig};
use crate::error::{CliError, Result};

/// Encoded instances with whatever labels the source carried.
#[derive(Debug, Clone, PartialEq)]
pub struct Records {
    pub instances: Vec<Vec<Item>>,
    /// Black-box predictions, one per instance, when available.
    pub predictions: Option<Vec<String>>,
    /// Ground-truth labels from the text `gold` field.
    pub gold: Option<Vec<Option<String>>>,
}

impl Records {
    /// Builds a dataset, failing when predictions are missing.
    pub fn dataset(&self, classes: Option<Vec<String>>) -> Result<LabeledDataset> {
        let labels = self
            .predictions
            .as_ref()
            .ok_or_else(|| CliError::Config("no predictions: set `prediction_column` or `predictions`".into()))?;
        Ok(LabeledDataset::new(self.instances.clone(), labels, classes)?)
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

/// Reads a CSV with a header row. Every schema column must be present;
/// other columns are ignored apart from `prediction_column`.
pub fn load_tabular(path: &Path, schema: &TabularSchema, prediction_column: Option<&str>) -> Result<Records> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(open(path)?);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: cannot read header: {e}", path.display())))?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Data(format!("{}: missing column `{name}`", path.display())))
    };
    let positions: Vec<usize> = schema.feature_names().map(find).collect::<Result<_>>()?;
    let label_at = prediction_column.map(find).transpose()?;

    let mut instances = Vec::new();
    let mut predictions = label_at.map(|_| Vec::new());
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CliError::Data(format!("{}: row {row}: {e}", path.display())))?;
        let cells: Vec<&str> = positions.iter().map(|&p| record.get(p).unwrap_or("")).collect();
        let items = schema.encode(&cells).map_err(|e| match e {
            cie_core::Error::Encode { column, reason } => {
                CliError::Data(format!("{}: row {row}, column `{column}`: {reason}", path.display()))
            }
            other => CliError::Data(format!("{}: row {row}: {other}", path.display())),
        })?;
        instances.push(items);
        if let (Some(at), Some(out)) = (label_at, predictions.as_mut()) {
            let label = record.get(at).unwrap_or("").trim();
            if label.is_empty() {
                return Err(CliError::Data(format!(
                    "{}: row {row}, column `{}`: empty prediction",
                    path.display(),
                    prediction_column.unwrap_or_default()
                )));
            }
            out.push(label.to_string());
        }
    }
    Ok(Records { instances, predictions, gold: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TextLine {
    text: String,
    #[serde(default)]
    prediction: Option<String>,
    #[serde(default)]
    gold: Option<String>,
}

/// Reads JSON Lines with `text`, `prediction` and optional `gold` fields.
/// Blank lines are skipped.
pub fn load_text(path: &Path, options: TokenizerOptions) -> Result<Records> {
    let reader = BufReader::new(open(path)?);
    let mut instances = Vec::new();
    let mut predictions = Vec::new();
    let mut gold = Vec::new();
    let mut missing_prediction = None;
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TextLine =
            serde_json::from_str(&line).map_err(|e| CliError::Data(format!("{}: line {n}: {e}", path.display())))?;
        let items = tokenize(&rec.text, options);
        if items.is_empty() {
            log::warn!("{}: line {n}: empty text kept as an empty instance", path.display());
        }
        instances.push(items);
        match rec.prediction {
            Some(p) => predictions.push(p),
            None => {
                missing_prediction.get_or_insert(n);
            }
        }
        gold.push(rec.gold);
    }
    let predictions = match missing_prediction {
        None => Some(predictions),
        Some(_) if predictions.is_empty() => None,
        Some(n) => return Err(CliError::Data(format!("{}: line {n}: missing `prediction`", path.display()))),
    };
    let gold = gold.iter().any(Option::is_some).then_some(gold);
    Ok(Records { instances, predictions, gold })
}

/// One label per line; a trailing empty line is ignored.
pub fn load_sidecar(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines: Vec<String> = text.lines().map(|l| l.trim().to_string()).collect();
    while lines.last().is_some_and(String::is_empty) {
        lines.pop();
    }
    if let Some(n) = lines.iter().position(String::is_empty) {
        return Err(CliError::Data(format!("{}: line {}: empty prediction", path.display(), n + 1)));
    }
    Ok(lines)
}

fn load_file(config: &RunConfig, path: &Path, sidecar: Option<&PathBuf>) -> Result<Records> {
    let mut records = match config.data.format {
        DataFormat::Tabular => {
            let prediction_column = if sidecar.is_some() { None } else { config.data.prediction_column.as_deref() };
            load_tabular(path, &config.schema()?, prediction_column)?
        }
        DataFormat::Text => load_text(path, TokenizerOptions { case_fold: config.data.case_fold })?,
    };
    if let Some(side) = sidecar {
        let side = config.resolve(side);
        let labels = load_sidecar(&side)?;
        if labels.len() != records.instances.len() {
            return Err(CliError::Data(format!(
                "{}: {} predictions for {} instances in {}",
                side.display(),
                labels.len(),
                records.instances.len(),
                path.display()
            )));
        }
        records.predictions = Some(labels);
    }
    Ok(records)
}

/// The main data file named by the config.
pub fn load_main(config: &RunConfig) -> Result<Records> {
    load_file(config, &config.resolve(&config.data.path), config.data.predictions.as_ref())
}

/// The separate evaluation file, if the config names one.
pub fn load_eval(config: &RunConfig) -> Result<Option<Records>> {
    match &config.data.eval_path {
        None => Ok(None),
        Some(p) => load_file(config, &config.resolve(p), config.data.eval_predictions.as_ref()).map(Some),
    }
}
