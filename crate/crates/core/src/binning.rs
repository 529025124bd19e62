//! Discretization of numeric features and encoding of tabular records.
//!
//! Cuts for an integer feature are the inclusive upper ends of each range:
//! cuts `[15, 30, 45]` give `<= 15`, `[16, 30]`, `[31, 45]` and `>= 46`.
//! Cuts for a real feature are range boundaries with half-open ranges:
//! cuts `[0.5, 1.5]` give `< 0.5`, `[0.5, 1.5)` and `>= 1.5`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::item::{check_feature_name, Item, NumericBin};
use crate::{Error, Result};

/// Category used for empty or `?` cells of categorical columns.
pub const MISSING: &str = "<missing>";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericKind {
    Integer,
    Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBins {
    kind: NumericKind,
    cuts: Vec<f64>,
}

impl FeatureBins {
    pub fn new(feature: &str, kind: NumericKind, cuts: Vec<f64>) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidBinning { feature: feature.to_string(), reason: reason.to_string() };
        if cuts.is_empty() {
            return Err(bad("at least one cut is required"));
        }
        if cuts.iter().any(|c| !c.is_finite()) {
            return Err(bad("cuts must be finite"));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("cuts must be strictly increasing"));
        }
        if kind == NumericKind::Integer && cuts.iter().any(|&c| !is_integral(c)) {
            return Err(bad("integer features need integral cuts"));
        }
        Ok(FeatureBins { kind, cuts })
    }

    pub fn kind(&self) -> NumericKind {
        self.kind
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    /// All ranges in ascending order.
    pub fn bins(&self) -> Vec<NumericBin> {
        let c = &self.cuts;
        let last = c[c.len() - 1];
        let mut out = Vec::with_capacity(c.len() + 1);
        match self.kind {
            NumericKind::Integer => {
                out.push(NumericBin::AtMost(c[0]));
                out.extend(c.windows(2).map(|w| NumericBin::Closed(w[0] + 1.0, w[1])));
                out.push(NumericBin::AtLeast(last + 1.0));
            }
            NumericKind::Real => {
                out.push(NumericBin::Below(c[0]));
                out.extend(c.windows(2).map(|w| NumericBin::HalfOpen(w[0], w[1])));
                out.push(NumericBin::AtLeast(last));
            }
        }
        out
    }

    /// The range containing `v`. Fails for NaN and for fractional values of
    /// integer features, which no range claims.
    pub fn assign(&self, v: f64) -> Option<NumericBin> {
        if v.is_nan() || (self.kind == NumericKind::Integer && !is_integral(v)) {
            return None;
        }
        let c = &self.cuts;
        let idx = match self.kind {
            // number of cuts strictly below v
            NumericKind::Integer => c.partition_point(|&cut| cut < v),
            // number of cuts at or below v
            NumericKind::Real => c.partition_point(|&cut| cut <= v),
        };
        let bins = self.bins();
        let bin = bins[idx];
        debug_assert!(bin.contains(v));
        Some(bin)
    }
}

fn is_integral(v: f64) -> bool {
    v.is_finite() && v == (v as i64) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnKind {
    Categorical,
    Numeric(FeatureBins),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// Ordered feature columns of a tabular dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularSchema {
    columns: Vec<Column>,
}

impl TabularSchema {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidSchema("no feature columns".to_string()));
        }
        for (i, col) in columns.iter().enumerate() {
            check_feature_name(&col.name).map_err(|e| Error::InvalidSchema(e.to_string()))?;
            if columns[..i].iter().any(|c| c.name == col.name) {
                return Err(Error::InvalidSchema(format!("duplicate column `{}`", col.name)));
            }
        }
        Ok(TabularSchema { columns })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    /// Encodes one record given its cells in schema column order. Produces
    /// exactly one item per column.
    pub fn encode<S: AsRef<str>>(&self, cells: &[S]) -> Result<Vec<Item>> {
        if cells.len() != self.columns.len() {
            return Err(Error::InvalidSchema(format!(
                "record has {} cells, schema has {} columns",
                cells.len(),
                self.columns.len()
            )));
        }
        let mut items = Vec::with_capacity(cells.len());
        for (col, cell) in self.columns.iter().zip(cells) {
            let cell = cell.as_ref().trim();
            let enc_err = |reason: String| Error::Encode { column: col.name.clone(), reason };
            let item = match &col.kind {
                ColumnKind::Categorical => {
                    let value = if cell.is_empty() || cell == "?" { MISSING } else { cell };
                    Item::categorical(col.name.as_str(), value)
                }
                ColumnKind::Numeric(bins) => {
                    let v: f64 = cell.parse().map_err(|_| enc_err(format!("cannot parse {cell:?} as a number")))?;
                    let bin = bins
                        .assign(v)
                        .ok_or_else(|| enc_err(format!("value {cell} is outside the declared bins")))?;
                    Item::numeric(col.name.as_str(), bin)
                }
            }
            .map_err(|e| enc_err(e.to_string()))?;
            items.push(item);
        }
        items.sort();
        Ok(items)
    }
}
