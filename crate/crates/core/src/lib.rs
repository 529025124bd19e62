//! Confident itemset explanations for black-box classifiers.
//!
//! The pipeline runs in four stages:
//!
//! 1. Encode instances as sets of [`Item`]s ([`binning`] for tabular records,
//!    [`text`] for token streams) and attach black-box labels
//!    ([`LabeledDataset`]).
//! 2. Mine per-class confident itemsets ([`miner`]).
//! 3. Explain single predictions by summing the confidences of matching
//!    itemsets ([`instance`]).
//! 4. Select compact per-class explanations with approximate local search
//!    ([`classwise`], [`search`]) and measure how faithfully they reproduce the
//!    black box ([`eval`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and thread pools live in the `cie` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod binning;
mod bitset;
pub mod classwise;
pub mod dataset;
mod error;
pub mod eval;
pub mod instance;
pub mod item;
pub mod miner;
pub mod search;
pub mod text;

pub use binning::{ColumnKind, FeatureBins, NumericKind, TabularSchema};
pub use classwise::{ClassExplanation, Metrics, ObjectiveConfig, Rewards};
pub use dataset::{ItemId, LabeledDataset};
pub use error::Error;
pub use instance::{ClassEvidence, InstanceExplanation};
pub use item::{Item, ItemKey, Itemset, NumericBin, Operator};
pub use miner::{ConfidenceVariant, ConfidentItemset, ConfidentItemsetStore, MiningConfig};
pub use text::TokenizerOptions;

pub type Result<T, E = Error> = core::result::Result<T, E>;
