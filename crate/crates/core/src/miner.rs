//! Per-class confident itemset mining.
//!
//! Mining is level-wise: confident 1-itemsets first, then size-`K`
//! candidates joined from pairs of size-`K-1` itemsets that agree on their
//! first `K-2` items (canonical order), kept when the candidate is confident
//! and every size-`K-1` subset was kept at the previous level. Mining stops
//! after `max_k` levels or at the first level that adds nothing.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::dataset::{ItemId, LabeledDataset};
use crate::item::{Item, Itemset};
use crate::{Error, Result};

/// How itemset confidence is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConfidenceVariant {
    /// `Count(ci, C_q) / Count(ci)`, the fraction of instances containing the
    /// itemset that the black box put in the class.
    #[default]
    Rule,
    /// `P(ci | C_q) / P(ci)`. Not bounded by 1.
    Lift,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiningConfig {
    pub min_conf: f64,
    pub max_k: usize,
    /// Minimum number of class instances an itemset must occur in. Values
    /// below 1 behave as 1: an itemset must occur in the class to be mined.
    pub min_class_count: usize,
    pub variant: ConfidenceVariant,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig { min_conf: 0.7, max_k: 3, min_class_count: 1, variant: ConfidenceVariant::Rule }
    }
}

impl MiningConfig {
    pub fn new(min_conf: f64, max_k: usize) -> Result<Self> {
        let config = MiningConfig { min_conf, max_k, ..MiningConfig::default() };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let conf_ok = match self.variant {
            ConfidenceVariant::Rule => (0.0..=1.0).contains(&self.min_conf),
            ConfidenceVariant::Lift => self.min_conf.is_finite() && self.min_conf >= 0.0,
        };
        if !conf_ok {
            return Err(Error::InvalidMiningConfig(format!("min_conf {} out of range", self.min_conf)));
        }
        if self.max_k == 0 {
            return Err(Error::InvalidMiningConfig("max_k must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// Raw occurrence counts of an itemset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ItemsetCounts {
    /// `Count(ci)`: instances containing the itemset.
    pub count: usize,
    /// `Count(ci, C_q)`: of those, instances labeled with the class.
    pub class_count: usize,
}

/// An itemset mined for one class, with its statistics in that class.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidentItemset {
    pub itemset: Itemset,
    /// Index into the store's class list.
    pub class: usize,
    pub confidence: f64,
    pub class_support: f64,
    pub overall_support: f64,
}

/// Confident itemsets of every class, each class kept in canonical order
/// (size, then lexicographic).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidentItemsetStore {
    classes: Vec<String>,
    features: Option<Vec<String>>,
    by_class: Vec<Vec<ConfidentItemset>>,
}

impl ConfidentItemsetStore {
    /// Builds a store from loose itemsets. `features` is the sorted list of
    /// tabular feature names, or `None` for a text store.
    pub fn new(
        classes: Vec<String>,
        features: Option<Vec<String>>,
        itemsets: impl IntoIterator<Item = ConfidentItemset>,
    ) -> Result<Self> {
        let mut by_class: Vec<Vec<ConfidentItemset>> = classes.iter().map(|_| Vec::new()).collect();
        for ci in itemsets {
            by_class.get_mut(ci.class).ok_or(Error::UnknownClass(ci.class))?.push(ci);
        }
        for (q, list) in by_class.iter_mut().enumerate() {
            list.sort_by(|a, b| a.itemset.canonical_cmp(&b.itemset));
            if let Some(w) = list.windows(2).find(|w| w[0].itemset == w[1].itemset) {
                return Err(Error::InvalidSelection(format!(
                    "itemset {} listed twice for class `{}`",
                    w[0].itemset, classes[q]
                )));
            }
        }
        let features = features.map(|mut f| {
            f.sort();
            f.dedup();
            f
        });
        Ok(ConfidentItemsetStore { classes, features, by_class })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    pub fn features(&self) -> Option<&[String]> {
        self.features.as_deref()
    }

    /// `CI_q` in canonical order.
    pub fn class_itemsets(&self, class: usize) -> &[ConfidentItemset] {
        &self.by_class[class]
    }

    /// Every itemset, ordered by class, size, then lexicographically.
    pub fn iter(&self) -> impl Iterator<Item = &ConfidentItemset> {
        self.by_class.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.by_class.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A store holding, per class, the itemsets at the given indices of
    /// [`class_itemsets`](Self::class_itemsets). Missing classes keep nothing.
    pub fn select(&self, selections: &[Vec<usize>]) -> Result<Self> {
        let mut by_class = Vec::with_capacity(self.classes.len());
        for q in 0..self.classes.len() {
            let picked = selections.get(q).map(Vec::as_slice).unwrap_or(&[]);
            let mut sorted: Vec<usize> = picked.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            let list = sorted
                .into_iter()
                .map(|i| {
                    self.by_class[q].get(i).cloned().ok_or_else(|| {
                        Error::InvalidSelection(format!("class `{}` has no itemset #{i}", self.classes[q]))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            by_class.push(list);
        }
        Ok(ConfidentItemsetStore { classes: self.classes.clone(), features: self.features.clone(), by_class })
    }

    /// Itemsets of size two or more with a one-smaller subset missing from
    /// the same class.
    pub fn subset_closure_violations(&self) -> Vec<&ConfidentItemset> {
        let mut out = Vec::new();
        for list in &self.by_class {
            let present: BTreeSet<&Itemset> = list.iter().map(|ci| &ci.itemset).collect();
            for ci in list.iter().filter(|ci| ci.itemset.len() >= 2) {
                let items = ci.itemset.items();
                let closed = (0..items.len()).all(|skip| {
                    let sub = Itemset::new(
                        items.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, it)| it.clone()),
                    )
                    .expect("non-empty");
                    present.contains(&sub)
                });
                if !closed {
                    out.push(ci);
                }
            }
        }
        out
    }
}

/// Counts instances containing `itemset`, in total and within `class`, by
/// scanning every instance.
pub fn count(itemset: &Itemset, class: usize, dataset: &LabeledDataset) -> ItemsetCounts {
    let ids: Option<Vec<ItemId>> = itemset.items().iter().map(|i| dataset.item_id(i)).collect();
    let Some(ids) = ids else {
        return ItemsetCounts { count: 0, class_count: 0 };
    };
    let mut counts = ItemsetCounts { count: 0, class_count: 0 };
    for m in 0..dataset.len() {
        let inst = dataset.instance_ids(m);
        if ids.iter().all(|id| inst.binary_search(id).is_ok()) {
            counts.count += 1;
            if dataset.label(m) == class {
                counts.class_count += 1;
            }
        }
    }
    counts
}

pub(crate) fn confidence_value(
    variant: ConfidenceVariant,
    counts: ItemsetCounts,
    total: usize,
    class_total: usize,
) -> f64 {
    match variant {
        ConfidenceVariant::Rule => counts.class_count as f64 / counts.count as f64,
        ConfidenceVariant::Lift => {
            if class_total == 0 {
                return 0.0;
            }
            (counts.class_count as f64 / class_total as f64) / (counts.count as f64 / total as f64)
        }
    }
}

fn check_class(dataset: &LabeledDataset, class: usize) -> Result<()> {
    if class >= dataset.classes().len() {
        return Err(Error::UnknownClass(class));
    }
    Ok(())
}

/// Confidence of `itemset` in `class`.
pub fn confidence(itemset: &Itemset, class: usize, dataset: &LabeledDataset) -> Result<f64> {
    confidence_with(ConfidenceVariant::Rule, itemset, class, dataset)
}

pub fn confidence_with(
    variant: ConfidenceVariant,
    itemset: &Itemset,
    class: usize,
    dataset: &LabeledDataset,
) -> Result<f64> {
    check_class(dataset, class)?;
    let counts = count(itemset, class, dataset);
    if counts.count == 0 {
        return Err(Error::UndefinedConfidence);
    }
    Ok(confidence_value(variant, counts, dataset.len(), dataset.class_count(class)))
}

/// `(overall_support, class_support)` of `itemset` for `class`.
pub fn supports(itemset: &Itemset, class: usize, dataset: &LabeledDataset) -> Result<(f64, f64)> {
    check_class(dataset, class)?;
    let counts = count(itemset, class, dataset);
    if counts.count == 0 {
        return Err(Error::UndefinedConfidence);
    }
    let overall = counts.count as f64 / dataset.len() as f64;
    let class_support = counts.class_count as f64 / dataset.class_count(class) as f64;
    Ok((overall, class_support))
}

/// Per-item instance sets of a dataset, shared by all per-class miners.
#[derive(Debug, Clone)]
pub struct MiningIndex {
    covers: Vec<BitSet>,
}

impl MiningIndex {
    pub fn new(dataset: &LabeledDataset) -> Self {
        MiningIndex { covers: dataset.item_covers() }
    }
}

struct Node {
    ids: Vec<ItemId>,
    cover: BitSet,
    counts: ItemsetCounts,
}

/// Level-wise join/prune search within one class. `keep` sees the raw counts
/// of a candidate that occurs in at least one class instance.
fn levelwise(
    dataset: &LabeledDataset,
    index: &MiningIndex,
    class: usize,
    max_k: usize,
    keep: impl Fn(ItemsetCounts) -> bool,
) -> Vec<Node> {
    let mask = dataset.class_mask(class);
    let mut out = Vec::new();
    let mut level: Vec<Node> = Vec::new();
    for (id, cover) in index.covers.iter().enumerate() {
        let counts = ItemsetCounts { count: cover.count(), class_count: cover.intersection_count(&mask) };
        if counts.class_count > 0 && keep(counts) {
            level.push(Node { ids: alloc::vec![id as ItemId], cover: cover.clone(), counts });
        }
    }

    let mut k = 2;
    while k <= max_k && !level.is_empty() {
        let mut next = Vec::new();
        for i in 0..level.len() {
            for j in i + 1..level.len() {
                let (a, b) = (&level[i], &level[j]);
                if a.ids[..k - 2] != b.ids[..k - 2] {
                    break;
                }
                let mut ids = a.ids.clone();
                ids.push(b.ids[k - 2]);
                // dropping either of the last two items gives `a` or `b`
                let subsets_kept = (0..k - 2).all(|skip| {
                    let sub: Vec<ItemId> =
                        ids.iter().enumerate().filter(|&(p, _)| p != skip).map(|(_, &id)| id).collect();
                    level.binary_search_by(|n| n.ids.cmp(&sub)).is_ok()
                });
                if !subsets_kept {
                    continue;
                }
                let cover = a.cover.intersection(&b.cover);
                let counts = ItemsetCounts { count: cover.count(), class_count: cover.intersection_count(&mask) };
                if counts.class_count > 0 && keep(counts) {
                    next.push(Node { ids, cover, counts });
                }
            }
        }
        out.append(&mut level);
        level = next;
        k += 1;
    }
    out.append(&mut level);
    out
}

fn to_confident(dataset: &LabeledDataset, class: usize, node: Node, variant: ConfidenceVariant) -> ConfidentItemset {
    let items: Vec<Item> = node.ids.iter().map(|&id| dataset.item(id).clone()).collect();
    ConfidentItemset {
        itemset: Itemset::new(items).expect("non-empty"),
        class,
        confidence: confidence_value(variant, node.counts, dataset.len(), dataset.class_count(class)),
        class_support: node.counts.class_count as f64 / dataset.class_count(class) as f64,
        overall_support: node.counts.count as f64 / dataset.len() as f64,
    }
}

/// Confident itemsets of one class, in canonical order.
pub fn mine_class(
    dataset: &LabeledDataset,
    index: &MiningIndex,
    class: usize,
    config: &MiningConfig,
) -> Vec<ConfidentItemset> {
    let floor = config.min_class_count.max(1);
    let (m, m_q) = (dataset.len(), dataset.class_count(class));
    let nodes = levelwise(dataset, index, class, config.max_k, |c| {
        c.class_count >= floor && confidence_value(config.variant, c, m, m_q) >= config.min_conf
    });
    nodes.into_iter().map(|n| to_confident(dataset, class, n, config.variant)).collect()
}

fn store_features(dataset: &LabeledDataset) -> Option<Vec<String>> {
    dataset.is_tabular().then(|| dataset.features())
}

/// Runs the miner for every class.
pub fn mine_confident_itemsets(dataset: &LabeledDataset, config: &MiningConfig) -> Result<ConfidentItemsetStore> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let index = MiningIndex::new(dataset);
    let per_class = (0..dataset.classes().len()).map(|q| mine_class(dataset, &index, q, config));
    assemble(dataset, per_class.collect())
}

/// Builds a store from per-class results produced by [`mine_class`] or
/// [`mine_frequent_class`], e.g. by parallel workers.
pub fn assemble(dataset: &LabeledDataset, per_class: Vec<Vec<ConfidentItemset>>) -> Result<ConfidentItemsetStore> {
    ConfidentItemsetStore::new(dataset.classes().to_vec(), store_features(dataset), per_class.into_iter().flatten())
}

/// Itemsets of one class whose class support is at least `min_support`,
/// carrying rule confidence for scoring.
pub fn mine_frequent_class(
    dataset: &LabeledDataset,
    index: &MiningIndex,
    class: usize,
    min_support: f64,
    max_k: usize,
) -> Vec<ConfidentItemset> {
    let m_q = dataset.class_count(class);
    let nodes = levelwise(dataset, index, class, max_k, |c| c.class_count as f64 / m_q as f64 >= min_support);
    nodes.into_iter().map(|n| to_confident(dataset, class, n, ConfidenceVariant::Rule)).collect()
}

/// Classic per-class Apriori keyed on class support.
pub fn mine_frequent_itemsets(
    dataset: &LabeledDataset,
    min_support: f64,
    max_k: usize,
) -> Result<ConfidentItemsetStore> {
    if !(0.0..=1.0).contains(&min_support) {
        return Err(Error::InvalidMiningConfig(format!("min_support {min_support} out of range")));
    }
    if max_k == 0 {
        return Err(Error::InvalidMiningConfig("max_k must be at least 1".to_string()));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let index = MiningIndex::new(dataset);
    let per_class = (0..dataset.classes().len())
        .map(|q| mine_frequent_class(dataset, &index, q, min_support, max_k))
        .collect();
    assemble(dataset, per_class)
}
