//! Instances encoded as item sets, paired with the black box's labels.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::item::Item;
use crate::{Error, Result};

/// Index into a dataset's item vocabulary. Ids follow canonical item order.
pub type ItemId = u32;

/// An immutable dataset of item sets with one predicted label per instance.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    vocabulary: Vec<Item>,
    instances: Vec<Vec<ItemId>>,
    labels: Vec<usize>,
    classes: Vec<String>,
    class_counts: Vec<usize>,
}

impl LabeledDataset {
    /// Pairs `instances` with the black box's `labels`.
    ///
    /// Without an explicit class list, classes are taken from the labels in
    /// first-occurrence order. With one, every label must be listed; classes
    /// without instances are allowed.
    pub fn new<S: AsRef<str>>(
        instances: Vec<Vec<Item>>,
        labels: &[S],
        classes: Option<Vec<String>>,
    ) -> Result<Self> {
        if instances.len() != labels.len() {
            return Err(Error::LengthMismatch { instances: instances.len(), labels: labels.len() });
        }
        let fixed = classes.is_some();
        let mut classes = classes.unwrap_or_default();
        let mut class_index: BTreeMap<String, usize> = BTreeMap::new();
        for (i, c) in classes.iter().enumerate() {
            if class_index.insert(c.clone(), i).is_some() {
                return Err(Error::InvalidSchema(alloc::format!("class `{c}` listed twice")));
            }
        }
        let mut label_ids = Vec::with_capacity(labels.len());
        for label in labels {
            let label = label.as_ref();
            let id = match class_index.get(label) {
                Some(&id) => id,
                None if fixed => return Err(Error::UnknownLabel(label.to_string())),
                None => {
                    classes.push(label.to_string());
                    class_index.insert(label.to_string(), classes.len() - 1);
                    classes.len() - 1
                }
            };
            label_ids.push(id);
        }

        let vocab_set: BTreeSet<&Item> = instances.iter().flatten().collect();
        let vocabulary: Vec<Item> = vocab_set.into_iter().cloned().collect();
        let encoded = instances
            .iter()
            .map(|inst| {
                let mut ids: Vec<ItemId> = inst
                    .iter()
                    .map(|item| vocabulary.binary_search(item).expect("item in vocabulary") as ItemId)
                    .collect();
                ids.sort_unstable();
                ids.dedup();
                ids
            })
            .collect();

        let mut class_counts = alloc::vec![0; classes.len()];
        for &l in &label_ids {
            class_counts[l] += 1;
        }
        Ok(LabeledDataset { vocabulary, instances: encoded, labels: label_ids, classes, class_counts })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    /// `M_q`: number of instances labeled `class`.
    pub fn class_count(&self, class: usize) -> usize {
        self.class_counts[class]
    }

    pub fn label(&self, instance: usize) -> usize {
        self.labels[instance]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn vocabulary(&self) -> &[Item] {
        &self.vocabulary
    }

    pub fn item(&self, id: ItemId) -> &Item {
        &self.vocabulary[id as usize]
    }

    pub fn item_id(&self, item: &Item) -> Option<ItemId> {
        self.vocabulary.binary_search(item).ok().map(|i| i as ItemId)
    }

    /// Sorted item ids of one instance.
    pub fn instance_ids(&self, instance: usize) -> &[ItemId] {
        &self.instances[instance]
    }

    /// Items of one instance in canonical order.
    pub fn instance_items(&self, instance: usize) -> Vec<Item> {
        self.instances[instance].iter().map(|&id| self.item(id).clone()).collect()
    }

    /// Distinct tabular feature names, sorted. Empty for text data.
    pub fn features(&self) -> Vec<String> {
        let names: BTreeSet<&str> = self.vocabulary.iter().filter_map(Item::feature).collect();
        names.into_iter().map(String::from).collect()
    }

    pub fn is_tabular(&self) -> bool {
        self.vocabulary.iter().any(|i| !i.is_token())
    }

    /// A new dataset holding `rows` (in the given order) with the same class
    /// list.
    pub fn select(&self, rows: &[usize]) -> LabeledDataset {
        let instances = rows.iter().map(|&r| self.instance_items(r)).collect();
        let labels: Vec<&str> = rows.iter().map(|&r| self.classes[self.labels[r]].as_str()).collect();
        LabeledDataset::new(instances, &labels, Some(self.classes.clone())).expect("rows of a valid dataset")
    }

    /// Instance indices labeled `class`, ascending.
    pub fn class_instances(&self, class: usize) -> Vec<usize> {
        (0..self.len()).filter(|&m| self.labels[m] == class).collect()
    }

    pub(crate) fn class_mask(&self, class: usize) -> BitSet {
        let mut mask = BitSet::new(self.len());
        for (m, &l) in self.labels.iter().enumerate() {
            if l == class {
                mask.insert(m);
            }
        }
        mask
    }

    /// One instance bitset per vocabulary item.
    pub(crate) fn item_covers(&self) -> Vec<BitSet> {
        let mut covers: Vec<BitSet> = (0..self.vocabulary.len()).map(|_| BitSet::new(self.len())).collect();
        for (m, inst) in self.instances.iter().enumerate() {
            for &id in inst {
                covers[id as usize].insert(m);
            }
        }
        covers
    }
}
