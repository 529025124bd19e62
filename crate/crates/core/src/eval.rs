//! Fidelity measurements and baselines.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classwise::{
    check_compatible, empty_explanation, optimize_with_covers, ClassExplanation, ClassObjective, ObjectiveConfig,
};
use crate::dataset::{ItemId, LabeledDataset};
use crate::instance::rank_cmp;
use crate::miner::{ConfidentItemset, ConfidentItemsetStore, ItemsetCounts};
use crate::{Error, Result};

/// Instances covered by each stored itemset, per class.
#[derive(Debug, Clone)]
pub struct StoreCovers {
    per_class: Vec<Vec<Vec<u32>>>,
}

impl StoreCovers {
    pub fn new(store: &ConfidentItemsetStore, dataset: &LabeledDataset) -> Self {
        let item_covers = dataset.item_covers();
        let per_class = (0..store.classes().len())
            .map(|q| {
                store
                    .class_itemsets(q)
                    .iter()
                    .map(|ci| {
                        let ids: Option<Vec<ItemId>> = ci.itemset.items().iter().map(|i| dataset.item_id(i)).collect();
                        let Some(ids) = ids else { return Vec::new() };
                        let mut cover = item_covers[ids[0] as usize].clone();
                        for &id in &ids[1..] {
                            cover = cover.intersection(&item_covers[id as usize]);
                        }
                        cover.iter().map(|m| m as u32).collect()
                    })
                    .collect()
            })
            .collect();
        StoreCovers { per_class }
    }

    pub fn class(&self, class: usize) -> &[Vec<u32>] {
        &self.per_class[class]
    }
}

/// Summed evidence per class and instance for a whole store.
pub(crate) struct Evidence {
    n: usize,
    score: Vec<f64>,
    support: Vec<f64>,
    matches: Vec<u32>,
}

impl Evidence {
    pub fn full(store: &ConfidentItemsetStore, covers: &StoreCovers, n: usize) -> Self {
        let q = store.classes().len();
        let mut ev = Evidence { n, score: vec![0.0; q * n], support: vec![0.0; q * n], matches: vec![0; q * n] };
        for class in 0..q {
            // store order, so each instance's sum matches the instance explainer
            for (ci, cover) in store.class_itemsets(class).iter().zip(covers.class(class)) {
                for &m in cover {
                    let at = class * n + m as usize;
                    ev.score[at] += ci.confidence;
                    ev.support[at] += ci.class_support;
                    ev.matches[at] += 1;
                }
            }
        }
        ev
    }

    pub fn score(&self, class: usize, m: usize) -> f64 {
        self.score[class * self.n + m]
    }

    pub fn support(&self, class: usize, m: usize) -> f64 {
        self.support[class * self.n + m]
    }

    pub fn matches(&self, class: usize, m: usize) -> u32 {
        self.matches[class * self.n + m]
    }

    pub fn winner(&self, m: usize, labels: &[alloc::string::String]) -> Option<usize> {
        (0..labels.len()).filter(|&q| self.matches(q, m) > 0).min_by(|&a, &b| {
            rank_cmp((self.score(a, m), self.support(a, m), &labels[a]), (self.score(b, m), self.support(b, m), &labels[b]))
        })
    }
}

fn check_eval(store: &ConfidentItemsetStore, dataset: &LabeledDataset) -> Result<()> {
    check_compatible(store, dataset)
}

/// Label the instance explainer assigns to every instance, `None` for
/// abstentions.
pub fn approximate_labels(dataset: &LabeledDataset, store: &ConfidentItemsetStore) -> Result<Vec<Option<usize>>> {
    check_eval(store, dataset)?;
    let covers = StoreCovers::new(store, dataset);
    let ev = Evidence::full(store, &covers, dataset.len());
    Ok((0..dataset.len()).map(|m| ev.winner(m, store.classes())).collect())
}

/// Fraction of instances whose approximated label equals the black-box
/// label. Abstentions count as mismatches.
pub fn instance_fidelity(dataset: &LabeledDataset, store: &ConfidentItemsetStore) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let labels = approximate_labels(dataset, store)?;
    let hits = labels.iter().enumerate().filter(|(m, l)| **l == Some(dataset.label(*m))).count();
    Ok(hits as f64 / dataset.len() as f64)
}

/// Fraction of instances nothing in the store matches.
pub fn abstention_rate(dataset: &LabeledDataset, store: &ConfidentItemsetStore) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let labels = approximate_labels(dataset, store)?;
    Ok(labels.iter().filter(|l| l.is_none()).count() as f64 / dataset.len() as f64)
}

/// Instance-weighted mean of per-class fidelity, where class `q` is
/// explained by `selections[q]` (indices into `CI_q`). Classes without
/// instances are left out.
pub fn classwise_fidelity(
    dataset: &LabeledDataset,
    store: &ConfidentItemsetStore,
    selections: &[Vec<usize>],
) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_eval(store, dataset)?;
    let covers = StoreCovers::new(store, dataset);
    classwise_with_covers(dataset, store, selections, &covers)
}

fn classwise_with_covers(
    dataset: &LabeledDataset,
    store: &ConfidentItemsetStore,
    selections: &[Vec<usize>],
    covers: &StoreCovers,
) -> Result<f64> {
    let config = ObjectiveConfig::default();
    let mut wins = 0usize;
    let mut mass = 0usize;
    for q in 0..store.classes().len() {
        if dataset.class_count(q) == 0 {
            log::warn!("class `{}` has no instances and is left out", store.classes()[q]);
            continue;
        }
        let mut sel = selections.get(q).cloned().unwrap_or_default();
        sel.sort_unstable();
        sel.dedup();
        if sel.iter().any(|&i| i >= store.class_itemsets(q).len()) {
            return Err(Error::InvalidSelection(alloc::format!("bad index for class `{}`", store.classes()[q])));
        }
        let obj = ClassObjective::with_covers(store, q, dataset, &config, covers);
        wins += obj.wins(&sel);
        mass += dataset.class_count(q);
    }
    Ok(wins as f64 / mass as f64)
}

/// One explanation per class with `config`. Classes without instances or
/// without candidates get an empty explanation.
pub fn explain_classes(
    store: &ConfidentItemsetStore,
    dataset: &LabeledDataset,
    config: &ObjectiveConfig,
) -> Result<Vec<ClassExplanation>> {
    check_eval(store, dataset)?;
    let covers = StoreCovers::new(store, dataset);
    explain_classes_with_covers(store, dataset, config, &covers)
}

fn explain_classes_with_covers(
    store: &ConfidentItemsetStore,
    dataset: &LabeledDataset,
    config: &ObjectiveConfig,
    covers: &StoreCovers,
) -> Result<Vec<ClassExplanation>> {
    (0..store.classes().len())
        .map(|q| {
            if dataset.class_count(q) == 0 || store.class_itemsets(q).is_empty() {
                Ok(empty_explanation(q, dataset.class_count(q), config))
            } else {
                optimize_with_covers(store, q, dataset, config, covers).map(|(e, _)| e)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub k: usize,
    /// Class-wise fidelity of the size-limited explanations.
    pub accuracy: f64,
    /// Mean objective over classes with instances; `None` for `k = 0`.
    pub mean_objective: Option<f64>,
    pub explanations: Vec<ClassExplanation>,
}

/// Class-wise fidelity when each class may use at most `k` itemsets, for
/// every `k` in `k_values` (strictly increasing).
pub fn descriptive_accuracy_curve(
    dataset: &LabeledDataset,
    store: &ConfidentItemsetStore,
    k_values: &[usize],
    config: &ObjectiveConfig,
) -> Result<Vec<CurvePoint>> {
    if k_values.is_empty() || k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidObjectiveConfig("K values must be non-empty and strictly increasing".into()));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_eval(store, dataset)?;
    let covers = StoreCovers::new(store, dataset);
    let present: Vec<usize> = (0..store.classes().len()).filter(|&q| dataset.class_count(q) > 0).collect();
    k_values
        .iter()
        .map(|&k| {
            if k == 0 {
                return Ok(CurvePoint { k, accuracy: 0.0, mean_objective: None, explanations: Vec::new() });
            }
            let config = ObjectiveConfig { theta: [k, config.theta[1], config.theta[2]], ..*config };
            let explanations = explain_classes_with_covers(store, dataset, &config, &covers)?;
            let selections: Vec<Vec<usize>> = explanations.iter().map(|e| e.selection.clone()).collect();
            let accuracy = classwise_with_covers(dataset, store, &selections, &covers)?;
            let total: f64 = present.iter().map(|&q| explanations[q].objective).sum();
            let mean_objective = Some(total / present.len().max(1) as f64);
            Ok(CurvePoint { k, accuracy, mean_objective, explanations })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalEntry {
    pub class: usize,
    /// Index into the class's itemsets in the store.
    pub index: usize,
    /// Instances containing the itemset.
    pub coverage: usize,
    /// Instances containing it and no other candidate.
    pub unique_coverage: usize,
    pub score: f64,
}

/// Ranks the itemsets selected by the class explanations into one global
/// explanation and keeps the top `k`. The score is
/// `0.5 * coverage / max_coverage + 0.5 * unique_coverage / coverage`; ties
/// go to higher confidence, then to the smaller rendering.
pub fn build_global_explanation(
    store: &ConfidentItemsetStore,
    selections: &[Vec<usize>],
    dataset: &LabeledDataset,
    k: usize,
) -> Result<Vec<GlobalEntry>> {
    check_eval(store, dataset)?;
    let covers = StoreCovers::new(store, dataset);
    let mut picked: Vec<(usize, usize)> = Vec::new();
    for (q, sel) in selections.iter().enumerate().take(store.classes().len()) {
        let mut sel = sel.clone();
        sel.sort_unstable();
        sel.dedup();
        for i in sel {
            if i >= store.class_itemsets(q).len() {
                return Err(Error::InvalidSelection(alloc::format!("bad index for class `{}`", store.classes()[q])));
            }
            picked.push((q, i));
        }
    }
    let mut times_covered = vec![0u32; dataset.len()];
    for &(q, i) in &picked {
        for &m in &covers.class(q)[i] {
            times_covered[m as usize] += 1;
        }
    }
    let max_coverage = picked.iter().map(|&(q, i)| covers.class(q)[i].len()).max().unwrap_or(0);
    let mut entries: Vec<GlobalEntry> = picked
        .iter()
        .map(|&(q, i)| {
            let cover = &covers.class(q)[i];
            let coverage = cover.len();
            let unique_coverage = cover.iter().filter(|&&m| times_covered[m as usize] == 1).count();
            let breadth = if max_coverage == 0 { 0.0 } else { coverage as f64 / max_coverage as f64 };
            let exclusivity = if coverage == 0 { 0.0 } else { unique_coverage as f64 / coverage as f64 };
            GlobalEntry { class: q, index: i, coverage, unique_coverage, score: 0.5 * breadth + 0.5 * exclusivity }
        })
        .collect();
    entries.sort_by(|a, b| {
        let (ca, cb) = (&store.class_itemsets(a.class)[a.index], &store.class_itemsets(b.class)[b.index]);
        b.score
            .total_cmp(&a.score)
            .then_with(|| cb.confidence.total_cmp(&ca.confidence))
            .then_with(|| ca.itemset.cmp(&cb.itemset))
            .then_with(|| a.class.cmp(&b.class))
    });
    entries.truncate(k);
    Ok(entries)
}

/// Store holding only the given global entries.
pub fn global_store(store: &ConfidentItemsetStore, entries: &[GlobalEntry]) -> Result<ConfidentItemsetStore> {
    let mut selections = vec![Vec::new(); store.classes().len()];
    for e in entries {
        selections[e.class].push(e.index);
    }
    store.select(&selections)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalPoint {
    pub size: usize,
    pub num_items: usize,
    pub accuracy: f64,
}

/// Instance fidelity of the top-`s` global explanation for each `s` in
/// `sizes`. `ranked` is the full ranking from [`build_global_explanation`].
pub fn global_curve(
    dataset: &LabeledDataset,
    store: &ConfidentItemsetStore,
    ranked: &[GlobalEntry],
    sizes: &[usize],
) -> Result<Vec<GlobalPoint>> {
    sizes
        .iter()
        .map(|&s| {
            let top = &ranked[..s.min(ranked.len())];
            let global = global_store(store, top)?;
            let num_items = global.iter().map(|c| c.itemset.len()).sum();
            Ok(GlobalPoint { size: top.len(), num_items, accuracy: instance_fidelity(dataset, &global)? })
        })
        .collect()
}

fn by_strength(a: &ConfidentItemset, b: &ConfidentItemset) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then_with(|| b.class_support.total_cmp(&a.class_support))
        .then_with(|| a.itemset.cmp(&b.itemset))
}

/// Per class, the `k` strongest 1-itemsets by confidence, then class
/// support, then rendering.
pub fn greedy_baseline(store: &ConfidentItemsetStore, k: usize) -> Vec<Vec<usize>> {
    (0..store.classes().len())
        .map(|q| {
            let list = store.class_itemsets(q);
            let mut singles: Vec<usize> = (0..list.len()).filter(|&i| list[i].itemset.len() == 1).collect();
            if singles.len() < k {
                log::info!("class `{}`: only {} 1-itemsets for K = {k}", store.classes()[q], singles.len());
            }
            singles.sort_by(|&a, &b| by_strength(&list[a], &list[b]));
            singles.truncate(k);
            singles.sort_unstable();
            singles
        })
        .collect()
}

/// Per class, the `k` itemsets with the highest class support (then
/// confidence, then rendering). Used to rank frequent itemsets.
pub fn top_by_support(store: &ConfidentItemsetStore, k: usize) -> Vec<Vec<usize>> {
    (0..store.classes().len())
        .map(|q| {
            let list = store.class_itemsets(q);
            let mut idx: Vec<usize> = (0..list.len()).collect();
            idx.sort_by(|&a, &b| {
                list[b]
                    .class_support
                    .total_cmp(&list[a].class_support)
                    .then_with(|| by_strength(&list[a], &list[b]))
            });
            idx.truncate(k);
            idx.sort_unstable();
            idx
        })
        .collect()
}

/// Per class, `k` distinct items drawn uniformly from those occurring in the
/// class's instances, as 1-itemsets with their statistics on `dataset`.
pub fn random_baseline(dataset: &LabeledDataset, k: usize, seed: u64) -> Result<ConfidentItemsetStore> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let covers = dataset.item_covers();
    let mut picked = Vec::new();
    for q in 0..dataset.classes().len() {
        let mask = dataset.class_mask(q);
        let pool: Vec<usize> = (0..covers.len()).filter(|&id| covers[id].intersection_count(&mask) > 0).collect();
        if pool.len() < k {
            log::info!("class `{}`: only {} items for K = {k}", dataset.classes()[q], pool.len());
        }
        let take = k.min(pool.len());
        let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), take).into_iter().map(|i| pool[i]).collect();
        chosen.sort_unstable();
        for id in chosen {
            let counts = ItemsetCounts { count: covers[id].count(), class_count: covers[id].intersection_count(&mask) };
            picked.push(ConfidentItemset {
                itemset: crate::item::Itemset::single(dataset.item(id as ItemId).clone()),
                class: q,
                confidence: crate::miner::confidence_value(
                    crate::miner::ConfidenceVariant::Rule,
                    counts,
                    dataset.len(),
                    dataset.class_count(q),
                ),
                class_support: counts.class_count as f64 / dataset.class_count(q) as f64,
                overall_support: counts.count as f64 / dataset.len() as f64,
            });
        }
    }
    let features = dataset.is_tabular().then(|| dataset.features());
    ConfidentItemsetStore::new(dataset.classes().to_vec(), features, picked)
}
