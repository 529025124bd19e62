//! Class-wise explanations.
//!
//! A class explanation is a subset of the class's confident itemsets chosen
//! to maximize a weighted sum of six rewards, each scaled to `[0, 1]`:
//!
//! | reward | value |
//! |--------|-------|
//! | f1 | fidelity |
//! | f2 | `(theta1 - size) / theta1` |
//! | f3 | `(theta2 - num_items) / theta2` |
//! | f4 | `(theta3 - max_length) / theta3` |
//! | f5 | `(P - overlap) / P`, `P = theta1 (theta1 - 1) / 2` |
//! | f6 | `coverage / M_q` |
//!
//! subject to `size <= theta1`, `num_items <= theta2` and
//! `max_length <= theta3`.
//!
//! Fidelity of a candidate set counts the class instances that the
//! instance-wise explainer still labels with the class when the class's
//! evidence is restricted to the set and every other class keeps its full
//! store. Abstentions count as misses.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::LabeledDataset;
use crate::eval::{Evidence, StoreCovers};
use crate::instance::rank_cmp;
use crate::item::Itemset;
use crate::miner::ConfidentItemsetStore;
use crate::search::{local_search, SearchConfig, SearchOutcome, SetObjective};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveConfig {
    pub weights: [f64; 6],
    /// Bounds on size, total items and longest itemset.
    pub theta: [usize; 3],
    pub delta: f64,
    /// Constraint count handed to the local search.
    pub k: usize,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig { weights: [1.0 / 6.0; 6], theta: [10, 30, 3], delta: 1e-3, k: 3 }
    }
}

impl ObjectiveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidObjectiveConfig(m.to_string()));
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return bad("weights must be finite and non-negative");
        }
        if self.theta.contains(&0) {
            return bad("theta bounds must be positive");
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad("delta must be positive");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        Ok(())
    }

    /// Also checks `theta3` against the longest itemset the miner can emit.
    pub fn validate_for(&self, max_k: usize) -> Result<()> {
        self.validate()?;
        if self.theta[2] > max_k {
            return Err(Error::InvalidObjectiveConfig(format!(
                "theta3 = {} exceeds the mining max_k = {max_k}",
                self.theta[2]
            )));
        }
        Ok(())
    }

    fn search(&self) -> SearchConfig {
        SearchConfig { delta: self.delta, k: self.k }
    }
}

/// Size-type interpretability measures of an itemset collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Interpretability {
    pub size: usize,
    pub num_items: usize,
    pub max_length: usize,
    /// Unordered pairs sharing at least one item, each counted once.
    pub itemset_overlap: usize,
}

pub fn interpretability_measures<'a>(itemsets: impl IntoIterator<Item = &'a Itemset>) -> Interpretability {
    let sets: Vec<&Itemset> = itemsets.into_iter().collect();
    let mut m = Interpretability { size: sets.len(), ..Interpretability::default() };
    for (i, s) in sets.iter().enumerate() {
        m.num_items += s.len();
        m.max_length = m.max_length.max(s.len());
        m.itemset_overlap += sets[i + 1..].iter().filter(|t| s.shares_item_with(t)).count();
    }
    m
}

/// Number of instances labeled `class` that contain at least one of
/// `itemsets`.
pub fn class_coverage<'a>(
    itemsets: impl IntoIterator<Item = &'a Itemset>,
    dataset: &LabeledDataset,
    class: usize,
) -> usize {
    let sets: Vec<&Itemset> = itemsets.into_iter().collect();
    dataset
        .class_instances(class)
        .into_iter()
        .filter(|&m| {
            let items = dataset.instance_items(m);
            sets.iter().any(|s| s.is_subset_of(&items))
        })
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub fidelity: f64,
    pub size: usize,
    pub num_items: usize,
    pub max_length: usize,
    pub itemset_overlap: usize,
    pub coverage: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rewards(pub [f64; 6]);

impl Rewards {
    pub fn objective(&self, weights: &[f64; 6]) -> f64 {
        self.0.iter().zip(weights).fold(0.0, |acc, (f, w)| acc + w * f)
    }
}

pub fn is_feasible(m: &Metrics, theta: &[usize; 3]) -> bool {
    m.size <= theta[0] && m.num_items <= theta[1] && m.max_length <= theta[2]
}

/// Scaled rewards. `class_total` is `M_q`. Fails for sets that break a
/// constraint.
pub fn rewards(m: &Metrics, class_total: usize, config: &ObjectiveConfig) -> Result<Rewards> {
    let theta = config.theta;
    if !is_feasible(m, &theta) {
        return Err(Error::InvalidSelection(format!(
            "size {}, {} items, max length {} violate theta {:?}",
            m.size, m.num_items, m.max_length, theta
        )));
    }
    let slack = |bound: usize, value: usize| (bound - value) as f64 / bound as f64;
    let pairs = theta[0] * (theta[0] - 1) / 2;
    let f5 = if pairs == 0 { 1.0 } else { slack(pairs, m.itemset_overlap) };
    let f6 = if class_total == 0 { 0.0 } else { m.coverage as f64 / class_total as f64 };
    Ok(Rewards([
        m.fidelity,
        slack(theta[0], m.size),
        slack(theta[1], m.num_items),
        slack(theta[2], m.max_length),
        f5,
        f6,
    ]))
}

pub fn objective(m: &Metrics, class_total: usize, config: &ObjectiveConfig) -> Result<f64> {
    Ok(rewards(m, class_total, config)?.objective(&config.weights))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassExplanation {
    pub class: usize,
    /// Indices into the class's itemsets in the store, ascending.
    pub selection: Vec<usize>,
    pub metrics: Metrics,
    pub rewards: Rewards,
    pub objective: f64,
}

/// The objective of one class over a dataset, evaluated incrementally from
/// precomputed covers.
pub struct ClassObjective<'a> {
    store: &'a ConfidentItemsetStore,
    class: usize,
    config: ObjectiveConfig,
    label: &'a str,
    /// Per candidate: positions (within the class's instances) it covers.
    covers: Vec<Vec<u32>>,
    /// Per class instance: strongest competing class evidence, if any.
    rivals: Vec<Option<(f64, f64, usize)>>,
    seed_ranks: Vec<usize>,
}

impl<'a> ClassObjective<'a> {
    pub fn new(
        store: &'a ConfidentItemsetStore,
        class: usize,
        dataset: &LabeledDataset,
        config: &ObjectiveConfig,
    ) -> Result<Self> {
        config.validate()?;
        check_compatible(store, dataset)?;
        let label = store.classes().get(class).ok_or(Error::UnknownClass(class))?;
        if dataset.class_count(class) == 0 {
            return Err(Error::UndefinedFidelity(label.clone()));
        }
        let covers = StoreCovers::new(store, dataset);
        Ok(Self::with_covers(store, class, dataset, config, &covers))
    }

    pub(crate) fn with_covers(
        store: &'a ConfidentItemsetStore,
        class: usize,
        dataset: &LabeledDataset,
        config: &ObjectiveConfig,
        covers: &StoreCovers,
    ) -> Self {
        let members = dataset.class_instances(class);
        let mut position = vec![u32::MAX; dataset.len()];
        for (p, &m) in members.iter().enumerate() {
            position[m] = p as u32;
        }
        let class_covers: Vec<Vec<u32>> = covers
            .class(class)
            .iter()
            .map(|cov| cov.iter().map(|&m| position[m as usize]).filter(|&p| p != u32::MAX).collect())
            .collect();

        let evidence = Evidence::full(store, covers, dataset.len());
        let labels = store.classes();
        let rivals = members
            .iter()
            .map(|&m| {
                (0..labels.len())
                    .filter(|&r| r != class && evidence.matches(r, m) > 0)
                    .map(|r| (evidence.score(r, m), evidence.support(r, m), r))
                    .min_by(|a, b| rank_cmp((a.0, a.1, &labels[a.2]), (b.0, b.1, &labels[b.2])))
            })
            .collect();

        let itemsets = store.class_itemsets(class);
        let mut order: Vec<usize> = (0..itemsets.len()).collect();
        order.sort_by(|&a, &b| itemsets[a].itemset.cmp(&itemsets[b].itemset));
        let mut seed_ranks = vec![0; itemsets.len()];
        for (rank, &i) in order.iter().enumerate() {
            seed_ranks[i] = rank;
        }

        ClassObjective {
            store,
            class,
            config: *config,
            label: &labels[class],
            covers: class_covers,
            rivals,
            seed_ranks,
        }
    }

    pub fn class_total(&self) -> usize {
        self.rivals.len()
    }

    /// Class instances won and covered by a selection (indices into the
    /// class's itemsets, ascending).
    fn tally(&self, selection: &[usize]) -> (usize, usize) {
        let itemsets = self.store.class_itemsets(self.class);
        let n = self.rivals.len();
        let mut score = vec![0.0f64; n];
        let mut support = vec![0.0f64; n];
        let mut hit = vec![false; n];
        for &i in selection {
            let ci = &itemsets[i];
            for &p in &self.covers[i] {
                let p = p as usize;
                score[p] += ci.confidence;
                support[p] += ci.class_support;
                hit[p] = true;
            }
        }
        let labels = self.store.classes();
        let mut wins = 0usize;
        for p in (0..n).filter(|&p| hit[p]) {
            let won = match self.rivals[p] {
                None => true,
                Some((s, sup, r)) => {
                    rank_cmp((score[p], support[p], self.label), (s, sup, &labels[r])) == Ordering::Less
                }
            };
            wins += won as usize;
        }
        (wins, hit.iter().filter(|h| **h).count())
    }

    pub(crate) fn wins(&self, selection: &[usize]) -> usize {
        self.tally(selection).0
    }

    /// Metrics of a selection (indices into the class's itemsets, ascending).
    pub fn metrics(&self, selection: &[usize]) -> Metrics {
        let itemsets = self.store.class_itemsets(self.class);
        let shape = interpretability_measures(selection.iter().map(|&i| &itemsets[i].itemset));
        let (wins, coverage) = self.tally(selection);
        Metrics {
            fidelity: wins as f64 / self.rivals.len() as f64,
            size: shape.size,
            num_items: shape.num_items,
            max_length: shape.max_length,
            itemset_overlap: shape.itemset_overlap,
            coverage,
        }
    }

    pub fn explanation(&self, selection: Vec<usize>) -> Result<ClassExplanation> {
        let metrics = self.metrics(&selection);
        let rewards = rewards(&metrics, self.class_total(), &self.config)?;
        let objective = rewards.objective(&self.config.weights);
        Ok(ClassExplanation { class: self.class, selection, metrics, rewards, objective })
    }

    fn shape_feasible(&self, selection: &[usize]) -> bool {
        let itemsets = self.store.class_itemsets(self.class);
        let theta = self.config.theta;
        let mut items = 0;
        for &i in selection {
            let len = itemsets[i].itemset.len();
            if len > theta[2] {
                return false;
            }
            items += len;
        }
        selection.len() <= theta[0] && items <= theta[1]
    }
}

impl SetObjective for ClassObjective<'_> {
    fn ground_size(&self) -> usize {
        self.covers.len()
    }

    fn value(&self, set: &[usize]) -> f64 {
        let m = self.metrics(set);
        rewards(&m, self.class_total(), &self.config).map_or(0.0, |r| r.objective(&self.config.weights))
    }

    fn feasible(&self, set: &[usize]) -> bool {
        self.shape_feasible(set)
    }

    fn seed_rank(&self, element: usize) -> usize {
        self.seed_ranks[element]
    }
}

pub(crate) fn check_compatible(store: &ConfidentItemsetStore, dataset: &LabeledDataset) -> Result<()> {
    if store.classes() != dataset.classes() {
        return Err(Error::SchemaMismatch(format!(
            "store classes {:?} differ from dataset classes {:?}",
            store.classes(),
            dataset.classes()
        )));
    }
    crate::instance::check_schema(dataset.vocabulary(), store)
}

/// Fidelity of `selection` (indices into `CI_q`) for `class` on `dataset`.
pub fn class_fidelity(
    store: &ConfidentItemsetStore,
    class: usize,
    selection: &[usize],
    dataset: &LabeledDataset,
) -> Result<f64> {
    let config = ObjectiveConfig::default();
    let obj = ClassObjective::new(store, class, dataset, &config)?;
    check_selection(store, class, selection)?;
    let mut sorted = selection.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(obj.metrics(&sorted).fidelity)
}

fn check_selection(store: &ConfidentItemsetStore, class: usize, selection: &[usize]) -> Result<()> {
    let n = store.class_itemsets(class).len();
    if let Some(&bad) = selection.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidSelection(format!("class `{}` has no itemset #{bad}", store.classes()[class])));
    }
    Ok(())
}

/// Local search over `CI_q`, returning the explanation with the full search
/// record.
pub fn optimize_traced(
    store: &ConfidentItemsetStore,
    class: usize,
    dataset: &LabeledDataset,
    config: &ObjectiveConfig,
) -> Result<(ClassExplanation, SearchOutcome)> {
    let covers = StoreCovers::new(store, dataset);
    optimize_with_covers(store, class, dataset, config, &covers)
}

pub(crate) fn optimize_with_covers(
    store: &ConfidentItemsetStore,
    class: usize,
    dataset: &LabeledDataset,
    config: &ObjectiveConfig,
    covers: &StoreCovers,
) -> Result<(ClassExplanation, SearchOutcome)> {
    config.validate()?;
    check_compatible(store, dataset)?;
    let label = store.classes().get(class).ok_or(Error::UnknownClass(class))?;
    let candidates = store.class_itemsets(class);
    if candidates.is_empty() {
        return Err(Error::NoCandidates(label.clone()));
    }
    if dataset.class_count(class) == 0 {
        return Err(Error::UndefinedFidelity(label.clone()));
    }
    let obj = ClassObjective::with_covers(store, class, dataset, config, covers);
    let outcome = local_search(&obj, config.search()).ok_or_else(|| Error::NoFeasibleSingleton {
        class: label.clone(),
        min_len: candidates.iter().map(|c| c.itemset.len()).min().unwrap_or(0),
        theta: config.theta,
    })?;
    let explanation = obj.explanation(outcome.set.clone())?;
    Ok((explanation, outcome))
}

/// Selects a class explanation from `CI_q` with approximate local search.
pub fn optimize_class_explanation(
    store: &ConfidentItemsetStore,
    class: usize,
    dataset: &LabeledDataset,
    config: &ObjectiveConfig,
) -> Result<ClassExplanation> {
    optimize_traced(store, class, dataset, config).map(|(e, _)| e)
}

/// Explanation with nothing selected, used for classes without candidates
/// or with a zero size bound.
pub fn empty_explanation(class: usize, class_total: usize, config: &ObjectiveConfig) -> ClassExplanation {
    let metrics = Metrics { fidelity: 0.0, size: 0, num_items: 0, max_length: 0, itemset_overlap: 0, coverage: 0 };
    let rewards = rewards(&metrics, class_total, config).expect("empty set is feasible");
    let objective = rewards.objective(&config.weights);
    ClassExplanation { class, selection: Vec::new(), metrics, rewards, objective }
}

/// Levels used by [`weight_grid`] by default.
pub const DEFAULT_WEIGHT_LEVELS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Every weight vector over `levels`, normalized to sum to one (all-zero
/// vectors become uniform), without repeats, in odometer order.
pub fn weight_grid(levels: &[f64]) -> Vec<[f64; 6]> {
    let mut out: Vec<[f64; 6]> = Vec::new();
    if levels.is_empty() {
        return out;
    }
    let mut idx = [0usize; 6];
    loop {
        let raw: [f64; 6] = core::array::from_fn(|i| levels[idx[i]]);
        let sum: f64 = raw.iter().sum();
        let w = if sum > 0.0 { raw.map(|x| x / sum) } else { [1.0 / 6.0; 6] };
        if !out.contains(&w) {
            out.push(w);
        }
        let mut pos = 6;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < levels.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub config: ObjectiveConfig,
    /// Mean held-out class-wise fidelity per grid entry.
    pub scores: Vec<f64>,
    pub best: usize,
    pub skipped_folds: usize,
}

/// Picks the weight vector with the best mean held-out class-wise fidelity.
/// Folds come from a seeded shuffle; a fold where some class is missing from
/// either side is skipped. Ties go to the earlier grid entry.
pub fn cross_validate_weights(
    store: &ConfidentItemsetStore,
    dataset: &LabeledDataset,
    grid: &[[f64; 6]],
    base: &ObjectiveConfig,
    folds: usize,
    seed: u64,
) -> Result<CrossValidation> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if folds < 2 || folds > dataset.len() {
        return Err(Error::InvalidFolds { folds, instances: dataset.len() });
    }
    base.validate()?;
    check_compatible(store, dataset)?;

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let present: Vec<usize> = (0..dataset.classes().len()).filter(|&q| dataset.class_count(q) > 0).collect();

    let mut splits = Vec::new();
    let mut skipped_folds = 0;
    for f in 0..folds {
        let mut held: Vec<usize> = order.iter().copied().skip(f).step_by(folds).collect();
        held.sort_unstable();
        let train_rows: Vec<usize> = (0..dataset.len()).filter(|m| held.binary_search(m).is_err()).collect();
        let train = dataset.select(&train_rows);
        let test = dataset.select(&held);
        if present.iter().any(|&q| train.class_count(q) == 0 || test.class_count(q) == 0) {
            log::warn!("fold {f} skipped: a class is missing from its training or held-out part");
            skipped_folds += 1;
            continue;
        }
        let train_covers = StoreCovers::new(store, &train);
        let test_covers = StoreCovers::new(store, &test);
        splits.push((train, test, train_covers, test_covers));
    }

    let mut scores = Vec::with_capacity(grid.len());
    for weights in grid {
        let config = ObjectiveConfig { weights: *weights, ..*base };
        let mut total = 0.0;
        for (train, test, train_covers, test_covers) in &splits {
            let mut wins = 0usize;
            let mut mass = 0usize;
            for &q in &present {
                let selection = if store.class_itemsets(q).is_empty() {
                    Vec::new()
                } else {
                    optimize_with_covers(store, q, train, &config, train_covers)?.0.selection
                };
                let obj = ClassObjective::with_covers(store, q, test, &config, test_covers);
                wins += obj.wins(&selection);
                mass += test.class_count(q);
            }
            total += wins as f64 / mass as f64;
        }
        scores.push(if splits.is_empty() { 0.0 } else { total / splits.len() as f64 });
    }
    let best = (0..scores.len()).fold(0, |b, i| if scores[i] > scores[b] { i } else { b });
    Ok(CrossValidation { config: ObjectiveConfig { weights: grid[best], ..*base }, scores, best, skipped_folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::item::Item;
    use crate::miner::ConfidentItemset;
    use alloc::string::String;

    fn tok(s: &str) -> Item {
        Item::token(s).unwrap()
    }

    fn set(tokens: &[&str]) -> Itemset {
        Itemset::new(tokens.iter().map(|t| tok(t))).unwrap()
    }

    fn ci(class: usize, tokens: &[&str], confidence: f64) -> ConfidentItemset {
        ConfidentItemset { itemset: set(tokens), class, confidence, class_support: 0.5, overall_support: 0.5 }
    }

    fn dataset(rows: &[(&[&str], &str)], classes: &[&str]) -> LabeledDataset {
        let inst = rows.iter().map(|(t, _)| t.iter().map(|s| tok(s)).collect()).collect();
        let labels: Vec<&str> = rows.iter().map(|(_, l)| *l).collect();
        LabeledDataset::new(inst, &labels, Some(classes.iter().map(|c| String::from(*c)).collect())).unwrap()
    }

    fn store(classes: &[&str], itemsets: Vec<ConfidentItemset>) -> ConfidentItemsetStore {
        ConfidentItemsetStore::new(classes.iter().map(|c| String::from(*c)).collect(), None, itemsets).unwrap()
    }

    fn metrics(fidelity: f64, shape: [usize; 4], coverage: usize) -> Metrics {
        Metrics {
            fidelity,
            size: shape[0],
            num_items: shape[1],
            max_length: shape[2],
            itemset_overlap: shape[3],
            coverage,
        }
    }

    #[test]
    fn measures_of_disjoint_singletons() {
        let sets = [set(&["A"]), set(&["B"])];
        let m = interpretability_measures(&sets);
        assert_eq!((m.size, m.num_items, m.max_length, m.itemset_overlap), (2, 2, 1, 0));
    }

    #[test]
    fn measures_count_overlapping_pairs_once() {
        let sets = [set(&["A", "B"]), set(&["B", "C"]), set(&["D"])];
        let m = interpretability_measures(&sets);
        assert_eq!((m.size, m.num_items, m.max_length, m.itemset_overlap), (3, 5, 2, 1));
    }

    #[test]
    fn measures_of_nothing_are_zero() {
        assert_eq!(interpretability_measures(&[]), Interpretability::default());
    }

    /// Five P instances; `{a}` covers 1 and 2, `{b}` covers 2 and 3.
    fn coverage_fixture() -> LabeledDataset {
        dataset(
            &[
                (&["x"], "P"),
                (&["a", "y"], "P"),
                (&["a", "b"], "P"),
                (&["b"], "P"),
                (&["z"], "P"),
                (&["a", "b"], "N"),
            ],
            &["P", "N"],
        )
    }

    #[test]
    fn coverage_counts_distinct_class_instances() {
        let ds = coverage_fixture();
        assert_eq!(class_coverage(&[set(&["a"]), set(&["b"])], &ds, 0), 3);
        assert_eq!(class_coverage(&[], &ds, 0), 0);
        assert_eq!(class_coverage(&[set(&["a"]), set(&["x"]), set(&["b"]), set(&["z"])], &ds, 0), 5);
    }

    #[test]
    fn empty_selection_rewards() {
        let r = rewards(&metrics(0.0, [0; 4], 0), 7, &ObjectiveConfig::default()).unwrap();
        assert_eq!(r.0, [0.0, 1.0, 1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn rewards_at_the_bounds() {
        let config = ObjectiveConfig { theta: [2, 4, 2], ..ObjectiveConfig::default() };
        let r = rewards(&metrics(1.0, [2, 4, 2, 0], 3), 3, &config).unwrap();
        assert_eq!(r.0, [1.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn rewards_from_hand_arithmetic() {
        let r = rewards(&metrics(0.75, [3, 5, 2, 1], 4), 8, &ObjectiveConfig::default()).unwrap();
        // theta = (10, 30, 3), 45 pairs
        let expected = [0.75, 7.0 / 10.0, 25.0 / 30.0, 1.0 / 3.0, 44.0 / 45.0, 0.5];
        for (got, want) in r.0.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
        let mean = expected.iter().sum::<f64>() / 6.0;
        assert!((r.objective(&[1.0 / 6.0; 6]) - mean).abs() < 1e-12);
        assert_eq!(r.objective(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]), 0.75);
        assert_eq!(r.objective(&[0.0; 6]), 0.0);
    }

    #[test]
    fn single_size_bound_has_full_overlap_reward() {
        let config = ObjectiveConfig { theta: [1, 3, 3], ..ObjectiveConfig::default() };
        let r = rewards(&metrics(1.0, [1, 2, 2, 0], 1), 1, &config).unwrap();
        assert_eq!(r.0[4], 1.0);
    }

    #[test]
    fn infeasible_metrics_have_no_rewards() {
        let config = ObjectiveConfig { theta: [2, 30, 3], ..ObjectiveConfig::default() };
        assert!(rewards(&metrics(1.0, [3, 3, 1, 0], 3), 3, &config).is_err());
        let config = ObjectiveConfig { theta: [10, 30, 1], ..ObjectiveConfig::default() };
        assert!(rewards(&metrics(1.0, [1, 2, 2, 0], 3), 3, &config).is_err());
    }

    /// Eight instances, four per class. `{a}` wins the three P instances
    /// holding `a` (including one where the rival `{c}` also matches) and
    /// nothing matches P's fourth instance.
    fn fidelity_fixture() -> (LabeledDataset, ConfidentItemsetStore) {
        let ds = dataset(
            &[
                (&["a"], "P"),
                (&["a"], "P"),
                (&["a", "c"], "P"),
                (&["c"], "P"),
                (&["c"], "N"),
                (&["c"], "N"),
                (&["d"], "N"),
                (&["d"], "N"),
            ],
            &["P", "N"],
        );
        let st = store(&["P", "N"], vec![ci(0, &["a"], 1.0), ci(1, &["c"], 0.6), ci(1, &["d"], 1.0)]);
        (ds, st)
    }

    #[test]
    fn class_fidelity_three_of_four() {
        let (ds, st) = fidelity_fixture();
        assert_eq!(class_fidelity(&st, 0, &[0], &ds).unwrap(), 0.75);
        assert_eq!(class_fidelity(&st, 0, &[], &ds).unwrap(), 0.0);
        assert_eq!(class_fidelity(&st, 1, &[0, 1], &ds).unwrap(), 1.0);
        assert!(matches!(class_fidelity(&st, 0, &[5], &ds), Err(Error::InvalidSelection(_))));
    }

    #[test]
    fn class_fidelity_needs_class_instances() {
        let (ds, _) = fidelity_fixture();
        let st = store(&["P", "N"], vec![ci(0, &["a"], 1.0)]);
        let ds_p = ds.select(&[0, 1, 2, 3]);
        assert!(matches!(class_fidelity(&st, 1, &[], &ds_p), Err(Error::UndefinedFidelity(_))));
    }

    #[test]
    fn single_candidate_is_selected() {
        let (ds, st) = fidelity_fixture();
        let e = optimize_class_explanation(&st, 0, &ds, &ObjectiveConfig::default()).unwrap();
        assert_eq!(e.selection, [0]);
        assert_eq!(e.metrics.fidelity, 0.75);
        assert_eq!(e.metrics.coverage, 3);
    }

    #[test]
    fn too_long_candidates_are_reported() {
        let ds = dataset(&[(&["a", "b"], "P"), (&["c"], "N")], &["P", "N"]);
        let st = store(&["P", "N"], vec![ci(0, &["a", "b"], 1.0), ci(1, &["c"], 1.0)]);
        let config = ObjectiveConfig { theta: [10, 30, 1], ..ObjectiveConfig::default() };
        let err = optimize_class_explanation(&st, 0, &ds, &config).unwrap_err();
        assert_eq!(err, Error::NoFeasibleSingleton { class: "P".into(), min_len: 2, theta: [10, 30, 1] });
    }

    #[test]
    fn explanation_metrics_match_direct_computation() {
        let ds = coverage_fixture();
        let st = store(
            &["P", "N"],
            vec![ci(0, &["a"], 0.7), ci(0, &["b"], 0.7), ci(0, &["x"], 1.0), ci(0, &["a", "b"], 0.5), ci(1, &["y"], 0.9)],
        );
        let e = optimize_class_explanation(&st, 0, &ds, &ObjectiveConfig::default()).unwrap();
        let chosen: Vec<&Itemset> = e.selection.iter().map(|&i| &st.class_itemsets(0)[i].itemset).collect();
        let shape = interpretability_measures(chosen.iter().copied());
        assert_eq!(e.metrics.size, shape.size);
        assert_eq!(e.metrics.num_items, shape.num_items);
        assert_eq!(e.metrics.itemset_overlap, shape.itemset_overlap);
        assert_eq!(e.metrics.coverage, class_coverage(chosen.iter().copied(), &ds, 0));
        assert_eq!(e.metrics.fidelity, class_fidelity(&st, 0, &e.selection, &ds).unwrap());
        assert!(is_feasible(&e.metrics, &ObjectiveConfig::default().theta));
    }

    #[test]
    fn class_lists_must_agree() {
        let (ds, _) = fidelity_fixture();
        let st = store(&["N", "P"], vec![ci(0, &["c"], 1.0)]);
        assert!(matches!(class_fidelity(&st, 0, &[0], &ds), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn config_validation() {
        assert!(ObjectiveConfig::default().validate().is_ok());
        let bad = ObjectiveConfig { weights: [-0.1, 0.0, 0.0, 0.0, 0.0, 1.1], ..ObjectiveConfig::default() };
        assert!(bad.validate().is_err());
        assert!(ObjectiveConfig { theta: [0, 1, 1], ..ObjectiveConfig::default() }.validate().is_err());
        assert!(ObjectiveConfig { delta: 0.0, ..ObjectiveConfig::default() }.validate().is_err());
        assert!(ObjectiveConfig::default().validate_for(2).is_err());
        assert!(ObjectiveConfig::default().validate_for(3).is_ok());
    }

    #[test]
    fn weight_grid_is_normalized_and_distinct() {
        let grid = weight_grid(&DEFAULT_WEIGHT_LEVELS);
        assert_eq!(grid[0], [1.0 / 6.0; 6]);
        assert!(grid.contains(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        for (i, w) in grid.iter().enumerate() {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(!grid[i + 1..].contains(w));
        }
        // 0.25 and 1.0 alone normalize to the same vector
        assert!(grid.len() < 5usize.pow(6));
        assert_eq!(weight_grid(&[0.0, 1.0]).len(), 63);
    }

    /// Two classes where each instance holds one decisive token and one
    /// shared noise token.
    fn separable() -> (LabeledDataset, ConfidentItemsetStore) {
        let mut rows: Vec<(&[&str], &str)> = Vec::new();
        for _ in 0..6 {
            rows.push((&["p", "n1"], "P"));
            rows.push((&["q", "n2"], "N"));
        }
        let ds = dataset(&rows, &["P", "N"]);
        let st = store(&["P", "N"], vec![ci(0, &["p"], 1.0), ci(1, &["q"], 1.0)]);
        (ds, st)
    }

    #[test]
    fn cv_with_one_vector_returns_it() {
        let (ds, st) = separable();
        let w = [1.0 / 6.0; 6];
        let cv = cross_validate_weights(&st, &ds, &[w], &ObjectiveConfig::default(), 3, 7).unwrap();
        assert_eq!(cv.config.weights, w);
        assert_eq!(cv.best, 0);
    }

    #[test]
    fn cv_prefers_the_vector_with_better_held_out_fidelity() {
        let (ds, st) = separable();
        // size-only weights empty the explanation, fidelity-only keep it
        let size_only = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let fidelity_only = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let cv = cross_validate_weights(&st, &ds, &[size_only, fidelity_only], &ObjectiveConfig::default(), 3, 7)
            .unwrap();
        assert_eq!(cv.scores, [0.0, 1.0]);
        assert_eq!(cv.config.weights, fidelity_only);
    }

    #[test]
    fn cv_ties_go_to_the_first_vector() {
        let (ds, st) = separable();
        let a = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let b = [0.5, 0.0, 0.0, 0.0, 0.0, 0.5];
        let cv = cross_validate_weights(&st, &ds, &[a, b], &ObjectiveConfig::default(), 2, 1).unwrap();
        assert_eq!(cv.scores[0], cv.scores[1]);
        assert_eq!(cv.best, 0);
    }

    #[test]
    fn cv_skips_degenerate_folds_and_is_seeded() {
        let ds = dataset(&[(&["p"], "P"), (&["p"], "P"), (&["p"], "P"), (&["q"], "N")], &["P", "N"]);
        let st = store(&["P", "N"], vec![ci(0, &["p"], 1.0), ci(1, &["q"], 1.0)]);
        let cv = cross_validate_weights(&st, &ds, &[[1.0 / 6.0; 6]], &ObjectiveConfig::default(), 2, 3).unwrap();
        assert_eq!(cv.skipped_folds, 2);
        let (ds, st) = separable();
        let grid = weight_grid(&[0.0, 1.0]);
        let a = cross_validate_weights(&st, &ds, &grid, &ObjectiveConfig::default(), 3, 11).unwrap();
        let b = cross_validate_weights(&st, &ds, &grid, &ObjectiveConfig::default(), 3, 11).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            cross_validate_weights(&st, &ds, &[], &ObjectiveConfig::default(), 3, 11),
            Err(Error::EmptyGrid)
        ));
        assert!(matches!(
            cross_validate_weights(&st, &ds, &grid, &ObjectiveConfig::default(), 1, 11),
            Err(Error::InvalidFolds { .. })
        ));
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rewards_stay_in_unit_range(
            shape in prop::collection::vec(prop::collection::btree_set(0usize..6, 1..4), 0..8),
            theta1 in 1usize..10,
            theta2 in 1usize..20,
            theta3 in 1usize..4,
            fid in 0u32..=100,
            total in 1usize..20,
            cov in 0usize..20,
        ) {
            let names = ["a", "b", "c", "d", "e", "f"];
            let sets: Vec<Itemset> = shape
                .iter()
                .map(|s| Itemset::new(s.iter().map(|&i| tok(names[i]))).unwrap())
                .collect();
            let shape = interpretability_measures(&sets);
            let m = Metrics {
                fidelity: fid as f64 / 100.0,
                size: shape.size,
                num_items: shape.num_items,
                max_length: shape.max_length,
                itemset_overlap: shape.itemset_overlap,
                coverage: cov.min(total),
            };
            let config = ObjectiveConfig { theta: [theta1, theta2, theta3], ..ObjectiveConfig::default() };
            match rewards(&m, total, &config) {
                Ok(r) => {
                    prop_assert!(is_feasible(&m, &config.theta));
                    for f in r.0 {
                        prop_assert!((0.0..=1.0).contains(&f));
                    }
                }
                Err(_) => prop_assert!(!is_feasible(&m, &config.theta)),
            }
        }
    }
}
