//! Brute-force reference implementations shared by the integration and
//! acceptance tests. Everything here works from raw instance scans and
//! subset enumeration, without the library's indexes.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cie_core::{ConfidentItemsetStore, Item, LabeledDataset};

/// Stored statistics per (class, rendered itemset).
pub type Mined = BTreeMap<(usize, String), (f64, f64, f64)>;

pub fn subsets_up_to(universe: &[Item], max_k: usize) -> Vec<Vec<Item>> {
    let n = universe.len();
    assert!(n < 20, "brute force over {n} items");
    (1u32..1 << n)
        .filter(|mask| (mask.count_ones() as usize) <= max_k)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| universe[i].clone()).collect())
        .collect()
}

fn contains(instance: &[Item], set: &[Item]) -> bool {
    set.iter().all(|i| instance.contains(i))
}

fn render(set: &[Item]) -> String {
    let mut v: Vec<&str> = set.iter().map(Item::as_str).collect();
    v.sort();
    v.join(", ")
}

/// `(Count(ci), Count(ci, C_q))` by scanning every instance.
pub fn raw_counts(ds: &LabeledDataset, set: &[Item], class: usize) -> (usize, usize) {
    let mut count = 0;
    let mut class_count = 0;
    for m in 0..ds.len() {
        if contains(&ds.instance_items(m), set) {
            count += 1;
            class_count += (ds.label(m) == class) as usize;
        }
    }
    (count, class_count)
}

/// Every itemset of size at most `max_k` that occurs in the class, is
/// confident, and whose every non-empty proper subset is confident too.
pub fn brute_force_confident(ds: &LabeledDataset, min_conf: f64, max_k: usize) -> Mined {
    let universe = ds.vocabulary().to_vec();
    let all = subsets_up_to(&universe, max_k);
    let mut out = Mined::new();
    for q in 0..ds.classes().len() {
        let confident = |set: &[Item]| {
            let (c, cq) = raw_counts(ds, set, q);
            cq > 0 && cq as f64 / c as f64 >= min_conf
        };
        let ok: BTreeSet<String> = all.iter().filter(|s| confident(s)).map(|s| render(s)).collect();
        for s in &all {
            if !ok.contains(&render(s)) {
                continue;
            }
            let closed = subsets_up_to(s, s.len() - 1).iter().all(|sub| ok.contains(&render(sub)));
            if closed {
                let (c, cq) = raw_counts(ds, s, q);
                let stats = (cq as f64 / c as f64, cq as f64 / ds.class_count(q) as f64, c as f64 / ds.len() as f64);
                out.insert((q, render(s)), stats);
            }
        }
    }
    out
}

/// Every itemset of size at most `max_k` with class support at least
/// `min_support` (and occurring in the class).
pub fn brute_force_frequent(ds: &LabeledDataset, min_support: f64, max_k: usize) -> BTreeSet<(usize, String)> {
    let all = subsets_up_to(ds.vocabulary(), max_k);
    let mut out = BTreeSet::new();
    for q in 0..ds.classes().len() {
        for s in &all {
            let (_, cq) = raw_counts(ds, s, q);
            if cq > 0 && cq as f64 / ds.class_count(q) as f64 >= min_support {
                out.insert((q, render(s)));
            }
        }
    }
    out
}

pub fn store_contents(store: &ConfidentItemsetStore) -> Mined {
    store
        .iter()
        .map(|c| ((c.class, c.itemset.to_string()), (c.confidence, c.class_support, c.overall_support)))
        .collect()
}

/// Best objective over every feasible subset of `0..n`, by enumeration.
pub fn exhaustive_optimum(n: usize, feasible: impl Fn(&[usize]) -> bool, value: impl Fn(&[usize]) -> f64) -> f64 {
    assert!(n <= 16);
    (0u32..1 << n)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect::<Vec<usize>>())
        .filter(|s| feasible(s))
        .map(|s| value(&s))
        .fold(0.0, f64::max)
}

/// Store with class `class` cut down to `selection` and every other class
/// kept whole.
pub fn restricted(store: &ConfidentItemsetStore, class: usize, selection: &[usize]) -> ConfidentItemsetStore {
    let picks: Vec<Vec<usize>> = (0..store.classes().len())
        .map(|q| if q == class { selection.to_vec() } else { (0..store.class_itemsets(q).len()).collect() })
        .collect();
    store.select(&picks).unwrap()
}

/// Class fidelity by running the instance explainer on every class
/// instance against the restricted store.
pub fn fidelity_by_explainer(store: &ConfidentItemsetStore, class: usize, selection: &[usize], ds: &LabeledDataset) -> f64 {
    let cut = restricted(store, class, selection);
    let members: Vec<usize> = (0..ds.len()).filter(|&m| ds.label(m) == class).collect();
    let hits = members
        .iter()
        .filter(|&&m| cie_core::instance::explain_instance(&ds.instance_items(m), &cut, 3).unwrap().approximated == Some(class))
        .count();
    hits as f64 / members.len() as f64
}
