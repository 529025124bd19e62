//! Instance-wise explanations.
//!
//! Every stored itemset contained in the instance is evidence for its class.
//! A class scores the sum of its matched confidences and the best-scoring
//! class becomes the approximated label. Ties go to the larger summed class
//! support, then to the lexicographically smaller label. An instance with no
//! matches in any class gets no label.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::item::Item;
use crate::miner::ConfidentItemsetStore;
use crate::{Error, Result};

/// Matches of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassEvidence {
    pub class: usize,
    /// Sum of matched confidences.
    pub score: f64,
    /// Sum of matched class supports, used to break score ties.
    pub support: f64,
    /// Indices into the class's itemsets in the store, ascending.
    pub matched: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceExplanation {
    /// Classes with at least one match, best first, capped at the requested
    /// limit.
    pub classes: Vec<ClassEvidence>,
    /// `None` when nothing matched.
    pub approximated: Option<usize>,
}

/// Ranks `a` against `b`; `Less` means `a` ranks first.
pub(crate) fn rank_cmp(a: (f64, f64, &str), b: (f64, f64, &str)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| b.1.total_cmp(&a.1)).then_with(|| a.2.cmp(b.2))
}

/// Rejects instances encoded under a different schema than the store.
pub fn check_schema(instance: &[Item], store: &ConfidentItemsetStore) -> Result<()> {
    match store.features() {
        Some(features) => {
            for item in instance {
                match item.feature() {
                    Some(f) if features.binary_search_by(|x| x.as_str().cmp(f)).is_ok() => {}
                    Some(f) => return Err(Error::SchemaMismatch(format!("unknown feature `{f}` in {item}"))),
                    None => return Err(Error::SchemaMismatch(format!("token {item} in a tabular store"))),
                }
            }
        }
        None => {
            if let Some(item) = instance.iter().find(|i| !i.is_token()) {
                return Err(Error::SchemaMismatch(format!("tabular item {item} in a text store")));
            }
        }
    }
    Ok(())
}

fn canonical(instance: &[Item]) -> Vec<Item> {
    let set: BTreeSet<&Item> = instance.iter().collect();
    set.into_iter().cloned().collect()
}

/// For each class, the indices of stored itemsets contained in `instance`.
pub fn match_itemsets(instance: &[Item], store: &ConfidentItemsetStore) -> Result<Vec<Vec<usize>>> {
    check_schema(instance, store)?;
    let sorted = canonical(instance);
    Ok((0..store.classes().len())
        .map(|q| {
            store
                .class_itemsets(q)
                .iter()
                .enumerate()
                .filter(|(_, ci)| ci.itemset.is_subset_of(&sorted))
                .map(|(i, _)| i)
                .collect()
        })
        .collect())
}

/// Sum of the confidences of `matched` itemsets of `class`, added in store
/// order.
pub fn confidence_score(store: &ConfidentItemsetStore, class: usize, matched: &[usize]) -> f64 {
    let itemsets = store.class_itemsets(class);
    matched.iter().fold(0.0, |acc, &i| acc + itemsets[i].confidence)
}

fn support_sum(store: &ConfidentItemsetStore, class: usize, matched: &[usize]) -> f64 {
    let itemsets = store.class_itemsets(class);
    matched.iter().fold(0.0, |acc, &i| acc + itemsets[i].class_support)
}

/// Explains one instance. `limit` caps the number of reported classes.
pub fn explain_instance(
    instance: &[Item],
    store: &ConfidentItemsetStore,
    limit: usize,
) -> Result<InstanceExplanation> {
    let matches = match_itemsets(instance, store)?;
    let mut classes: Vec<ClassEvidence> = matches
        .into_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(q, matched)| ClassEvidence {
            class: q,
            score: confidence_score(store, q, &matched),
            support: support_sum(store, q, &matched),
            matched,
        })
        .collect();
    let labels = store.classes();
    classes.sort_by(|a, b| {
        rank_cmp((a.score, a.support, &labels[a.class]), (b.score, b.support, &labels[b.class]))
    });
    let approximated = classes.first().map(|c| c.class);
    classes.truncate(limit.max(1));
    Ok(InstanceExplanation { classes, approximated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::item::Itemset;
    use crate::miner::ConfidentItemset;
    use alloc::string::{String, ToString};
    use alloc::vec;

    fn tok(s: &str) -> Item {
        Item::token(s).unwrap()
    }

    fn ci(class: usize, tokens: &[&str], confidence: f64, class_support: f64) -> ConfidentItemset {
        ConfidentItemset {
            itemset: Itemset::new(tokens.iter().map(|t| tok(t))).unwrap(),
            class,
            confidence,
            class_support,
            overall_support: 0.1,
        }
    }

    fn store(classes: &[&str], itemsets: Vec<ConfidentItemset>) -> ConfidentItemsetStore {
        ConfidentItemsetStore::new(classes.iter().map(|c| c.to_string()).collect(), None, itemsets).unwrap()
    }

    fn sentence(s: &str) -> Vec<Item> {
        crate::text::tokenize(s, Default::default())
    }

    #[test]
    fn no_shared_items_means_abstention() {
        let st = store(&["A", "B"], vec![ci(0, &["x"], 0.9, 0.1), ci(1, &["y"], 0.8, 0.1)]);
        let e = explain_instance(&sentence("nothing here"), &st, 3).unwrap();
        assert_eq!(e.approximated, None);
        assert!(e.classes.is_empty());
        assert!(match_itemsets(&sentence("nothing here"), &st).unwrap().iter().all(Vec::is_empty));
    }

    #[test]
    fn supersets_of_the_instance_do_not_match() {
        let st = store(&["A"], vec![ci(0, &["a", "b", "c"], 0.9, 0.1)]);
        let m = match_itemsets(&sentence("a b"), &st).unwrap();
        assert!(m[0].is_empty());
    }

    #[test]
    fn single_match_scores_its_confidence() {
        let st = store(&["A"], vec![ci(0, &["a"], 0.37, 0.1)]);
        let e = explain_instance(&sentence("a"), &st, 3).unwrap();
        assert_eq!(e.classes[0].score, 0.37);
        assert_eq!(e.approximated, Some(0));
    }

    #[test]
    fn score_ties_go_to_larger_support() {
        let st = store(
            &["A", "B"],
            vec![ci(0, &["a"], 0.5, 0.1), ci(0, &["b"], 0.25, 0.1), ci(1, &["c"], 0.75, 0.3)],
        );
        let e = explain_instance(&sentence("a b c"), &st, 3).unwrap();
        assert_eq!(e.classes[0].score, e.classes[1].score);
        assert_eq!(e.approximated, Some(1));
    }

    #[test]
    fn full_ties_go_to_smaller_label() {
        let st = store(&["Z", "M"], vec![ci(0, &["a"], 0.5, 0.2), ci(1, &["b"], 0.5, 0.2)]);
        let e = explain_instance(&sentence("a b"), &st, 3).unwrap();
        assert_eq!(e.approximated, Some(1));
    }

    #[test]
    fn limit_caps_reported_classes() {
        let st = store(&["A", "B", "C"], vec![ci(0, &["a"], 0.9, 0.1), ci(1, &["a"], 0.5, 0.1), ci(2, &["a"], 0.1, 0.1)]);
        let e = explain_instance(&sentence("a"), &st, 2).unwrap();
        let order: Vec<usize> = e.classes.iter().map(|c| c.class).collect();
        assert_eq!(order, [0, 1]);
    }

    #[test]
    fn schema_mismatches_are_errors() {
        let text = store(&["A"], vec![ci(0, &["a"], 0.9, 0.1)]);
        let tabular_item = Item::categorical("sex", "Male").unwrap();
        assert!(matches!(match_itemsets(&[tabular_item.clone()], &text), Err(Error::SchemaMismatch(_))));
        let tab = ConfidentItemsetStore::new(
            vec!["A".to_string()],
            Some(vec![String::from("sex")]),
            vec![ConfidentItemset {
                itemset: Itemset::single(tabular_item.clone()),
                class: 0,
                confidence: 1.0,
                class_support: 1.0,
                overall_support: 1.0,
            }],
        )
        .unwrap();
        assert!(match_itemsets(&[tabular_item], &tab).is_ok());
        let other = Item::categorical("race", "White").unwrap();
        assert!(matches!(match_itemsets(&[other], &tab), Err(Error::SchemaMismatch(_))));
        assert!(matches!(match_itemsets(&[tok("a")], &tab), Err(Error::SchemaMismatch(_))));
    }

    use proptest::prelude::*;

    fn arb_case() -> impl Strategy<Value = (Vec<ConfidentItemset>, Vec<Item>)> {
        let names = ["a", "b", "c", "d", "e"];
        let itemset = (0usize..3, prop::collection::btree_set(0usize..5, 1..3), 1u32..100, 1u32..100);
        (prop::collection::vec(itemset, 0..12), prop::collection::btree_set(0usize..5, 0..5)).prop_map(
            move |(sets, inst)| {
                let mut seen = BTreeSet::new();
                let sets = sets
                    .into_iter()
                    .filter(|(q, s, _, _)| seen.insert((*q, s.clone())))
                    .map(|(q, s, c, sup)| {
                        let toks: Vec<&str> = s.iter().map(|&i| names[i]).collect();
                        ci(q, &toks, c as f64 / 100.0, sup as f64 / 100.0)
                    })
                    .collect();
                (sets, inst.into_iter().map(|i| tok(names[i])).collect())
            },
        )
    }

    proptest! {
        #[test]
        fn explanation_invariants((sets, inst) in arb_case()) {
            let st = store(&["A", "B", "C"], sets);
            let e = explain_instance(&inst, &st, 3).unwrap();
            let total: usize = match_itemsets(&inst, &st).unwrap().iter().map(Vec::len).sum();
            prop_assert_eq!(e.approximated.is_none(), total == 0);
            for c in &e.classes {
                prop_assert!(c.score >= 0.0);
                prop_assert!(c.score <= e.classes[0].score);
                for &i in &c.matched {
                    let stored = &st.class_itemsets(c.class)[i];
                    prop_assert!(stored.itemset.is_subset_of(&inst));
                }
                prop_assert_eq!(c.score.to_bits(), confidence_score(&st, c.class, &c.matched).to_bits());
            }
        }

        #[test]
        fn scaling_confidences_keeps_the_label((sets, inst) in arb_case(), factor in 0i32..4) {
            let base = explain_instance(&inst, &store(&["A", "B", "C"], sets.clone()), 3).unwrap();
            let scaled: Vec<ConfidentItemset> = sets
                .into_iter()
                .map(|mut c| { c.confidence *= 0.5 * (1u32 << factor) as f64; c })
                .collect();
            let again = explain_instance(&inst, &store(&["A", "B", "C"], scaled), 3).unwrap();
            prop_assert_eq!(base.approximated, again.approximated);
        }

        #[test]
        fn extra_positive_match_never_lowers_a_score((sets, inst) in arb_case(), conf in 1u32..100) {
            prop_assume!(!inst.is_empty());
            let before = explain_instance(&inst, &store(&["A", "B", "C"], sets.clone()), 3).unwrap();
            let mut more = sets.clone();
            let new_set = Itemset::new(inst.iter().cloned()).unwrap();
            prop_assume!(!more.iter().any(|c| c.class == 0 && c.itemset == new_set));
            more.push(ConfidentItemset {
                itemset: new_set,
                class: 0,
                confidence: conf as f64 / 100.0,
                class_support: 0.1,
                overall_support: 0.1,
            });
            let after = explain_instance(&inst, &store(&["A", "B", "C"], more), 3).unwrap();
            let score = |e: &InstanceExplanation| e.classes.iter().find(|c| c.class == 0).map_or(0.0, |c| c.score);
            prop_assert!(score(&after) >= score(&before));
        }
    }
}
