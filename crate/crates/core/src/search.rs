//! Approximate local search for non-monotone submodular maximization under
//! `k` knapsack-style constraints.
//!
//! The search runs `k + 1` rounds over shrinking ground sets. Each round
//! starts from the best feasible singleton and applies delete moves (drop one
//! element) and update moves (add one element and drop up to `k`) while a
//! move raises the objective by a factor of at least `1 + delta / n^4`, where
//! `n` is the size of the round's ground set. The elements picked in a round
//! are removed from the ground set of the next one, and the best round wins.

use alloc::vec::Vec;

/// A set function over elements `0..ground_size()`. Sets are passed sorted
/// ascending without duplicates.
pub trait SetObjective {
    fn ground_size(&self) -> usize;

    fn value(&self, set: &[usize]) -> f64;

    fn feasible(&self, set: &[usize]) -> bool;

    /// Tie order for choosing among equally good seeds; lower wins.
    fn seed_rank(&self, element: usize) -> usize {
        element
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub delta: f64,
    /// Number of constraints; also the most elements an update move drops.
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Delete,
    Update,
}

/// One accepted move.
#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub kind: MoveKind,
    pub added: Option<usize>,
    pub removed: Vec<usize>,
    pub before: f64,
    pub after: f64,
    /// `1 + delta / n^4` for the round.
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub ground: Vec<usize>,
    pub seed: usize,
    pub moves: Vec<Move>,
    pub set: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub set: Vec<usize>,
    pub value: f64,
    pub best_round: usize,
    pub rounds: Vec<Round>,
}

pub fn improvement_factor(delta: f64, n: usize) -> f64 {
    let n = n as f64;
    1.0 + delta / (n * n * n * n)
}

fn improves(after: f64, before: f64, factor: f64) -> bool {
    after > before && after >= factor * before
}

/// `set` with `removed` taken out and `added` put in, kept sorted.
fn apply(set: &[usize], removed: &[usize], added: Option<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = set.iter().copied().filter(|e| !removed.contains(e)).collect();
    if let Some(b) = added {
        let pos = out.partition_point(|&e| e < b);
        out.insert(pos, b);
    }
    out
}

/// Advances `idx` to the next `idx.len()`-combination of `0..n` in
/// lexicographic order. Returns `false` after the last one.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let r = idx.len();
    let mut i = r;
    while i > 0 {
        i -= 1;
        if idx[i] < n - r + i {
            idx[i] += 1;
            for j in i + 1..r {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn find_move<O: SetObjective + ?Sized>(
    obj: &O,
    ground: &[usize],
    set: &[usize],
    value: f64,
    factor: f64,
    k: usize,
) -> Option<(Move, Vec<usize>)> {
    for &a in set {
        let next = apply(set, &[a], None);
        if obj.feasible(&next) {
            let after = obj.value(&next);
            if improves(after, value, factor) {
                let mv = Move { kind: MoveKind::Delete, added: None, removed: alloc::vec![a], before: value, after, factor };
                return Some((mv, next));
            }
        }
    }
    for &b in ground.iter().filter(|b| set.binary_search(b).is_err()) {
        for drop in 0..=k.min(set.len()) {
            let mut idx: Vec<usize> = (0..drop).collect();
            loop {
                let removed: Vec<usize> = idx.iter().map(|&i| set[i]).collect();
                let next = apply(set, &removed, Some(b));
                if obj.feasible(&next) {
                    let after = obj.value(&next);
                    if improves(after, value, factor) {
                        let mv = Move { kind: MoveKind::Update, added: Some(b), removed, before: value, after, factor };
                        return Some((mv, next));
                    }
                }
                if drop == 0 || !next_combination(&mut idx, set.len()) {
                    break;
                }
            }
        }
    }
    None
}

/// Runs the search. Returns `None` when no single element is feasible.
pub fn local_search<O: SetObjective + ?Sized>(obj: &O, config: SearchConfig) -> Option<SearchOutcome> {
    let mut ground: Vec<usize> = (0..obj.ground_size()).collect();
    let mut rounds: Vec<Round> = Vec::new();
    for _ in 0..=config.k {
        let mut seed: Option<(usize, f64)> = None;
        for &e in &ground {
            if !obj.feasible(&[e]) {
                continue;
            }
            let v = obj.value(&[e]);
            let better = match seed {
                None => true,
                Some((s, sv)) => v > sv || (v == sv && obj.seed_rank(e) < obj.seed_rank(s)),
            };
            if better {
                seed = Some((e, v));
            }
        }
        let Some((seed, seed_value)) = seed else { break };

        let factor = improvement_factor(config.delta, ground.len());
        let mut set = alloc::vec![seed];
        let mut value = seed_value;
        let mut moves = Vec::new();
        while let Some((mv, next)) = find_move(obj, &ground, &set, value, factor, config.k) {
            value = mv.after;
            set = next;
            moves.push(mv);
        }
        rounds.push(Round { ground: ground.clone(), seed, moves, set: set.clone(), value });
        ground.retain(|e| set.binary_search(e).is_err());
    }
    let best_round = (0..rounds.len()).fold(None, |best: Option<usize>, i| match best {
        Some(b) if rounds[b].value >= rounds[i].value => Some(b),
        _ => Some(i),
    })?;
    let best = &rounds[best_round];
    Some(SearchOutcome { set: best.set.clone(), value: best.value, best_round, rounds })
}
