//! Packing and covering on finite closeness relations.
//!
//! A relation is given as one bitset per vertex listing the vertices it is
//! close to (reflexive). Separated sets are independent sets of the relation,
//! spanning sets are dominating sets.

use fixedbitset::FixedBitSet;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

pub type Adjacency = Vec<FixedBitSet>;

/// Lexicographic greedy independent set.
pub fn greedy_independent(adj: &Adjacency) -> Vec<usize> {
    let n = adj.len();
    let mut blocked = FixedBitSet::with_capacity(n);
    let mut out = Vec::new();
    for i in 0..n {
        if !blocked.contains(i) {
            out.push(i);
            blocked.union_with(&adj[i]);
        }
    }
    out
}

/// Greedy partition into cliques; its size bounds every independent set from above.
pub fn clique_partition(adj: &Adjacency) -> usize {
    let n = adj.len();
    let mut free = FixedBitSet::with_capacity(n);
    free.insert_range(..);
    let mut cliques = 0;
    for i in 0..n {
        if !free.contains(i) {
            continue;
        }
        cliques += 1;
        free.set(i, false);
        let mut common = adj[i].clone();
        common.intersect_with(&free);
        let cands: Vec<usize> = common.ones().collect();
        for j in cands {
            if common.contains(j) {
                free.set(j, false);
                common.intersect_with(&adj[j]);
                common.set(j, false);
            }
        }
    }
    cliques
}

/// Exact maximum independent set by branch and bound (intended for small graphs).
pub fn exact_independent(adj: &Adjacency, node_budget: u64) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut best = greedy_independent(adj);
    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    let mut cur = Vec::new();
    let mut nodes = 0u64;
    if mis_rec(adj, all, &mut cur, &mut best, &mut nodes, node_budget) {
        Some(best)
    } else {
        None
    }
}

fn clique_bound(adj: &Adjacency, p: &FixedBitSet) -> usize {
    let mut free = p.clone();
    let mut cliques = 0;
    for i in p.ones() {
        if !free.contains(i) {
            continue;
        }
        cliques += 1;
        free.set(i, false);
        let mut common = adj[i].clone();
        common.intersect_with(&free);
        let cands: Vec<usize> = common.ones().collect();
        for j in cands {
            if common.contains(j) {
                free.set(j, false);
                common.intersect_with(&adj[j]);
                common.set(j, false);
            }
        }
    }
    cliques
}

fn mis_rec(
    adj: &Adjacency,
    p: FixedBitSet,
    cur: &mut Vec<usize>,
    best: &mut Vec<usize>,
    nodes: &mut u64,
    budget: u64,
) -> bool {
    *nodes += 1;
    if *nodes > budget {
        return false;
    }
    let size = p.count_ones(..);
    if size == 0 {
        if cur.len() > best.len() {
            *best = cur.clone();
        }
        return true;
    }
    if cur.len() + size <= best.len() || cur.len() + clique_bound(adj, &p) <= best.len() {
        return true;
    }
    // branch on the vertex of largest degree inside p
    let v = p
        .ones()
        .max_by_key(|&v| (adj[v].intersection(&p).count(), Reverse(v)))
        .unwrap();
    let mut with = p.clone();
    with.difference_with(&adj[v]);
    cur.push(v);
    if !mis_rec(adj, with, cur, best, nodes, budget) {
        return false;
    }
    cur.pop();
    let mut without = p;
    without.set(v, false);
    mis_rec(adj, without, cur, best, nodes, budget)
}

/// Lazy greedy set cover. `sets[c]` is the set of targets covered by coverer `c`.
/// Ties go to the lowest coverer index.
pub fn greedy_cover(sets: &[FixedBitSet], n_targets: usize) -> Option<Vec<usize>> {
    let mut uncovered = FixedBitSet::with_capacity(n_targets);
    uncovered.insert_range(..);
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = sets
        .iter()
        .enumerate()
        .map(|(c, s)| (s.count_ones(..), Reverse(c)))
        .filter(|(g, _)| *g > 0)
        .collect();
    let mut chosen = Vec::new();
    let mut left = n_targets;
    while left > 0 {
        let (g, Reverse(c)) = heap.pop()?;
        let real = sets[c].intersection(&uncovered).count();
        if real == g {
            chosen.push(c);
            uncovered.difference_with(&sets[c]);
            left -= real;
        } else if real > 0 {
            heap.push((real, Reverse(c)));
        }
    }
    Some(chosen)
}

/// Lexicographic packing of targets no two of which share a coverer.
/// `coverers[t]` lists the coverers of target `t`; the size bounds every cover from below.
pub fn dual_packing(coverers: &[FixedBitSet], n_coverers: usize) -> Vec<usize> {
    let mut used = FixedBitSet::with_capacity(n_coverers);
    let mut out = Vec::new();
    for (t, cs) in coverers.iter().enumerate() {
        if cs.is_disjoint(&used) {
            out.push(t);
            used.union_with(cs);
        }
    }
    out
}

/// Exact minimum set cover by branch and bound on at most 64 targets.
pub fn exact_cover(sets: &[u64], n_targets: usize, node_budget: u64) -> Option<Vec<usize>> {
    assert!(n_targets <= 64);
    let full: u64 = if n_targets == 64 {
        u64::MAX
    } else {
        (1u64 << n_targets) - 1
    };
    let sets: Vec<u64> = sets.iter().map(|s| s & full).collect();
    if sets.iter().fold(0, |a, s| a | s) != full {
        return None;
    }
    let maxsize = sets.iter().map(|s| s.count_ones()).max().unwrap_or(1).max(1) as usize;
    // candidate coverers per target, larger sets first
    let mut by_target: Vec<Vec<usize>> = vec![Vec::new(); n_targets];
    for (c, s) in sets.iter().enumerate() {
        for (t, list) in by_target.iter_mut().enumerate() {
            if s >> t & 1 == 1 {
                list.push(c);
            }
        }
    }
    for list in by_target.iter_mut() {
        list.sort_by_key(|&c| (Reverse(sets[c].count_ones()), c));
    }
    let mut best: Option<Vec<usize>> = None;
    let mut cur = Vec::new();
    let mut nodes = 0u64;
    let ok = cover_rec(
        &sets,
        &by_target,
        0,
        full,
        maxsize,
        &mut cur,
        &mut best,
        &mut nodes,
        node_budget,
    );
    if ok {
        best
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn cover_rec(
    sets: &[u64],
    by_target: &[Vec<usize>],
    covered: u64,
    full: u64,
    maxsize: usize,
    cur: &mut Vec<usize>,
    best: &mut Option<Vec<usize>>,
    nodes: &mut u64,
    budget: u64,
) -> bool {
    *nodes += 1;
    if *nodes > budget {
        return false;
    }
    if covered == full {
        if best.as_ref().map_or(true, |b| cur.len() < b.len()) {
            *best = Some(cur.clone());
        }
        return true;
    }
    let left = (full & !covered).count_ones() as usize;
    let lb = left.div_ceil(maxsize);
    if let Some(b) = best {
        if cur.len() + lb >= b.len() {
            return true;
        }
    }
    let t = (full & !covered).trailing_zeros() as usize;
    for &c in &by_target[t] {
        cur.push(c);
        let ok = cover_rec(
            sets,
            by_target,
            covered | sets[c],
            full,
            maxsize,
            cur,
            best,
            nodes,
            budget,
        );
        cur.pop();
        if !ok {
            return false;
        }
    }
    true
}

pub fn bitset_from(n: usize, members: impl IntoIterator<Item = usize>) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(n);
    for m in members {
        b.insert(m);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Adjacency {
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(1);
                let hi = (i + 1).min(n - 1);
                bitset_from(n, lo..=hi)
            })
            .collect()
    }

    #[test]
    fn path_graph_counts() {
        let adj = path(7);
        assert_eq!(greedy_independent(&adj), vec![0, 2, 4, 6]);
        assert_eq!(clique_partition(&adj), 4);
        assert_eq!(exact_independent(&adj, 1 << 20).unwrap().len(), 4);
        let cover = greedy_cover(&adj, 7).unwrap();
        assert_eq!(cover.len(), 3);
        assert_eq!(dual_packing(&adj, 7).len(), 3);
        let masks: Vec<u64> = adj.iter().map(|b| b.ones().fold(0, |m, i| m | 1 << i)).collect();
        assert_eq!(exact_cover(&masks, 7, 1 << 20).unwrap().len(), 3);
    }

    #[test]
    fn cycle_needs_exact_search() {
        // 5-cycle: independence 2, clique partition 3
        let n = 5;
        let adj: Adjacency = (0..n)
            .map(|i| bitset_from(n, [i, (i + 1) % n, (i + n - 1) % n]))
            .collect();
        assert_eq!(clique_partition(&adj), 3);
        assert_eq!(exact_independent(&adj, 1 << 20).unwrap().len(), 2);
    }
}
