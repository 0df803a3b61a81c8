//! Small graph routines over adjacency lists, shared by the game, product and
//! deviation-graph searches.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

pub(crate) fn full_set(n: usize) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    s.insert_range(..);
    s
}

pub(crate) fn set_of(n: usize, items: impl IntoIterator<Item = usize>) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    for i in items {
        s.insert(i);
    }
    s
}

/// Strongly connected components of the subgraph induced by `within`.
///
/// Iterative Tarjan; components come out in reverse topological order.
pub fn sccs(succ: &[Vec<usize>], within: &FixedBitSet) -> Vec<Vec<usize>> {
    let n = succ.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = FixedBitSet::with_capacity(n);
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0usize;
    // (vertex, position in its successor list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in within.ones() {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack.insert(root);

        while let Some(&(v, pos)) = call.last() {
            if pos < succ[v].len() {
                let w = succ[v][pos];
                call.last_mut().unwrap().1 += 1;
                if !within.contains(w) {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack.insert(w);
                    call.push((w, 0));
                } else if on_stack.contains(w) {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack.set(w, false);
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// A component carries an infinite path iff it has two vertices or a self-loop.
pub fn has_cycle(succ: &[Vec<usize>], comp: &[usize]) -> bool {
    comp.len() > 1 || comp.first().is_some_and(|&v| succ[v].contains(&v))
}

pub fn reachable(succ: &[Vec<usize>], starts: &[usize], within: &FixedBitSet) -> FixedBitSet {
    let mut seen = FixedBitSet::with_capacity(succ.len());
    let mut queue = VecDeque::new();
    for &s in starts {
        if within.contains(s) && !seen.put(s) {
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &succ[v] {
            if within.contains(w) && !seen.put(w) {
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Shortest path (as a vertex list, both ends included) from one of `starts`
/// to a vertex of `target`, every vertex lying in `within`.
pub fn shortest_path(
    succ: &[Vec<usize>],
    starts: &[usize],
    target: &FixedBitSet,
    within: &FixedBitSet,
) -> Option<Vec<usize>> {
    let n = succ.len();
    let mut parent = vec![usize::MAX; n];
    let mut seen = FixedBitSet::with_capacity(n);
    let mut queue = VecDeque::new();
    for &s in starts {
        if within.contains(s) && !seen.put(s) {
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if target.contains(v) {
            let mut path = vec![v];
            let mut cur = v;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &succ[v] {
            if within.contains(w) && !seen.put(w) {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Shortest path of length at least one edge from `from` to `to` inside `within`.
fn step_path(succ: &[Vec<usize>], from: usize, to: usize, within: &FixedBitSet) -> Option<Vec<usize>> {
    let target = set_of(succ.len(), [to]);
    let mut best: Option<Vec<usize>> = None;
    for &w in &succ[from] {
        if !within.contains(w) {
            continue;
        }
        if let Some(p) = shortest_path(succ, &[w], &target, within) {
            if best.as_ref().is_none_or(|b| p.len() < b.len()) {
                best = Some(p);
            }
        }
    }
    best.map(|p| {
        let mut full = vec![from];
        full.extend(p);
        full
    })
}

/// Closed walk through every vertex of the strongly connected set `set`,
/// starting at `start` and never leaving `set`.
///
/// The returned list starts with `start` and omits the closing return to it,
/// so it can be used directly as the cycle of a lasso. Its length is at most
/// `|set|^2`. Returns `None` if `set` is not strongly connected or has no cycle.
pub fn covering_cycle(succ: &[Vec<usize>], start: usize, set: &FixedBitSet) -> Option<Vec<usize>> {
    if !set.contains(start) {
        return None;
    }
    let mut walk = vec![start];
    let mut visited = set_of(succ.len(), [start]);
    let mut cur = start;
    loop {
        let mut remaining = set.clone();
        remaining.difference_with(&visited);
        if remaining.is_clear() {
            break;
        }
        let path = shortest_path(succ, &[cur], &remaining, set)?;
        for &v in &path[1..] {
            visited.insert(v);
            walk.push(v);
        }
        cur = *path.last().unwrap();
    }
    let back = step_path(succ, cur, start, set)?;
    walk.extend_from_slice(&back[1..back.len() - 1]);
    Some(walk)
}

/// Walk from `start` visiting `targets` in order, staying inside `within`.
/// Both ends included; consecutive duplicates are not produced.
pub fn walk_through(succ: &[Vec<usize>], start: usize, targets: &[usize], within: &FixedBitSet) -> Option<Vec<usize>> {
    let mut walk = vec![start];
    let mut cur = start;
    for &t in targets {
        if t == cur {
            continue;
        }
        let path = shortest_path(succ, &[cur], &set_of(succ.len(), [t]), within)?;
        walk.extend_from_slice(&path[1..]);
        cur = t;
    }
    Some(walk)
}
