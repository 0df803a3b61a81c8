//! Random instances and brute-force oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashSet;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use spe_core::ltl::Ltl;
use spe_core::zerosum::{Side, ZeroSumArena};
use spe_core::{Game, GameBuilder, LassoPlay, ReqValue, Requirement, VertexId};

pub const PLAYER_NAMES: [&str; 4] = ["P", "Q", "R", "S"];

/// Random game where every vertex has at least one successor.
pub fn random_game(rng: &mut StdRng, n: usize, players: usize, colors: u32) -> Game {
    let names = &PLAYER_NAMES[..players];
    let mut b = GameBuilder::new().players(names.iter().copied());
    for v in 0..n {
        let owner = names[rng.gen_range(0..players)];
        let cols: Vec<(String, u32)> = names.iter().map(|p| (p.to_string(), rng.gen_range(0..colors))).collect();
        b.add_vertex(&format!("v{v}"), owner, cols);
    }
    for v in 0..n {
        let mut targets: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.35)).collect();
        if targets.is_empty() {
            targets.push(rng.gen_range(0..n));
        }
        for w in targets {
            b.add_edge(&format!("v{v}"), &format!("v{w}"));
        }
    }
    b.initial("v0").build().expect("random game is well formed")
}

pub fn random_boolean_requirement(rng: &mut StdRng, n: usize, density: f64) -> Requirement {
    Requirement((0..n).map(|_| ReqValue::from_bool(rng.gen_bool(density))).collect())
}

/// A lasso built by a random walk: a free prefix, then a walk until some
/// vertex repeats.
pub fn random_lasso(rng: &mut StdRng, game: &Game, start: VertexId, free: usize) -> LassoPlay {
    let mut walk = vec![start];
    for _ in 0..free {
        let v = *walk.last().unwrap();
        walk.push(*game.successors(v).choose(rng).unwrap());
    }
    let anchor = walk.len() - 1;
    loop {
        let v = *walk.last().unwrap();
        let w = *game.successors(v).choose(rng).unwrap();
        if let Some(q) = (anchor..walk.len()).find(|&k| walk[k] == w) {
            let cycle = walk.split_off(q);
            return LassoPlay::new(walk, cycle);
        }
        walk.push(w);
    }
}

/// Every valid lasso from `start` with `|prefix| ≤ max_prefix` and
/// `1 ≤ |cycle| ≤ max_cycle`.
pub fn all_lassos(game: &Game, start: VertexId, max_prefix: usize, max_cycle: usize) -> Vec<LassoPlay> {
    let mut out = Vec::new();
    let mut paths = vec![vec![start]];
    for len in 1..=max_prefix + max_cycle {
        let mut next = Vec::new();
        for p in &paths {
            for cut in len.saturating_sub(max_cycle)..len.min(max_prefix + 1) {
                let (pre, cyc) = p.split_at(cut);
                if game.has_edge(*cyc.last().unwrap(), cyc[0]) {
                    out.push(LassoPlay::new(pre.to_vec(), cyc.to_vec()));
                }
            }
            if len < max_prefix + max_cycle {
                for &w in game.successors(*p.last().unwrap()) {
                    let mut q = p.clone();
                    q.push(w);
                    next.push(q);
                }
            }
        }
        paths = next;
    }
    out
}

/// Consistency computed from the definition: every visited vertex with
/// requirement 1 has an owner who wins the play.
pub fn consistent_by_definition(game: &Game, req: &Requirement, play: &LassoPlay) -> bool {
    let wins = |p| {
        let m = play.cycle.iter().map(|&v| game.color(p, v)).min().unwrap();
        m % 2 == 0
    };
    play.prefix.iter().chain(&play.cycle).all(|&v| match req.get(v) {
        ReqValue::Zero => true,
        ReqValue::One => wins(game.owner(v)),
        ReqValue::Inf => false,
    })
}

/// Satisfiability by bounded lasso enumeration. Complete for games with at
/// most `max` vertices when the bounds are `max` and `2 max`.
pub fn satisfiable_by_enumeration(game: &Game, req: &Requirement) -> bool {
    let n = game.num_vertices();
    game.vertices().all(|v| all_lassos(game, v, n, 2 * n).iter().any(|p| consistent_by_definition(game, req, p)))
}

/// Least priority of every dimension over a set of transitions.
fn mins(prio: &[&[u32]]) -> Vec<u32> {
    let dims = prio[0].len();
    (0..dims).map(|d| prio.iter().map(|p| p[d]).min().unwrap()).collect()
}

/// Whether the one-player graph `edges` (with priority vectors) has a cycle,
/// reachable from `start`, on which every dimension has an even least
/// priority. Streett emptiness by repeated removal of bad transitions.
fn has_good_cycle(n: usize, edges: &[(usize, usize, Vec<u32>)], start: usize) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(x) = stack.pop() {
        for (a, b, _) in edges {
            if *a == x && !seen[*b] {
                seen[*b] = true;
                stack.push(*b);
            }
        }
    }
    let live: Vec<(usize, usize, Vec<u32>)> = edges.iter().filter(|e| seen[e.0]).cloned().collect();
    good_edges_exist(n, live)
}

fn good_edges_exist(n: usize, edges: Vec<(usize, usize, Vec<u32>)>) -> bool {
    for comp in edge_components(n, &edges) {
        let prio: Vec<&[u32]> = comp.iter().map(|e| e.2.as_slice()).collect();
        let m = mins(&prio);
        match m.iter().position(|x| x % 2 == 1) {
            None => return true,
            Some(d) => {
                let rest: Vec<_> = comp.into_iter().filter(|e| e.2[d] != m[d]).collect();
                if good_edges_exist(n, rest) {
                    return true;
                }
            }
        }
    }
    false
}

/// Groups the edges lying inside strongly connected components.
fn edge_components(n: usize, edges: &[(usize, usize, Vec<u32>)]) -> Vec<Vec<(usize, usize, Vec<u32>)>> {
    let mut reach = vec![vec![false; n]; n];
    for (a, b, _) in edges {
        reach[*a][*b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let mut comp_of = vec![usize::MAX; n];
    let mut count = 0;
    for i in 0..n {
        if comp_of[i] == usize::MAX && reach[i][i] {
            for j in 0..n {
                if reach[i][j] && reach[j][i] {
                    comp_of[j] = count;
                }
            }
            count += 1;
        }
    }
    let mut out = vec![Vec::new(); count];
    for e in edges {
        if comp_of[e.0] != usize::MAX && comp_of[e.0] == comp_of[e.1] {
            out[comp_of[e.0]].push(e.clone());
        }
    }
    out
}

/// Winner of every state by enumerating the memoryless strategies of Odd,
/// who has memoryless optimal strategies for the complement of a conjunction
/// of parity conditions.
pub fn brute_force_winners(arena: &ZeroSumArena) -> Vec<Side> {
    let n = arena.num_states();
    let choices: Vec<Vec<(usize, Vec<u32>)>> =
        (0..n).map(|s| arena.transitions(s).map(|(t, p)| (t, p.to_vec())).collect()).collect();
    let odd: Vec<usize> = (0..n).filter(|&s| arena.owner(s) == Side::Odd).collect();
    let mut winner = vec![Side::Even; n];
    let mut pick = vec![0usize; odd.len()];
    loop {
        let mut edges = Vec::new();
        for s in 0..n {
            match odd.iter().position(|&o| o == s) {
                Some(k) => {
                    let (t, p) = &choices[s][pick[k]];
                    edges.push((s, *t, p.clone()));
                }
                None => edges.extend(choices[s].iter().map(|(t, p)| (s, *t, p.clone()))),
            }
        }
        for s in 0..n {
            if winner[s] == Side::Even && !has_good_cycle(n, &edges, s) {
                winner[s] = Side::Odd;
            }
        }
        let mut k = 0;
        loop {
            if k == odd.len() {
                return winner;
            }
            pick[k] += 1;
            if pick[k] < choices[odd[k]].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

/// Random arena in which every state has a successor.
pub fn random_arena(rng: &mut StdRng, n: usize, dims: usize, prios: u32) -> ZeroSumArena {
    let mut a = ZeroSumArena::new(dims);
    for k in 0..n {
        let side = if rng.gen_bool(0.5) { Side::Even } else { Side::Odd };
        a.add_state(side, format!("s{k}"));
    }
    for s in 0..n {
        let mut added = HashSet::new();
        let want = rng.gen_range(1..=3).min(n);
        while added.len() < want {
            let t = rng.gen_range(0..n);
            if added.insert(t) {
                let p = (0..dims).map(|_| rng.gen_range(0..prios)).collect();
                a.add_transition(s, t, p).unwrap();
            }
        }
    }
    a
}

/// Successor function on the stored positions of a lasso.
fn positions(play: &LassoPlay) -> (usize, impl Fn(usize) -> usize + '_) {
    let len = play.stored_len();
    let back = play.prefix.len();
    (len, move |k: usize| if k + 1 == len { back } else { k + 1 })
}

/// Direct evaluation on the positions of the lasso.
pub fn oracle_eval(f: &Ltl, g: &Game, play: &LassoPlay) -> Vec<bool> {
    let (len, next) = positions(play);
    let at = |k: usize| play.at(k);
    let lfp_until = |a: &[bool], b: &[bool]| {
        let mut v = vec![false; len];
        for _ in 0..=len {
            v = (0..len).map(|k| b[k] || (a[k] && v[next(k)])).collect();
        }
        v
    };
    match f {
        Ltl::True => vec![true; len],
        Ltl::False => vec![false; len],
        Ltl::Atom(s) => (0..len).map(|k| g.vertex_name(at(k)) == s).collect(),
        Ltl::Not(a) => oracle_eval(a, g, play).into_iter().map(|x| !x).collect(),
        Ltl::And(a, b) => zip(oracle_eval(a, g, play), oracle_eval(b, g, play), |x, y| x && y),
        Ltl::Or(a, b) => zip(oracle_eval(a, g, play), oracle_eval(b, g, play), |x, y| x || y),
        Ltl::Implies(a, b) => zip(oracle_eval(a, g, play), oracle_eval(b, g, play), |x, y| !x || y),
        Ltl::Next(a) => {
            let v = oracle_eval(a, g, play);
            (0..len).map(|k| v[next(k)]).collect()
        }
        Ltl::Until(a, b) => lfp_until(&oracle_eval(a, g, play), &oracle_eval(b, g, play)),
        Ltl::Finally(a) => lfp_until(&vec![true; len], &oracle_eval(a, g, play)),
        Ltl::Globally(a) => {
            let neg: Vec<bool> = oracle_eval(a, g, play).into_iter().map(|x| !x).collect();
            lfp_until(&vec![true; len], &neg).into_iter().map(|x| !x).collect()
        }
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// Random formula over vertex names with at most `budget` nodes.
pub fn random_formula(rng: &mut StdRng, g: &Game, budget: usize) -> Ltl {
    let atom = |rng: &mut StdRng| match rng.gen_range(0..8) {
        0 => Ltl::True,
        1 => Ltl::False,
        _ => Ltl::atom(g.vertex_name(rng.gen_range(0..g.num_vertices()))),
    };
    if budget <= 1 {
        return atom(rng);
    }
    match rng.gen_range(0..9) {
        0 => atom(rng),
        1 => random_formula(rng, g, budget - 1).not(),
        2 => random_formula(rng, g, budget - 1).next(),
        3 => random_formula(rng, g, budget - 1).finally(),
        4 => random_formula(rng, g, budget - 1).globally(),
        k if budget >= 3 => {
            let left = rng.gen_range(1..=budget - 2);
            let a = random_formula(rng, g, left);
            let b = random_formula(rng, g, budget - 1 - left);
            match k {
                5 => a.and(b),
                6 => a.or(b),
                7 => a.implies(b),
                _ => a.until(b),
            }
        }
        _ => random_formula(rng, g, budget - 1).not(),
    }
}
