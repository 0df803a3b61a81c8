//! Two-player zero-sum games with min-parity objectives on transitions.
//!
//! `Even` wins a play iff, in every priority dimension, the least priority
//! among the transitions taken infinitely often is even. With one dimension
//! this is an ordinary parity game.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::rc::Rc;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::graph::full_set;

pub type StateId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Even,
    Odd,
}

impl Side {
    pub fn opponent(self) -> Side {
        match self {
            Side::Even => Side::Odd,
            Side::Odd => Side::Even,
        }
    }

    fn of_priority(p: u32) -> Side {
        if p.is_multiple_of(2) {
            Side::Even
        } else {
            Side::Odd
        }
    }
}

#[derive(Clone, Debug)]
pub struct ZeroSumArena {
    labels: Vec<String>,
    owner: Vec<Side>,
    dims: usize,
    trans: Vec<(StateId, StateId)>,
    /// `prio[t][d]`
    prio: Vec<Vec<u32>>,
    out: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub winner: Vec<Side>,
    /// Memoryless strategy of Even on the Even states it wins. `None` when
    /// the arena has several relevant dimensions, where Even may need memory.
    pub strategy_even: Option<Vec<Option<StateId>>>,
    pub strategy_odd: Vec<Option<StateId>>,
}

impl SolveResult {
    pub fn region(&self, side: Side) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.winner.len());
        for (v, &w) in self.winner.iter().enumerate() {
            s.set(v, w == side);
        }
        s
    }
}

impl ZeroSumArena {
    pub fn new(dims: usize) -> Self {
        ZeroSumArena {
            labels: Vec::new(),
            owner: Vec::new(),
            dims,
            trans: Vec::new(),
            prio: Vec::new(),
            out: Vec::new(),
        }
    }

    pub fn add_state(&mut self, owner: Side, label: impl Into<String>) -> StateId {
        self.labels.push(label.into());
        self.owner.push(owner);
        self.out.push(Vec::new());
        self.owner.len() - 1
    }

    pub fn add_transition(&mut self, from: StateId, to: StateId, prio: Vec<u32>) -> Result<()> {
        if prio.len() != self.dims {
            return Err(Error::InvalidArena(format!(
                "transition {from}->{to} has {} priorities, expected {}",
                prio.len(),
                self.dims
            )));
        }
        if from >= self.owner.len() || to >= self.owner.len() {
            return Err(Error::InvalidArena(format!("transition {from}->{to} leaves the arena")));
        }
        self.out[from].push(self.trans.len());
        self.trans.push((from, to));
        self.prio.push(prio);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 {
            return Err(Error::InvalidArena("no priority dimension".into()));
        }
        match self.out.iter().position(Vec::is_empty) {
            Some(s) => Err(Error::InvalidArena(format!("state `{}` has no transition", self.labels[s]))),
            None => Ok(()),
        }
    }

    pub fn num_states(&self) -> usize {
        self.owner.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.trans.len()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn owner(&self, s: StateId) -> Side {
        self.owner[s]
    }

    pub fn label(&self, s: StateId) -> &str {
        &self.labels[s]
    }

    /// `(target, priorities)` for each transition leaving `s`.
    pub fn transitions(&self, s: StateId) -> impl Iterator<Item = (StateId, &[u32])> + '_ {
        self.out[s].iter().map(|&t| (self.trans[t].1, self.prio[t].as_slice()))
    }

    pub fn has_transition(&self, s: StateId, t: StateId) -> bool {
        self.out[s].iter().any(|&e| self.trans[e].1 == t)
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        self.out.iter().map(|ts| ts.iter().map(|&t| self.trans[t].1).collect()).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph arena {\n");
        for (v, l) in self.labels.iter().enumerate() {
            let shape = match self.owner[v] {
                Side::Even => "ellipse",
                Side::Odd => "box",
            };
            let _ = writeln!(s, "  s{v} [label=\"{}\", shape={shape}];", l.replace('"', "\\\""));
        }
        for (t, &(a, b)) in self.trans.iter().enumerate() {
            let p: Vec<String> = self.prio[t].iter().map(u32::to_string).collect();
            let _ = writeln!(s, "  s{a} -> s{b} [label=\"{}\"];", p.join(","));
        }
        s.push_str("}\n");
        s
    }
}

/// States from which `side` can force a visit to `target`.
pub fn attractor(arena: &ZeroSumArena, target: &FixedBitSet, side: Side) -> FixedBitSet {
    let g = StateGame::plain(arena);
    let all = full_set(g.n());
    let mut t = target.clone();
    t.grow(g.n());
    g.attractor(&all, &t, side).0
}

/// A game with priorities on states, the form the recursive solvers work on.
struct StateGame {
    owner: Vec<Side>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    /// `prio[d][s]`
    prio: Vec<Vec<u32>>,
    /// States `0..orig` are the arena's states; the rest are midpoints.
    orig: usize,
    /// Original target of each midpoint, indexed by `s - orig`.
    mid_target: Vec<StateId>,
}

impl StateGame {
    fn plain(arena: &ZeroSumArena) -> Self {
        let succ = arena.adjacency();
        let pred = predecessors(&succ);
        StateGame {
            owner: arena.owner.clone(),
            succ,
            pred,
            prio: vec![vec![0; arena.num_states()]; arena.dims],
            orig: arena.num_states(),
            mid_target: Vec::new(),
        }
    }

    /// Moves transition priorities onto states. A state whose outgoing
    /// transitions all carry the same vector takes it; otherwise it takes a
    /// neutral even priority and each transition is routed through a fresh
    /// midpoint owned by the same side.
    fn from_arena(arena: &ZeroSumArena) -> Self {
        let n = arena.num_states();
        let neutral: Vec<u32> = (0..arena.dims)
            .map(|d| {
                let m = arena.prio.iter().map(|p| p[d]).max().unwrap_or(0);
                m + m % 2
            })
            .collect();
        let mut owner = arena.owner.clone();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut prio: Vec<Vec<u32>> = vec![vec![0; n]; arena.dims];
        let mut mid_target = Vec::new();
        for s in 0..n {
            let ts = &arena.out[s];
            let first = &arena.prio[ts[0]];
            if ts.iter().all(|&t| &arena.prio[t] == first) {
                for d in 0..arena.dims {
                    prio[d][s] = first[d];
                }
                succ[s] = ts.iter().map(|&t| arena.trans[t].1).collect();
            } else {
                for d in 0..arena.dims {
                    prio[d][s] = neutral[d];
                }
                for &t in ts {
                    let m = owner.len();
                    owner.push(arena.owner[s]);
                    succ.push(vec![arena.trans[t].1]);
                    for (row, &p) in prio.iter_mut().zip(&arena.prio[t]) {
                        row.push(p);
                    }
                    mid_target.push(arena.trans[t].1);
                    succ[s].push(m);
                }
            }
        }
        let pred = predecessors(&succ);
        StateGame { owner, succ, pred, prio, orig: n, mid_target }
    }

    fn n(&self) -> usize {
        self.owner.len()
    }

    /// Attractor inside `sub`, with the attracting moves of `side`.
    fn attractor(&self, sub: &FixedBitSet, target: &FixedBitSet, side: Side) -> (FixedBitSet, Vec<(usize, usize)>) {
        let mut attr = target.clone();
        attr.intersect_with(sub);
        let mut moves = Vec::new();
        let mut count: HashMap<usize, usize> = HashMap::new();
        let mut queue: Vec<usize> = attr.ones().collect();
        while let Some(x) = queue.pop() {
            for &p in &self.pred[x] {
                if !sub.contains(p) || attr.contains(p) {
                    continue;
                }
                if self.owner[p] == side {
                    attr.insert(p);
                    moves.push((p, x));
                    queue.push(p);
                } else {
                    let c = count.entry(p).or_insert_with(|| self.succ[p].iter().filter(|&&w| sub.contains(w)).count());
                    *c -= 1;
                    if *c == 0 {
                        attr.insert(p);
                        queue.push(p);
                    }
                }
            }
        }
        (attr, moves)
    }

    fn any_move(&self, s: usize, sub: &FixedBitSet) -> usize {
        *self.succ[s].iter().find(|&&w| sub.contains(w)).expect("subgame has no dead end")
    }

    fn with_priority(&self, sub: &FixedBitSet, d: usize, p: u32) -> FixedBitSet {
        let mut t = FixedBitSet::with_capacity(self.n());
        for s in sub.ones() {
            if self.prio[d][s] == p {
                t.insert(s);
            }
        }
        t
    }

    fn min_priority(&self, sub: &FixedBitSet, d: usize) -> u32 {
        sub.ones().map(|s| self.prio[d][s]).min().expect("non-empty subgame")
    }

    fn minus(sub: &FixedBitSet, a: &FixedBitSet) -> FixedBitSet {
        let mut r = sub.clone();
        r.difference_with(a);
        r
    }
}

fn predecessors(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); succ.len()];
    for (v, ws) in succ.iter().enumerate() {
        for &w in ws {
            pred[w].push(v);
        }
    }
    pred
}

/// Winning regions and memoryless moves inside a subgame.
#[derive(Clone)]
struct Partial {
    even: FixedBitSet,
    odd: FixedBitSet,
    strat: Vec<Option<usize>>,
}

impl Partial {
    fn empty(n: usize) -> Self {
        Partial { even: FixedBitSet::with_capacity(n), odd: FixedBitSet::with_capacity(n), strat: vec![None; n] }
    }

    fn region_mut(&mut self, side: Side) -> &mut FixedBitSet {
        match side {
            Side::Even => &mut self.even,
            Side::Odd => &mut self.odd,
        }
    }

    fn region(&self, side: Side) -> &FixedBitSet {
        match side {
            Side::Even => &self.even,
            Side::Odd => &self.odd,
        }
    }

    /// Copy the moves of `from` for `side`-owned states of `set`.
    fn take_moves(&mut self, g: &StateGame, from: &Partial, set: &FixedBitSet, side: Side) {
        for s in set.ones() {
            if g.owner[s] == side {
                self.strat[s] = from.strat[s];
            }
        }
    }

    /// One side wins all of `sub`: it attracts to `target` inside `attr`,
    /// moves anywhere from `target`, and follows `rest` elsewhere.
    fn sweep(
        g: &StateGame,
        sub: &FixedBitSet,
        side: Side,
        target: &FixedBitSet,
        attr_moves: &[(usize, usize)],
        rest: &Partial,
        rest_set: &FixedBitSet,
    ) -> Partial {
        let mut out = Partial::empty(g.n());
        *out.region_mut(side) = sub.clone();
        out.take_moves(g, rest, rest_set, side);
        for &(s, w) in attr_moves {
            out.strat[s] = Some(w);
        }
        for s in target.ones() {
            if g.owner[s] == side {
                out.strat[s] = Some(g.any_move(s, sub));
            }
        }
        out
    }

    /// `side` wins `attr ∪ second[side]`; `inner` is the part of `attr` won
    /// in the first recursive call.
    #[allow(clippy::too_many_arguments)]
    fn split(
        g: &StateGame,
        side: Side,
        inner: &Partial,
        inner_set: &FixedBitSet,
        attr: &FixedBitSet,
        attr_moves: &[(usize, usize)],
        second: &Partial,
        second_set: &FixedBitSet,
    ) -> Partial {
        let mut out = Partial::empty(g.n());
        let mut mine = attr.clone();
        mine.union_with(second.region(side));
        *out.region_mut(side) = mine;
        *out.region_mut(side.opponent()) = second.region(side.opponent()).clone();
        out.take_moves(g, inner, inner_set, side);
        for &(s, w) in attr_moves {
            out.strat[s] = Some(w);
        }
        out.take_moves(g, second, second_set, Side::Even);
        out.take_moves(g, second, second_set, Side::Odd);
        out
    }
}

/// Classic recursive algorithm for one dimension.
fn zielonka(g: &StateGame, sub: &FixedBitSet) -> Partial {
    if sub.is_clear() {
        return Partial::empty(g.n());
    }
    let p = g.min_priority(sub, 0);
    let alpha = Side::of_priority(p);
    let target = g.with_priority(sub, 0, p);
    let (a, a_moves) = g.attractor(sub, &target, alpha);
    let rest = StateGame::minus(sub, &a);
    let r = zielonka(g, &rest);
    if r.region(alpha.opponent()).is_clear() {
        return Partial::sweep(g, sub, alpha, &target, &a_moves, &r, &rest);
    }
    let (b, b_moves) = g.attractor(sub, r.region(alpha.opponent()), alpha.opponent());
    let rest2 = StateGame::minus(sub, &b);
    let r2 = zielonka(g, &rest2);
    let inner = r.region(alpha.opponent()).clone();
    Partial::split(g, alpha.opponent(), &r, &inner, &b, &b_moves, &r2, &rest2)
}

/// Recursive algorithm for conjunctions of parity conditions.
///
/// If some dimension has an odd least priority, Odd attracts to it (the one
/// with the largest such priority, lowest index on ties). Otherwise each
/// dimension with an odd priority is tried in turn: Even attracts to its
/// least priority and any Odd win in the rest is a genuine Odd dominion.
struct Generalized<'a> {
    g: &'a StateGame,
    memo: HashMap<FixedBitSet, Rc<Partial>>,
}

impl Generalized<'_> {
    fn solve(&mut self, sub: &FixedBitSet) -> Rc<Partial> {
        if let Some(r) = self.memo.get(sub) {
            return r.clone();
        }
        let r = Rc::new(self.compute(sub));
        self.memo.insert(sub.clone(), r.clone());
        r
    }

    fn compute(&mut self, sub: &FixedBitSet) -> Partial {
        let g = self.g;
        if sub.is_clear() {
            return Partial::empty(g.n());
        }
        let dims = g.prio.len();
        let mins: Vec<u32> = (0..dims).map(|d| g.min_priority(sub, d)).collect();
        let odd_dim = (0..dims).filter(|&d| mins[d] % 2 == 1).fold(None, |best: Option<usize>, d| match best {
            Some(b) if mins[b] >= mins[d] => Some(b),
            _ => Some(d),
        });
        if let Some(d) = odd_dim {
            let target = g.with_priority(sub, d, mins[d]);
            let (a, a_moves) = g.attractor(sub, &target, Side::Odd);
            let rest = StateGame::minus(sub, &a);
            let r = self.solve(&rest);
            if r.even.is_clear() {
                return Partial::sweep(g, sub, Side::Odd, &target, &a_moves, &r, &rest);
            }
            let (b, b_moves) = g.attractor(sub, &r.even, Side::Even);
            let rest2 = StateGame::minus(sub, &b);
            let r2 = self.solve(&rest2);
            return Partial::split(g, Side::Even, &r, &r.even.clone(), &b, &b_moves, &r2, &rest2);
        }
        let relevant: Vec<usize> = (0..dims).filter(|&d| sub.ones().any(|s| g.prio[d][s] % 2 == 1)).collect();
        let mut last = None;
        for &d in &relevant {
            let target = g.with_priority(sub, d, mins[d]);
            let (a, a_moves) = g.attractor(sub, &target, Side::Even);
            let rest = StateGame::minus(sub, &a);
            let r = self.solve(&rest);
            if !r.odd.is_clear() {
                let (b, b_moves) = g.attractor(sub, &r.odd, Side::Odd);
                let rest2 = StateGame::minus(sub, &b);
                let r2 = self.solve(&rest2);
                return Partial::split(g, Side::Odd, &r, &r.odd.clone(), &b, &b_moves, &r2, &rest2);
            }
            last = Some((target, a_moves, r, rest));
        }
        match (relevant.len(), last) {
            (1, Some((target, a_moves, r, rest))) => Partial::sweep(g, sub, Side::Even, &target, &a_moves, &r, &rest),
            _ => {
                let mut out = Partial::empty(g.n());
                out.even = sub.clone();
                for s in sub.ones() {
                    if g.owner[s] == Side::Even {
                        out.strat[s] = Some(g.any_move(s, sub));
                    }
                }
                out
            }
        }
    }
}

fn to_result(arena: &ZeroSumArena, g: &StateGame, p: &Partial, even_strategy: bool) -> SolveResult {
    let n = arena.num_states();
    let winner: Vec<Side> = (0..n).map(|s| if p.even.contains(s) { Side::Even } else { Side::Odd }).collect();
    let project = |side: Side| -> Vec<Option<StateId>> {
        (0..n)
            .map(|s| {
                if arena.owner[s] != side || winner[s] != side {
                    return None;
                }
                p.strat[s].map(|w| if w >= g.orig { g.mid_target[w - g.orig] } else { w })
            })
            .collect()
    };
    SolveResult { strategy_even: even_strategy.then(|| project(Side::Even)), strategy_odd: project(Side::Odd), winner }
}

/// Deep recursions on large arenas need more than the default thread stack.
fn on_big_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(1 << 30)
            .spawn_scoped(s, f)
            .expect("spawn solver thread")
            .join()
            .expect("solver thread panicked")
    })
}

/// Solves a one-dimension arena, with memoryless strategies for both sides.
pub fn solve_parity(arena: &ZeroSumArena) -> Result<SolveResult> {
    arena.validate()?;
    if arena.dims != 1 {
        return Err(Error::InvalidArena(format!("parity solving needs one dimension, got {}", arena.dims)));
    }
    Ok(on_big_stack(|| {
        let g = StateGame::from_arena(arena);
        let all = full_set(g.n());
        let p = zielonka(&g, &all);
        to_result(arena, &g, &p, true)
    }))
}

/// Solves the conjunction of parity conditions over all dimensions.
pub fn solve_generalized(arena: &ZeroSumArena) -> Result<SolveResult> {
    arena.validate()?;
    Ok(on_big_stack(|| {
        let g = StateGame::from_arena(arena);
        let all = full_set(g.n());
        let mut solver = Generalized { g: &g, memo: HashMap::new() };
        let p = solver.solve(&all);
        let relevant = (0..arena.dims).filter(|&d| g.prio[d].iter().any(|p| p % 2 == 1)).count();
        to_result(arena, &g, &p, relevant <= 1)
    }))
}
