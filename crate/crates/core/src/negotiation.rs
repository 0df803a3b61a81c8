//! The negotiation function and the objects built around it.
//!
//! `nego(λ)(v)` is the best payoff the owner `i` of `v` can enforce when the
//! other players are restricted to λ-rational behaviour. It is computed on a
//! finite two-player game where Prover proposes the play one edge at a time
//! and Challenger (player `i`) accepts or deviates; Prover's memory is the set
//! of players whose requirement 1 the current proposal must honour.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::game::{Game, PlayerId, VertexId};
use crate::graph::{sccs, set_of};
use crate::lasso::LassoPlay;
use crate::requirements::{consistent, satisfiable, ReqValue, Requirement};
use crate::zerosum::{solve_generalized, solve_parity, Side, StateId, ZeroSumArena};

/// Set of players, one bit each.
pub type Memory = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConcreteState {
    /// Prover to propose an edge from `u`.
    Propose { u: VertexId, mem: Memory },
    /// Challenger to accept `u → v` or deviate from `u`.
    Challenge { u: VertexId, v: VertexId, mem: Memory },
}

pub struct ConcreteGame {
    pub arena: ZeroSumArena,
    pub states: Vec<ConcreteState>,
    pub player: PlayerId,
    /// Initial state for each start vertex.
    pub initial: IndexMap<VertexId, StateId>,
}

fn bit(p: PlayerId) -> Memory {
    1 << p
}

fn memory_label(game: &Game, mem: Memory) -> String {
    let names: Vec<&str> = game.players().filter(|&p| mem & bit(p) != 0).map(|p| game.player_name(p)).collect();
    format!("{{{}}}", names.join(","))
}

impl ConcreteState {
    fn label(&self, game: &Game) -> String {
        match *self {
            ConcreteState::Propose { u, mem } => format!("({},{})", game.vertex_name(u), memory_label(game, mem)),
            ConcreteState::Challenge { u, v, mem } => {
                format!("({}->{},{})", game.vertex_name(u), game.vertex_name(v), memory_label(game, mem))
            }
        }
    }
}

fn entry_memory(game: &Game, req: &Requirement, w: VertexId) -> Memory {
    if req.get(w) == ReqValue::One {
        bit(game.owner(w))
    } else {
        0
    }
}

fn check_boolean_satisfiable(game: &Game, req: &Requirement) -> Result<()> {
    if req.0.len() != game.num_vertices() {
        return Err(Error::InvalidRequirement(format!("{} values for {} vertices", req.0.len(), game.num_vertices())));
    }
    if !req.is_boolean() || satisfiable(game, req).is_none() {
        return Err(Error::Unsatisfiable);
    }
    Ok(())
}

/// Builds the reachable part of the concrete negotiation game for player
/// `player` from the given start vertices.
///
/// Dimensions are the players, in order, followed by the main dimension.
/// Colors are used in their dense form; `m` is the least even number above
/// all of them.
pub fn build_concrete_game_from(
    game: &Game,
    req: &Requirement,
    player: PlayerId,
    starts: &[VertexId],
) -> Result<ConcreteGame> {
    check_boolean_satisfiable(game, req)?;
    Ok(build_unchecked(game, req, player, starts))
}

/// Concrete negotiation game for one start vertex.
pub fn build_concrete_game(game: &Game, req: &Requirement, player: PlayerId, start: VertexId) -> Result<ConcreteGame> {
    build_concrete_game_from(game, req, player, &[start])
}

struct Interner<'a> {
    game: &'a Game,
    arena: ZeroSumArena,
    states: Vec<ConcreteState>,
    index: HashMap<ConcreteState, StateId>,
    queue: VecDeque<StateId>,
}

impl Interner<'_> {
    fn get(&mut self, s: ConcreteState) -> StateId {
        if let Some(&id) = self.index.get(&s) {
            return id;
        }
        let side = match s {
            ConcreteState::Propose { .. } => Side::Even,
            ConcreteState::Challenge { .. } => Side::Odd,
        };
        let id = self.arena.add_state(side, s.label(self.game));
        self.states.push(s);
        self.index.insert(s, id);
        self.queue.push_back(id);
        id
    }

    fn link(&mut self, from: StateId, to: StateId, prio: Vec<u32>) {
        self.arena.add_transition(from, to, prio).expect("dimension count matches");
    }
}

fn build_unchecked(game: &Game, req: &Requirement, player: PlayerId, starts: &[VertexId]) -> ConcreteGame {
    let p = game.num_players();
    let m = game.dense_bound();
    let mut b = Interner {
        game,
        arena: ZeroSumArena::new(p + 1),
        states: Vec::new(),
        index: HashMap::new(),
        queue: VecDeque::new(),
    };
    let mut initial = IndexMap::new();
    for &v in starts {
        let mem = if req.get(v) == ReqValue::One { bit(player) } else { 0 };
        initial.insert(v, b.get(ConcreteState::Propose { u: v, mem }));
    }
    let main = |w: VertexId| game.dense_color(player, w) + 1;
    while let Some(id) = b.queue.pop_front() {
        match b.states[id] {
            ConcreteState::Propose { u, mem } => {
                for &v in game.successors(u) {
                    let t = b.get(ConcreteState::Challenge { u, v, mem });
                    b.link(id, t, vec![m; p + 1]);
                }
            }
            ConcreteState::Challenge { u, v, mem } => {
                let t = b.get(ConcreteState::Propose { u: v, mem: mem | entry_memory(game, req, v) });
                let mut prio: Vec<u32> =
                    (0..p).map(|d| if mem & bit(d) != 0 { game.dense_color(d, v) } else { m }).collect();
                prio.push(main(v));
                b.link(id, t, prio);
                if game.owner(u) == player {
                    for &w in game.successors(u) {
                        if w == v {
                            continue;
                        }
                        let t = b.get(ConcreteState::Propose { u: w, mem: entry_memory(game, req, w) });
                        let mut prio = vec![0; p];
                        prio.push(main(w));
                        b.link(id, t, prio);
                    }
                }
            }
        }
    }
    ConcreteGame { arena: b.arena, states: b.states, player, initial }
}

impl ConcreteGame {
    pub fn initial_state(&self, v: VertexId) -> Option<StateId> {
        self.initial.get(&v).copied()
    }
}

/// Value of the negotiation function at every vertex of `player`.
fn nego_for_player(game: &Game, req: &Requirement, player: PlayerId) -> Vec<(VertexId, ReqValue)> {
    let starts: Vec<VertexId> = game.vertices_of(player).collect();
    if starts.is_empty() {
        return Vec::new();
    }
    let cg = build_unchecked(game, req, player, &starts);
    let res = solve_generalized(&cg.arena).expect("concrete game is a valid arena");
    starts
        .iter()
        .map(|&v| {
            let s = cg.initial[&v];
            (v, ReqValue::from_bool(res.winner[s] == Side::Odd))
        })
        .collect()
}

/// The negotiation function on a satisfiable requirement with values in {0, 1}.
pub fn nego(game: &Game, req: &Requirement) -> Result<Requirement> {
    check_boolean_satisfiable(game, req)?;
    let parts: Vec<Vec<(VertexId, ReqValue)>> =
        game.players().collect::<Vec<_>>().into_par_iter().map(|i| nego_for_player(game, req, i)).collect();
    let mut out = Requirement::zero(game.num_vertices());
    for (v, x) in parts.into_iter().flatten() {
        out.0[v] = x;
    }
    Ok(out)
}

/// The iterates `λ₀, nego(λ₀), …` up to and including the first repeated one.
pub fn lfp_trace(game: &Game) -> Result<Vec<Requirement>> {
    let mut trace = vec![Requirement::zero(game.num_vertices())];
    loop {
        let cur = trace.last().unwrap();
        let next = nego(game, cur).map_err(|e| match e {
            Error::Unsatisfiable => Error::Internal("an iterate of the negotiation function is unsatisfiable".into()),
            e => e,
        })?;
        if &next == cur {
            return Ok(trace);
        }
        log::debug!("iterate {}: {}", trace.len(), next.table(game));
        trace.push(next);
        if trace.len() > game.num_vertices() + 2 {
            return Err(Error::Internal("negotiation sequence did not stabilise".into()));
        }
    }
}

/// Least fixed point λ* of the negotiation function.
pub fn lfp(game: &Game) -> Result<Requirement> {
    Ok(lfp_trace(game)?.pop().expect("trace is non-empty"))
}

/// Zero-sum game of `player` against the coalition of all others, on the
/// given edges, with the color of the source vertex on each transition.
pub fn coalition_arena(game: &Game, player: PlayerId, edges: &[(VertexId, VertexId)]) -> ZeroSumArena {
    let mut a = ZeroSumArena::new(1);
    for v in game.vertices() {
        let side = if game.owner(v) == player { Side::Even } else { Side::Odd };
        a.add_state(side, game.vertex_name(v));
    }
    for &(u, v) in edges {
        a.add_transition(u, v, vec![game.color(player, u)]).expect("one dimension");
    }
    a
}

/// Antagonistic values: 1 where the owner wins against everybody else.
pub fn antagonistic_values(game: &Game) -> Requirement {
    let mut out = Requirement::zero(game.num_vertices());
    for i in game.players() {
        let res = solve_parity(&coalition_arena(game, i, game.edges())).expect("coalition arena is valid");
        for v in game.vertices_of(i) {
            out.0[v] = ReqValue::from_bool(res.winner[v] == Side::Even);
        }
    }
    out
}

/// Edge pruning by memoryless winning strategies, repeated until stable.
/// Returns the final requirement and the retained edges.
pub fn ummels_fixpoint(game: &Game) -> Result<(Requirement, Vec<(VertexId, VertexId)>)> {
    let mut edges: Vec<(VertexId, VertexId)> = game.edges().to_vec();
    loop {
        let mut req = Requirement::zero(game.num_vertices());
        let mut keep: Vec<(VertexId, VertexId)> = edges.clone();
        for i in game.players() {
            let res = solve_parity(&coalition_arena(game, i, &edges))?;
            let strat = res.strategy_even.expect("one-dimension solve yields Even strategies");
            for v in game.vertices_of(i) {
                if res.winner[v] == Side::Even {
                    req.0[v] = ReqValue::One;
                    let chosen = strat[v].ok_or_else(|| Error::Internal("winning state without a move".into()))?;
                    keep.retain(|&(a, b)| a != v || b == chosen);
                }
            }
        }
        if keep == edges {
            return Ok((req, edges));
        }
        edges = keep;
    }
}

/// One proposal per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedStrategy(pub Vec<LassoPlay>);

impl ReducedStrategy {
    /// `{"a": "a b (d e d f)^w", ...}`, total over vertices.
    pub fn from_json(game: &Game, text: &str) -> Result<Self> {
        let map: IndexMap<String, String> = serde_json::from_str(text)?;
        let mut out = vec![None; game.num_vertices()];
        for (k, s) in map {
            out[game.vertex_id(&k)?] = Some(LassoPlay::parse(game, &s)?);
        }
        out.into_iter()
            .enumerate()
            .map(|(v, p)| p.ok_or_else(|| Error::Strategy(format!("no proposal for `{}`", game.vertex_name(v)))))
            .collect::<Result<_>>()
            .map(ReducedStrategy)
    }

    pub fn to_json(&self, game: &Game) -> Value {
        Value::Object(
            self.0
                .iter()
                .enumerate()
                .map(|(v, p)| (game.vertex_name(v).to_string(), Value::from(p.display(game).to_string())))
                .collect(),
        )
    }
}

#[derive(Clone, Debug)]
pub struct DeviationGraph {
    pub player: PlayerId,
    pub nodes: Vec<LassoPlay>,
    /// Node of the proposal made from each vertex.
    pub node_of: Vec<usize>,
    /// `(source, target, color)`, without duplicates.
    pub edges: Vec<(usize, usize, u32)>,
}

fn check_strategy(game: &Game, req: &Requirement, strat: &ReducedStrategy) -> Result<()> {
    if strat.0.len() != game.num_vertices() {
        return Err(Error::Strategy(format!("{} proposals for {} vertices", strat.0.len(), game.num_vertices())));
    }
    let n = game.num_vertices();
    for (v, p) in strat.0.iter().enumerate() {
        let name = game.vertex_name(v);
        p.validate(game).map_err(|e| Error::Strategy(format!("proposal from `{name}`: {e}")))?;
        if p.start() != v {
            return Err(Error::Strategy(format!("proposal from `{name}` starts elsewhere")));
        }
        if !p.is_reduced(n) {
            return Err(Error::Strategy(format!("proposal from `{name}` exceeds the size bounds")));
        }
        if !consistent(game, req, p) {
            return Err(Error::Strategy(format!("proposal from `{name}` is not consistent")));
        }
    }
    Ok(())
}

/// Deviations of `player` from the proposals of `strat`. Positions are read
/// over the prefix and two laps of the cycle, which meets every pair of
/// occurrence set and current vertex.
pub fn build_deviation_graph(
    game: &Game,
    req: &Requirement,
    player: PlayerId,
    strat: &ReducedStrategy,
) -> Result<DeviationGraph> {
    check_strategy(game, req, strat)?;
    let mut nodes: Vec<LassoPlay> = Vec::new();
    let mut node_of = Vec::with_capacity(game.num_vertices());
    for p in &strat.0 {
        let k = nodes.iter().position(|q| q == p).unwrap_or_else(|| {
            nodes.push(p.clone());
            nodes.len() - 1
        });
        node_of.push(k);
    }
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (src, rho) in nodes.iter().enumerate() {
        let mut low = u32::MAX;
        for k in 0..rho.prefix.len() + 2 * rho.cycle.len() {
            let u = rho.at(k);
            low = low.min(game.color(player, u));
            if game.owner(u) != player {
                continue;
            }
            let next = rho.at(k + 1);
            for &w in game.successors(u) {
                if w != next && seen.insert((src, node_of[w], low)) {
                    edges.push((src, node_of[w], low));
                }
            }
        }
    }
    Ok(DeviationGraph { player, nodes, node_of, edges })
}

impl DeviationGraph {
    fn reach_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(x) = stack.pop() {
            for &(a, b, _) in &self.edges {
                if a == x && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen
    }

    /// Whether some infinite path from `start` has an even least color among
    /// the edges it takes infinitely often.
    pub fn has_even_infinite_path(&self, start: usize) -> bool {
        let reach = self.reach_from(start);
        let mut colors: Vec<u32> = self.edges.iter().map(|e| e.2).filter(|c| c % 2 == 0).collect();
        colors.sort_unstable();
        colors.dedup();
        let n = self.nodes.len();
        colors.into_iter().any(|c| {
            let kept: Vec<&(usize, usize, u32)> =
                self.edges.iter().filter(|&&(a, b, col)| col >= c && reach[a] && reach[b]).collect();
            let mut succ = vec![Vec::new(); n];
            for &&(a, b, _) in &kept {
                if !succ[a].contains(&b) {
                    succ[a].push(b);
                }
            }
            let within = set_of(n, (0..n).filter(|&x| reach[x]));
            let mut comp = vec![usize::MAX; n];
            for (k, cs) in sccs(&succ, &within).into_iter().enumerate() {
                for x in cs {
                    comp[x] = k;
                }
            }
            kept.iter().any(|&&(a, b, col)| col == c && comp[a] == comp[b])
        })
    }

    pub fn to_dot(&self, game: &Game) -> String {
        let mut s = String::from("digraph deviations {\n");
        for (k, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "  n{k} [label=\"{}\"];", p.display(game));
        }
        for &(a, b, c) in &self.edges {
            let _ = writeln!(s, "  n{a} -> n{b} [label=\"{c}\"];");
        }
        s.push_str("}\n");
        s
    }
}

/// True iff `strat` is a winning Prover strategy from `start`: no deviation
/// path reaches a proposal won by `player`, and no infinite deviation path
/// has an even least recurring color. This certifies `nego(req)(start) = 0`.
pub fn check_reduced_strategy(
    game: &Game,
    req: &Requirement,
    player: PlayerId,
    start: VertexId,
    strat: &ReducedStrategy,
) -> Result<bool> {
    let dg = build_deviation_graph(game, req, player, strat)?;
    let s = dg.node_of[start];
    let reach = dg.reach_from(s);
    if dg.nodes.iter().enumerate().any(|(k, p)| reach[k] && p.wins(game, player)) {
        return Ok(false);
    }
    Ok(!dg.has_even_infinite_path(s))
}

/// DOT dump of the concrete games of every player for `req`.
pub fn concrete_games_dot(game: &Game, req: &Requirement) -> Result<String> {
    check_boolean_satisfiable(game, req)?;
    let mut out = String::new();
    for i in game.players() {
        let starts: Vec<VertexId> = game.vertices_of(i).collect();
        if starts.is_empty() {
            continue;
        }
        let cg = build_unchecked(game, req, i, &starts);
        out.push_str(&cg.arena.to_dot().replacen("digraph arena", &format!("digraph \"{}\"", game.player_name(i)), 1));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{three_player_buchi, two_branch};

    #[test]
    fn initial_memory_follows_requirement() {
        let g = two_branch();
        let c = g.vertex_id("c").unwrap();
        let box_ = g.player_id("Box").unwrap();
        let l1 = Requirement::ones(&g, &["c", "e"]).unwrap();
        let cg = build_concrete_game(&g, &l1, box_, c).unwrap();
        assert_eq!(cg.states[cg.initial[&c]], ConcreteState::Propose { u: c, mem: bit(box_) });
        let cg0 = build_concrete_game(&g, &Requirement::zero(5), box_, c).unwrap();
        assert_eq!(cg0.states[cg0.initial[&c]], ConcreteState::Propose { u: c, mem: 0 });
    }

    #[test]
    fn two_branch_negotiation() {
        let g = two_branch();
        let l1 = nego(&g, &Requirement::zero(5)).unwrap();
        assert_eq!(l1, Requirement::ones(&g, &["c", "e"]).unwrap());
        let l2 = nego(&g, &l1).unwrap();
        assert_eq!(l2, Requirement::ones(&g, &["a", "c", "e"]).unwrap());
        assert_eq!(lfp(&g).unwrap(), l2);
    }

    #[test]
    fn concrete_game_size_bound() {
        let g = three_player_buchi();
        let star = lfp(&g).unwrap();
        for i in g.players() {
            let starts: Vec<_> = g.vertices_of(i).collect();
            let cg = build_concrete_game_from(&g, &star, i, &starts).unwrap();
            let bound = (1 << g.num_players()) * (g.num_vertices() + g.edges().len());
            assert!(cg.arena.num_states() <= bound);
        }
    }

    #[test]
    fn unsatisfiable_requirement_is_rejected() {
        let g = two_branch();
        let bad = Requirement::ones(&g, &["b"]).unwrap();
        assert!(matches!(nego(&g, &bad), Err(Error::Unsatisfiable)));
    }
}
