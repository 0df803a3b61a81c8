//! Decision problems on top of the negotiation function.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{Game, PlayerId, VertexId};
use crate::graph::{covering_cycle, has_cycle, sccs, set_of, shortest_path};
use crate::lasso::LassoPlay;
use crate::ltl::{eval_lasso, ltl_to_gba, Core, Ltl};
use crate::negotiation::{lfp, nego};
use crate::requirements::{
    allowed_vertices, candidate_winners, consistent, good_components, satisfiable, subsets, ReqValue, Requirement,
};

/// Payoff bounds: `lower[i] ≤ payoff[i] ≤ upper[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Threshold {
    pub lower: Vec<bool>,
    pub upper: Vec<bool>,
}

impl Threshold {
    pub fn any(players: usize) -> Self {
        Threshold { lower: vec![false; players], upper: vec![true; players] }
    }

    /// `"P1=1,P2=0"` lists; missing players default to 0 below and 1 above.
    pub fn parse(game: &Game, lower: &str, upper: &str) -> Result<Self> {
        let mut t = Threshold::any(game.num_players());
        for (text, slot) in [(lower, &mut t.lower), (upper, &mut t.upper)] {
            for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (name, val) = item
                    .split_once('=')
                    .ok_or_else(|| Error::Threshold(format!("expected `player=0|1`, got `{item}`")))?;
                let p = game.player_id(name.trim())?;
                slot[p] = match val.trim() {
                    "0" => false,
                    "1" => true,
                    other => return Err(Error::Threshold(format!("value `{other}` for `{name}`"))),
                };
            }
        }
        if let Some(p) = game.players().find(|&p| t.lower[p] && !t.upper[p]) {
            return Err(Error::Threshold(format!("lower bound above upper bound for `{}`", game.player_name(p))));
        }
        Ok(t)
    }

    pub fn admits(&self, payoff: &[bool]) -> bool {
        payoff.iter().enumerate().all(|(p, &x)| (!self.lower[p] || x) && (x <= self.upper[p]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Nash,
    Subgame,
}

/// Satisfiable, with values in {0, 1}, and equal to its own negotiation.
pub fn is_fixed_point(game: &Game, req: &Requirement) -> Result<bool> {
    if !req.is_boolean() || satisfiable(game, req).is_none() {
        log::info!("requirement is not satisfiable, hence not a fixed point");
        return Ok(false);
    }
    Ok(nego(game, req)? == *req)
}

pub fn is_lfp(game: &Game, req: &Requirement) -> Result<bool> {
    Ok(lfp(game)? == *req)
}

/// Requirement whose consistent plays are the equilibrium outcomes of `kind`.
pub fn base_requirement(game: &Game, kind: Kind) -> Result<Requirement> {
    match kind {
        Kind::Nash => nego(game, &Requirement::zero(game.num_vertices())),
        Kind::Subgame => lfp(game),
    }
}

/// Candidate least colors per player, filtered by the threshold parities.
fn color_choices(game: &Game, t: &Threshold) -> Vec<Vec<u32>> {
    game.players()
        .map(|p| {
            game.colors_of(p)
                .into_iter()
                .filter(|c| (!t.lower[p] || c % 2 == 0) && (t.upper[p] || c % 2 == 1))
                .collect()
        })
        .collect()
}

/// Searches for an equilibrium outcome from `start` whose payoff lies within
/// `t`, given the base requirement of the equilibrium kind.
///
/// For each tuple of least colors `c̄` the search keeps the vertices whose
/// colors are all at least `c̄`, drops the vertices whose requirement 1 would
/// be violated by the parity of their owner's `c`, and looks for a reachable
/// strongly connected set meeting color `c_i` for every player.
pub fn constrained_existence_with(
    game: &Game,
    base: &Requirement,
    start: VertexId,
    t: &Threshold,
) -> Result<Option<LassoPlay>> {
    let choices = color_choices(game, t);
    let total = choices
        .iter()
        .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64))
        .ok_or_else(|| Error::Internal("too many color tuples".into()))?;
    let found = (0..total).into_par_iter().find_map_first(|idx| {
        // mixed radix, first player most significant
        let mut tuple = vec![0u32; choices.len()];
        let mut rest = idx;
        for p in (0..choices.len()).rev() {
            let r = choices[p].len() as u64;
            tuple[p] = choices[p][(rest % r) as usize];
            rest /= r;
        }
        witness_for_tuple(game, base, start, &tuple)
    });
    if let Some(w) = &found {
        let pay: Vec<bool> = game.players().map(|p| w.wins(game, p)).collect();
        if w.validate(game).is_err() || !consistent(game, base, w) || !t.admits(&pay) || w.start() != start {
            return Err(Error::Internal(format!("rejected witness {}", w.display(game))));
        }
    }
    Ok(found)
}

fn witness_for_tuple(game: &Game, base: &Requirement, start: VertexId, c: &[u32]) -> Option<LassoPlay> {
    let n = game.num_vertices();
    let succ = game.adjacency();
    let path_ok = set_of(
        n,
        game.vertices()
            .filter(|&v| !(base.get(v) == ReqValue::One && c[game.owner(v)] % 2 == 1) && base.get(v) != ReqValue::Inf),
    );
    if !path_ok.contains(start) {
        return None;
    }
    let mut loop_ok = path_ok.clone();
    for v in game.vertices() {
        if game.players().any(|p| game.color(p, v) < c[p]) {
            loop_ok.set(v, false);
        }
    }
    let comps: Vec<Vec<usize>> = sccs(succ, &loop_ok)
        .into_iter()
        .filter(|comp| has_cycle(succ, comp) && game.players().all(|p| comp.iter().any(|&v| game.color(p, v) == c[p])))
        .collect();
    if comps.is_empty() {
        return None;
    }
    lasso_into(succ, start, &comps, &path_ok)
}

/// Shortest path from `start` into one of `comps`, closed by a tour of it.
fn lasso_into(succ: &[Vec<usize>], start: usize, comps: &[Vec<usize>], within: &FixedBitSet) -> Option<LassoPlay> {
    let n = succ.len();
    let target = set_of(n, comps.iter().flatten().copied());
    let path = shortest_path(succ, &[start], &target, within)?;
    let entry = *path.last().unwrap();
    let comp = comps.iter().find(|c| c.contains(&entry)).unwrap();
    let cycle = covering_cycle(succ, entry, &set_of(n, comp.iter().copied()))?;
    Some(LassoPlay::new(path[..path.len() - 1].to_vec(), cycle).normalize())
}

pub fn constrained_existence(game: &Game, start: VertexId, t: &Threshold, kind: Kind) -> Result<Option<LassoPlay>> {
    let base = base_requirement(game, kind)?;
    constrained_existence_with(game, &base, start, t)
}

/// A λ*-consistent lasso from `start` satisfying `formula`, if any.
///
/// Search in the product of the game with the formula's automaton. For each
/// set `S` of players required to win, the product is restricted to vertices
/// whose requirement those wins honour, and its strongly connected parts are
/// refined until every player of `S` wins and every acceptance set is met.
pub fn spe_verify(game: &Game, start: VertexId, formula: &Ltl) -> Result<Option<LassoPlay>> {
    let star = lfp(game)?;
    spe_verify_with(game, &star, start, formula)
}

pub fn spe_verify_with(game: &Game, star: &Requirement, start: VertexId, formula: &Ltl) -> Result<Option<LassoPlay>> {
    let core = Core::bind(formula, game)?;
    let gba = ltl_to_gba(&core);
    let q = gba.num_states();

    // product states (v, s) with the guard of s matching v
    let mut ids = vec![usize::MAX; game.num_vertices() * q];
    let mut vertex_of = Vec::new();
    let mut aut_of = Vec::new();
    for v in game.vertices() {
        for s in 0..q {
            if gba.guard[s].matches(v) {
                ids[v * q + s] = vertex_of.len();
                vertex_of.push(v);
                aut_of.push(s);
            }
        }
    }
    let total = vertex_of.len();
    let succ: Vec<Vec<usize>> = (0..total)
        .map(|x| {
            let (v, s) = (vertex_of[x], aut_of[x]);
            game.successors(v)
                .iter()
                .flat_map(|&w| gba.succ[s].iter().map(move |&t| (w, t)))
                .filter_map(|(w, t)| {
                    let id = ids[w * q + t];
                    (id != usize::MAX).then_some(id)
                })
                .collect()
        })
        .collect();
    let starts: Vec<usize> = gba.initial.iter().map(|&s| ids[start * q + s]).filter(|&x| x != usize::MAX).collect();

    let missing_acceptance = |comp: &[usize]| -> Option<Vec<usize>> {
        let ok = gba.acceptance.iter().all(|acc| comp.iter().any(|&x| acc.contains(aut_of[x])));
        (!ok).then(|| comp.to_vec())
    };
    for s in subsets(&candidate_winners(game, star)) {
        let allowed_v = allowed_vertices(game, star, &s);
        let allowed = set_of(total, (0..total).filter(|&x| allowed_v.contains(vertex_of[x])));
        let comps =
            good_components(&succ, &allowed, &s, |p: PlayerId, x| game.color(p, vertex_of[x]), missing_acceptance);
        if comps.is_empty() {
            continue;
        }
        let target = set_of(total, comps.iter().flatten().copied());
        let Some(path) = shortest_path(&succ, &starts, &target, &allowed) else {
            continue;
        };
        let entry = *path.last().unwrap();
        let comp = comps.iter().find(|c| c.contains(&entry)).unwrap();
        let cycle = covering_cycle(&succ, entry, &set_of(total, comp.iter().copied()))
            .ok_or_else(|| Error::Internal("component without a tour".into()))?;
        let project = |xs: &[usize]| xs.iter().map(|&x| vertex_of[x]).collect::<Vec<_>>();
        let play = LassoPlay::new(project(&path[..path.len() - 1]), project(&cycle)).normalize();
        if !consistent(game, star, &play) || !eval_lasso(formula, game, &play)? {
            return Err(Error::Internal(format!("rejected witness {}", play.display(game))));
        }
        return Ok(Some(play));
    }
    Ok(None)
}
