//! Requirements: per-vertex lower bounds on the payoff of the vertex owner.

use std::fmt;

use fixedbitset::FixedBitSet;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::game::{Game, PlayerId, VertexId};
use crate::graph::{covering_cycle, has_cycle, reachable, sccs, set_of, shortest_path};
use crate::lasso::LassoPlay;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReqValue {
    Zero,
    One,
    Inf,
}

impl ReqValue {
    pub fn from_bool(b: bool) -> Self {
        if b {
            ReqValue::One
        } else {
            ReqValue::Zero
        }
    }
}

impl fmt::Display for ReqValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReqValue::Zero => "0",
            ReqValue::One => "1",
            ReqValue::Inf => "inf",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Requirement(pub Vec<ReqValue>);

impl Requirement {
    /// The vacuous requirement λ₀.
    pub fn zero(n: usize) -> Self {
        Requirement(vec![ReqValue::Zero; n])
    }

    /// 1 on the listed vertices, 0 elsewhere.
    pub fn ones(game: &Game, names: &[&str]) -> Result<Self> {
        let mut r = Requirement::zero(game.num_vertices());
        for name in names {
            r.0[game.vertex_id(name)?] = ReqValue::One;
        }
        Ok(r)
    }

    pub fn get(&self, v: VertexId) -> ReqValue {
        self.0[v]
    }

    pub fn is_boolean(&self) -> bool {
        self.0.iter().all(|&x| x != ReqValue::Inf)
    }

    /// Pointwise order.
    pub fn le(&self, other: &Requirement) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn from_json(game: &Game, text: &str) -> Result<Self> {
        let map: IndexMap<String, Value> = serde_json::from_str(text)?;
        let mut out = vec![None; game.num_vertices()];
        for (k, v) in map {
            let id = game.vertex_id(&k)?;
            let val = match &v {
                Value::Number(x) if x.as_u64() == Some(0) => ReqValue::Zero,
                Value::Number(x) if x.as_u64() == Some(1) => ReqValue::One,
                Value::String(s) if s == "inf" => ReqValue::Inf,
                _ => return Err(Error::InvalidRequirement(format!("value {v} at `{k}`"))),
            };
            out[id] = Some(val);
        }
        let values = out
            .into_iter()
            .enumerate()
            .map(|(v, x)| x.ok_or_else(|| Error::InvalidRequirement(format!("no value for `{}`", game.vertex_name(v)))))
            .collect::<Result<_>>()?;
        Ok(Requirement(values))
    }

    pub fn to_json(&self, game: &Game) -> Value {
        let map: serde_json::Map<String, Value> = game
            .vertices()
            .map(|v| {
                let val = match self.0[v] {
                    ReqValue::Zero => Value::from(0),
                    ReqValue::One => Value::from(1),
                    ReqValue::Inf => Value::from("inf"),
                };
                (game.vertex_name(v).to_string(), val)
            })
            .collect();
        Value::Object(map)
    }

    /// `a:1 b:0 ...` in vertex order.
    pub fn table(&self, game: &Game) -> String {
        game.vertices().map(|v| format!("{}:{}", game.vertex_name(v), self.0[v])).collect::<Vec<_>>().join(" ")
    }
}

/// λ-consistency: at every position, the owner of the current vertex gets at
/// least what the requirement asks there. The suffix payoff of a lasso is
/// the same at every position, so one lap of the cycle is enough.
pub fn consistent(game: &Game, req: &Requirement, play: &LassoPlay) -> bool {
    play.prefix.iter().chain(&play.cycle).all(|&v| match req.get(v) {
        ReqValue::Zero => true,
        ReqValue::One => play.wins(game, game.owner(v)),
        ReqValue::Inf => false,
    })
}

/// Per vertex `v`: a simple path `h` from `v` and a strongly connected set `W`
/// containing its last vertex, such that `h · (tour of W)^ω` is consistent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatCertificate {
    pub entries: Vec<(Vec<VertexId>, Vec<VertexId>)>,
}

#[derive(Serialize, Deserialize)]
struct CertEntry {
    h: Vec<String>,
    #[serde(rename = "W")]
    w: Vec<String>,
}

impl SatCertificate {
    pub fn from_json(game: &Game, text: &str) -> Result<Self> {
        let map: IndexMap<String, CertEntry> = serde_json::from_str(text)?;
        let mut entries = vec![None; game.num_vertices()];
        for (k, e) in map {
            let v = game.vertex_id(&k)?;
            let ids = |xs: &[String]| xs.iter().map(|x| game.vertex_id(x)).collect::<Result<Vec<_>>>();
            entries[v] = Some((ids(&e.h)?, ids(&e.w)?));
        }
        let entries = entries
            .into_iter()
            .enumerate()
            .map(|(v, e)| e.ok_or_else(|| Error::Certificate(format!("no entry for `{}`", game.vertex_name(v)))))
            .collect::<Result<_>>()?;
        Ok(SatCertificate { entries })
    }

    pub fn to_json(&self, game: &Game) -> Value {
        let names = |xs: &[VertexId]| xs.iter().map(|&x| game.vertex_name(x).to_string()).collect();
        let map: IndexMap<String, CertEntry> = self
            .entries
            .iter()
            .enumerate()
            .map(|(v, (h, w))| (game.vertex_name(v).to_string(), CertEntry { h: names(h), w: names(w) }))
            .collect();
        serde_json::to_value(map).expect("certificate serialization cannot fail")
    }

    /// The lasso `h_v · (tour of W_v)^ω` described by the entry of `v`.
    pub fn lasso(&self, game: &Game, v: VertexId) -> Option<LassoPlay> {
        let (h, w) = &self.entries[v];
        let set = set_of(game.num_vertices(), w.iter().copied());
        let last = *h.last()?;
        let cycle = covering_cycle(game.adjacency(), last, &set)?;
        Some(LassoPlay::new(h[..h.len() - 1].to_vec(), cycle))
    }
}

/// Checks the three certificate conditions for every vertex:
/// no `inf` value, `W_v` strongly connected and carrying a cycle, and every
/// vertex with requirement 1 on `h_v` or in `W_v` has an owner whose least
/// color on `W_v` is even.
pub fn check_certificate(game: &Game, req: &Requirement, cert: &SatCertificate) -> Result<bool> {
    let n = game.num_vertices();
    if cert.entries.len() != n {
        return Err(Error::Certificate(format!("{} entries for {n} vertices", cert.entries.len())));
    }
    let succ = game.adjacency();
    for (v, (h, w)) in cert.entries.iter().enumerate() {
        let name = game.vertex_name(v);
        if h.first() != Some(&v) {
            return Err(Error::Certificate(format!("history of `{name}` does not start there")));
        }
        if h.iter().any(|&x| x >= n) || w.iter().any(|&x| x >= n) {
            return Err(Error::Certificate(format!("entry of `{name}` names an unknown vertex")));
        }
        if h.windows(2).any(|e| !game.has_edge(e[0], e[1])) {
            return Err(Error::Certificate(format!("history of `{name}` is not a path")));
        }
        let mut seen = h.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != h.len() {
            return Err(Error::Certificate(format!("history of `{name}` repeats a vertex")));
        }
        if !w.contains(h.last().unwrap()) {
            return Err(Error::Certificate(format!("history of `{name}` does not end in its set")));
        }
        if req.get(v) == ReqValue::Inf {
            return Ok(false);
        }
        let set = set_of(n, w.iter().copied());
        let comps = sccs(succ, &set);
        if comps.len() != 1 || !has_cycle(succ, &comps[0]) {
            return Ok(false);
        }
        let wins = |p: PlayerId| game.min_color(p, w.iter().copied()).is_some_and(|c| c % 2 == 0);
        let ok = h.iter().chain(w).all(|&u| match req.get(u) {
            ReqValue::Zero => true,
            ReqValue::One => wins(game.owner(u)),
            ReqValue::Inf => false,
        });
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Strongly connected sets inside `within`, each carrying a cycle, on which
/// every player of `winners` has an even least color. Standard refinement:
/// a component where some winner's least color is odd loses the vertices of
/// that color and is decomposed again.
pub(crate) fn good_components(
    succ: &[Vec<usize>],
    within: &FixedBitSet,
    winners: &[PlayerId],
    color: impl Fn(PlayerId, usize) -> u32 + Copy,
    extra: impl Fn(&[usize]) -> Option<Vec<usize>> + Copy,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut work = vec![within.clone()];
    while let Some(set) = work.pop() {
        for comp in sccs(succ, &set) {
            if !has_cycle(succ, &comp) {
                continue;
            }
            let failing = winners.iter().find_map(|&p| {
                let m = comp.iter().map(|&v| color(p, v)).min().unwrap();
                (m % 2 == 1).then(|| comp.iter().copied().filter(|&v| color(p, v) == m).collect::<Vec<_>>())
            });
            match failing.or_else(|| extra(&comp)) {
                Some(remove) => {
                    let mut rest = set_of(succ.len(), comp.iter().copied());
                    for v in remove {
                        rest.set(v, false);
                    }
                    work.push(rest);
                }
                None => out.push(comp),
            }
        }
    }
    out
}

/// Owners of requirement-1 vertices; only their wins can enlarge the set of
/// usable vertices.
pub(crate) fn candidate_winners(game: &Game, req: &Requirement) -> Vec<PlayerId> {
    let mut ps: Vec<PlayerId> =
        game.vertices().filter(|&v| req.get(v) == ReqValue::One).map(|v| game.owner(v)).collect();
    ps.sort_unstable();
    ps.dedup();
    ps
}

/// Vertices usable by a consistent play in which at least the players of
/// `winners` win.
pub(crate) fn allowed_vertices(game: &Game, req: &Requirement, winners: &[PlayerId]) -> FixedBitSet {
    set_of(
        game.num_vertices(),
        game.vertices().filter(|&v| match req.get(v) {
            ReqValue::Zero => true,
            ReqValue::One => winners.contains(&game.owner(v)),
            ReqValue::Inf => false,
        }),
    )
}

pub(crate) fn subsets(items: &[PlayerId]) -> impl Iterator<Item = Vec<PlayerId>> + '_ {
    (0u64..1 << items.len())
        .map(move |mask| items.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &p)| p).collect())
}

/// Decides satisfiability and, when it holds, builds a certificate.
///
/// A consistent play is characterised by the set `S` of players it makes win:
/// it stays among the vertices with requirement 0 or with requirement 1 and
/// owner in `S`, and ends in a strongly connected set where every player of
/// `S` wins. The sets `S` are enumerated over owners of requirement-1 vertices.
pub fn satisfiable(game: &Game, req: &Requirement) -> Option<SatCertificate> {
    let n = game.num_vertices();
    let succ = game.adjacency();
    if !req.is_boolean() {
        return None;
    }
    let mut entries: Vec<Option<(Vec<VertexId>, Vec<VertexId>)>> = vec![None; n];
    let cands = candidate_winners(game, req);
    for s in subsets(&cands) {
        let allowed = allowed_vertices(game, req, &s);
        let comps = good_components(succ, &allowed, &s, |p, v| game.color(p, v), |_| None);
        if comps.is_empty() {
            continue;
        }
        let mut comp_of = vec![usize::MAX; n];
        for (k, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = k;
            }
        }
        let target = set_of(n, comps.iter().flatten().copied());
        for v in game.vertices() {
            if entries[v].is_some() || !allowed.contains(v) {
                continue;
            }
            if let Some(h) = shortest_path(succ, &[v], &target, &allowed) {
                let w = comps[comp_of[*h.last().unwrap()]].clone();
                entries[v] = Some((h, w));
            }
        }
        if entries.iter().all(Option::is_some) {
            break;
        }
    }
    let entries: Option<Vec<_>> = entries.into_iter().collect();
    entries.map(|entries| SatCertificate { entries })
}

/// Vertices from which some consistent play starts.
pub fn consistent_region(game: &Game, req: &Requirement) -> FixedBitSet {
    let n = game.num_vertices();
    let succ = game.adjacency();
    let mut region = FixedBitSet::with_capacity(n);
    if !req.is_boolean() {
        return region;
    }
    let pred: Vec<Vec<usize>> = game.vertices().map(|v| game.predecessors(v).to_vec()).collect();
    for s in subsets(&candidate_winners(game, req)) {
        let allowed = allowed_vertices(game, req, &s);
        let comps = good_components(succ, &allowed, &s, |p, v| game.color(p, v), |_| None);
        let starts: Vec<usize> = comps.into_iter().flatten().collect();
        region.union_with(&reachable(&pred, &starts, &allowed));
    }
    region
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::two_branch;

    #[test]
    fn consistency_on_two_branch() {
        let g = two_branch();
        let l1 = Requirement::ones(&g, &["c", "e"]).unwrap();
        let p = |s| LassoPlay::parse(&g, s).unwrap();
        assert!(consistent(&g, &l1, &p("a (b)^w")));
        assert!(!consistent(&g, &l1, &p("a c (d)^w")));
        assert!(consistent(&g, &Requirement::zero(5), &p("a c (d)^w")));
    }

    #[test]
    fn satisfiable_with_valid_certificate() {
        let g = two_branch();
        let star = Requirement::ones(&g, &["a", "c", "e"]).unwrap();
        let cert = satisfiable(&g, &star).expect("satisfiable");
        assert!(check_certificate(&g, &star, &cert).unwrap());
        for v in g.vertices() {
            assert!(consistent(&g, &star, &cert.lasso(&g, v).unwrap()));
        }
        let mut inf = star.clone();
        inf.0[1] = ReqValue::Inf;
        assert!(satisfiable(&g, &inf).is_none());
    }

    #[test]
    fn certificate_conditions() {
        let g = two_branch();
        let l1 = Requirement::ones(&g, &["c", "e"]).unwrap();
        let id = |s| g.vertex_id(s).unwrap();
        let good = SatCertificate {
            entries: vec![
                (vec![id("a"), id("b")], vec![id("b")]),
                (vec![id("b")], vec![id("b")]),
                (vec![id("c"), id("e")], vec![id("e")]),
                (vec![id("d")], vec![id("d")]),
                (vec![id("e")], vec![id("e")]),
            ],
        };
        assert!(check_certificate(&g, &l1, &good).unwrap());
        let mut bad = good.clone();
        bad.entries[id("c")] = (vec![id("c")], vec![id("b")]);
        assert!(check_certificate(&g, &l1, &bad).is_err());
        bad.entries[id("c")] = (vec![id("c"), id("d")], vec![id("d")]);
        assert!(!check_certificate(&g, &l1, &bad).unwrap());
        let json = good.to_json(&g).to_string();
        assert_eq!(SatCertificate::from_json(&g, &json).unwrap(), good);
    }

    #[test]
    fn requirement_json() {
        let g = two_branch();
        let r = Requirement::from_json(&g, r#"{"a":0,"b":1,"c":"inf","d":0,"e":1}"#).unwrap();
        assert_eq!(r.get(2), ReqValue::Inf);
        assert_eq!(Requirement::from_json(&g, &r.to_json(&g).to_string()).unwrap(), r);
        assert!(Requirement::from_json(&g, r#"{"a":0}"#).is_err());
        assert!(Requirement::from_json(&g, r#"{"a":2,"b":1,"c":0,"d":0,"e":1}"#).is_err());
    }
}
