//! Ultimately periodic plays `prefix · cycle^ω`.

use std::collections::HashSet;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::game::{Game, PlayerId, VertexId};
use crate::graph::{covering_cycle, set_of, shortest_path, walk_through};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LassoPlay {
    pub prefix: Vec<VertexId>,
    pub cycle: Vec<VertexId>,
}

/// One bit per player: `true` iff the player wins.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PayoffVector(pub Vec<bool>);

impl PayoffVector {
    pub fn get(&self, p: PlayerId) -> bool {
        self.0[p]
    }

    pub fn display(&self, game: &Game) -> String {
        game.players().map(|p| format!("{}={}", game.player_name(p), u8::from(self.0[p]))).collect::<Vec<_>>().join(",")
    }
}

impl LassoPlay {
    pub fn new(prefix: Vec<VertexId>, cycle: Vec<VertexId>) -> Self {
        LassoPlay { prefix, cycle }
    }

    /// `v^ω`
    pub fn constant(v: VertexId) -> Self {
        LassoPlay { prefix: Vec::new(), cycle: vec![v] }
    }

    /// Parse `a b (c d)^w`. The `^w` suffix is optional.
    pub fn parse(game: &Game, text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidPlay(format!("{msg} in `{text}`"));
        let open = text.find('(').ok_or_else(|| bad("missing `(`"))?;
        let close = text.rfind(')').ok_or_else(|| bad("missing `)`"))?;
        if close < open {
            return Err(bad("unbalanced parentheses"));
        }
        let tail = text[close + 1..].trim();
        if !(tail.is_empty() || tail == "^w" || tail == "^ω") {
            return Err(bad("unexpected text after the cycle"));
        }
        let ids = |s: &str| -> Result<Vec<VertexId>> { s.split_whitespace().map(|t| game.vertex_id(t)).collect() };
        let play = LassoPlay { prefix: ids(&text[..open])?, cycle: ids(&text[open + 1..close])? };
        play.validate(game)?;
        Ok(play)
    }

    pub fn display<'a>(&'a self, game: &'a Game) -> impl fmt::Display + 'a {
        LassoDisplay { play: self, game }
    }

    pub fn validate(&self, game: &Game) -> Result<()> {
        if self.cycle.is_empty() {
            return Err(Error::InvalidPlay("empty cycle".into()));
        }
        if let Some(&v) = self.prefix.iter().chain(&self.cycle).find(|&&v| v >= game.num_vertices()) {
            return Err(Error::InvalidPlay(format!("vertex index {v} out of range")));
        }
        let path: Vec<VertexId> = self.prefix.iter().chain(&self.cycle).copied().collect();
        for w in path.windows(2) {
            if !game.has_edge(w[0], w[1]) {
                return Err(Error::InvalidPlay(format!(
                    "no edge {} -> {}",
                    game.vertex_name(w[0]),
                    game.vertex_name(w[1])
                )));
            }
        }
        let (last, first) = (*self.cycle.last().unwrap(), self.cycle[0]);
        if !game.has_edge(last, first) {
            return Err(Error::InvalidPlay(format!(
                "cycle does not close: no edge {} -> {}",
                game.vertex_name(last),
                game.vertex_name(first)
            )));
        }
        Ok(())
    }

    pub fn start(&self) -> VertexId {
        self.prefix.first().copied().unwrap_or(self.cycle[0])
    }

    /// Vertex at position `k` of the infinite play.
    pub fn at(&self, k: usize) -> VertexId {
        if k < self.prefix.len() {
            self.prefix[k]
        } else {
            self.cycle[(k - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Number of stored positions, `|prefix| + |cycle|`.
    pub fn stored_len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn inf_set(&self, n: usize) -> FixedBitSet {
        set_of(n, self.cycle.iter().copied())
    }

    pub fn occ_set(&self, n: usize) -> FixedBitSet {
        set_of(n, self.prefix.iter().chain(&self.cycle).copied())
    }

    /// Whether player `p` wins, assuming the play is valid.
    pub fn wins(&self, game: &Game, p: PlayerId) -> bool {
        game.min_color(p, self.cycle.iter().copied()).is_some_and(|c| c % 2 == 0)
    }

    pub fn payoff(&self, game: &Game) -> Result<PayoffVector> {
        self.validate(game)?;
        Ok(PayoffVector(game.players().map(|p| self.wins(game, p)).collect()))
    }

    /// The set of `(occurrence set, current vertex)` pairs met along the play.
    /// After `|prefix| + |cycle|` positions the occurrence set is final, and one
    /// more lap of the cycle pairs it with every cycle vertex.
    fn milestones(&self) -> HashSet<(Vec<VertexId>, VertexId)> {
        let mut occ: Vec<VertexId> = Vec::new();
        let mut out = HashSet::new();
        for k in 0..self.prefix.len() + 2 * self.cycle.len() {
            let v = self.at(k);
            if let Err(pos) = occ.binary_search(&v) {
                occ.insert(pos, v);
            }
            out.insert((occ.clone(), v));
        }
        out
    }

    /// Occurrence-equivalence: equal `Inf` sets and, for every prefix of one
    /// play, a prefix of the other with the same occurrence set and last vertex.
    pub fn occ_equiv(&self, other: &LassoPlay) -> bool {
        let inf = |p: &LassoPlay| {
            let mut c = p.cycle.clone();
            c.sort_unstable();
            c.dedup();
            c
        };
        inf(self) == inf(other) && self.milestones() == other.milestones()
    }

    /// An occurrence-equivalent lasso with `|prefix| ≤ n³ + n²` and
    /// `|cycle| ≤ n²`.
    ///
    /// The play is cut into stages on which its occurrence set is constant.
    /// Each stage is replayed by a walk visiting the same vertices in order of
    /// first occurrence, followed by a shortest hop to the next new vertex; the
    /// last stage ends with a covering cycle of `Inf`.
    pub fn reduce(&self, game: &Game) -> Result<LassoPlay> {
        self.validate(game)?;
        let n = game.num_vertices();
        let succ = game.adjacency();

        // stages[s] = vertices seen while the occurrence set was W_s, in order
        // of first occurrence within the stage
        let mut stages: Vec<Vec<VertexId>> = Vec::new();
        let mut occ = FixedBitSet::with_capacity(n);
        for k in 0..self.prefix.len() + 2 * self.cycle.len() {
            let v = self.at(k);
            if !occ.put(v) {
                stages.push(vec![v]);
            } else if !stages.last().unwrap().contains(&v) {
                stages.last_mut().unwrap().push(v);
            }
        }
        let inf = self.inf_set(n);

        let mut walk: Vec<VertexId> = vec![stages[0][0]];
        for (s, stage) in stages.iter().enumerate() {
            let cur = *walk.last().unwrap();
            let within = set_of(n, stage.iter().copied());
            let through = walk_through(succ, cur, stage, &within).ok_or_else(|| internal("stage walk"))?;
            walk.extend_from_slice(&through[1..]);
            let cur = *walk.last().unwrap();
            let hop = match stages.get(s + 1) {
                Some(next) => {
                    let mut w = within.clone();
                    w.insert(next[0]);
                    shortest_path(succ, &[cur], &set_of(n, [next[0]]), &w)
                }
                None => shortest_path(succ, &[cur], &inf, &within),
            }
            .ok_or_else(|| internal("stage exit"))?;
            walk.extend_from_slice(&hop[1..]);
        }
        let entry = walk.pop().expect("walk is non-empty");
        let cycle = covering_cycle(succ, entry, &inf).ok_or_else(|| internal("covering cycle"))?;
        let out = LassoPlay { prefix: walk, cycle };
        debug_assert!(out.validate(game).is_ok());
        Ok(out)
    }

    /// Same infinite play, written with the shortest cycle and prefix.
    pub fn normalize(mut self) -> LassoPlay {
        let len = self.cycle.len();
        if let Some(d) =
            (1..len).find(|&d| len.is_multiple_of(d) && (d..len).all(|k| self.cycle[k] == self.cycle[k - d]))
        {
            self.cycle.truncate(d);
        }
        while self.prefix.last().is_some_and(|v| v == self.cycle.last().unwrap()) {
            self.prefix.pop();
            self.cycle.rotate_right(1);
        }
        self
    }

    /// Whether the lasso meets the size bounds of reduced plays.
    pub fn is_reduced(&self, n: usize) -> bool {
        self.prefix.len() <= n * n * n + n * n && self.cycle.len() <= n * n
    }
}

fn internal(what: &str) -> Error {
    Error::Internal(format!("lasso reduction: {what} not found"))
}

struct LassoDisplay<'a> {
    play: &'a LassoPlay,
    game: &'a Game,
}

impl fmt::Display for LassoDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &v in &self.play.prefix {
            write!(f, "{} ", self.game.vertex_name(v))?;
        }
        let cycle: Vec<&str> = self.play.cycle.iter().map(|&v| self.game.vertex_name(v)).collect();
        write!(f, "({})^w", cycle.join(" "))
    }
}
