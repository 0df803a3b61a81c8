//! Multiplayer parity arenas.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type PlayerId = usize;

/// A turn-based game on a finite graph where every player has a parity
/// objective: player `i` wins a play iff the least `i`-color seen infinitely
/// often is even.
///
/// Identifiers are interned: vertices and players are dense indices in the
/// order they were declared.
#[derive(Clone)]
pub struct Game {
    players: Vec<String>,
    vertices: Vec<String>,
    player_index: HashMap<String, PlayerId>,
    vertex_index: HashMap<String, VertexId>,
    owner: Vec<PlayerId>,
    /// `colors[player][vertex]`, as given.
    colors: Vec<Vec<u32>>,
    /// Same ordering and parity as `colors`, compressed to a dense range.
    dense: Vec<Vec<u32>>,
    edges: Vec<(VertexId, VertexId)>,
    succ: Vec<Vec<VertexId>>,
    pred: Vec<Vec<VertexId>>,
    initial: VertexId,
}

#[derive(Serialize, Deserialize)]
struct GameFile {
    players: Vec<String>,
    vertices: Vec<VertexEntry>,
    edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct VertexEntry {
    id: String,
    owner: String,
    colors: IndexMap<String, Value>,
}

/// `(id, owner, colors)` as given to the builder.
type VertexSpec = (String, String, Vec<(String, u32)>);

/// Incremental construction of a [`Game`]; `build` checks every invariant.
#[derive(Default, Clone)]
pub struct GameBuilder {
    players: Vec<String>,
    vertices: Vec<VertexSpec>,
    edges: Vec<(String, String)>,
    initial: Option<String>,
}

impl GameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn player(mut self, name: impl Into<String>) -> Self {
        self.players.push(name.into());
        self
    }

    pub fn players<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.players.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn vertex(mut self, id: &str, owner: &str, colors: &[(&str, u32)]) -> Self {
        self.add_vertex(id, owner, colors.iter().map(|&(p, c)| (p.to_string(), c)).collect());
        self
    }

    pub fn add_vertex(&mut self, id: &str, owner: &str, colors: Vec<(String, u32)>) {
        self.vertices.push((id.to_string(), owner.to_string(), colors));
    }

    pub fn edge(mut self, from: &str, to: &str) -> Self {
        self.add_edge(from, to);
        self
    }

    pub fn add_edge(&mut self, from: &str, to: &str) {
        self.edges.push((from.to_string(), to.to_string()));
    }

    pub fn initial(mut self, id: &str) -> Self {
        self.initial = Some(id.to_string());
        self
    }

    pub fn build(self) -> Result<Game> {
        if self.players.is_empty() {
            return Err(Error::InvalidGame("player list is empty".into()));
        }
        let mut player_index = HashMap::new();
        for (i, p) in self.players.iter().enumerate() {
            if player_index.insert(p.clone(), i).is_some() {
                return Err(Error::InvalidGame(format!("duplicate player `{p}`")));
            }
        }
        if self.players.len() > 64 {
            return Err(Error::InvalidGame("at most 64 players are supported".into()));
        }
        if self.vertices.is_empty() {
            return Err(Error::InvalidGame("vertex list is empty".into()));
        }
        let n = self.vertices.len();
        let mut vertex_index = HashMap::new();
        let mut owner = Vec::with_capacity(n);
        let mut colors = vec![vec![u32::MAX; n]; self.players.len()];
        let mut vertices = Vec::with_capacity(n);
        for (v, (id, own, cols)) in self.vertices.into_iter().enumerate() {
            if vertex_index.insert(id.clone(), v).is_some() {
                return Err(Error::InvalidGame(format!("duplicate vertex `{id}`")));
            }
            let o = *player_index.get(&own).ok_or_else(|| Error::UnknownPlayer(own.clone()))?;
            owner.push(o);
            for (p, c) in cols {
                let pi = *player_index.get(&p).ok_or_else(|| Error::UnknownPlayer(p.clone()))?;
                colors[pi][v] = c;
            }
            for (pi, row) in colors.iter().enumerate() {
                if row[v] == u32::MAX {
                    return Err(Error::InvalidGame(format!(
                        "vertex `{id}` has no color for player `{}`",
                        self.players[pi]
                    )));
                }
            }
            vertices.push(id);
        }
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        let mut edges = Vec::new();
        for (a, b) in &self.edges {
            let u = *vertex_index.get(a).ok_or_else(|| Error::UnknownVertex(a.clone()))?;
            let w = *vertex_index.get(b).ok_or_else(|| Error::UnknownVertex(b.clone()))?;
            if succ[u].contains(&w) {
                continue;
            }
            succ[u].push(w);
            pred[w].push(u);
            edges.push((u, w));
        }
        if let Some(v) = (0..n).find(|&v| succ[v].is_empty()) {
            return Err(Error::SinkWithoutLoop(vertices[v].clone()));
        }
        let initial = match self.initial {
            Some(id) => *vertex_index.get(&id).ok_or(Error::UnknownVertex(id))?,
            None => 0,
        };
        let dense = colors.iter().map(|row| compress_colors(row)).collect();
        Ok(Game {
            players: self.players,
            vertices,
            player_index,
            vertex_index,
            owner,
            colors,
            dense,
            edges,
            succ,
            pred,
            initial,
        })
    }
}

/// Rank colors densely while keeping their order and parity.
fn compress_colors(row: &[u32]) -> Vec<u32> {
    let mut distinct: Vec<u32> = row.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let mut rank = HashMap::new();
    let mut r = distinct.first().map_or(0, |c| c % 2);
    for (k, &c) in distinct.iter().enumerate() {
        if k > 0 && c % 2 != distinct[k - 1] % 2 {
            r += 1;
        }
        rank.insert(c, r);
    }
    row.iter().map(|c| rank[c]).collect()
}

impl Game {
    pub fn from_json(text: &str) -> Result<Game> {
        let file: GameFile = serde_json::from_str(text)?;
        let mut b = GameBuilder::new().players(file.players);
        for v in file.vertices {
            let mut cols = Vec::new();
            for (p, c) in v.colors {
                let c = c.as_u64().and_then(|c| u32::try_from(c).ok()).filter(|&c| c != u32::MAX).ok_or_else(|| {
                    Error::InvalidGame(format!("color of `{}` for player `{p}` is not a natural number: {c}", v.id))
                })?;
                cols.push((p, c));
            }
            b.add_vertex(&v.id, &v.owner, cols);
        }
        for (a, c) in file.edges {
            b.add_edge(&a, &c);
        }
        if let Some(init) = file.initial {
            b = b.initial(&init);
        }
        b.build()
    }

    pub fn to_json(&self) -> String {
        let file = GameFile {
            players: self.players.clone(),
            vertices: (0..self.num_vertices())
                .map(|v| VertexEntry {
                    id: self.vertices[v].clone(),
                    owner: self.players[self.owner[v]].clone(),
                    colors: (0..self.num_players())
                        .map(|p| (self.players[p].clone(), Value::from(self.colors[p][v])))
                        .collect(),
                })
                .collect(),
            edges: self.edges.iter().map(|&(a, b)| (self.vertices[a].clone(), self.vertices[b].clone())).collect(),
            initial: Some(self.vertices[self.initial].clone()),
        };
        serde_json::to_string_pretty(&file).expect("game serialization cannot fail")
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.vertices.len()
    }

    pub fn players(&self) -> std::ops::Range<PlayerId> {
        0..self.players.len()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v]
    }

    pub fn player_name(&self, p: PlayerId) -> &str {
        &self.players[p]
    }

    pub fn vertex_id(&self, name: &str) -> Result<VertexId> {
        self.vertex_index.get(name).copied().ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn player_id(&self, name: &str) -> Result<PlayerId> {
        self.player_index.get(name).copied().ok_or_else(|| Error::UnknownPlayer(name.to_string()))
    }

    pub fn owner(&self, v: VertexId) -> PlayerId {
        self.owner[v]
    }

    pub fn color(&self, p: PlayerId, v: VertexId) -> u32 {
        self.colors[p][v]
    }

    /// Order- and parity-preserving rank of `color(p, v)` among `p`'s colors.
    pub fn dense_color(&self, p: PlayerId, v: VertexId) -> u32 {
        self.dense[p][v]
    }

    /// Smallest even number strictly above every dense color.
    pub fn dense_bound(&self) -> u32 {
        let max = self.dense.iter().flatten().copied().max().unwrap_or(0);
        (max + 1) + (max + 1) % 2
    }

    /// Distinct colors of player `p`, ascending.
    pub fn colors_of(&self, p: PlayerId) -> Vec<u32> {
        let mut c = self.colors[p].clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.succ[v]
    }

    pub fn predecessors(&self, v: VertexId) -> &[VertexId] {
        &self.pred[v]
    }

    pub fn adjacency(&self) -> &[Vec<VertexId>] {
        &self.succ
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.succ[u].contains(&v)
    }

    pub fn initial(&self) -> VertexId {
        self.initial
    }

    /// Least color of player `p` over `set`, or `None` for an empty set.
    pub fn min_color<I: IntoIterator<Item = VertexId>>(&self, p: PlayerId, set: I) -> Option<u32> {
        set.into_iter().map(|v| self.colors[p][v]).min()
    }

    pub fn vertices_of(&self, p: PlayerId) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(move |&v| self.owner[v] == p)
    }

    /// A copy of this game keeping only the given edges. Every vertex must
    /// keep at least one outgoing edge.
    pub fn restrict_edges(&self, keep: &[(VertexId, VertexId)]) -> Result<Game> {
        let mut g = self.clone();
        g.succ = vec![Vec::new(); self.num_vertices()];
        g.pred = vec![Vec::new(); self.num_vertices()];
        g.edges.clear();
        for &(u, v) in &self.edges {
            if keep.contains(&(u, v)) {
                g.succ[u].push(v);
                g.pred[v].push(u);
                g.edges.push((u, v));
            }
        }
        if let Some(v) = g.vertices().find(|&v| g.succ[v].is_empty()) {
            return Err(Error::SinkWithoutLoop(g.vertices[v].clone()));
        }
        Ok(g)
    }
}

impl fmt::Debug for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Game")
            .field("players", &self.players)
            .field("vertices", &self.vertices)
            .field("edges", &self.edges.len())
            .finish()
    }
}
