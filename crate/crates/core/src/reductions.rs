//! Game generators from CNF formulas and Kripke structures.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Game, GameBuilder};
use crate::ltl::Ltl;
use crate::requirements::{ReqValue, Requirement};

/// Conjunction of clauses; literal `k` is variable `|k|`, negated when `k < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new(vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        let cnf = Cnf { vars, clauses };
        cnf.validate()?;
        Ok(cnf)
    }

    fn validate(&self) -> Result<()> {
        if self.clauses.is_empty() {
            return Err(Error::Cnf("no clauses".into()));
        }
        for (j, c) in self.clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::Cnf(format!("clause {} is empty", j + 1)));
            }
            if let Some(&l) = c.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > self.vars) {
                return Err(Error::Cnf(format!("literal {l} in clause {} is out of range", j + 1)));
            }
        }
        Ok(())
    }

    /// DIMACS: comment lines `c ...`, a `p cnf V C` header, 0-terminated clauses.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut vars = None;
        let mut clauses = Vec::new();
        let mut cur = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                match parts.as_slice() {
                    ["cnf", v, _c] => vars = Some(v.parse().map_err(|_| Error::Cnf(format!("bad header `{line}`")))?),
                    _ => return Err(Error::Cnf(format!("bad header `{line}`"))),
                }
                continue;
            }
            for tok in line.split_whitespace() {
                let l: i32 = tok.parse().map_err(|_| Error::Cnf(format!("bad literal `{tok}`")))?;
                if l == 0 {
                    clauses.push(std::mem::take(&mut cur));
                } else {
                    cur.push(l);
                }
            }
        }
        if !cur.is_empty() {
            clauses.push(cur);
        }
        let vars = vars.ok_or_else(|| Error::Cnf("missing `p cnf` header".into()))?;
        Cnf::new(vars, clauses)
    }

    /// `x1 | ~x2; x2`: clauses separated by `;`, literals by `|`.
    pub fn parse_inline(text: &str) -> Result<Self> {
        let mut clauses = Vec::new();
        let mut vars = 0;
        for clause in text.split(';').map(str::trim).filter(|c| !c.is_empty()) {
            let mut lits = Vec::new();
            for lit in clause.split('|').map(str::trim) {
                let (neg, name) = match lit.strip_prefix('~').or_else(|| lit.strip_prefix('!')) {
                    Some(rest) => (true, rest.trim()),
                    None => (false, lit),
                };
                let k: usize = name
                    .strip_prefix('x')
                    .and_then(|d| d.parse().ok())
                    .filter(|&k| k > 0)
                    .ok_or_else(|| Error::Cnf(format!("bad literal `{lit}`")))?;
                vars = vars.max(k);
                let k = i32::try_from(k).map_err(|_| Error::Cnf(format!("variable index too large in `{lit}`")))?;
                lits.push(if neg { -k } else { k });
            }
            clauses.push(lits);
        }
        Cnf::new(vars, clauses)
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    /// First satisfying assignment in binary counting order.
    pub fn brute_force(&self) -> Option<Vec<bool>> {
        (0u64..1 << self.vars)
            .map(|m| (0..self.vars).map(|k| m >> k & 1 == 1).collect::<Vec<bool>>())
            .find(|a| self.eval(a))
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clauses: Vec<String> =
            self.clauses.iter().map(|c| c.iter().map(|&l| lit_name(l)).collect::<Vec<_>>().join(" | ")).collect();
        write!(f, "{}", clauses.join("; "))
    }
}

pub fn lit_name(l: i32) -> String {
    if l > 0 {
        format!("x{l}")
    } else {
        format!("~x{}", -l)
    }
}

pub const SOLVER: &str = "Solver";
pub const OPPONENT: &str = "Opponent";

fn literal_players(vars: usize) -> Vec<String> {
    (1..=vars as i32).flat_map(|k| [lit_name(k), lit_name(-k)]).collect()
}

/// Adds one copy of the clause gadget to `b`, with ids prefixed by `prefix`.
/// The back edges of the last clause go to `back` (the first clause when `None`).
fn add_clause_gadget(
    b: &mut GameBuilder,
    cnf: &Cnf,
    prefix: &str,
    players: &[String],
    back: Option<&str>,
    extra_colors: &[(String, u32)],
) {
    let clause = |j: usize| format!("{prefix}C{}", j + 1);
    let bot = format!("{prefix}bot");
    let colors = |owner_neg: Option<i32>, is_bot: bool| -> Vec<(String, u32)> {
        let mut cols: Vec<(String, u32)> = players
            .iter()
            .map(|p| {
                let c = match owner_neg {
                    Some(l) if *p == lit_name(-l) => 1,
                    _ => 2,
                };
                (p.clone(), c)
            })
            .collect();
        cols.push((SOLVER.to_string(), if is_bot { 1 } else { 2 }));
        cols.extend(extra_colors.iter().map(|(p, c)| (p.clone(), if is_bot { 2 } else { *c })));
        cols
    };
    let m = cnf.clauses.len();
    for (j, c) in cnf.clauses.iter().enumerate() {
        b.add_vertex(&clause(j), SOLVER, colors(None, false));
        let mut seen = Vec::new();
        for &l in c {
            if seen.contains(&l) {
                continue;
            }
            seen.push(l);
            let id = format!("{}:{}", clause(j), lit_name(l));
            b.add_vertex(&id, &lit_name(l), colors(Some(l), false));
        }
    }
    b.add_vertex(&bot, SOLVER, colors(None, true));
    for (j, c) in cnf.clauses.iter().enumerate() {
        let mut seen = Vec::new();
        for &l in c {
            if seen.contains(&l) {
                continue;
            }
            seen.push(l);
            let id = format!("{}:{}", clause(j), lit_name(l));
            b.add_edge(&clause(j), &id);
            let next = if j + 1 == m { back.map_or_else(|| clause(0), str::to_string) } else { clause(j + 1) };
            b.add_edge(&id, &next);
            b.add_edge(&id, &bot);
        }
    }
    b.add_edge(&bot, &bot);
}

/// The clause game of a formula.
///
/// Solver owns the clause states and `bot`, and wins iff `bot` is avoided.
/// The player of literal `L` owns the states `(C, L)` and loses iff states
/// `(C, ~L)` recur. From each `(C, L)` the play goes on to the next clause
/// (cyclically) or falls into `bot`.
pub fn gen_sat_game(cnf: &Cnf) -> Result<Game> {
    cnf.validate()?;
    let mut players = literal_players(cnf.vars);
    let lits = players.clone();
    players.push(SOLVER.to_string());
    let mut b = GameBuilder::new().players(players);
    add_clause_gadget(&mut b, cnf, "", &lits, None, &[]);
    b.initial("C1").build()
}

/// Two clause games side by side, each entered through a fresh Opponent
/// vertex placed before its first clause, with the requirement that is the
/// least fixed point iff the first formula is satisfiable and the second
/// is not.
pub fn gen_bh2_game(cnf1: &Cnf, cnf2: &Cnf) -> Result<(Game, Requirement)> {
    cnf1.validate()?;
    cnf2.validate()?;
    let vars = cnf1.vars.max(cnf2.vars);
    let lits = literal_players(vars);
    let mut players = lits.clone();
    players.push(SOLVER.to_string());
    players.push(OPPONENT.to_string());
    let mut b = GameBuilder::new().players(players.clone());
    let opp = [(OPPONENT.to_string(), 1)];
    for (k, cnf) in [(1, cnf1), (2, cnf2)] {
        let v = format!("v{k}");
        let prefix = format!("G{k}.");
        let mut cols: Vec<(String, u32)> = players.iter().map(|p| (p.clone(), 2)).collect();
        cols.last_mut().unwrap().1 = 1;
        b.add_vertex(&v, OPPONENT, cols);
        add_clause_gadget(&mut b, cnf, &prefix, &lits, Some(&v), &opp);
        b.add_edge(&v, &format!("{prefix}C1"));
    }
    let game = b.initial("v1").build()?;
    let mut req = Requirement::zero(game.num_vertices());
    let solver = game.player_id(SOLVER)?;
    let opponent = game.player_id(OPPONENT)?;
    for v in game.vertices() {
        let o = game.owner(v);
        req.0[v] = ReqValue::from_bool(o != solver && o != opponent);
    }
    req.0[game.vertex_id("v2")?] = ReqValue::One;
    Ok((game, req))
}

/// Finite transition system with atomic propositions on states.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Kripke {
    pub atoms: Vec<String>,
    pub states: Vec<String>,
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub val: IndexMap<String, Vec<String>>,
}

impl Kripke {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One-player game on the structure where every play is won, so every play
/// is an equilibrium outcome, with the formula's atoms replaced by the
/// disjunction of the states that carry them.
pub fn kripke_to_game(k: &Kripke, formula: &Ltl) -> Result<(Game, Ltl)> {
    if k.states.is_empty() {
        return Err(Error::Kripke("no states".into()));
    }
    for (s, atoms) in &k.val {
        if !k.states.contains(s) {
            return Err(Error::Kripke(format!("valuation of unknown state `{s}`")));
        }
        if let Some(a) = atoms.iter().find(|a| !k.atoms.contains(a)) {
            return Err(Error::Kripke(format!("unknown atom `{a}` at `{s}`")));
        }
    }
    let mut b = GameBuilder::new().player(SOLVER);
    for s in &k.states {
        b.add_vertex(s, SOLVER, vec![(SOLVER.to_string(), 2)]);
    }
    for (x, y) in &k.edges {
        b.add_edge(x, y);
    }
    let game = b.build().map_err(|e| match e {
        Error::SinkWithoutLoop(s) => Error::Kripke(format!("relation is not total at `{s}`")),
        e => e,
    })?;
    if let Some(a) = formula.atoms().into_iter().find(|a| !k.atoms.contains(a)) {
        return Err(Error::Kripke(format!("formula uses unknown atom `{a}`")));
    }
    let rewritten = formula.map_atoms(&|a| {
        k.states
            .iter()
            .filter(|s| k.val.get(*s).is_some_and(|xs| xs.iter().any(|x| x == a)))
            .map(|s| Ltl::atom(s))
            .reduce(Ltl::or)
            .unwrap_or(Ltl::False)
    });
    Ok((game, rewritten))
}
