//! LTL over vertex atoms: at each position exactly the current vertex holds.

use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::game::{Game, VertexId};
use crate::lasso::LassoPlay;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ltl {
    True,
    False,
    Atom(String),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Finally(Box<Ltl>),
    Globally(Box<Ltl>),
}

impl Ltl {
    pub fn atom(s: &str) -> Ltl {
        Ltl::Atom(s.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Ltl {
        Ltl::Not(Box::new(self))
    }

    pub fn and(self, o: Ltl) -> Ltl {
        Ltl::And(Box::new(self), Box::new(o))
    }

    pub fn or(self, o: Ltl) -> Ltl {
        Ltl::Or(Box::new(self), Box::new(o))
    }

    pub fn implies(self, o: Ltl) -> Ltl {
        Ltl::Implies(Box::new(self), Box::new(o))
    }

    pub fn next(self) -> Ltl {
        Ltl::Next(Box::new(self))
    }

    pub fn until(self, o: Ltl) -> Ltl {
        Ltl::Until(Box::new(self), Box::new(o))
    }

    pub fn finally(self) -> Ltl {
        Ltl::Finally(Box::new(self))
    }

    pub fn globally(self) -> Ltl {
        Ltl::Globally(Box::new(self))
    }

    pub fn size(&self) -> usize {
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => 1,
            Ltl::Not(a) | Ltl::Next(a) | Ltl::Finally(a) | Ltl::Globally(a) => 1 + a.size(),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Implies(a, b) | Ltl::Until(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<String>) {
        match self {
            Ltl::True | Ltl::False => {}
            Ltl::Atom(a) => out.push(a.clone()),
            Ltl::Not(a) | Ltl::Next(a) | Ltl::Finally(a) | Ltl::Globally(a) => a.collect_atoms(out),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Implies(a, b) | Ltl::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Replaces every atom by the formula `f` returns for it.
    pub fn map_atoms(&self, f: &impl Fn(&str) -> Ltl) -> Ltl {
        let b = |x: &Ltl| Box::new(x.map_atoms(f));
        match self {
            Ltl::True => Ltl::True,
            Ltl::False => Ltl::False,
            Ltl::Atom(a) => f(a),
            Ltl::Not(a) => Ltl::Not(b(a)),
            Ltl::Next(a) => Ltl::Next(b(a)),
            Ltl::Finally(a) => Ltl::Finally(b(a)),
            Ltl::Globally(a) => Ltl::Globally(b(a)),
            Ltl::And(x, y) => Ltl::And(b(x), b(y)),
            Ltl::Or(x, y) => Ltl::Or(b(x), b(y)),
            Ltl::Implies(x, y) => Ltl::Implies(b(x), b(y)),
            Ltl::Until(x, y) => Ltl::Until(b(x), b(y)),
        }
    }
}

fn needs_quotes(a: &str) -> bool {
    a.is_empty() || matches!(a, "X" | "F" | "G" | "U" | "true" | "false") || !a.chars().all(is_ident_char)
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ltl::True => write!(f, "true"),
            Ltl::False => write!(f, "false"),
            Ltl::Atom(a) if needs_quotes(a) => write!(f, "\"{a}\""),
            Ltl::Atom(a) => write!(f, "{a}"),
            Ltl::Not(a) => write!(f, "!({a})"),
            Ltl::Next(a) => write!(f, "X ({a})"),
            Ltl::Finally(a) => write!(f, "F ({a})"),
            Ltl::Globally(a) => write!(f, "G ({a})"),
            Ltl::And(a, b) => write!(f, "({a}) & ({b})"),
            Ltl::Or(a, b) => write!(f, "({a}) | ({b})"),
            Ltl::Implies(a, b) => write!(f, "({a}) -> ({b})"),
            Ltl::Until(a, b) => write!(f, "({a}) U ({b})"),
        }
    }
}

// ---------------------------------------------------------------- parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Not,
    And,
    Or,
    Implies,
    LParen,
    RParen,
    Next,
    Finally,
    Globally,
    Until,
    True,
    False,
    Ident(String),
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | ':' | '~' | '\'')
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut k = 0;
    while k < chars.len() {
        let (pos, c) = chars[k];
        match c {
            c if c.is_whitespace() => k += 1,
            '!' => {
                out.push((pos, Tok::Not));
                k += 1;
            }
            '&' => {
                out.push((pos, Tok::And));
                k += 1;
            }
            '|' => {
                out.push((pos, Tok::Or));
                k += 1;
            }
            '(' => {
                out.push((pos, Tok::LParen));
                k += 1;
            }
            ')' => {
                out.push((pos, Tok::RParen));
                k += 1;
            }
            '-' if chars.get(k + 1).map(|x| x.1) == Some('>') => {
                out.push((pos, Tok::Implies));
                k += 2;
            }
            '"' => {
                let end = chars[k + 1..]
                    .iter()
                    .position(|&(_, c)| c == '"')
                    .ok_or_else(|| Error::Syntax { pos, msg: "unterminated quoted atom".into() })?;
                let s: String = chars[k + 1..k + 1 + end].iter().map(|x| x.1).collect();
                out.push((pos, Tok::Ident(s)));
                k += end + 2;
            }
            c if is_ident_char(c) => {
                let start = k;
                while k < chars.len() && is_ident_char(chars[k].1) {
                    k += 1;
                }
                let word: String = chars[start..k].iter().map(|x| x.1).collect();
                let tok = match word.as_str() {
                    "X" => Tok::Next,
                    "F" => Tok::Finally,
                    "G" => Tok::Globally,
                    "U" => Tok::Until,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word),
                };
                out.push((pos, tok));
            }
            other => return Err(Error::Syntax { pos, msg: format!("unexpected character `{other}`") }),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<Ltl> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            return Ok(lhs.implies(self.implication()?));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Ltl> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Or) {
            lhs = lhs.or(self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Ltl> {
        let mut lhs = self.until()?;
        while self.eat(&Tok::And) {
            lhs = lhs.and(self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Ltl> {
        let lhs = self.unary()?;
        if self.eat(&Tok::Until) {
            return Ok(lhs.until(self.until()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ltl> {
        let pos = self.pos();
        let Some(t) = self.peek().cloned() else {
            return Err(Error::Syntax { pos, msg: "unexpected end of formula".into() });
        };
        self.at += 1;
        match t {
            Tok::Not => Ok(self.unary()?.not()),
            Tok::Next => Ok(self.unary()?.next()),
            Tok::Finally => Ok(self.unary()?.finally()),
            Tok::Globally => Ok(self.unary()?.globally()),
            Tok::True => Ok(Ltl::True),
            Tok::False => Ok(Ltl::False),
            Tok::Ident(s) => Ok(Ltl::Atom(s)),
            Tok::LParen => {
                let f = self.implication()?;
                if !self.eat(&Tok::RParen) {
                    return Err(Error::Syntax { pos: self.pos(), msg: "expected `)`".into() });
                }
                Ok(f)
            }
            other => Err(Error::Syntax { pos, msg: format!("unexpected {other:?}") }),
        }
    }
}

/// Parses the ASCII syntax `! & | -> X U F G true false`, with atoms made of
/// letters, digits and `_ . : ~ '`, or any text between double quotes.
/// Binding strength, tightest first: unary operators, `U`, `&`, `|`, `->`.
pub fn parse_ltl(text: &str) -> Result<Ltl> {
    let mut p = Parser { toks: lex(text)?, at: 0, end: text.len() };
    let f = p.implication()?;
    if p.at != p.toks.len() {
        return Err(Error::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(f)
}

// ------------------------------------------------------------ core formulas

/// Formula over the core operators, flattened so that children come before
/// their parents.
#[derive(Clone, Debug)]
pub struct Core {
    pub nodes: Vec<Node>,
    root: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    True,
    Atom(VertexId),
    Not(usize),
    And(usize, usize),
    Next(usize),
    Until(usize, usize),
}

impl Core {
    pub fn root(&self) -> usize {
        self.root
    }

    fn push(&mut self, n: Node) -> usize {
        if let Some(k) = self.nodes.iter().position(|&m| m == n) {
            return k;
        }
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn lower(&mut self, f: &Ltl, atom: &impl Fn(&str) -> Result<VertexId>) -> Result<usize> {
        Ok(match f {
            Ltl::True => self.push(Node::True),
            Ltl::False => {
                let t = self.push(Node::True);
                self.push(Node::Not(t))
            }
            Ltl::Atom(a) => self.push(Node::Atom(atom(a)?)),
            Ltl::Not(a) => {
                let x = self.lower(a, atom)?;
                self.push(Node::Not(x))
            }
            Ltl::And(a, b) => {
                let (x, y) = (self.lower(a, atom)?, self.lower(b, atom)?);
                self.push(Node::And(x, y))
            }
            Ltl::Or(a, b) => {
                let (x, y) = (self.lower(a, atom)?, self.lower(b, atom)?);
                let (nx, ny) = (self.push(Node::Not(x)), self.push(Node::Not(y)));
                let c = self.push(Node::And(nx, ny));
                self.push(Node::Not(c))
            }
            Ltl::Implies(a, b) => self.lower(&a.as_ref().clone().not().or(b.as_ref().clone()), atom)?,
            Ltl::Next(a) => {
                let x = self.lower(a, atom)?;
                self.push(Node::Next(x))
            }
            Ltl::Until(a, b) => {
                let (x, y) = (self.lower(a, atom)?, self.lower(b, atom)?);
                self.push(Node::Until(x, y))
            }
            Ltl::Finally(a) => self.lower(&Ltl::True.until(a.as_ref().clone()), atom)?,
            Ltl::Globally(a) => self.lower(&a.as_ref().clone().not().finally().not(), atom)?,
        })
    }

    /// Binds atoms to the vertices of `game`.
    pub fn bind(f: &Ltl, game: &Game) -> Result<Core> {
        let mut c = Core { nodes: Vec::new(), root: 0 };
        c.root = c.lower(f, &|a| game.vertex_id(a))?;
        Ok(c)
    }

    /// Truth value of every node at every stored position of `play`.
    fn table(&self, play: &LassoPlay) -> Vec<Vec<bool>> {
        let len = play.stored_len();
        let succ = |k: usize| if k + 1 < len { k + 1 } else { play.prefix.len() };
        let mut t: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let row = match *node {
                Node::True => vec![true; len],
                Node::Atom(v) => (0..len).map(|k| play.at(k) == v).collect(),
                Node::Not(a) => t[a].iter().map(|x| !x).collect(),
                Node::And(a, b) => (0..len).map(|k| t[a][k] && t[b][k]).collect(),
                Node::Next(a) => (0..len).map(|k| t[a][succ(k)]).collect(),
                Node::Until(a, b) => {
                    let mut row = t[b].clone();
                    let mut changed = true;
                    while changed {
                        changed = false;
                        for k in (0..len).rev() {
                            if !row[k] && t[a][k] && row[succ(k)] {
                                row[k] = true;
                                changed = true;
                            }
                        }
                    }
                    row
                }
            };
            t.push(row);
        }
        t
    }
}

/// Whether the play satisfies the formula at position 0.
pub fn eval_lasso(formula: &Ltl, game: &Game, play: &LassoPlay) -> Result<bool> {
    let core = Core::bind(formula, game)?;
    Ok(core.table(play)[core.root()][0])
}

// --------------------------------------------------------------------- GBA

/// Letter condition of an automaton state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Guard {
    Is(VertexId),
    NoneOf(Vec<VertexId>),
}

impl Guard {
    pub fn matches(&self, v: VertexId) -> bool {
        match self {
            Guard::Is(x) => *x == v,
            Guard::NoneOf(xs) => !xs.contains(&v),
        }
    }
}

/// Generalized Büchi automaton with state-based labels: a run reads the
/// letter allowed by each state it visits.
#[derive(Clone, Debug)]
pub struct Gba {
    /// Truth value of each core node in each state.
    pub states: Vec<Vec<bool>>,
    pub guard: Vec<Guard>,
    pub succ: Vec<Vec<usize>>,
    pub initial: Vec<usize>,
    pub acceptance: Vec<FixedBitSet>,
}

/// Tableau over elementary sets of the core closure. Each state fixes the
/// truth value of every subformula at the current position; transitions
/// enforce the one-step meaning of `X` and `U`; each `U` contributes the
/// acceptance set of states where it is false or its right side holds.
pub fn ltl_to_gba(core: &Core) -> Gba {
    let atoms: Vec<VertexId> =
        core.nodes.iter().filter_map(|n| if let Node::Atom(v) = n { Some(*v) } else { None }).collect();
    let mut states = Vec::new();
    let mut guard = Vec::new();
    let mut choices: Vec<Option<VertexId>> = atoms.iter().map(|&a| Some(a)).collect();
    choices.push(None);
    for letter in choices {
        let mut partial = Vec::new();
        expand(core, letter, 0, &mut partial, &mut states, &mut guard, &atoms);
    }
    let n = states.len();
    let nexts: Vec<(usize, usize)> = core
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(k, n)| if let Node::Next(a) = n { Some((k, *a)) } else { None })
        .collect();
    let untils: Vec<(usize, usize, usize)> = core
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(k, n)| if let Node::Until(a, b) = n { Some((k, *a, *b)) } else { None })
        .collect();
    let mut succ = vec![Vec::new(); n];
    for (s, b) in states.iter().enumerate() {
        for (t, b2) in states.iter().enumerate() {
            let next_ok = nexts.iter().all(|&(k, a)| b[k] == b2[a]);
            let until_ok = untils.iter().all(|&(k, x, y)| b[k] == (b[y] || (b[x] && b2[k])));
            if next_ok && until_ok {
                succ[s].push(t);
            }
        }
    }
    let root = core.root();
    let initial = (0..n).filter(|&s| states[s][root]).collect();
    let acceptance = untils
        .iter()
        .map(|&(k, _, y)| {
            let mut set = FixedBitSet::with_capacity(n);
            for (s, b) in states.iter().enumerate() {
                set.set(s, !b[k] || b[y]);
            }
            set
        })
        .collect();
    Gba { states, guard, succ, initial, acceptance }
}

fn expand(
    core: &Core,
    letter: Option<VertexId>,
    k: usize,
    partial: &mut Vec<bool>,
    states: &mut Vec<Vec<bool>>,
    guard: &mut Vec<Guard>,
    atoms: &[VertexId],
) {
    if k == core.nodes.len() {
        states.push(partial.clone());
        guard.push(match letter {
            Some(v) => Guard::Is(v),
            None => Guard::NoneOf(atoms.to_vec()),
        });
        return;
    }
    let forced = match core.nodes[k] {
        Node::True => Some(true),
        Node::Atom(v) => Some(letter == Some(v)),
        Node::Not(a) => Some(!partial[a]),
        Node::And(a, b) => Some(partial[a] && partial[b]),
        Node::Next(_) => None,
        Node::Until(a, b) => {
            if partial[b] {
                Some(true)
            } else if !partial[a] {
                Some(false)
            } else {
                None
            }
        }
    };
    let options: &[bool] = match forced {
        Some(true) => &[true],
        Some(false) => &[false],
        None => &[false, true],
    };
    for &val in options {
        partial.push(val);
        expand(core, letter, k + 1, partial, states, guard, atoms);
        partial.pop();
    }
}

impl Gba {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Membership of a lasso, by searching the product of the automaton with
    /// the lasso's positions for a reachable cycle meeting every acceptance set.
    pub fn accepts(&self, play: &LassoPlay) -> bool {
        let len = play.stored_len();
        let q = self.num_states();
        let id = |k: usize, s: usize| k * q + s;
        let next = |k: usize| if k + 1 < len { k + 1 } else { play.prefix.len() };
        let total = len * q;
        let mut succ = vec![Vec::new(); total];
        let mut within = FixedBitSet::with_capacity(total);
        for k in 0..len {
            for s in 0..q {
                if !self.guard[s].matches(play.at(k)) {
                    continue;
                }
                within.insert(id(k, s));
                let k2 = next(k);
                for &t in &self.succ[s] {
                    if self.guard[t].matches(play.at(k2)) {
                        succ[id(k, s)].push(id(k2, t));
                    }
                }
            }
        }
        let starts: Vec<usize> =
            self.initial.iter().copied().filter(|&s| self.guard[s].matches(play.at(0))).map(|s| id(0, s)).collect();
        let reach = crate::graph::reachable(&succ, &starts, &within);
        crate::graph::sccs(&succ, &reach).into_iter().any(|comp| {
            crate::graph::has_cycle(&succ, &comp)
                && self.acceptance.iter().all(|acc| comp.iter().any(|&x| acc.contains(x % q)))
        })
    }
}
