//! Small hand-made games used by the tests, the documentation and the CLI
//! smoke checks.

use crate::game::{Game, GameBuilder};

/// Two players, five vertices. The left branch `a → b` is lost by both; from
/// `c` the box player chooses between a losing sink `d` and a winning sink `e`.
pub fn two_branch() -> Game {
    let c2 = [("Circle", 2), ("Box", 2)];
    let c1 = [("Circle", 1), ("Box", 1)];
    GameBuilder::new()
        .players(["Circle", "Box"])
        .vertex("a", "Circle", &c2)
        .vertex("b", "Circle", &c1)
        .vertex("c", "Box", &c2)
        .vertex("d", "Circle", &c1)
        .vertex("e", "Circle", &c2)
        .edge("a", "b")
        .edge("b", "b")
        .edge("a", "c")
        .edge("c", "d")
        .edge("d", "d")
        .edge("c", "e")
        .edge("e", "e")
        .initial("a")
        .build()
        .expect("fixture is well formed")
}

/// Three-player Büchi game on six vertices where the least fixed point of the
/// negotiation function differs from the one obtained by pruning edges.
pub fn three_player_buchi() -> Game {
    GameBuilder::new()
        .players(["Circle", "Box", "Diamond"])
        .vertex("a", "Circle", &[("Circle", 0), ("Box", 1), ("Diamond", 1)])
        .vertex("b", "Box", &[("Circle", 1), ("Box", 1), ("Diamond", 1)])
        .vertex("c", "Circle", &[("Circle", 0), ("Box", 0), ("Diamond", 1)])
        .vertex("d", "Diamond", &[("Circle", 1), ("Box", 1), ("Diamond", 1)])
        .vertex("e", "Circle", &[("Circle", 1), ("Box", 1), ("Diamond", 0)])
        .vertex("f", "Circle", &[("Circle", 1), ("Box", 0), ("Diamond", 1)])
        .edge("a", "b")
        .edge("b", "a")
        .edge("c", "b")
        .edge("b", "c")
        .edge("c", "c")
        .edge("b", "d")
        .edge("d", "e")
        .edge("e", "d")
        .edge("d", "f")
        .edge("f", "d")
        .edge("e", "e")
        .edge("f", "f")
        .initial("a")
        .build()
        .expect("fixture is well formed")
}

/// Eleven-vertex parity game whose negotiation sequence needs three steps.
pub fn eleven_vertex_chain() -> Game {
    let mut b = GameBuilder::new().players(["Circle", "Box", "Diamond"]);
    let rows: [(&str, &str, [u32; 3]); 11] = [
        ("a", "Box", [3, 1, 1]),
        ("b", "Circle", [2, 0, 1]),
        ("c", "Diamond", [1, 1, 1]),
        ("d", "Diamond", [0, 2, 1]),
        ("e", "Box", [2, 1, 2]),
        ("f", "Circle", [2, 1, 2]),
        ("g", "Circle", [1, 1, 1]),
        ("h", "Diamond", [0, 1, 3]),
        ("i", "Circle", [1, 1, 1]),
        ("j", "Box", [1, 1, 1]),
        ("k", "Diamond", [0, 0, 0]),
    ];
    for (id, owner, [o, s, d]) in rows {
        b = b.vertex(id, owner, &[("Circle", o), ("Box", s), ("Diamond", d)]);
    }
    let edges = [
        ("a", "b"),
        ("b", "a"),
        ("b", "c"),
        ("c", "b"),
        ("c", "d"),
        ("d", "c"),
        ("d", "e"),
        ("e", "f"),
        ("f", "e"),
        ("f", "g"),
        ("g", "e"),
        ("e", "h"),
        ("h", "e"),
        ("h", "i"),
        ("i", "i"),
        ("i", "j"),
        ("j", "j"),
        ("j", "k"),
        ("k", "k"),
    ];
    for (u, v) in edges {
        b = b.edge(u, v);
    }
    b.initial("a").build().expect("fixture is well formed")
}
