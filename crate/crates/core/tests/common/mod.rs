#![allow(dead_code)]

use quantgame::arena::ArenaBuilder;
use quantgame::{GameArena, Objective, PlayerId, StrategyAutomaton, StrategyProfile, Vertex};

pub const A: Vertex = 0;
pub const B: Vertex = 1;
pub const C: Vertex = 2;
pub const D: Vertex = 3;
pub const E: Vertex = 4;

/// A, C, D owned by player 1 and B by player 2; F1 = {C}, F2 = {D}.
pub fn detour() -> GameArena {
    let mut b = ArenaBuilder::new();
    let p1 = b.player(Objective::reach([C]));
    let p2 = b.player(Objective::reach([D]));
    b.vertex("A", p1);
    b.vertex("B", p2);
    b.vertex("C", p1);
    b.vertex("D", p1);
    b.edge(A, B).edge(B, A).edge(A, D).edge(D, A).edge(B, C).edge(C, A);
    b.build()
}

/// Player 1 owns everything: A -> B -> C^w or A -> D -> E^w; F1 = {B, E}, F2 = {C}.
pub fn fork() -> GameArena {
    let mut b = ArenaBuilder::new();
    let p1 = b.player(Objective::reach([B, E]));
    b.player(Objective::reach([C]));
    for n in ["A", "B", "C", "D", "E"] {
        b.vertex(n, p1);
    }
    b.edge(A, B).edge(A, D).edge(B, C).edge(D, E).edge(C, C).edge(E, E);
    b.build()
}

/// A loops or moves to B; B (player 2) picks C or D; D leads to E. F1 = {C}, F2 = {E}.
pub fn branch() -> GameArena {
    let mut b = ArenaBuilder::new();
    let p1 = b.player(Objective::reach([C]));
    let p2 = b.player(Objective::reach([E]));
    b.vertex("A", p1);
    b.vertex("B", p2);
    b.vertex("C", p1);
    b.vertex("D", p2);
    b.vertex("E", p1);
    b.edge(A, A).edge(A, B).edge(B, C).edge(B, D).edge(C, C).edge(D, E).edge(E, E);
    b.build()
}

/// One memoryless automaton per player; unlisted vertices take the lowest successor.
pub fn memoryless(arena: &GameArena, moves: &[(Vertex, Vertex)]) -> StrategyProfile {
    arena
        .players()
        .map(|p| {
            StrategyAutomaton::memoryless(arena, p, |v| {
                moves.iter().find(|m| m.0 == v).map_or(arena.successors(v)[0], |m| m.1)
            })
        })
        .collect()
}

/// Player 1: D on the first visit of A, B afterwards.
/// Player 2: C at B once D was visited, A before.
pub fn detour_tau(arena: &GameArena) -> StrategyProfile {
    let nv = arena.num_vertices();
    let mut t1 = StrategyAutomaton::new(PlayerId(0), nv, 3, 0);
    for v in 0..nv {
        t1.set_update(0, v, 1);
        t1.set_update(1, v, 2);
        t1.set_update(2, v, 2);
    }
    t1.set_output(1, A, D);
    t1.set_output(2, A, B);
    let mut t2 = StrategyAutomaton::new(PlayerId(1), nv, 2, 0);
    for v in 0..nv {
        t2.set_update(0, v, usize::from(v == D));
        t2.set_update(1, v, 1);
    }
    t2.set_output(0, B, A);
    t2.set_output(1, B, C);
    vec![t1, t2]
}
