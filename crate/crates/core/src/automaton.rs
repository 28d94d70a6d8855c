//! Finite automata with output that implement finite-memory strategies.
//!
//! An automaton reads every vertex of the play, starting with the initial
//! vertex. After reading a history `h` that ends in a vertex `v` of its
//! player, it proposes `output(state, v)` as the next vertex.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::Hash;

use crate::arena::{GameArena, PlayerId, Vertex};
use crate::error::{GameError, Result};

const UNDEFINED: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyAutomaton {
    player: PlayerId,
    num_vertices: usize,
    initial: u32,
    num_states: usize,
    update: Vec<u32>,
    output: Vec<u32>,
}

/// One automaton per player, indexed by player.
pub type StrategyProfile = Vec<StrategyAutomaton>;

impl StrategyAutomaton {
    /// An automaton with every transition and output undefined.
    pub fn new(player: PlayerId, num_vertices: usize, num_states: usize, initial: usize) -> Self {
        StrategyAutomaton {
            player,
            num_vertices,
            initial: initial as u32,
            num_states,
            update: vec![UNDEFINED; num_states * num_vertices],
            output: vec![UNDEFINED; num_states * num_vertices],
        }
    }

    /// One-state automaton playing `choice(v)` at each vertex of `player`.
    pub fn memoryless(arena: &GameArena, player: PlayerId, choice: impl Fn(Vertex) -> Vertex) -> Self {
        let mut a = Self::new(player, arena.num_vertices(), 1, 0);
        for v in arena.vertices() {
            a.set_update(0, v, 0);
            if arena.owner(v) == player {
                a.set_output(0, v, choice(v));
            }
        }
        a
    }

    /// One-state automaton playing the lowest-id successor everywhere.
    pub fn lowest(arena: &GameArena, player: PlayerId) -> Self {
        Self::memoryless(arena, player, |v| arena.default_move(v))
    }

    pub fn set_update(&mut self, state: usize, v: Vertex, next: usize) {
        self.update[state * self.num_vertices + v] = next as u32;
    }

    pub fn set_output(&mut self, state: usize, v: Vertex, w: Vertex) {
        self.output[state * self.num_vertices + v] = w as u32;
    }

    pub fn player(&self) -> PlayerId {
        self.player
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn initial(&self) -> usize {
        self.initial as usize
    }

    /// Next state; an undefined transition keeps the state.
    pub fn step(&self, state: usize, v: Vertex) -> usize {
        match self.update[state * self.num_vertices + v] {
            UNDEFINED => state,
            s => s as usize,
        }
    }

    /// State after reading the initial vertex.
    pub fn start(&self, v0: Vertex) -> usize {
        self.step(self.initial(), v0)
    }

    /// Proposed successor of `v`; falls back to the lowest-id successor.
    pub fn choose(&self, arena: &GameArena, state: usize, v: Vertex) -> Vertex {
        match self.output[state * self.num_vertices + v] {
            UNDEFINED => arena.default_move(v),
            w => w as usize,
        }
    }

    pub fn defined_update(&self, state: usize, v: Vertex) -> Option<usize> {
        match self.update[state * self.num_vertices + v] {
            UNDEFINED => None,
            s => Some(s as usize),
        }
    }

    pub fn defined_output(&self, state: usize, v: Vertex) -> Option<Vertex> {
        match self.output[state * self.num_vertices + v] {
            UNDEFINED => None,
            w => Some(w as usize),
        }
    }

    /// Checks the automaton against an arena.
    pub fn check(&self, arena: &GameArena) -> Result<()> {
        let bad = |m: String| Err(GameError::InvalidProfile(format!("automaton of {}: {m}", self.player)));
        if self.num_vertices != arena.num_vertices() {
            return bad("vertex count differs from the arena".into());
        }
        if self.num_states == 0 || self.initial() >= self.num_states {
            return bad("initial state out of range".into());
        }
        for s in 0..self.num_states {
            for v in arena.vertices() {
                if let Some(t) = self.defined_update(s, v) {
                    if t >= self.num_states {
                        return bad(format!("transition to unknown state {t}"));
                    }
                }
                if let Some(w) = self.defined_output(s, v) {
                    if arena.owner(v) != self.player {
                        return bad(format!("output at vertex {} of another player", arena.name(v)));
                    }
                    if !arena.has_edge(v, w) {
                        return bad(format!("output ({},{}) is not an edge", arena.name(v), arena.name(w)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Graphviz rendering; edges are labelled `observed` or `observed / output`.
    pub fn to_dot(&self, arena: &GameArena) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph player{} {{", self.player.0 + 1);
        let _ = writeln!(s, "  init [shape=point];");
        let _ = writeln!(s, "  init -> q{};", self.initial);
        for q in 0..self.num_states {
            let _ = writeln!(s, "  q{q} [shape=circle];");
        }
        for q in 0..self.num_states {
            for v in arena.vertices() {
                let Some(t) = self.defined_update(q, v) else { continue };
                let label = match self.defined_output(t, v) {
                    Some(w) => format!("{} / {}", arena.name(v), arena.name(w)),
                    None => arena.name(v).to_string(),
                };
                let _ = writeln!(s, "  q{q} -> q{t} [label=\"{}\"];", label.replace('"', "\\\""));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Checks a whole profile against an arena.
pub fn check_profile(arena: &GameArena, profile: &[StrategyAutomaton]) -> Result<()> {
    if profile.len() != arena.num_players() {
        return Err(GameError::InvalidProfile(format!(
            "{} automata for {} players",
            profile.len(),
            arena.num_players()
        )));
    }
    for (i, a) in profile.iter().enumerate() {
        if a.player() != PlayerId(i) {
            return Err(GameError::InvalidProfile(format!("automaton {i} belongs to {}", a.player())));
        }
        a.check(arena)?;
    }
    Ok(())
}

/// Builds the automaton of `player` whose states are the labels reachable
/// from `init` along plays of the arena.
///
/// `update(label, w)` is the label after reading `w`; `output(label, v)` is
/// queried at vertices of `player` only.
pub(crate) fn compile<L, U, O>(
    arena: &GameArena,
    player: PlayerId,
    init: L,
    update: U,
    output: O,
) -> Result<StrategyAutomaton>
where
    L: Clone + Eq + Hash,
    U: Fn(&L, Vertex) -> L,
    O: Fn(&L, Vertex) -> Vertex,
{
    const MAX_STATES: usize = 4_000_000;
    let nv = arena.num_vertices();
    let mut ids: HashMap<L, usize> = HashMap::new();
    let mut labels: Vec<L> = Vec::new();
    let mut intern = |l: L, labels: &mut Vec<L>| -> (usize, bool) {
        match ids.entry(l) {
            Entry::Occupied(e) => (*e.get(), false),
            Entry::Vacant(e) => {
                let id = labels.len();
                labels.push(e.key().clone());
                e.insert(id);
                (id, true)
            }
        }
    };
    let (root, _) = intern(init, &mut labels);
    let mut update_tab: Vec<u32> = vec![UNDEFINED; nv];
    let mut output_tab: Vec<u32> = vec![UNDEFINED; nv];
    let mut seen_pair: Vec<bool> = vec![false; nv];
    let mut stack: Vec<(usize, Vertex)> = Vec::new();

    let mut observe = |from: usize,
                       w: Vertex,
                       labels: &mut Vec<L>,
                       update_tab: &mut Vec<u32>,
                       output_tab: &mut Vec<u32>,
                       seen_pair: &mut Vec<bool>,
                       stack: &mut Vec<(usize, Vertex)>|
     -> Result<()> {
        let next = update(&labels[from], w);
        let (to, fresh) = intern(next, labels);
        if fresh {
            if labels.len() > MAX_STATES {
                return Err(GameError::InstanceTooLarge("strategy automaton exceeds 4M states".into()));
            }
            update_tab.resize(labels.len() * nv, UNDEFINED);
            output_tab.resize(labels.len() * nv, UNDEFINED);
            seen_pair.resize(labels.len() * nv, false);
        }
        update_tab[from * nv + w] = to as u32;
        if !seen_pair[to * nv + w] {
            seen_pair[to * nv + w] = true;
            stack.push((to, w));
        }
        Ok(())
    };

    observe(root, arena.initial(), &mut labels, &mut update_tab, &mut output_tab, &mut seen_pair, &mut stack)?;
    while let Some((q, v)) = stack.pop() {
        if arena.owner(v) == player {
            let w = output(&labels[q], v);
            if !arena.has_edge(v, w) {
                return Err(GameError::Internal(format!(
                    "compiled strategy proposes non-edge ({},{})",
                    arena.name(v),
                    arena.name(w)
                )));
            }
            output_tab[q * nv + v] = w as u32;
        }
        for &w in arena.successors(v) {
            observe(q, w, &mut labels, &mut update_tab, &mut output_tab, &mut seen_pair, &mut stack)?;
        }
    }
    Ok(StrategyAutomaton {
        player,
        num_vertices: nv,
        initial: root as u32,
        num_states: labels.len(),
        update: update_tab,
        output: output_tab,
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::fixtures::detour;

    #[test]
    fn memoryless_outputs_and_fallback() {
        let g = detour();
        let a = StrategyAutomaton::memoryless(&g, PlayerId(0), |v| if v == 0 { 3 } else { g.default_move(v) });
        assert_eq!(a.num_states(), 1);
        assert_eq!(a.choose(&g, 0, 0), 3);
        assert!(a.check(&g).is_ok());
        let b = StrategyAutomaton::new(PlayerId(1), 4, 1, 0);
        assert_eq!(b.choose(&g, 0, 1), 0);
        assert_eq!(b.step(0, 2), 0);
    }

    #[test]
    fn check_rejects_non_edges() {
        let g = detour();
        let mut a = StrategyAutomaton::new(PlayerId(0), 4, 1, 0);
        a.set_output(0, 0, 2);
        assert!(a.check(&g).is_err());
    }

    #[test]
    fn compile_counts_visits() {
        let g = detour();
        // Remembers min(visits of A, 2) and leaves A for D until A was seen twice.
        let a = compile(&g, PlayerId(0), 0u8, |k, w| if w == 0 { (*k + 1).min(2) } else { *k }, |k, v| {
            match (v, *k < 2) {
                (0, true) => 3,
                (0, false) => 1,
                _ => g.default_move(v),
            }
        })
        .unwrap();
        assert_eq!(a.num_states(), 3);
        let s = a.start(0);
        assert_eq!(a.choose(&g, s, 0), 3);
        let s = a.step(a.step(s, 3), 0);
        assert_eq!(a.choose(&g, s, 0), 1);
    }

    #[test]
    fn dot_mentions_every_state() {
        let g = detour();
        let dot = fixtures::detour_tau1(&g).to_dot(&g);
        assert!(dot.contains("q0 -> q1 [label=\"A / D\"]"));
        assert!(dot.starts_with("digraph player1"));
    }
}
