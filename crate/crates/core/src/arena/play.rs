use std::fmt::Write as _;

use num_traits::{One, Zero};

use super::{Cost, CostProfile, GameArena, ObjectiveKind, PlayerId, PlayerSet, Rational, Vertex};
use crate::error::{GameError, Result};

/// An eventually periodic play `stem · cycle^ω`.
///
/// `cycle` ends at the anchor `last(stem)`, so the play reads
/// `stem[0] .. stem[m-1], cycle[0] .. cycle[p-1], cycle[0] ..`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lasso {
    stem: Vec<Vertex>,
    cycle: Vec<Vertex>,
}

impl Lasso {
    pub fn new(stem: Vec<Vertex>, cycle: Vec<Vertex>) -> Result<Self> {
        if stem.is_empty() || cycle.is_empty() {
            return Err(GameError::InvalidPlay("stem and cycle must be nonempty".into()));
        }
        if stem.last() != cycle.last() {
            return Err(GameError::InvalidPlay("cycle does not return to the last stem vertex".into()));
        }
        Ok(Lasso { stem, cycle })
    }

    /// The play `prefix · cycle^ω` where `prefix` ends with the anchor.
    pub(crate) fn from_parts_unchecked(stem: Vec<Vertex>, cycle: Vec<Vertex>) -> Self {
        debug_assert_eq!(stem.last(), cycle.last());
        Lasso { stem, cycle }
    }

    pub fn stem(&self) -> &[Vertex] {
        &self.stem
    }

    pub fn cycle(&self) -> &[Vertex] {
        &self.cycle
    }

    /// Vertex at index `i` of the infinite play.
    pub fn at(&self, i: usize) -> Vertex {
        let m = self.stem.len();
        if i < m {
            self.stem[i]
        } else {
            self.cycle[(i - m) % self.cycle.len()]
        }
    }

    /// The history made of the first `len` edges (`len + 1` vertices).
    pub fn prefix(&self, len: usize) -> Vec<Vertex> {
        (0..=len).map(|i| self.at(i)).collect()
    }

    /// Number of positions after which every vertex of the play has occurred.
    pub fn span(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    /// Same play with the cycle unrolled once into the stem.
    pub fn unroll_once(&self) -> Lasso {
        let mut stem = self.stem.clone();
        stem.extend_from_slice(&self.cycle);
        Lasso { stem, cycle: self.cycle.clone() }
    }

    /// Shortest stem and primitive cycle describing the same play.
    pub fn canonical(&self) -> Lasso {
        let mut cycle = self.cycle.clone();
        let p = cycle.len();
        if let Some(q) = (1..p).find(|&q| p.is_multiple_of(q) && (q..p).all(|i| cycle[i] == cycle[i - q])) {
            cycle = cycle[p - q..].to_vec();
        }
        let mut stem = self.stem.clone();
        let p = cycle.len();
        while stem.len() >= 2 && stem[stem.len() - 2] == cycle[(2 * p - 2) % p] {
            let anchor = stem.pop().expect("nonempty stem");
            cycle.pop();
            cycle.insert(0, anchor);
        }
        Lasso { stem, cycle }
    }

    /// Checks that the play starts at the initial vertex and follows edges.
    pub fn check(&self, arena: &GameArena) -> Result<()> {
        if self.stem[0] != arena.initial() {
            return Err(GameError::InvalidPlay("play does not start at the initial vertex".into()));
        }
        let n = arena.num_vertices();
        if self.stem.iter().chain(&self.cycle).any(|&v| v >= n) {
            return Err(GameError::InvalidPlay("play mentions an unknown vertex".into()));
        }
        for i in 0..self.span() {
            let (u, v) = (self.at(i), self.at(i + 1));
            if !arena.has_edge(u, v) {
                return Err(GameError::InvalidPlay(format!(
                    "({},{}) is not an edge",
                    arena.name(u),
                    arena.name(v)
                )));
            }
        }
        Ok(())
    }

    /// Renders the play as `A D (A B C)^w` using vertex names.
    pub fn render(&self, arena: &GameArena) -> String {
        let mut s = String::new();
        for &v in &self.stem[..self.stem.len() - 1] {
            let _ = write!(s, "{} ", arena.name(v));
        }
        s.push('(');
        s.push_str(arena.name(*self.stem.last().expect("nonempty")));
        for &v in &self.cycle[..self.cycle.len() - 1] {
            let _ = write!(s, " {}", arena.name(v));
        }
        s.push_str(")^w");
        s
    }
}

/// Qualitative outcome of one player.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QualPayoff {
    Win,
    Lose,
}

fn step_cost(arena: &GameArena, p: PlayerId, u: Vertex, v: Vertex) -> Rational {
    match arena.objective(p).kind {
        ObjectiveKind::Reach => arena.cost(p, u, v),
        ObjectiveKind::Safety => -Rational::one(),
    }
}

fn unreached(arena: &GameArena, p: PlayerId) -> Cost {
    match arena.objective(p).kind {
        ObjectiveKind::Reach => Cost::PlusInfinity,
        ObjectiveKind::Safety => Cost::MinusInfinity,
    }
}

/// Cost profile of the positions `0..len` of a vertex sequence; players whose
/// target is not met within it get `+inf` (reach) or `-inf` (safety).
fn costs_over(arena: &GameArena, len: usize, at: impl Fn(usize) -> Vertex) -> CostProfile {
    let n = arena.num_players();
    let mut acc = vec![Rational::zero(); n];
    let mut out: Vec<Option<Cost>> = vec![None; n];
    for i in 0..len {
        let v = at(i);
        for p in arena.players() {
            if out[p.0].is_some() {
                continue;
            }
            if i > 0 {
                acc[p.0] += step_cost(arena, p, at(i - 1), v);
            }
            if arena.in_target(p, v) {
                out[p.0] = Some(Cost::Finite(acc[p.0]));
            }
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(i, c)| c.unwrap_or_else(|| unreached(arena, PlayerId(i))))
        .collect()
}

/// Cost profile of an infinite play.
pub fn payoff(play: &Lasso, arena: &GameArena) -> Result<CostProfile> {
    play.check(arena)?;
    Ok(costs_over(arena, play.span(), |i| play.at(i)))
}

/// Cost profile of a finite history, with unmet targets counted as never met.
pub fn history_payoff(history: &[Vertex], arena: &GameArena) -> CostProfile {
    costs_over(arena, history.len(), |i| history[i])
}

/// Players whose target set the history meets.
pub fn visit_history(history: &[Vertex], arena: &GameArena) -> PlayerSet {
    history.iter().fold(PlayerSet::EMPTY, |s, &v| s.union(arena.marks(v)))
}

/// Players whose target set the play meets.
pub fn visit(play: &Lasso, arena: &GameArena) -> PlayerSet {
    visit_history(&play.stem, arena).union(visit_history(&play.cycle, arena))
}

/// Least index at which the play meets the target of `p`, or `-1`.
pub fn first_visit_index(play: &Lasso, p: PlayerId, arena: &GameArena) -> i64 {
    (0..play.span())
        .find(|&i| arena.in_target(p, play.at(i)))
        .map_or(-1, |i| i as i64)
}

/// Win/Lose per player; only defined for pure reachability arenas.
pub fn qualitative_payoff(play: &Lasso, arena: &GameArena) -> Result<Vec<QualPayoff>> {
    if !arena.all_reach() {
        return Err(GameError::Precondition("qualitative payoffs need reach objectives only".into()));
    }
    let seen = visit(play, arena);
    Ok(arena
        .players()
        .map(|p| if seen.contains(p) { QualPayoff::Win } else { QualPayoff::Lose })
        .collect())
}
