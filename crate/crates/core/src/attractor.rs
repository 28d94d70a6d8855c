//! Zero-sum reachability game of one player against the coalition of all
//! others, solved by the classical attractor fixpoint.

use std::collections::VecDeque;

use crate::arena::{GameArena, ObjectiveKind, PlayerId, Vertex};
use crate::error::{GameError, Result};

/// Winning regions and memoryless strategies of the coalition game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttractorResult {
    pub reacher: PlayerId,
    /// Fixpoint round at which each vertex joined the attractor.
    rank: Vec<Option<usize>>,
    reach_strategy: Vec<Option<Vertex>>,
    avoid_strategy: Vec<Option<Vertex>>,
}

impl AttractorResult {
    pub fn in_win_reach(&self, v: Vertex) -> bool {
        self.rank[v].is_some()
    }

    pub fn win_reach(&self) -> Vec<Vertex> {
        (0..self.rank.len()).filter(|&v| self.in_win_reach(v)).collect()
    }

    pub fn win_avoid(&self) -> Vec<Vertex> {
        (0..self.rank.len()).filter(|&v| !self.in_win_reach(v)).collect()
    }

    pub fn rank(&self, v: Vertex) -> Option<usize> {
        self.rank[v]
    }

    /// Move of the reacher at one of its vertices in the attractor.
    pub fn reach_move(&self, v: Vertex) -> Option<Vertex> {
        self.reach_strategy[v]
    }

    /// Move of the coalition at one of its vertices outside the attractor.
    pub fn avoid_move(&self, v: Vertex) -> Option<Vertex> {
        self.avoid_strategy[v]
    }
}

/// Computes the attractor of the reacher's goal set.
///
/// Vertices are settled in rank order: a reacher vertex joins one round
/// after its first successor, a coalition vertex one round after its last.
pub fn solve_zero_sum_reach(arena: &GameArena, reacher: PlayerId) -> Result<AttractorResult> {
    if arena.objective(reacher).kind != ObjectiveKind::Reach {
        return Err(GameError::Precondition(format!("{reacher} does not have a reach objective")));
    }
    let n = arena.num_vertices();
    let mut pred: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for (u, v) in arena.edges() {
        pred[v].push(u);
    }
    let mut pending: Vec<usize> = arena.vertices().map(|v| arena.successors(v).len()).collect();
    let mut rank = vec![None; n];
    let mut queue = VecDeque::new();
    for &t in &arena.objective(reacher).target {
        rank[t] = Some(0);
        queue.push_back(t);
    }
    while let Some(u) = queue.pop_front() {
        let r = rank[u].expect("queued vertices are ranked");
        for &p in &pred[u] {
            if rank[p].is_some() {
                continue;
            }
            let joins = if arena.owner(p) == reacher {
                true
            } else {
                pending[p] -= 1;
                pending[p] == 0
            };
            if joins {
                rank[p] = Some(r + 1);
                queue.push_back(p);
            }
        }
    }
    let mut reach_strategy = vec![None; n];
    let mut avoid_strategy = vec![None; n];
    for v in arena.vertices() {
        let succ = arena.successors(v);
        if arena.owner(v) == reacher {
            reach_strategy[v] = match rank[v] {
                Some(0) => Some(succ[0]),
                Some(r) => succ.iter().copied().find(|&w| rank[w].is_some_and(|x| x < r)),
                None => None,
            };
        } else if rank[v].is_none() {
            avoid_strategy[v] = succ.iter().copied().find(|&w| rank[w].is_none());
        }
    }
    Ok(AttractorResult { reacher, rank, reach_strategy, avoid_strategy })
}
