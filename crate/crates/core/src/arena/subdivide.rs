use std::collections::BTreeMap;

use super::{ArenaBuilder, GameArena, Lasso, Objective, Vertex};
use crate::error::{GameError, Result};

/// A unit-cost arena obtained by replacing each edge of cost `c` with a
/// path of `c` unit edges.
#[derive(Clone, Debug)]
pub struct Subdivision {
    pub arena: GameArena,
    /// Full vertex path `u, m1, .., v` in the new arena for each original edge.
    pub paths: BTreeMap<(Vertex, Vertex), Vec<Vertex>>,
    /// Number of vertices of the original arena; they keep their ids.
    pub original_vertices: usize,
}

/// Splits every edge into unit edges. Costs must be positive integers,
/// identical for all players; an unweighted arena comes back unchanged.
pub fn subdivide_edges(arena: &GameArena) -> Result<Subdivision> {
    if !arena.has_uniform_integer_costs() {
        return Err(GameError::Precondition(
            "subdivision needs integer edge costs shared by all players".into(),
        ));
    }
    let mut b = ArenaBuilder::new();
    for o in arena.objectives() {
        b.player(Objective { kind: o.kind, target: o.target.clone() });
    }
    for v in arena.vertices() {
        b.vertex(arena.name(v), arena.owner(v));
    }
    b.initial(arena.initial());
    let mut paths = BTreeMap::new();
    for (u, v) in arena.edges() {
        let c = arena
            .cost_tuple(u, v)
            .map_or(1, |t| t[0].to_integer().max(1) as usize);
        let mut path = vec![u];
        for k in 1..c {
            let m = b.vertex(format!("{}~{}#{k}", arena.name(u), arena.name(v)), arena.owner(u));
            path.push(m);
        }
        path.push(v);
        for w in path.windows(2) {
            b.edge(w[0], w[1]);
        }
        paths.insert((u, v), path);
    }
    Ok(Subdivision { arena: b.build(), paths, original_vertices: arena.num_vertices() })
}

impl Subdivision {
    pub fn is_original(&self, v: Vertex) -> bool {
        v < self.original_vertices
    }

    fn expand(&self, seq: &[Vertex]) -> Vec<Vertex> {
        let mut out = vec![seq[0]];
        for w in seq.windows(2) {
            out.extend_from_slice(&self.paths[&(w[0], w[1])][1..]);
        }
        out
    }

    /// The same play in the subdivided arena.
    pub fn translate_lasso(&self, play: &Lasso) -> Lasso {
        let stem = self.expand(play.stem());
        let mut anchored = vec![*play.stem().last().expect("nonempty")];
        anchored.extend_from_slice(play.cycle());
        let cycle = self.expand(&anchored)[1..].to_vec();
        Lasso::from_parts_unchecked(stem, cycle)
    }

    /// Maps a play of the subdivided arena back to the original arena.
    pub fn project_lasso(&self, play: &Lasso) -> Result<Lasso> {
        let mut play = play.clone();
        let mut guard = 0;
        while !self.is_original(*play.stem().last().expect("nonempty")) {
            let mut stem = play.stem().to_vec();
            let mut cycle = play.cycle().to_vec();
            let next = cycle.remove(0);
            stem.push(next);
            cycle.push(next);
            play = Lasso::from_parts_unchecked(stem, cycle);
            guard += 1;
            if guard > play.cycle().len() {
                return Err(GameError::InvalidPlay("play never returns to an original vertex".into()));
            }
        }
        let keep = |s: &[Vertex]| -> Vec<Vertex> {
            s.iter().copied().filter(|&v| self.is_original(v)).collect()
        };
        Lasso::new(keep(play.stem()), keep(play.cycle()))
    }
}
