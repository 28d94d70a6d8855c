//! Game arenas: the graph, vertex ownership, objectives and edge costs.

mod cost;
mod play;
mod subdivide;

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

pub use cost::{format_rational, parse_rational, Cost, CostProfile, Rational};
pub(crate) use cost::ceil_to_usize;
pub use play::{
    first_visit_index, history_payoff, payoff, qualitative_payoff, visit, visit_history, Lasso,
    QualPayoff,
};
pub use subdivide::{subdivide_edges, Subdivision};

/// Index of a vertex in its arena.
pub type Vertex = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlayerId(pub usize);

impl PlayerId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player {}", self.0 + 1)
    }
}

/// Set of players as a bitmask; arenas are limited to 64 players.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlayerSet(pub u64);

impl PlayerSet {
    pub const EMPTY: PlayerSet = PlayerSet(0);

    pub fn all(n: usize) -> PlayerSet {
        if n >= 64 {
            PlayerSet(u64::MAX)
        } else {
            PlayerSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(p: PlayerId) -> PlayerSet {
        PlayerSet(1 << p.0)
    }

    pub fn contains(self, p: PlayerId) -> bool {
        self.0 >> p.0 & 1 == 1
    }

    pub fn insert(&mut self, p: PlayerId) {
        self.0 |= 1 << p.0;
    }

    pub fn union(self, other: PlayerSet) -> PlayerSet {
        PlayerSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = PlayerId> {
        (0..64).filter(move |i| self.0 >> i & 1 == 1).map(PlayerId)
    }
}

impl FromIterator<PlayerId> for PlayerSet {
    fn from_iter<T: IntoIterator<Item = PlayerId>>(iter: T) -> Self {
        let mut s = PlayerSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl fmt::Display for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, p) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", p.0 + 1)?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    Reach,
    Safety,
}

/// Goal set for a reach player, bad set for a safety player.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub target: BTreeSet<Vertex>,
}

impl Objective {
    pub fn reach(target: impl IntoIterator<Item = Vertex>) -> Self {
        Objective { kind: ObjectiveKind::Reach, target: target.into_iter().collect() }
    }

    pub fn safety(bad: impl IntoIterator<Item = Vertex>) -> Self {
        Objective { kind: ObjectiveKind::Safety, target: bad.into_iter().collect() }
    }
}

/// An arena invariant that does not hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoPlayers,
    TooManyPlayers(usize),
    NoVertices,
    OwnerOutOfRange { vertex: String },
    InitialOutOfRange,
    EdgeEndpointOutOfRange { from: Vertex, to: Vertex },
    DeadEnd { vertex: String },
    TargetOutOfRange { player: PlayerId, vertex: Vertex },
    MissingCosts { from: String, to: String },
    CostArity { from: String, to: String },
    NonPositiveCost { from: String, to: String, player: PlayerId },
    WeightedSafety { player: PlayerId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoPlayers => f.write_str("arena has no players"),
            Violation::TooManyPlayers(n) => write!(f, "{n} players exceed the supported maximum of 64"),
            Violation::NoVertices => f.write_str("arena has no vertices"),
            Violation::OwnerOutOfRange { vertex } => write!(f, "vertex {vertex} is owned by an unknown player"),
            Violation::InitialOutOfRange => f.write_str("initial vertex is not a vertex of the arena"),
            Violation::EdgeEndpointOutOfRange { from, to } => {
                write!(f, "edge ({from},{to}) has an endpoint outside the arena")
            }
            Violation::DeadEnd { vertex } => write!(f, "vertex {vertex} has no outgoing edge"),
            Violation::TargetOutOfRange { player, vertex } => {
                write!(f, "target of {player} mentions unknown vertex {vertex}")
            }
            Violation::MissingCosts { from, to } => write!(f, "edge ({from},{to}) carries no costs"),
            Violation::CostArity { from, to } => {
                write!(f, "edge ({from},{to}) does not carry exactly one cost per player")
            }
            Violation::NonPositiveCost { from, to, player } => {
                write!(f, "edge cost not positive: ({from},{to}) for {player}")
            }
            Violation::WeightedSafety { player } => {
                write!(f, "{player} has a safety objective in a weighted arena")
            }
        }
    }
}

/// A finite turn-based multiplayer game graph.
///
/// Immutable once built. Successor lists are sorted by vertex id, so
/// "lowest-id successor" is always `successors(v)[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GameArena {
    names: Vec<String>,
    owner: Vec<PlayerId>,
    initial: Vertex,
    succ: Vec<Vec<Vertex>>,
    objectives: Vec<Objective>,
    /// `costs[v][k][i]`: cost for player `i` of the edge `(v, succ[v][k])`.
    costs: Option<Vec<Vec<Vec<Rational>>>>,
    /// Players whose target contains each vertex.
    marks: Vec<PlayerSet>,
    raw_violations: Vec<Violation>,
}

impl GameArena {
    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn num_players(&self) -> usize {
        self.objectives.len()
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> {
        (0..self.num_players()).map(PlayerId)
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.num_vertices()
    }

    pub fn initial(&self) -> Vertex {
        self.initial
    }

    pub fn owner(&self, v: Vertex) -> PlayerId {
        self.owner[v]
    }

    pub fn name(&self, v: Vertex) -> &str {
        &self.names[v]
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<Vertex> {
        self.names.iter().position(|n| n == name)
    }

    pub fn successors(&self, v: Vertex) -> &[Vertex] {
        &self.succ[v]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.succ.get(u).is_some_and(|s| s.binary_search(&v).is_ok())
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.succ.iter().enumerate().flat_map(|(u, s)| s.iter().map(move |&v| (u, v)))
    }

    pub fn objective(&self, p: PlayerId) -> &Objective {
        &self.objectives[p.0]
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    /// Players whose target (goal or bad set) contains `v`.
    pub fn marks(&self, v: Vertex) -> PlayerSet {
        self.marks[v]
    }

    pub fn in_target(&self, p: PlayerId, v: Vertex) -> bool {
        self.marks[v].contains(p)
    }

    pub fn is_weighted(&self) -> bool {
        self.costs.is_some()
    }

    pub fn all_reach(&self) -> bool {
        self.objectives.iter().all(|o| o.kind == ObjectiveKind::Reach)
    }

    /// Cost of edge `(u, v)` for player `p`; 1 in unit arenas.
    pub fn cost(&self, p: PlayerId, u: Vertex, v: Vertex) -> Rational {
        match &self.costs {
            None => Rational::one(),
            Some(c) => {
                let k = self.succ[u].binary_search(&v).expect("cost of a non-edge");
                c[u][k][p.0]
            }
        }
    }

    /// The full cost tuple of edge `(u, v)`, when the arena is weighted.
    pub fn cost_tuple(&self, u: Vertex, v: Vertex) -> Option<&[Rational]> {
        let c = self.costs.as_ref()?;
        let k = self.succ[u].binary_search(&v).ok()?;
        Some(&c[u][k])
    }

    /// `(cmin, cmax)` over all players and edges; `(1, 1)` for unit arenas.
    pub fn cost_bounds(&self) -> (Rational, Rational) {
        match &self.costs {
            None => (Rational::one(), Rational::one()),
            Some(c) => {
                let all = c.iter().flatten().flatten();
                let min = all.clone().min().copied().unwrap_or_else(Rational::one);
                let max = all.max().copied().unwrap_or_else(Rational::one);
                (min, max)
            }
        }
    }

    /// Whether every edge carries the same integer cost for all players.
    pub fn has_uniform_integer_costs(&self) -> bool {
        match &self.costs {
            None => true,
            Some(c) => c
                .iter()
                .flatten()
                .all(|t| t.iter().all(|x| x.is_integer() && *x == t[0])),
        }
    }

    /// All invariant violations; empty iff the arena is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.raw_violations.clone();
        let n = self.num_players();
        let nv = self.num_vertices();
        if n == 0 {
            out.push(Violation::NoPlayers);
        }
        if n > 64 {
            out.push(Violation::TooManyPlayers(n));
        }
        if nv == 0 {
            out.push(Violation::NoVertices);
        }
        if self.initial >= nv {
            out.push(Violation::InitialOutOfRange);
        }
        for v in 0..nv {
            if self.owner[v].0 >= n {
                out.push(Violation::OwnerOutOfRange { vertex: self.names[v].clone() });
            }
            if self.succ[v].is_empty() {
                out.push(Violation::DeadEnd { vertex: self.names[v].clone() });
            }
        }
        for (i, o) in self.objectives.iter().enumerate() {
            for &t in &o.target {
                if t >= nv {
                    out.push(Violation::TargetOutOfRange { player: PlayerId(i), vertex: t });
                }
            }
        }
        if let Some(costs) = &self.costs {
            for (i, o) in self.objectives.iter().enumerate() {
                if o.kind == ObjectiveKind::Safety {
                    out.push(Violation::WeightedSafety { player: PlayerId(i) });
                }
            }
            for (u, row) in costs.iter().enumerate() {
                for (&v, tuple) in self.succ[u].iter().zip(row) {
                    let (from, to) = (self.names[u].clone(), self.names[v].clone());
                    if tuple.is_empty() {
                        out.push(Violation::MissingCosts { from, to });
                    } else if tuple.len() != n {
                        out.push(Violation::CostArity { from, to });
                    } else {
                        for (i, c) in tuple.iter().enumerate() {
                            if *c <= Rational::zero() {
                                out.push(Violation::NonPositiveCost {
                                    from: from.clone(),
                                    to: to.clone(),
                                    player: PlayerId(i),
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Lowest-id successor, the memoryless "arbitrary" choice.
    pub fn default_move(&self, v: Vertex) -> Vertex {
        self.succ[v][0]
    }
}

/// Incremental construction of a [`GameArena`]; `build` never fails,
/// problems surface through [`GameArena::validate`].
#[derive(Clone, Debug, Default)]
pub struct ArenaBuilder {
    names: Vec<String>,
    owner: Vec<PlayerId>,
    initial: Vertex,
    edges: Vec<(Vertex, Vertex, Option<Vec<Rational>>)>,
    objectives: Vec<Objective>,
}

impl ArenaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn player(&mut self, objective: Objective) -> PlayerId {
        self.objectives.push(objective);
        PlayerId(self.objectives.len() - 1)
    }

    pub fn vertex(&mut self, name: impl Into<String>, owner: PlayerId) -> Vertex {
        self.names.push(name.into());
        self.owner.push(owner);
        self.names.len() - 1
    }

    pub fn initial(&mut self, v: Vertex) -> &mut Self {
        self.initial = v;
        self
    }

    pub fn edge(&mut self, from: Vertex, to: Vertex) -> &mut Self {
        self.edges.push((from, to, None));
        self
    }

    pub fn weighted_edge(&mut self, from: Vertex, to: Vertex, costs: Vec<Rational>) -> &mut Self {
        self.edges.push((from, to, Some(costs)));
        self
    }

    pub fn target_mut(&mut self, p: PlayerId) -> &mut BTreeSet<Vertex> {
        &mut self.objectives[p.0].target
    }

    pub fn build(&self) -> GameArena {
        let nv = self.names.len();
        let mut raw_violations = Vec::new();
        let weighted = self.edges.iter().any(|e| e.2.is_some());
        let mut adj: Vec<Vec<(Vertex, Vec<Rational>)>> = vec![Vec::new(); nv];
        for (u, v, c) in &self.edges {
            if *u >= nv || *v >= nv {
                raw_violations.push(Violation::EdgeEndpointOutOfRange { from: *u, to: *v });
                continue;
            }
            adj[*u].push((*v, c.clone().unwrap_or_default()));
        }
        for row in &mut adj {
            row.sort_by_key(|e| e.0);
            row.dedup_by_key(|e| e.0);
        }
        let succ = adj.iter().map(|r| r.iter().map(|e| e.0).collect()).collect();
        let costs = weighted.then(|| {
            adj.iter().map(|r| r.iter().map(|e| e.1.clone()).collect()).collect()
        });
        let mut marks = vec![PlayerSet::EMPTY; nv];
        for (i, o) in self.objectives.iter().enumerate().take(64) {
            for &t in &o.target {
                if t < nv {
                    marks[t].insert(PlayerId(i));
                }
            }
        }
        GameArena {
            names: self.names.clone(),
            owner: self.owner.clone(),
            initial: self.initial,
            succ,
            objectives: self.objectives.clone(),
            costs,
            marks,
            raw_violations,
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detour_is_valid() {
        assert!(fixtures::detour().validate().is_empty());
    }

    #[test]
    fn dead_end_is_reported() {
        let mut b = ArenaBuilder::new();
        let p = b.player(Objective::reach([]));
        let a = b.vertex("A", p);
        let c = b.vertex("C", p);
        b.edge(a, c);
        let v = b.build().validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "vertex C has no outgoing edge");
    }

    #[test]
    fn zero_cost_is_reported() {
        let mut b = ArenaBuilder::new();
        let p = b.player(Objective::reach([]));
        let a = b.vertex("A", p);
        b.weighted_edge(a, a, vec![Rational::zero()]);
        let v = b.build().validate();
        assert!(v.iter().any(|x| x.to_string().starts_with("edge cost not positive")));
    }

    #[test]
    fn weighted_safety_is_rejected() {
        let mut b = ArenaBuilder::new();
        let p = b.player(Objective::safety([]));
        let a = b.vertex("A", p);
        b.weighted_edge(a, a, vec![Rational::one()]);
        assert_eq!(b.build().validate(), vec![Violation::WeightedSafety { player: p }]);
    }

    #[test]
    fn successors_are_sorted_and_deduplicated() {
        let mut b = ArenaBuilder::new();
        let p = b.player(Objective::reach([]));
        let a = b.vertex("A", p);
        let x = b.vertex("X", p);
        b.edge(a, x).edge(a, a).edge(a, x).edge(x, a);
        let g = b.build();
        assert_eq!(g.successors(a), &[a, x]);
        assert_eq!(g.default_move(a), a);
    }

    #[test]
    fn player_set_display() {
        let s: PlayerSet = [PlayerId(0), PlayerId(2)].into_iter().collect();
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(PlayerSet::all(3).len(), 3);
    }
}
