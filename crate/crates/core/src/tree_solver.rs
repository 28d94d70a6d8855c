//! Backward induction in the game truncated at depth `d`.
//!
//! Continuation costs from a node of the truncated tree only depend on the
//! current vertex, the set of players whose target was already met and the
//! number of remaining steps, since the common prefix adds the same amount
//! to every continuation compared at that node. The solver therefore works
//! on these quotient states instead of histories.

use std::collections::HashMap;
use std::fmt;

use num_traits::One;

use crate::arena::{ceil_to_usize, Cost, GameArena, ObjectiveKind, PlayerId, PlayerSet, Rational, Vertex};
use crate::error::{GameError, Result};

/// Which depth bound to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DepthVariant {
    NashUnit,
    NashWeighted,
    SecureTwoPlayer,
    NormalizeNash,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DepthParams {
    pub depth: usize,
    pub k: usize,
    pub cmin: Rational,
    pub cmax: Rational,
}

impl DepthParams {
    pub fn with_depth(self, depth: usize) -> Self {
        DepthParams { depth, ..self }
    }
}

/// Depth of the truncated game that the construction needs.
pub fn required_depth(arena: &GameArena, variant: DepthVariant) -> DepthParams {
    let n = arena.num_players();
    let nv = arena.num_vertices();
    let (cmin, cmax) = arena.cost_bounds();
    let k = ceil_to_usize(cmax / cmin).max(1);
    let depth = match variant {
        DepthVariant::NashUnit | DepthVariant::SecureTwoPlayer => (n + 1) * 2 * nv,
        DepthVariant::NashWeighted => ((n + 1) * (k + 1) * nv).max((n * (k + 1) + 1) * nv * k),
        DepthVariant::NormalizeNash => (n + 2) * nv,
    };
    match variant {
        DepthVariant::NashWeighted => DepthParams { depth, k, cmin, cmax },
        _ => DepthParams { depth, k: 1, cmin: Rational::one(), cmax: Rational::one() },
    }
}

/// How the owner of a node ranks continuation cost profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preference {
    /// Minimize own cost.
    Nash,
    /// Minimize own cost, then maximize the opponent's (two players).
    Secure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuotientState {
    pub vertex: Vertex,
    pub satisfied: PlayerSet,
    pub steps_remaining: usize,
}

impl fmt::Display for QuotientState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.vertex, self.satisfied, self.steps_remaining)
    }
}

const LIMIT: usize = 60_000_000;

/// Pairs `(vertex, satisfied)` reachable from the root, with successor links.
#[derive(Clone, Debug)]
struct PairGraph {
    pairs: Vec<(Vertex, PlayerSet)>,
    index: HashMap<(Vertex, PlayerSet), usize>,
    /// Successor pair for each arena successor, in successor order.
    succ: Vec<Vec<usize>>,
}

impl PairGraph {
    fn build(arena: &GameArena) -> Self {
        let root = (arena.initial(), arena.marks(arena.initial()));
        let mut pairs = vec![root];
        let mut index = HashMap::from([(root, 0)]);
        let mut succ = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (v, sat) = pairs[i];
            let mut row = Vec::with_capacity(arena.successors(v).len());
            for &w in arena.successors(v) {
                let key = (w, sat.union(arena.marks(w)));
                let id = *index.entry(key).or_insert_with(|| {
                    pairs.push(key);
                    pairs.len() - 1
                });
                row.push(id);
            }
            succ.push(row);
            i += 1;
        }
        PairGraph { pairs, index, succ }
    }
}

/// Per-edge cost-to-go increment of a player.
fn step(arena: &GameArena, p: PlayerId, u: Vertex, v: Vertex) -> Rational {
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

/// Whether continuation `a` is strictly better than `b` for `owner`.
fn better(pref: Preference, owner: PlayerId, a: &[Cost], b: &[Cost]) -> bool {
    let i = owner.0;
    match pref {
        Preference::Nash => a[i] < b[i],
        Preference::Secure => {
            let o = 1 - i;
            a[i] < b[i] || (a[i] == b[i] && a[o] > b[o])
        }
    }
}

/// An equilibrium of the truncated game, given as a policy on quotient states.
#[derive(Clone, Debug)]
pub struct TruncatedSolution {
    depth: usize,
    preference: Preference,
    players: usize,
    graph: PairGraph,
    /// `policy[r * pairs + p]`, chosen successor vertex; unused at `r = 0`.
    policy: Vec<u32>,
    /// `value[(r * pairs + p) * players + k]`: cost-to-go of `k`, zero once satisfied.
    value: Vec<Cost>,
    outcome: Vec<Vertex>,
}

/// Continuation cost profile when moving from pair `p` to its `idx`-th successor
/// at `r` remaining steps, given layer `r - 1`.
fn continuation(
    arena: &GameArena,
    graph: &PairGraph,
    prev: &[Cost],
    p: usize,
    idx: usize,
    out: &mut [Cost],
) {
    let n = arena.num_players();
    let (v, sat) = graph.pairs[p];
    let w = arena.successors(v)[idx];
    let q = graph.succ[p][idx];
    for k in arena.players() {
        out[k.0] = if sat.contains(k) {
            Cost::ZERO
        } else if arena.in_target(k, w) {
            Cost::Finite(step(arena, k, v, w))
        } else {
            prev[q * n + k.0] + step(arena, k, v, w)
        };
    }
}

fn layer_zero(arena: &GameArena, graph: &PairGraph) -> Vec<Cost> {
    let n = arena.num_players();
    let mut layer = Vec::with_capacity(graph.pairs.len() * n);
    for &(_, sat) in &graph.pairs {
        for k in arena.players() {
            layer.push(if sat.contains(k) { Cost::ZERO } else { unreached(arena, k) });
        }
    }
    layer
}

fn check_size(graph: &PairGraph, depth: usize, players: usize) -> Result<()> {
    if graph.pairs.len().saturating_mul(depth + 1).saturating_mul(players.max(1)) > LIMIT {
        return Err(GameError::InstanceTooLarge(format!(
            "{} quotient pairs at depth {depth}",
            graph.pairs.len()
        )));
    }
    Ok(())
}

fn check_secure_preconditions(arena: &GameArena) -> Result<()> {
    if arena.num_players() != 2 || !arena.all_reach() || arena.is_weighted() {
        return Err(GameError::Precondition(
            "secure preferences need two players, reach objectives and unit costs".into(),
        ));
    }
    Ok(())
}

impl TruncatedSolution {
    fn induce(
        arena: &GameArena,
        depth: usize,
        preference: Preference,
        forced: Option<&dyn Fn(QuotientState) -> Vertex>,
    ) -> Result<Self> {
        if preference == Preference::Secure {
            check_secure_preconditions(arena)?;
        }
        let n = arena.num_players();
        let graph = PairGraph::build(arena);
        check_size(&graph, depth, n)?;
        let np = graph.pairs.len();
        let mut value = layer_zero(arena, &graph);
        let mut policy = vec![u32::MAX; np];
        let mut cand = vec![Cost::ZERO; n];
        let mut best = vec![Cost::ZERO; n];
        for r in 1..=depth {
            let prev_start = (r - 1) * np * n;
            let mut layer = Vec::with_capacity(np * n);
            for p in 0..np {
                let (v, sat) = graph.pairs[p];
                let owner = arena.owner(v);
                let prev = &value[prev_start..prev_start + np * n];
                let succ = arena.successors(v);
                let chosen = match forced {
                    Some(f) => {
                        let w = f(QuotientState { vertex: v, satisfied: sat, steps_remaining: r });
                        let idx = succ.binary_search(&w).map_err(|_| {
                            GameError::InvalidProfile(format!(
                                "policy moves from {} to non-successor {}",
                                arena.name(v),
                                arena.name(w)
                            ))
                        })?;
                        continuation(arena, &graph, prev, p, idx, &mut best);
                        idx
                    }
                    None => {
                        continuation(arena, &graph, prev, p, 0, &mut best);
                        let mut chosen = 0;
                        let indifferent = preference == Preference::Nash && sat.contains(owner);
                        if !indifferent {
                            for idx in 1..succ.len() {
                                continuation(arena, &graph, prev, p, idx, &mut cand);
                                if better(preference, owner, &cand, &best) {
                                    std::mem::swap(&mut cand, &mut best);
                                    chosen = idx;
                                }
                            }
                        }
                        chosen
                    }
                };
                policy.push(succ[chosen] as u32);
                layer.extend_from_slice(&best);
            }
            value.extend(layer);
        }
        let mut outcome = vec![arena.initial()];
        let mut p = 0;
        for r in (1..=depth).rev() {
            let w = policy[r * np + p] as usize;
            let (v, _) = graph.pairs[p];
            let idx = arena.successors(v).binary_search(&w).expect("policy follows edges");
            p = graph.succ[p][idx];
            outcome.push(w);
        }
        Ok(TruncatedSolution { depth, preference, players: n, graph, policy, value, outcome })
    }

    /// Builds the solution induced by an explicit policy, e.g. a hand-made profile.
    pub fn from_policy(
        arena: &GameArena,
        depth: usize,
        preference: Preference,
        policy: impl Fn(QuotientState) -> Vertex,
    ) -> Result<Self> {
        Self::induce(arena, depth, preference, Some(&policy))
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn preference(&self) -> Preference {
        self.preference
    }

    /// The play of length `depth` produced by the policy from the root.
    pub fn outcome(&self) -> &[Vertex] {
        &self.outcome
    }

    pub fn num_states(&self) -> usize {
        self.graph.pairs.len() * (self.depth + 1)
    }

    pub fn root(&self) -> QuotientState {
        let (vertex, satisfied) = self.graph.pairs[0];
        QuotientState { vertex, satisfied, steps_remaining: self.depth }
    }

    fn slot(&self, q: &QuotientState) -> Option<usize> {
        if q.steps_remaining > self.depth {
            return None;
        }
        let p = *self.graph.index.get(&(q.vertex, q.satisfied))?;
        Some(q.steps_remaining * self.graph.pairs.len() + p)
    }

    /// Move chosen at a quotient state; `None` at depth 0 or for unreachable states.
    pub fn policy(&self, q: &QuotientState) -> Option<Vertex> {
        if q.steps_remaining == 0 {
            return None;
        }
        self.slot(q).map(|s| self.policy[s] as usize)
    }

    /// Cost-to-go per player at a quotient state; satisfied players get zero.
    pub fn value(&self, q: &QuotientState) -> Option<&[Cost]> {
        self.slot(q).map(|s| &self.value[s * self.players..(s + 1) * self.players])
    }

    /// Cost profile of the outcome in the truncated game.
    pub fn root_value(&self) -> &[Cost] {
        self.value(&self.root()).expect("root is a state")
    }

    /// Move at `(v, sat)` with `steps` remaining, or the lowest-id successor
    /// when the state was never reached by the solver.
    pub(crate) fn choose(&self, arena: &GameArena, v: Vertex, sat: PlayerSet, steps: usize) -> Vertex {
        self.policy(&QuotientState { vertex: v, satisfied: sat, steps_remaining: steps })
            .unwrap_or_else(|| arena.default_move(v))
    }
}

/// Computes a subgame-perfect profile of the truncated game; ties go to the
/// lowest successor id, and a Nash owner whose target is met is indifferent.
pub fn solve_truncated(arena: &GameArena, params: &DepthParams, preference: Preference) -> Result<TruncatedSolution> {
    TruncatedSolution::induce(arena, params.depth, preference, None)
}

/// A profitable deviation in the truncated game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedDeviation {
    pub player: PlayerId,
    /// The deviating play, of length `depth`.
    pub history: Vec<Vertex>,
    /// Cost profile of the deviating play.
    pub costs: Vec<Cost>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedReport {
    pub preference: Preference,
    pub deviations: Vec<Option<TruncatedDeviation>>,
}

impl TruncatedReport {
    pub fn is_equilibrium(&self) -> bool {
        self.deviations.iter().all(Option::is_none)
    }
}

/// For every player, computes a best deviation against the policy of the
/// others and reports it when it is profitable.
pub fn check_truncated_equilibrium(
    arena: &GameArena,
    solution: &TruncatedSolution,
    preference: Preference,
) -> Result<TruncatedReport> {
    if preference == Preference::Secure {
        check_secure_preconditions(arena)?;
    }
    let n = arena.num_players();
    let g = &solution.graph;
    let np = g.pairs.len();
    let d = solution.depth;
    let eq = solution.root_value().to_vec();
    let mut deviations = Vec::with_capacity(n);
    for j in arena.players() {
        let mut value = layer_zero(arena, g);
        let mut choice = vec![u32::MAX; np];
        let mut cand = vec![Cost::ZERO; n];
        let mut best = vec![Cost::ZERO; n];
        for r in 1..=d {
            let prev_start = (r - 1) * np * n;
            let mut layer = Vec::with_capacity(np * n);
            for p in 0..np {
                let (v, _) = g.pairs[p];
                let prev = &value[prev_start..prev_start + np * n];
                let succ = arena.successors(v);
                let chosen = if arena.owner(v) == j {
                    continuation(arena, g, prev, p, 0, &mut best);
                    let mut chosen = 0;
                    for idx in 1..succ.len() {
                        continuation(arena, g, prev, p, idx, &mut cand);
                        if better(preference, j, &cand, &best) {
                            std::mem::swap(&mut cand, &mut best);
                            chosen = idx;
                        }
                    }
                    chosen
                } else {
                    let w = solution.policy[r * np + p] as usize;
                    let idx = succ.binary_search(&w).expect("policy follows edges");
                    continuation(arena, g, prev, p, idx, &mut best);
                    idx
                };
                choice.push(chosen as u32);
                layer.extend_from_slice(&best);
            }
            value.extend(layer);
        }
        let dev = &value[d * np * n..d * np * n + n];
        if better(preference, j, dev, &eq) {
            let mut history = vec![arena.initial()];
            let mut p = 0;
            for r in (1..=d).rev() {
                let idx = choice[r * np + p] as usize;
                history.push(arena.successors(g.pairs[p].0)[idx]);
                p = g.succ[p][idx];
            }
            let costs = crate::arena::history_payoff(&history, arena);
            deviations.push(Some(TruncatedDeviation { player: j, history, costs }));
        } else {
            deviations.push(None);
        }
    }
    Ok(TruncatedReport { preference, deviations })
}
