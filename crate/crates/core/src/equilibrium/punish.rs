//! Punishment automata around a lasso outcome `αβ^ω`.
//!
//! Every player follows the lasso until somebody leaves it. The deviator is
//! then remembered, together with whatever the replay strategy needs, and
//! the others either replay a reference strategy for a bounded number of
//! steps, keep the deviator out of its target, or play the lowest successor.

use std::hash::Hash;

use super::slice::Slice;
use super::NashVariant;
use crate::arena::{GameArena, ObjectiveKind, PlayerId, PlayerSet, Vertex};
use crate::attractor::AttractorResult;
use crate::automaton::{compile, StrategyAutomaton, StrategyProfile};
use crate::error::{GameError, Result};
use crate::tree_solver::TruncatedSolution;

/// A strategy profile that can be replayed from any history, described by
/// per-player memory.
pub(crate) trait ReplaySource {
    type Mem: Clone + Eq + Hash;
    /// Memory before the first vertex is read.
    fn init(&self, player: PlayerId) -> Self::Mem;
    fn update(&self, player: PlayerId, mem: &Self::Mem, w: Vertex) -> Self::Mem;
    /// Move at `v` after a history of `len` edges.
    fn choose(&self, arena: &GameArena, player: PlayerId, mem: &Self::Mem, v: Vertex, len: usize) -> Vertex;
}

/// Replays a truncated solution; the memory is the set of satisfied players.
pub(crate) struct Quotient<'a> {
    pub arena: &'a GameArena,
    pub solution: &'a TruncatedSolution,
}

impl ReplaySource for Quotient<'_> {
    type Mem = PlayerSet;

    fn init(&self, _: PlayerId) -> PlayerSet {
        PlayerSet::EMPTY
    }

    fn update(&self, _: PlayerId, mem: &PlayerSet, w: Vertex) -> PlayerSet {
        mem.union(self.arena.marks(w))
    }

    fn choose(&self, arena: &GameArena, _: PlayerId, mem: &PlayerSet, v: Vertex, len: usize) -> Vertex {
        let depth = self.solution.depth();
        if len >= depth {
            return arena.default_move(v);
        }
        self.solution.choose(arena, v, *mem, depth - len)
    }
}

/// Replays a finite-memory profile.
pub(crate) struct Automata<'a>(pub &'a [StrategyAutomaton]);

impl ReplaySource for Automata<'_> {
    type Mem = usize;

    fn init(&self, player: PlayerId) -> usize {
        self.0[player.0].initial()
    }

    fn update(&self, player: PlayerId, mem: &usize, w: Vertex) -> usize {
        self.0[player.0].step(*mem, w)
    }

    fn choose(&self, arena: &GameArena, player: PlayerId, mem: &usize, v: Vertex, _: usize) -> Vertex {
        self.0[player.0].choose(arena, *mem, v)
    }
}

/// Reaction to a deviation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Replay below the depth for satisfied deviators, keep unsatisfied
    /// reach deviators out of their target, otherwise play freely.
    Nash { depth: usize },
    /// Replay while the history is no longer than `α`, then keep the
    /// deviator out of its target if `α` misses it.
    Secure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum After {
    Free,
    Avoid(PlayerId),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Label<M> {
    Init,
    Track(usize),
    Free,
    Avoid(PlayerId),
    Replay { mem: M, len: usize, limit: usize, then: After },
}

impl<M> Label<M> {
    fn after(a: After) -> Self {
        match a {
            After::Free => Label::Free,
            After::Avoid(j) => Label::Avoid(j),
        }
    }
}

/// The lasso `αβ^ω` unrolled far enough that every position below `exact`
/// has its own index.
struct Path {
    verts: Vec<Vertex>,
    wrap: usize,
}

impl Path {
    fn new(alpha: &[Vertex], beta: &[Vertex], exact: usize) -> Path {
        let b = beta.len();
        let mut last = alpha.len() - 1 + b;
        while last + 1 - b < exact.max(alpha.len()) {
            last += b;
        }
        let mut verts = alpha.to_vec();
        while verts.len() <= last {
            verts.extend_from_slice(beta);
        }
        verts.truncate(last + 1);
        Path { verts, wrap: last + 1 - b }
    }

    fn next(&self, t: usize) -> usize {
        if t + 1 < self.verts.len() {
            t + 1
        } else {
            self.wrap
        }
    }
}

fn avoid_or_lowest(arena: &GameArena, attractors: &[Option<AttractorResult>], j: PlayerId, v: Vertex) -> Vertex {
    attractors
        .get(j.0)
        .and_then(Option::as_ref)
        .and_then(|a| a.avoid_move(v))
        .unwrap_or_else(|| arena.default_move(v))
}

/// Builds one punishment automaton per player around `αβ^ω`.
pub(crate) fn punishment_profile<S: ReplaySource>(
    arena: &GameArena,
    alpha: &[Vertex],
    beta: &[Vertex],
    source: &S,
    mode: Mode,
    attractors: &[Option<AttractorResult>],
) -> Result<StrategyProfile> {
    if alpha.is_empty() || beta.is_empty() || alpha.last() != beta.last() || alpha[0] != arena.initial() {
        return Err(GameError::Precondition("punishment needs a lasso alpha beta^w from the initial vertex".into()));
    }
    let visit_alpha = crate::arena::visit_history(alpha, arena);
    let exact = match mode {
        Mode::Nash { depth } => depth,
        Mode::Secure => alpha.len() + 1,
    };
    let path = Path::new(alpha, beta, exact);
    arena
        .players()
        .map(|i| {
            let mut mem_at = Vec::with_capacity(path.verts.len());
            let mut m = source.init(i);
            for &v in &path.verts {
                m = source.update(i, &m, v);
                mem_at.push(m.clone());
            }
            let react = |j: PlayerId, len: usize, mem: S::Mem| -> Label<S::Mem> {
                if j == i {
                    return Label::Free;
                }
                let j_reach = arena.objective(j).kind == ObjectiveKind::Reach;
                match mode {
                    Mode::Nash { depth } => {
                        if visit_alpha.contains(j) {
                            if len < depth {
                                Label::Replay { mem, len, limit: depth, then: After::Free }
                            } else {
                                Label::Free
                            }
                        } else if j_reach {
                            Label::Avoid(j)
                        } else {
                            Label::Free
                        }
                    }
                    Mode::Secure => {
                        let then = if visit_alpha.contains(j) { After::Free } else { After::Avoid(j) };
                        let limit = alpha.len() + 1;
                        if len < limit {
                            Label::Replay { mem, len, limit, then }
                        } else {
                            Label::after(then)
                        }
                    }
                }
            };
            let update = |l: &Label<S::Mem>, w: Vertex| -> Label<S::Mem> {
                match l {
                    Label::Init => Label::Track(0),
                    Label::Track(t) => {
                        let n = path.next(*t);
                        if path.verts[n] == w {
                            Label::Track(n)
                        } else {
                            let j = arena.owner(path.verts[*t]);
                            react(j, t + 1, source.update(i, &mem_at[*t], w))
                        }
                    }
                    Label::Replay { mem, len, limit, then } => {
                        if len + 1 < *limit {
                            Label::Replay { mem: source.update(i, mem, w), len: len + 1, limit: *limit, then: *then }
                        } else {
                            Label::after(*then)
                        }
                    }
                    other => other.clone(),
                }
            };
            let output = |l: &Label<S::Mem>, v: Vertex| -> Vertex {
                match l {
                    Label::Track(t) => path.verts[path.next(*t)],
                    Label::Avoid(j) => avoid_or_lowest(arena, attractors, *j, v),
                    Label::Replay { mem, len, .. } => source.choose(arena, i, mem, v, *len),
                    Label::Init | Label::Free => arena.default_move(v),
                }
            };
            compile(arena, i, Label::Init, update, output)
        })
        .collect()
}

/// Both players replay `source` on every history shorter than `limit`
/// edges and play the lowest successor afterwards.
pub(crate) fn prefix_profile<S: ReplaySource>(arena: &GameArena, source: &S, limit: usize) -> Result<StrategyProfile> {
    #[derive(Clone, PartialEq, Eq, Hash)]
    enum P<M> {
        Init,
        Prefix(M, usize),
        Free,
    }
    arena
        .players()
        .map(|i| {
            let enter = |mem: S::Mem, len: usize| if len < limit { P::Prefix(mem, len) } else { P::Free };
            let update = |l: &P<S::Mem>, w: Vertex| match l {
                P::Init => enter(source.update(i, &source.init(i), w), 0),
                P::Prefix(m, len) => enter(source.update(i, m, w), len + 1),
                P::Free => P::Free,
            };
            let output = |l: &P<S::Mem>, v: Vertex| match l {
                P::Prefix(m, len) => source.choose(arena, i, m, v, *len),
                _ => arena.default_move(v),
            };
            compile(arena, i, P::Init, update, output)
        })
        .collect()
}

/// Upper bound on the number of states of a punishment automaton.
pub fn state_bound(arena: &GameArena, slice: &Slice, depth: usize) -> usize {
    let n = arena.num_players();
    let nv = arena.num_vertices();
    slice.alpha.len() + slice.beta.len() + n * nv * (1usize << n.min(40)) * (depth + 1) + n + 1
}

/// Punishment profile around `αβ^ω` for a Nash outcome of a truncated game.
///
/// `attractors[j]` must be present for every reach player `j` that `α`
/// does not satisfy.
pub fn build_punishment_profile(
    slice: &Slice,
    trunc: &TruncatedSolution,
    arena: &GameArena,
    attractors: &[Option<AttractorResult>],
    variant: NashVariant,
) -> Result<StrategyProfile> {
    let whole = slice.history();
    if trunc.outcome().len() < whole.len() || trunc.outcome()[..whole.len()] != whole[..] {
        return Err(GameError::Precondition("slice does not come from this truncated outcome".into()));
    }
    if variant == NashVariant::Weighted && !arena.all_reach() {
        return Err(GameError::Precondition("weighted construction needs reach objectives only".into()));
    }
    let visit_alpha = slice.visit_alpha(arena);
    for j in arena.players() {
        let needs = arena.objective(j).kind == ObjectiveKind::Reach && !visit_alpha.contains(j);
        if needs && attractors.get(j.0).is_none_or(Option::is_none) {
            return Err(GameError::Precondition(format!("missing attractor for {j}")));
        }
    }
    let source = Quotient { arena, solution: trunc };
    punishment_profile(arena, &slice.alpha, &slice.beta, &source, Mode::Nash { depth: trunc.depth() }, attractors)
}
