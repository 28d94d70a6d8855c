//! Finite-memory equilibria of the infinite game.
//!
//! [`build_nash`] and [`build_secure`] solve a truncated game, cut its
//! outcome into `αβγ` and wrap `αβ^ω` in punishment automata. The
//! normalization operations turn any finite-memory equilibrium into one of
//! the same type whose outcome is a short lasso.

mod normalize;
mod punish;
mod slice;

use std::fmt;

pub use normalize::{eliminate_cycle, normalize_nash, normalize_secure, repeat_cycle};
pub use punish::{build_punishment_profile, state_bound};
pub use slice::{slice_outcome, Slice};

use punish::{prefix_profile, punishment_profile, Mode, Quotient, ReplaySource};

use crate::arena::{first_visit_index, payoff, visit, visit_history, CostProfile, GameArena, Lasso, ObjectiveKind, PlayerSet, Vertex};
use crate::attractor::{solve_zero_sum_reach, AttractorResult};
use crate::automaton::StrategyProfile;
use crate::error::{GameError, Result};
use crate::tree_solver::{required_depth, solve_truncated, DepthParams, DepthVariant, Preference};
use crate::verifier::{check, outcome_of, CheckKind, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EquilibriumKind {
    Nash,
    Secure,
}

impl EquilibriumKind {
    pub fn check_kind(self) -> CheckKind {
        match self {
            EquilibriumKind::Nash => CheckKind::Nash,
            EquilibriumKind::Secure => CheckKind::Secure,
        }
    }
}

impl fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquilibriumKind::Nash => "nash",
            EquilibriumKind::Secure => "secure",
        })
    }
}

/// Objectives and costs a Nash construction supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NashVariant {
    /// Reach objectives, unit costs.
    Reach,
    /// Reach and safety objectives, unit costs.
    ReachSafety,
    /// Reach objectives, positive rational costs per player and edge.
    Weighted,
}

/// A profile together with its outcome and a passing exact check.
#[derive(Clone, Debug)]
pub struct EquilibriumCertificate {
    pub kind: EquilibriumKind,
    pub profile: StrategyProfile,
    pub outcome: Lasso,
    /// Players whose target the outcome visits.
    pub eq_type: PlayerSet,
    pub slice: Option<Slice>,
    pub costs: CostProfile,
    pub report: VerificationReport,
    /// Depth of the truncated game the profile was built from.
    pub depth: usize,
}

impl EquilibriumCertificate {
    pub fn memory_sizes(&self) -> Vec<usize> {
        self.profile.iter().map(|a| a.num_states()).collect()
    }
}

fn validated(arena: &GameArena) -> Result<()> {
    let v = arena.validate();
    if v.is_empty() {
        Ok(())
    } else {
        let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
        Err(GameError::InvalidArena(msgs.join("; ")))
    }
}

/// Computes outcome, costs and type, and runs the exact check.
pub fn certify(
    arena: &GameArena,
    profile: StrategyProfile,
    kind: EquilibriumKind,
    slice: Option<Slice>,
    depth: usize,
) -> Result<EquilibriumCertificate> {
    let outcome = outcome_of(arena, &profile)?;
    let costs = payoff(&outcome, arena)?;
    let eq_type = visit(&outcome, arena);
    let report = check(arena, &profile, kind.check_kind())?;
    if !report.is_ok() {
        let who: Vec<String> = report.deviators().iter().map(ToString::to_string).collect();
        return Err(GameError::VerificationFailed(format!(
            "constructed {kind} profile admits profitable deviations for {}",
            who.join(", ")
        )));
    }
    Ok(EquilibriumCertificate { kind, profile, outcome, eq_type, slice, costs, report, depth })
}

/// Zero-sum attractors for every reach player that `visited` misses.
pub(crate) fn attractors_for(arena: &GameArena, visited: PlayerSet) -> Result<Vec<Option<AttractorResult>>> {
    arena
        .players()
        .map(|j| {
            if arena.objective(j).kind == ObjectiveKind::Reach && !visited.contains(j) {
                solve_zero_sum_reach(arena, j).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect()
}

fn nash_preconditions(arena: &GameArena, variant: NashVariant) -> Result<DepthVariant> {
    validated(arena)?;
    match variant {
        NashVariant::Reach | NashVariant::ReachSafety if arena.is_weighted() => {
            Err(GameError::Precondition("unit-cost construction on a weighted arena".into()))
        }
        NashVariant::Reach | NashVariant::Weighted if !arena.all_reach() => {
            Err(GameError::Precondition(format!("{variant:?} construction needs reach objectives only")))
        }
        NashVariant::Weighted => Ok(DepthVariant::NashWeighted),
        _ => Ok(DepthVariant::NashUnit),
    }
}

/// Depth parameters `build_nash` uses for this arena.
pub fn nash_params(arena: &GameArena, variant: NashVariant) -> Result<DepthParams> {
    Ok(required_depth(arena, nash_preconditions(arena, variant)?))
}

/// Builds a verified finite-memory Nash equilibrium.
pub fn build_nash(arena: &GameArena, variant: NashVariant) -> Result<EquilibriumCertificate> {
    let params = nash_params(arena, variant)?;
    build_nash_with(arena, variant, &params)
}

/// Same as [`build_nash`] with explicit depth parameters.
pub fn build_nash_with(arena: &GameArena, variant: NashVariant, params: &DepthParams) -> Result<EquilibriumCertificate> {
    nash_preconditions(arena, variant)?;
    let trunc = solve_truncated(arena, params, Preference::Nash)?;
    let slice = slice_outcome(trunc.outcome(), arena, params)?;
    let attractors = attractors_for(arena, slice.visit_alpha(arena))?;
    let profile = build_punishment_profile(&slice, &trunc, arena, &attractors, variant)?;
    log::debug!("nash profile memory {:?}", profile.iter().map(|a| a.num_states()).collect::<Vec<_>>());
    certify(arena, profile, EquilibriumKind::Nash, Some(slice), params.depth)
}

fn secure_preconditions(arena: &GameArena) -> Result<()> {
    validated(arena)?;
    if arena.num_players() != 2 || !arena.all_reach() || arena.is_weighted() {
        return Err(GameError::Precondition(
            "secure equilibria need two players, reach objectives and unit costs".into(),
        ));
    }
    Ok(())
}

/// Secure profile from a truncated secure equilibrium given by its outcome
/// of `params.depth` edges and a replay source.
fn secure_profile<S: ReplaySource>(
    arena: &GameArena,
    outcome: &[Vertex],
    params: &DepthParams,
    source: &S,
) -> Result<(StrategyProfile, Option<Slice>)> {
    let slice = slice_outcome(outcome, arena, params)?;
    let va = slice.visit_alpha(arena);
    let vr = visit_history(&outcome[..=params.depth], arena);
    let both = PlayerSet::all(2);
    if (!va.is_empty() || vr != both) && va != vr {
        return Err(GameError::Internal(format!(
            "truncated secure outcome breaks the type dichotomy: Visit(alpha) = {va}, Visit = {vr}"
        )));
    }
    if va.is_empty() && vr == both {
        let m = arena
            .players()
            .map(|p| outcome.iter().position(|&v| arena.in_target(p, v)).expect("both visited"))
            .max()
            .expect("two players");
        Ok((prefix_profile(arena, source, m)?, None))
    } else {
        let attractors = attractors_for(arena, va)?;
        let profile = punishment_profile(arena, &slice.alpha, &slice.beta, source, Mode::Secure, &attractors)?;
        Ok((profile, Some(slice)))
    }
}

/// Builds a verified finite-memory secure equilibrium of a two-player game.
pub fn build_secure(arena: &GameArena) -> Result<EquilibriumCertificate> {
    secure_preconditions(arena)?;
    build_secure_with(arena, &required_depth(arena, DepthVariant::SecureTwoPlayer))
}

/// Same as [`build_secure`] with explicit depth parameters.
pub fn build_secure_with(arena: &GameArena, params: &DepthParams) -> Result<EquilibriumCertificate> {
    secure_preconditions(arena)?;
    let trunc = solve_truncated(arena, params, Preference::Secure)?;
    let source = Quotient { arena, solution: &trunc };
    let (profile, slice) = secure_profile(arena, trunc.outcome(), params, &source)?;
    certify(arena, profile, EquilibriumKind::Secure, slice, params.depth)
}

pub(crate) fn secure_from_automata(
    arena: &GameArena,
    profile: &StrategyProfile,
    outcome: &Lasso,
) -> Result<EquilibriumCertificate> {
    let nv = arena.num_vertices();
    let d = arena
        .players()
        .map(|p| first_visit_index(outcome, p, arena).max(0) as usize)
        .fold(6 * nv, usize::max);
    let params = required_depth(arena, DepthVariant::SecureTwoPlayer).with_depth(d);
    let prefix = outcome.prefix(d);
    let source = punish::Automata(profile);
    let (built, slice) = secure_profile(arena, &prefix, &params, &source)?;
    certify(arena, built, EquilibriumKind::Secure, slice, d)
}
