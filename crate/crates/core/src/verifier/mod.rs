//! Exact equilibrium checks.
//!
//! Once every player but one is fixed to a deterministic automaton, the
//! remaining player faces a one-player graph: the product of the arena with
//! the automata. Optimal deviations in that graph are positional, so a
//! shortest-path or longest-path search decides every check exactly.

mod brute;
mod product;

use std::collections::HashMap;
use std::fmt;

pub use brute::brute_force_check;
pub use product::{BestResponse, Product};

use crate::arena::{payoff, Cost, CostProfile, GameArena, Lasso, PlayerId, Vertex};
use crate::automaton::{check_profile, StrategyAutomaton};
use crate::error::{GameError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Nash,
    Secure,
    Qualitative,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::Nash => "nash",
            CheckKind::Secure => "secure",
            CheckKind::Qualitative => "qualitative",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    ProfitableDeviation { witness: Lasso, costs: CostProfile },
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub kind: CheckKind,
    pub outcome: Lasso,
    pub costs: CostProfile,
    pub verdicts: Vec<Verdict>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.verdicts.iter().all(Verdict::is_ok)
    }

    /// Players with a profitable deviation.
    pub fn deviators(&self) -> Vec<PlayerId> {
        (0..self.verdicts.len()).filter(|&i| !self.verdicts[i].is_ok()).map(PlayerId).collect()
    }
}

/// The unique play produced by a profile.
pub fn outcome_of(arena: &GameArena, profile: &[StrategyAutomaton]) -> Result<Lasso> {
    check_profile(arena, profile)?;
    let v0 = arena.initial();
    let mut key: Vec<usize> = std::iter::once(v0).chain(profile.iter().map(|a| a.start(v0))).collect();
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut play: Vec<Vertex> = Vec::new();
    loop {
        if let Some(&k) = seen.get(&key) {
            let stem = play[..=k].to_vec();
            let cycle = play[k + 1..].to_vec();
            let mut cycle = cycle;
            cycle.push(key[0]);
            return Ok(Lasso::from_parts_unchecked(stem, cycle).canonical());
        }
        seen.insert(key.clone(), play.len());
        let v = key[0];
        play.push(v);
        let owner = arena.owner(v);
        let w = profile[owner.0].choose(arena, key[owner.0 + 1], v);
        key[0] = w;
        for (i, a) in profile.iter().enumerate() {
            key[i + 1] = a.step(key[i + 1], w);
        }
    }
}

/// Best cost the deviator can obtain while everyone else keeps their automaton.
pub fn best_response(arena: &GameArena, profile: &[StrategyAutomaton], deviator: PlayerId) -> Result<BestResponse> {
    check_profile(arena, profile)?;
    let prod = Product::build(arena, profile, deviator)?;
    Ok(product::best_response_in(arena, &prod))
}

fn deviation(arena: &GameArena, witness: Lasso) -> Verdict {
    let costs = payoff(&witness, arena).expect("witness plays follow the arena");
    Verdict::ProfitableDeviation { witness, costs }
}

/// Nash check: no player can lower its own cost.
pub fn check_nash(arena: &GameArena, profile: &[StrategyAutomaton]) -> Result<VerificationReport> {
    let outcome = outcome_of(arena, profile)?;
    let costs = payoff(&outcome, arena)?;
    let mut verdicts = Vec::with_capacity(costs.len());
    for j in arena.players() {
        let br = best_response(arena, profile, j)?;
        verdicts.push(if br.cost < costs[j.0] { deviation(arena, br.witness) } else { Verdict::Ok });
    }
    Ok(VerificationReport { kind: CheckKind::Nash, outcome, costs, verdicts })
}

fn secure_preconditions(arena: &GameArena) -> Result<()> {
    if arena.num_players() != 2 || !arena.all_reach() || arena.is_weighted() {
        return Err(GameError::Precondition(
            "secure checks need two players, reach objectives and unit costs".into(),
        ));
    }
    Ok(())
}

fn as_index(c: Cost) -> Option<usize> {
    c.as_integer().map(|x| x as usize)
}

/// Secure check: no player can lower its own cost, or keep it and raise the
/// opponent's.
pub fn check_secure(arena: &GameArena, profile: &[StrategyAutomaton]) -> Result<VerificationReport> {
    secure_preconditions(arena)?;
    let outcome = outcome_of(arena, profile)?;
    let costs = payoff(&outcome, arena)?;
    let mut verdicts = Vec::with_capacity(2);
    for j in arena.players() {
        let o = PlayerId(1 - j.0);
        let prod = Product::build(arena, profile, j)?;
        let br = product::best_response_in(arena, &prod);
        if br.cost < costs[j.0] {
            verdicts.push(deviation(arena, br.witness));
            continue;
        }
        let verdict = match as_index(costs[o.0]) {
            None => Verdict::Ok,
            Some(opp) => match product::secure_stage_two(arena, &prod, o, as_index(costs[j.0]), opp) {
                Some(w) => deviation(arena, w),
                None => Verdict::Ok,
            },
        };
        verdicts.push(verdict);
    }
    Ok(VerificationReport { kind: CheckKind::Secure, outcome, costs, verdicts })
}

/// Qualitative check: no losing player can reach its goal set at all.
pub fn check_qualitative_nash(arena: &GameArena, profile: &[StrategyAutomaton]) -> Result<VerificationReport> {
    if !arena.all_reach() {
        return Err(GameError::Precondition("qualitative checks need reach objectives only".into()));
    }
    let outcome = outcome_of(arena, profile)?;
    let costs = payoff(&outcome, arena)?;
    let mut verdicts = Vec::with_capacity(costs.len());
    for j in arena.players() {
        let verdict = if costs[j.0] == Cost::PlusInfinity {
            let prod = Product::build(arena, profile, j)?;
            product::reach_any(arena, &prod).map_or(Verdict::Ok, |w| deviation(arena, w))
        } else {
            Verdict::Ok
        };
        verdicts.push(verdict);
    }
    Ok(VerificationReport { kind: CheckKind::Qualitative, outcome, costs, verdicts })
}

/// Runs the check matching `kind`.
pub fn check(arena: &GameArena, profile: &[StrategyAutomaton], kind: CheckKind) -> Result<VerificationReport> {
    match kind {
        CheckKind::Nash => check_nash(arena, profile),
        CheckKind::Secure => check_secure(arena, profile),
        CheckKind::Qualitative => check_qualitative_nash(arena, profile),
    }
}
