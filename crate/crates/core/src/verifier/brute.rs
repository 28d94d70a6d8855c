//! Exhaustive search over small deviations, used as an independent oracle.

use num_traits::Zero;

use super::{outcome_of, CheckKind, Product, VerificationReport, Verdict};
use crate::arena::{payoff, Cost, GameArena, ObjectiveKind, PlayerId, Rational, Vertex};
use crate::automaton::StrategyAutomaton;
use crate::error::{GameError, Result};

const MAX_CANDIDATES: u64 = 300_000;
const MAX_PREFIXES: u64 = 3_000_000;

fn improves(kind: CheckKind, j: PlayerId, old: &[Cost], new: &[Cost]) -> bool {
    match kind {
        CheckKind::Secure => {
            let o = 1 - j.0;
            new[j.0] < old[j.0] || (new[j.0] == old[j.0] && new[o] > old[o])
        }
        _ => new[j.0] < old[j.0],
    }
}

/// Searches profitable deviations by enumeration.
///
/// Tried deviations are all memoryless strategies, all two-state automata
/// when `memory_bound >= 2`, and every play prefix of at most `depth_bound`
/// edges whose prefix alone proves an improvement. The search is sound but
/// only complete for deviations of that shape.
pub fn brute_force_check(
    arena: &GameArena,
    profile: &[StrategyAutomaton],
    kind: CheckKind,
    depth_bound: usize,
    memory_bound: usize,
) -> Result<VerificationReport> {
    if kind == CheckKind::Qualitative {
        return Err(GameError::Precondition("brute force covers Nash and secure checks".into()));
    }
    if kind == CheckKind::Secure && (arena.num_players() != 2 || !arena.all_reach() || arena.is_weighted()) {
        return Err(GameError::Precondition(
            "secure checks need two players, reach objectives and unit costs".into(),
        ));
    }
    if memory_bound > 2 {
        return Err(GameError::InstanceTooLarge("memory bound above 2 is not enumerated".into()));
    }
    let outcome = outcome_of(arena, profile)?;
    let costs = payoff(&outcome, arena)?;
    let mut verdicts = Vec::new();
    for j in arena.players() {
        let mut found = None;
        if memory_bound >= 1 {
            found = search_automata(arena, profile, kind, j, &costs, 1)?;
        }
        if found.is_none() && memory_bound >= 2 {
            found = search_automata(arena, profile, kind, j, &costs, 2)?;
        }
        if found.is_none() {
            found = search_prefixes(arena, profile, kind, j, &costs, depth_bound)?;
        }
        verdicts.push(match found {
            Some(witness) => {
                let c = payoff(&witness, arena)?;
                Verdict::ProfitableDeviation { witness, costs: c }
            }
            None => Verdict::Ok,
        });
    }
    Ok(VerificationReport { kind, outcome, costs, verdicts })
}

/// Tries every automaton of `states` states for player `j`.
fn search_automata(
    arena: &GameArena,
    profile: &[StrategyAutomaton],
    kind: CheckKind,
    j: PlayerId,
    costs: &[Cost],
    states: usize,
) -> Result<Option<crate::arena::Lasso>> {
    let nv = arena.num_vertices();
    let owned: Vec<Vertex> = arena.vertices().filter(|&v| arena.owner(v) == j).collect();
    // Digits: one output per (state, owned vertex), then one update per (state, vertex).
    let mut radix: Vec<usize> = Vec::new();
    for _ in 0..states {
        radix.extend(owned.iter().map(|&v| arena.successors(v).len()));
    }
    if states > 1 {
        radix.extend(std::iter::repeat_n(states, states * nv));
    }
    let total: u64 = radix.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r as u64)).unwrap_or(u64::MAX);
    if total > MAX_CANDIDATES {
        return Err(GameError::InstanceTooLarge(format!(
            "{total} candidate deviations with {states} state(s)"
        )));
    }
    let mut digits = vec![0usize; radix.len()];
    let mut trial: Vec<StrategyAutomaton> = profile.to_vec();
    loop {
        let mut a = StrategyAutomaton::new(j, nv, states, 0);
        let mut k = 0;
        for s in 0..states {
            for &v in &owned {
                a.set_output(s, v, arena.successors(v)[digits[k]]);
                k += 1;
            }
        }
        for s in 0..states {
            for v in 0..nv {
                a.set_update(s, v, if states > 1 { digits[k + s * nv + v] } else { 0 });
            }
        }
        trial[j.0] = a;
        let play = outcome_of(arena, &trial)?;
        let new = payoff(&play, arena)?;
        if improves(kind, j, costs, &new) {
            return Ok(Some(play));
        }
        // Advance the mixed-radix counter.
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(None);
            }
            digits[i] += 1;
            if digits[i] < radix[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Running first-visit information along a prefix.
#[derive(Clone)]
struct Track {
    acc: Rational,
    own: Option<Rational>,
    opp: Option<usize>,
}

/// Whether the prefix of `len + 1` positions already proves an improvement.
fn certified(
    arena: &GameArena,
    kind: CheckKind,
    j: PlayerId,
    costs: &[Cost],
    len: usize,
    t: &Track,
) -> bool {
    let own_now = t.own.map(Cost::Finite);
    match (kind, arena.objective(j).kind) {
        (CheckKind::Nash, ObjectiveKind::Reach) => own_now.is_some_and(|c| c < costs[j.0]),
        (CheckKind::Nash, ObjectiveKind::Safety) => match costs[j.0].as_integer() {
            Some(l) => t.own.is_none() && len as i64 >= -l,
            None => false,
        },
        (_, _) => {
            let o = PlayerId(1 - j.0);
            if own_now.is_some_and(|c| c < costs[j.0]) {
                return true;
            }
            let own_equal = match own_now {
                Some(c) => c == costs[j.0],
                None => false,
            };
            match costs[o.0].as_integer() {
                Some(co) => own_equal && len as i64 >= co && t.opp.is_none_or(|x| x as i64 > co),
                None => false,
            }
        }
    }
}

/// Enumerates play prefixes of the one-player product up to `depth` edges.
fn search_prefixes(
    arena: &GameArena,
    profile: &[StrategyAutomaton],
    kind: CheckKind,
    j: PlayerId,
    costs: &[Cost],
    depth: usize,
) -> Result<Option<crate::arena::Lasso>> {
    let prod = Product::build(arena, profile, j)?;
    let opp = (kind == CheckKind::Secure).then(|| PlayerId(1 - j.0));
    let start = |s: usize| Track {
        acc: Rational::zero(),
        own: arena.in_target(j, prod.vertex(s)).then(Rational::zero),
        opp: opp.and_then(|o| arena.in_target(o, prod.vertex(s)).then_some(0)),
    };
    let mut visited: u64 = 0;
    let mut path: Vec<usize> = vec![0];
    let mut tracks: Vec<Track> = vec![start(0)];
    let mut cursor: Vec<usize> = vec![0];
    if certified(arena, kind, j, costs, 0, &tracks[0]) {
        return Ok(Some(prod.lasso_from_path(&path)));
    }
    while let Some(k) = cursor.last_mut() {
        let s = *path.last().expect("path follows cursor");
        let succ = prod.successors(s);
        if path.len() > depth || *k >= succ.len() {
            cursor.pop();
            path.pop();
            tracks.pop();
            continue;
        }
        let u = succ[*k];
        *k += 1;
        visited += 1;
        if visited > MAX_PREFIXES {
            return Err(GameError::InstanceTooLarge("too many prefixes to enumerate".into()));
        }
        let prev = tracks.last().expect("track follows path").clone();
        let len = path.len();
        let w = prod.vertex(u);
        let mut t = prev;
        if t.own.is_none() {
            t.acc += match arena.objective(j).kind {
                ObjectiveKind::Reach => arena.cost(j, prod.vertex(s), w),
                ObjectiveKind::Safety => Rational::zero(),
            };
            if arena.in_target(j, w) {
                t.own = Some(match arena.objective(j).kind {
                    ObjectiveKind::Reach => t.acc,
                    ObjectiveKind::Safety => Rational::from_integer(-(len as i64)),
                });
            }
        }
        if let Some(o) = opp {
            if t.opp.is_none() && arena.in_target(o, w) {
                t.opp = Some(len);
            }
        }
        path.push(u);
        if certified(arena, kind, j, costs, len, &t) {
            return Ok(Some(prod.lasso_from_path(&path)));
        }
        tracks.push(t);
        cursor.push(0);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::fixtures::{detour, fork};
    use crate::verifier::check_nash;

    fn memoryless(arena: &GameArena, moves: &[(Vertex, Vertex)]) -> Vec<StrategyAutomaton> {
        arena
            .players()
            .map(|p| {
                StrategyAutomaton::memoryless(arena, p, |v| {
                    moves.iter().find(|m| m.0 == v).map_or(arena.default_move(v), |m| m.1)
                })
            })
            .collect()
    }

    #[test]
    fn agrees_on_detour() {
        let g = detour();
        for moves in [[(0, 3), (1, 2)], [(0, 1), (1, 2)]] {
            let prof = memoryless(&g, &moves);
            let exact = check_nash(&g, &prof).unwrap();
            let brute = brute_force_check(&g, &prof, CheckKind::Nash, 8, 2).unwrap();
            assert_eq!(exact.deviators(), brute.deviators());
        }
    }

    #[test]
    fn prefix_search_alone_finds_fork_deviation() {
        let g = fork();
        let prof = memoryless(&g, &[(0, 3)]);
        let r = brute_force_check(&g, &prof, CheckKind::Nash, 3, 0).unwrap();
        assert_eq!(r.deviators(), vec![PlayerId(0)]);
    }

    #[test]
    fn single_vertex_is_ok() {
        let mut b = crate::arena::ArenaBuilder::new();
        let p = b.player(crate::arena::Objective::reach([]));
        let x = b.vertex("x", p);
        b.edge(x, x);
        let g = b.build();
        let prof = memoryless(&g, &[]);
        assert!(brute_force_check(&g, &prof, CheckKind::Nash, 4, 1).unwrap().is_ok());
    }
}
