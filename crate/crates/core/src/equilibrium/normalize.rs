use super::punish::{punishment_profile, Automata, Mode};
use super::{attractors_for, certify, secure_from_automata, EquilibriumCertificate, EquilibriumKind};
use crate::arena::{visit, visit_history, GameArena, Vertex};
use crate::automaton::{compile, StrategyAutomaton, StrategyProfile};
use crate::error::{GameError, Result};
use crate::verifier::{check_nash, check_secure, outcome_of};

fn check_prefix(arena: &GameArena, profile: &[StrategyAutomaton], lambda: &[Vertex], lambda_prime: &[Vertex]) -> Result<Vec<Vertex>> {
    if lambda.is_empty() || lambda_prime.is_empty() {
        return Err(GameError::Precondition("both history parts must be nonempty".into()));
    }
    let outcome = outcome_of(arena, profile)?;
    let whole = [lambda, lambda_prime].concat();
    if outcome.prefix(whole.len() - 1) != whole {
        return Err(GameError::Precondition("the two parts do not form a prefix of the outcome".into()));
    }
    if lambda.last() != lambda_prime.last() {
        return Err(GameError::Precondition("the inserted part does not close a cycle".into()));
    }
    Ok(whole)
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Cut {
    /// `k` vertices of `λ` read so far.
    Pre(usize, usize),
    /// Left `λ`: the original strategy applies unchanged.
    Off(usize),
    /// `λ` read; the state is the original's after `λλ'δ`.
    Wrap(usize),
}

/// Drops the cycle `λ'` following `λ` from the outcome.
///
/// Histories extending `λ` are answered as if `λ'` had been played right
/// after it; all other histories are answered as before.
pub fn eliminate_cycle(
    profile: &[StrategyAutomaton],
    lambda: &[Vertex],
    lambda_prime: &[Vertex],
    arena: &GameArena,
) -> Result<StrategyProfile> {
    let whole = check_prefix(arena, profile, lambda, lambda_prime)?;
    if visit_history(lambda, arena) != visit_history(&whole, arena) {
        return Err(GameError::Precondition("the removed cycle visits a new target".into()));
    }
    profile
        .iter()
        .map(|a| {
            let update = |l: &Cut, w: Vertex| match *l {
                Cut::Pre(k, s) => {
                    let s = a.step(s, w);
                    if w != lambda[k] {
                        Cut::Off(s)
                    } else if k + 1 == lambda.len() {
                        Cut::Wrap(lambda_prime.iter().fold(s, |s, &x| a.step(s, x)))
                    } else {
                        Cut::Pre(k + 1, s)
                    }
                }
                Cut::Off(s) => Cut::Off(a.step(s, w)),
                Cut::Wrap(s) => Cut::Wrap(a.step(s, w)),
            };
            let output = |l: &Cut, v: Vertex| match *l {
                Cut::Pre(_, s) | Cut::Off(s) | Cut::Wrap(s) => a.choose(arena, s, v),
            };
            compile(arena, a.player(), Cut::Pre(0, a.initial()), update, output)
        })
        .collect()
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Rep {
    Pre(usize, usize),
    Off(usize),
    /// `j` vertices of the current copy of `λ'` matched.
    Loop(usize, usize),
    Wrap(usize),
}

/// Repeats the cycle `λ'` forever after `λ`.
///
/// Requires `Visit(λ)` to be the type of the outcome.
pub fn repeat_cycle(
    profile: &[StrategyAutomaton],
    lambda: &[Vertex],
    lambda_prime: &[Vertex],
    arena: &GameArena,
) -> Result<StrategyProfile> {
    let outcome = outcome_of(arena, profile)?;
    if visit_history(lambda, arena) != visit(&outcome, arena) {
        return Err(GameError::Precondition("the prefix does not visit every target the outcome visits".into()));
    }
    repeat_cycle_unchecked(profile, lambda, lambda_prime, arena)
}

/// [`repeat_cycle`] without the visit hypothesis; the result need not be
/// an equilibrium.
pub(crate) fn repeat_cycle_unchecked(
    profile: &[StrategyAutomaton],
    lambda: &[Vertex],
    lambda_prime: &[Vertex],
    arena: &GameArena,
) -> Result<StrategyProfile> {
    check_prefix(arena, profile, lambda, lambda_prime)?;
    profile
        .iter()
        .map(|a| {
            let snapshot = lambda.iter().fold(a.initial(), |s, &x| a.step(s, x));
            let update = |l: &Rep, w: Vertex| match *l {
                Rep::Pre(k, s) => {
                    let s = a.step(s, w);
                    if w != lambda[k] {
                        Rep::Off(s)
                    } else if k + 1 == lambda.len() {
                        Rep::Loop(0, s)
                    } else {
                        Rep::Pre(k + 1, s)
                    }
                }
                Rep::Loop(j, s) => {
                    if w != lambda_prime[j] {
                        Rep::Wrap(a.step(s, w))
                    } else if j + 1 == lambda_prime.len() {
                        Rep::Loop(0, snapshot)
                    } else {
                        Rep::Loop(j + 1, a.step(s, w))
                    }
                }
                Rep::Off(s) => Rep::Off(a.step(s, w)),
                Rep::Wrap(s) => Rep::Wrap(a.step(s, w)),
            };
            let output = |l: &Rep, v: Vertex| match *l {
                Rep::Pre(_, s) | Rep::Off(s) | Rep::Loop(_, s) | Rep::Wrap(s) => a.choose(arena, s, v),
            };
            compile(arena, a.player(), Rep::Pre(0, a.initial()), update, output)
        })
        .collect()
}

/// First `(p, q)` with `lo <= p < q <= hi` and equal vertices at `p` and `q`,
/// minimal in `q`.
fn first_repeat(at: impl Fn(usize) -> Vertex, lo: usize, hi: usize, nv: usize) -> Option<(usize, usize)> {
    let mut first = vec![usize::MAX; nv];
    for q in lo..=hi {
        let v = at(q);
        if first[v] != usize::MAX {
            return Some((first[v], q));
        }
        first[v] = q;
    }
    None
}

/// Normalizes a Nash equilibrium of a unit-cost reachability game to one of
/// the same type with a short lasso outcome.
pub fn normalize_nash(cert: &EquilibriumCertificate, arena: &GameArena) -> Result<EquilibriumCertificate> {
    if !arena.all_reach() || arena.is_weighted() {
        return Err(GameError::Precondition("normalization needs reach objectives and unit costs".into()));
    }
    if cert.kind != EquilibriumKind::Nash || !check_nash(arena, &cert.profile)?.is_ok() {
        return Err(GameError::Precondition("input is not a verified Nash equilibrium".into()));
    }
    let nv = arena.num_vertices();
    let n = arena.num_players();
    let mut profile = cert.profile.clone();
    loop {
        let rho = outcome_of(arena, &profile)?;
        let costs = crate::arena::payoff(&rho, arena)?;
        let mut xs: Vec<usize> = costs.iter().filter_map(|c| c.as_integer()).map(|x| x as usize).collect();
        xs.sort_unstable();
        xs.dedup();
        let mut windows = Vec::new();
        if let Some(&x1) = xs.first() {
            if x1 >= 1 {
                windows.push((0, x1 - 1));
            }
        }
        windows.extend(xs.windows(2).map(|w| (w[0], w[1] - 1)));
        let cut = windows
            .into_iter()
            .filter(|&(lo, hi)| hi + 1 - lo >= nv)
            .find_map(|(lo, hi)| first_repeat(|i| rho.at(i), lo, hi, nv));
        let Some((p, q)) = cut else { break };
        let lambda = rho.prefix(p);
        let lambda_prime: Vec<Vertex> = (p + 1..=q).map(|i| rho.at(i)).collect();
        log::debug!("eliminating cycle at positions {p}..{q}");
        profile = eliminate_cycle(&profile, &lambda, &lambda_prime, arena)?;
    }
    let rho = outcome_of(arena, &profile)?;
    let costs = crate::arena::payoff(&rho, arena)?;
    let xk = costs.iter().filter_map(|c| c.as_integer()).max().unwrap_or(0) as usize;
    let (p, q) = first_repeat(|i| rho.at(i), xk, xk + nv, nv).expect("|V|+1 positions repeat");
    let alpha = rho.prefix(p);
    let beta: Vec<Vertex> = (p + 1..=q).map(|i| rho.at(i)).collect();
    profile = repeat_cycle(&profile, &alpha, &beta, arena)?;
    let depth = (n + 2) * nv;
    let attractors = attractors_for(arena, visit_history(&alpha, arena))?;
    let rebuilt = punishment_profile(arena, &alpha, &beta, &Automata(&profile), Mode::Nash { depth }, &attractors)?;
    let out = certify(arena, rebuilt, EquilibriumKind::Nash, None, depth)?;
    if out.eq_type != cert.eq_type {
        return Err(GameError::Internal(format!("normalization changed the type from {} to {}", cert.eq_type, out.eq_type)));
    }
    Ok(out)
}

/// Rebuilds a secure equilibrium of a two-player game as one of the same
/// type from a bounded replay of its own strategies.
pub fn normalize_secure(cert: &EquilibriumCertificate, arena: &GameArena) -> Result<EquilibriumCertificate> {
    if cert.kind != EquilibriumKind::Secure || !check_secure(arena, &cert.profile)?.is_ok() {
        return Err(GameError::Precondition("input is not a verified secure equilibrium".into()));
    }
    let outcome = outcome_of(arena, &cert.profile)?;
    let out = secure_from_automata(arena, &cert.profile, &outcome)?;
    if out.eq_type != cert.eq_type {
        return Err(GameError::Internal(format!("normalization changed the type from {} to {}", cert.eq_type, out.eq_type)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::fixtures::detour;
    use crate::arena::{payoff, Cost, PlayerSet, PlayerId};
    use crate::automaton::fixtures::{detour_tau1, detour_tau2};
    use crate::equilibrium::{build_nash, build_secure, NashVariant};

    const A: Vertex = 0;
    const B: Vertex = 1;
    const C: Vertex = 2;
    const D: Vertex = 3;

    /// Player 1 plays D on the first two visits to A, then B; player 2 plays C.
    fn twice_d(g: &GameArena) -> StrategyProfile {
        let mut p1 = StrategyAutomaton::new(PlayerId(0), 4, 4, 0);
        for s in 0..4 {
            for v in 0..4 {
                p1.set_update(s, v, if v == A { (s + 1).min(3) } else { s });
            }
            p1.set_output(s, A, if s <= 2 { D } else { B });
        }
        let p2 = StrategyAutomaton::memoryless(g, PlayerId(1), |v| if v == B { C } else { g.default_move(v) });
        vec![p1, p2]
    }

    #[test]
    fn eliminate_detour_cycle() {
        let g = detour();
        let sigma = twice_d(&g);
        let o = outcome_of(&g, &sigma).unwrap();
        assert_eq!(o.prefix(7), vec![A, D, A, D, A, B, C, A]);
        assert_eq!(payoff(&o, &g).unwrap(), vec![Cost::int(6), Cost::int(1)]);
        let tau = eliminate_cycle(&sigma, &[A, D, A], &[D, A], &g).unwrap();
        let o2 = outcome_of(&g, &tau).unwrap();
        assert_eq!((o2.stem(), o2.cycle()), (&[A, D, A][..], &[B, C, A][..]));
        assert_eq!(payoff(&o2, &g).unwrap(), vec![Cost::int(4), Cost::int(1)]);
    }

    #[test]
    fn eliminate_rejects_new_visit() {
        let g = detour();
        let tau = vec![detour_tau1(&g), detour_tau2(&g)];
        assert!(eliminate_cycle(&tau, &[A], &[D, A], &g).is_err());
    }

    #[test]
    fn repeat_detour_cycle() {
        let g = detour();
        let tau = vec![detour_tau1(&g), detour_tau2(&g)];
        assert!(repeat_cycle(&tau, &[A], &[D, A], &g).is_err());
        let r = repeat_cycle_unchecked(&tau, &[A], &[D, A], &g).unwrap();
        let o = outcome_of(&g, &r).unwrap();
        assert_eq!((o.stem(), o.cycle()), (&[A][..], &[D, A][..]));
        assert_eq!(payoff(&o, &g).unwrap(), vec![Cost::PlusInfinity, Cost::int(1)]);
        assert_eq!(visit(&o, &g), PlayerSet::singleton(PlayerId(1)));
    }

    #[test]
    fn repeat_is_identity_on_lasso() {
        let g = detour();
        let tau = vec![detour_tau1(&g), detour_tau2(&g)];
        let r = repeat_cycle(&tau, &[A, D, A, B, C, A], &[B, C, A], &g).unwrap();
        assert_eq!(outcome_of(&g, &r).unwrap(), outcome_of(&g, &tau).unwrap());
    }

    #[test]
    fn normalize_detour_equilibrium() {
        let g = detour();
        let tau = vec![detour_tau1(&g), detour_tau2(&g)];
        let cert = certify(&g, tau, EquilibriumKind::Nash, None, 0).unwrap();
        assert_eq!(cert.eq_type, PlayerSet::all(2));
        let norm = normalize_nash(&cert, &g).unwrap();
        assert_eq!(norm.eq_type, PlayerSet::all(2));
        assert!(norm.outcome.span() <= 12);
    }

    #[test]
    fn normalize_built_certificates() {
        let g = detour();
        let cert = build_nash(&g, NashVariant::Reach).unwrap();
        let norm = normalize_nash(&cert, &g).unwrap();
        assert_eq!(norm.eq_type, cert.eq_type);
        let sec = build_secure(&g).unwrap();
        let norm = normalize_secure(&sec, &g).unwrap();
        assert_eq!(norm.eq_type, sec.eq_type);
    }

    #[test]
    fn detour_has_no_secure_type_2_candidate() {
        let g = detour();
        // A -> D forever gives type {2}; player 1 can enter B and keep both
        // players away from their goals, raising player 2's cost.
        let prof: Vec<StrategyAutomaton> = vec![
            StrategyAutomaton::memoryless(&g, PlayerId(0), |v| if v == A { D } else { g.default_move(v) }),
            StrategyAutomaton::memoryless(&g, PlayerId(1), |v| if v == B { C } else { A }),
        ];
        let r = check_secure(&g, &prof).unwrap();
        assert_eq!(r.deviators(), vec![PlayerId(0)]);
        let sec = build_secure(&g).unwrap();
        let norm = normalize_secure(&sec, &g).unwrap();
        assert_eq!(norm.eq_type, sec.eq_type);
        assert!(norm.report.is_ok());
    }
}
