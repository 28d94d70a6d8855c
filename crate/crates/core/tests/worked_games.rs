mod common;

use common::*;
use quantgame::arena::{payoff, ArenaBuilder};
use quantgame::equilibrium::{build_nash, build_secure, normalize_nash, certify, EquilibriumKind, NashVariant};
use quantgame::tree_solver::{required_depth, DepthVariant};
use quantgame::verifier::{best_response, check_nash, check_qualitative_nash, check_secure, outcome_of, Verdict};
use quantgame::{Cost, Lasso, Objective, PlayerId, PlayerSet, Rational};

#[test]
fn detour_outcomes() {
    let g = detour();
    let tau = detour_tau(&g);
    assert_eq!(outcome_of(&g, &tau).unwrap(), Lasso::new(vec![A, D, A], vec![B, C, A]).unwrap());
    let sigma = memoryless(&g, &[(A, D), (B, C)]);
    assert_eq!(outcome_of(&g, &sigma).unwrap(), Lasso::new(vec![A], vec![D, A]).unwrap());
    assert_eq!(best_response(&g, &tau, PlayerId(1)).unwrap().cost, Cost::int(1));
}

#[test]
fn detour_secure_player2_escape() {
    let g = detour();
    let sigma_p = memoryless(&g, &[(A, B), (B, C)]);
    let r = check_secure(&g, &sigma_p).unwrap();
    let Verdict::ProfitableDeviation { witness, costs } = &r.verdicts[1] else { panic!("player 2 should deviate") };
    assert_eq!(costs, &vec![Cost::PlusInfinity, Cost::PlusInfinity]);
    assert_eq!(witness.at(2), A);
}

#[test]
fn detour_built_equilibria() {
    let g = detour();
    let nash = build_nash(&g, NashVariant::Reach).unwrap();
    assert!(nash.report.is_ok());
    let secure = build_secure(&g).unwrap();
    assert_ne!(secure.eq_type, PlayerSet::all(2));
    assert!(check_nash(&g, &secure.profile).unwrap().is_ok());
}

#[test]
fn detour_normalization_bound() {
    let g = detour();
    let cert = certify(&g, detour_tau(&g), EquilibriumKind::Nash, None, 0).unwrap();
    let norm = normalize_nash(&cert, &g).unwrap();
    assert_eq!(norm.eq_type, PlayerSet::all(2));
    assert!(norm.outcome.span() - 1 < 3 * g.num_vertices());
}

#[test]
fn fork_lift_fails() {
    let g = fork();
    let prof = memoryless(&g, &[(A, D)]);
    assert!(check_qualitative_nash(&g, &prof).unwrap().is_ok());
    let r = check_nash(&g, &prof).unwrap();
    assert_eq!(r.costs[0], Cost::int(2));
    let Verdict::ProfitableDeviation { costs, .. } = &r.verdicts[0] else { panic!("player 1 should deviate") };
    assert_eq!(costs[0], Cost::int(1));
    let secure = build_secure(&g).unwrap();
    assert_eq!(secure.outcome.at(1), B);
}

#[test]
fn branch_types() {
    let g = branch();
    let cert = build_nash(&g, NashVariant::Reach).unwrap();
    assert!(cert.eq_type.is_empty() || cert.eq_type == PlayerSet::singleton(PlayerId(1)));
    let c = payoff(&cert.outcome, &g).unwrap();
    assert_eq!(c, cert.costs);
}

#[test]
fn weighted_depth_uses_cost_ratio() {
    let mut b = ArenaBuilder::new();
    let p = b.player(Objective::reach([1]));
    b.vertex("u", p);
    b.vertex("v", p);
    let one = Rational::from_integer(1);
    let hundred = Rational::from_integer(100);
    b.weighted_edge(0, 1, vec![hundred]).weighted_edge(1, 0, vec![one]);
    let g = b.build();
    let params = required_depth(&g, DepthVariant::NashWeighted);
    assert_eq!(params.k, 100);
    let n = 1;
    let nv = 2;
    assert_eq!(params.depth, ((n + 1) * 101 * nv).max((n * 101 + 1) * nv * 100));
}
