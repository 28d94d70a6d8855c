//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::{HashMap, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use quantgame::arena::{payoff, subdivide_edges, visit, visit_history};
use quantgame::attractor::solve_zero_sum_reach;
use quantgame::equilibrium::{
    build_nash, build_secure, normalize_nash, normalize_secure, slice_outcome, EquilibriumCertificate, NashVariant,
};
use quantgame::random::{gen_random, RandomParams};
use quantgame::tree_solver::{
    check_truncated_equilibrium, required_depth, solve_truncated, DepthVariant, Preference,
};
use quantgame::verifier::{
    best_response, brute_force_check, check_nash, check_qualitative_nash, check_secure, CheckKind, Verdict,
};
use quantgame::{Cost, GameArena, Lasso, ObjectiveKind, PlayerId, PlayerSet, StrategyAutomaton};

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

#[derive(Default)]
struct Pool {
    /// Arenas from the random suites, for the attractor criterion.
    arenas: Vec<GameArena>,
    /// Nash certificates of suite 3.
    unit: Vec<(GameArena, EquilibriumCertificate)>,
    /// Nash certificates of suite 7.
    weighted: Vec<(GameArena, EquilibriumCertificate)>,
}

fn lasso(stem: &[usize], cycle: &[usize]) -> Lasso {
    Lasso::new(stem.to_vec(), cycle.to_vec()).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = detour();
    let inf = Cost::PlusInfinity;
    ensure!(payoff(&lasso(&[A], &[D, A]), &g).unwrap() == vec![inf, Cost::int(1)], "payoff (AD)^w");
    ensure!(payoff(&lasso(&[A], &[B, C, A]), &g).unwrap() == vec![Cost::int(2), inf], "payoff (ABC)^w");
    ensure!(payoff(&lasso(&[A, D, A], &[B, C, A]), &g).unwrap() == vec![Cost::int(4), Cost::int(1)], "payoff AD(ABC)^w");

    let sigma = memoryless(&g, &[(A, D), (B, C)]);
    let r = check_nash(&g, &sigma).unwrap();
    ensure!(r.deviators() == vec![PlayerId(0)], "sigma should fail for player 1 only");
    let Verdict::ProfitableDeviation { costs, witness } = &r.verdicts[0] else { unreachable!() };
    ensure!(costs[0] == Cost::int(2), "player-1 witness cost {}", costs[0]);
    ensure!(payoff(witness, &g).unwrap()[0] == Cost::int(2), "witness payoff");

    let sigma_p = memoryless(&g, &[(A, B), (B, C)]);
    ensure!(check_nash(&g, &sigma_p).unwrap().is_ok(), "sigma' is Nash");
    let tau = detour_tau(&g);
    ensure!(check_nash(&g, &tau).unwrap().is_ok(), "tau is Nash");
    for (name, prof) in [("sigma'", &sigma_p), ("tau", &tau)] {
        let r = check_secure(&g, prof).unwrap();
        ensure!(r.deviators() == vec![PlayerId(1)], "{name}: secure check should blame player 2");
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(1), "took {t:?}");
    Ok(format!("golden values match, {t:?}"))
}

fn criterion_2() -> Outcome {
    let g = branch();
    let cert = build_nash(&g, NashVariant::Reach).map_err(|e| e.to_string())?;
    let p2 = PlayerSet::singleton(PlayerId(1));
    ensure!(cert.eq_type == p2 || cert.eq_type.is_empty(), "type {}", cert.eq_type);

    let prof = memoryless(&g, &[(A, B), (B, C), (C, C)]);
    let r = check_nash(&g, &prof).unwrap();
    ensure!(r.outcome == lasso(&[A, B, C], &[C]).canonical(), "hand profile outcome {:?}", r.outcome);
    let Verdict::ProfitableDeviation { costs, witness } = &r.verdicts[1] else {
        return Err("player 2 should deviate".into());
    };
    ensure!(costs[1] == Cost::int(3) && witness.at(2) == D, "player-2 deviation via D with cost 3");

    let params = required_depth(&g, DepthVariant::NashUnit).with_depth(2);
    let sol = solve_truncated(&g, &params, Preference::Nash).unwrap();
    ensure!(sol.outcome() == [A, B, C], "truncated outcome {:?}", sol.outcome());
    ensure!(check_truncated_equilibrium(&g, &sol, Preference::Nash).unwrap().is_equilibrium(), "G_2 check");
    Ok(format!("type {}, hand profile rejected, G_2 profile accepted", cert.eq_type))
}

fn criterion_3(pool: &mut Pool) -> Outcome {
    let start = Instant::now();
    let mut max_ratio = 0.0f64;
    for seed in 0..200u64 {
        let params = RandomParams {
            vertices: 1 + (seed % 6) as usize,
            players: 1 + (seed / 6 % 3) as usize,
            max_out_degree: 3,
            ..Default::default()
        };
        let g = gen_random(&params, seed);
        let cert = build_nash(&g, NashVariant::Reach).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(check_nash(&g, &cert.profile).unwrap().is_ok(), "seed {seed}: not Nash");
        let slice = cert.slice.as_ref().expect("built certificates carry a slice");
        ensure!(cert.eq_type == visit_history(&slice.alpha, &g), "seed {seed}: type differs from Visit(alpha)");
        let bound = 2 * g.num_players() * g.num_vertices();
        for c in &cert.costs {
            if let Some(x) = c.as_integer() {
                ensure!(x as usize <= bound, "seed {seed}: cost {x} above {bound}");
                max_ratio = max_ratio.max(x as f64 / bound as f64);
            }
        }
        pool.arenas.push(g.clone());
        pool.unit.push((g, cert));
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(60), "took {t:?}");
    Ok(format!("200 arenas verified, max cost/bound {max_ratio:.2}, {t:?}"))
}

fn random_memoryless(g: &GameArena, seed: u64) -> Vec<StrategyAutomaton> {
    let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let moves: Vec<(usize, usize)> = g
        .vertices()
        .map(|v| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            let s = g.successors(v);
            (v, s[(x % s.len() as u64) as usize])
        })
        .collect();
    memoryless(g, &moves)
}

fn criterion_4(pool: &mut Pool) -> Outcome {
    let mut deviations = 0;
    let mut checked = 0;
    for seed in 0..100u64 {
        let params = RandomParams { vertices: 2 + (seed % 4) as usize, players: 2, ..Default::default() };
        let g = gen_random(&params, 1000 + seed);
        let built = build_nash(&g, NashVariant::Reach).map_err(|e| format!("seed {seed}: {e}"))?;
        for prof in [random_memoryless(&g, seed), random_memoryless(&g, seed + 7777), built.profile] {
            let exact = check_nash(&g, &prof).unwrap();
            let brute = brute_force_check(&g, &prof, CheckKind::Nash, 8, 1).map_err(|e| e.to_string())?;
            ensure!(exact.deviators() == brute.deviators(), "seed {seed}: oracle disagreement");
            deviations += exact.deviators().len();
            let secure = check_secure(&g, &prof).unwrap();
            ensure!(!secure.is_ok() || exact.is_ok(), "seed {seed}: secure but not Nash");
            checked += 1;
        }
        pool.arenas.push(g);
    }
    Ok(format!("{checked} profiles agree, {deviations} deviations found"))
}

fn criterion_5(pool: &mut Pool) -> Outcome {
    let mut types: HashMap<String, usize> = HashMap::new();
    for seed in 0..100u64 {
        let params = RandomParams { vertices: 1 + (seed % 6) as usize, players: 2, ..Default::default() };
        let g = gen_random(&params, 2000 + seed);
        let depth = required_depth(&g, DepthVariant::SecureTwoPlayer);
        let sol = solve_truncated(&g, &depth, Preference::Secure).unwrap();
        let slice = slice_outcome(sol.outcome(), &g, &depth).unwrap();
        let va = visit_history(&slice.alpha, &g);
        let vr = visit_history(sol.outcome(), &g);
        ensure!(!(!va.is_empty() || vr != PlayerSet::all(2)) || va == vr, "seed {seed}: dichotomy broken");

        let cert = build_secure(&g).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(check_secure(&g, &cert.profile).unwrap().is_ok(), "seed {seed}: not secure");
        ensure!(check_nash(&g, &cert.profile).unwrap().is_ok(), "seed {seed}: not Nash");
        let norm = normalize_secure(&cert, &g).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(norm.eq_type == cert.eq_type, "seed {seed}: type changed");
        ensure!(check_secure(&g, &norm.profile).unwrap().is_ok(), "seed {seed}: normalized not secure");
        *types.entry(cert.eq_type.to_string()).or_default() += 1;
        pool.arenas.push(g);
    }
    let mut t: Vec<_> = types.into_iter().collect();
    t.sort();
    Ok(format!("100 secure certificates, types {t:?}"))
}

/// Explores the product of the arena with every automaton but the deviator's.
fn product(g: &GameArena, prof: &[StrategyAutomaton], j: PlayerId) -> (Vec<usize>, Vec<Vec<usize>>) {
    let key0: Vec<usize> = std::iter::once(g.initial())
        .chain(prof.iter().enumerate().map(|(i, a)| if i == j.0 { 0 } else { a.start(g.initial()) }))
        .collect();
    let mut ids = HashMap::from([(key0.clone(), 0usize)]);
    let mut keys = vec![key0];
    let mut succ = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let key = keys[i].clone();
        let v = key[0];
        let o = g.owner(v);
        let moves = if o == j { g.successors(v).to_vec() } else { vec![prof[o.0].choose(g, key[o.0 + 1], v)] };
        let mut row = Vec::new();
        for w in moves {
            let mut next = key.clone();
            next[0] = w;
            for (k, a) in prof.iter().enumerate() {
                if k != j.0 {
                    next[k + 1] = a.step(key[k + 1], w);
                }
            }
            let n = ids.len();
            let id = *ids.entry(next.clone()).or_insert_with(|| {
                keys.push(next);
                n
            });
            row.push(id);
        }
        succ.push(row);
        i += 1;
    }
    (keys.iter().map(|k| k[0]).collect(), succ)
}

/// Whether a cycle avoiding the bad set is reachable without touching it,
/// by peeling sinks off the safe reachable subgraph.
fn safe_cycle(g: &GameArena, prof: &[StrategyAutomaton], j: PlayerId) -> bool {
    let (vert, succ) = product(g, prof, j);
    let bad = |s: usize| g.in_target(j, vert[s]);
    if bad(0) {
        return false;
    }
    let n = vert.len();
    let mut reach = vec![false; n];
    let mut queue = VecDeque::from([0]);
    reach[0] = true;
    while let Some(s) = queue.pop_front() {
        for &t in &succ[s] {
            if !bad(t) && !reach[t] {
                reach[t] = true;
                queue.push_back(t);
            }
        }
    }
    let mut out: Vec<usize> = (0..n).map(|s| succ[s].iter().filter(|&&t| reach[t]).count()).collect();
    let mut pred = vec![Vec::new(); n];
    for s in (0..n).filter(|&s| reach[s]) {
        for &t in succ[s].iter().filter(|&&t| reach[t]) {
            pred[t].push(s);
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&s| reach[s] && out[s] == 0).collect();
    let mut removed = 0;
    while let Some(s) = stack.pop() {
        removed += 1;
        for &p in &pred[s] {
            out[p] -= 1;
            if out[p] == 0 {
                stack.push(p);
            }
        }
    }
    removed < reach.iter().filter(|&&r| r).count()
}

fn criterion_6(pool: &mut Pool) -> Outcome {
    let mut minus_inf = 0;
    let mut cross = 0;
    for seed in 0..100u64 {
        let players = 2 + (seed % 2) as usize;
        let params = RandomParams {
            vertices: 2 + (seed % 5) as usize,
            players,
            safety_players: 1 + (seed / 2 % (players as u64 - 1)) as usize,
            ..Default::default()
        };
        let g = gen_random(&params, 3000 + seed);
        let cert = build_nash(&g, NashVariant::ReachSafety).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(check_nash(&g, &cert.profile).unwrap().is_ok(), "seed {seed}: not Nash");
        for j in g.players().filter(|&j| g.objective(j).kind == ObjectiveKind::Safety) {
            let br = best_response(&g, &cert.profile, j).unwrap();
            let oracle = safe_cycle(&g, &cert.profile, j);
            ensure!((br.cost == Cost::MinusInfinity) == oracle, "seed {seed}: {j} value {} vs cycle {oracle}", br.cost);
            minus_inf += usize::from(oracle);
            cross += 1;
        }
        pool.arenas.push(g);
    }
    Ok(format!("100 arenas verified, {cross} safety values cross-checked ({minus_inf} at -inf)"))
}

fn criterion_7(pool: &mut Pool) -> Outcome {
    let mut subdivided = 0;
    for seed in 0..100u64 {
        let uniform = seed % 3 == 0;
        let params = RandomParams {
            vertices: 2 + (seed % 4) as usize,
            players: 1 + (seed / 4 % 2) as usize,
            max_cost: Some(5),
            uniform_costs: uniform,
            ..Default::default()
        };
        let g = gen_random(&params, 4000 + seed);
        let cert = build_nash(&g, NashVariant::Weighted).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(check_nash(&g, &cert.profile).unwrap().is_ok(), "seed {seed}: not Nash");
        if uniform {
            let sub = subdivide_edges(&g).unwrap();
            let unit = build_nash(&sub.arena, NashVariant::Reach).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure!(check_nash(&sub.arena, &unit.profile).unwrap().is_ok(), "seed {seed}: subdivided not Nash");
            let projected = sub.project_lasso(&unit.outcome).unwrap();
            ensure!(payoff(&projected, &g).unwrap() == unit.costs, "seed {seed}: translated payoffs differ");
            subdivided += 1;
        }
        pool.arenas.push(g.clone());
        pool.weighted.push((g, cert));
    }
    for seed in 0..20u64 {
        let g = gen_random(&RandomParams { vertices: 1 + (seed % 6) as usize, players: 1 + (seed % 3) as usize, ..Default::default() }, seed);
        let d = required_depth(&g, DepthVariant::NashWeighted).depth;
        let expected = (g.num_players() + 1) * 2 * g.num_vertices();
        ensure!(d == expected, "unit-cost weighted depth {d} != {expected}");
    }
    Ok(format!("100 weighted arenas verified, {subdivided} subdivision routes match"))
}

fn criterion_8(pool: &mut Pool) -> Outcome {
    let mut checked = 0;
    for g in &pool.arenas {
        let nv = g.num_vertices();
        for j in g.players().filter(|&j| g.objective(j).kind == ObjectiveKind::Reach) {
            let att = solve_zero_sum_reach(g, j).unwrap();
            let goal = |v: usize| g.in_target(j, v);
            for v in g.vertices() {
                match att.rank(v) {
                    Some(r) => {
                        ensure!(r < nv, "rank {r} at |V| = {nv}");
                        // Every adversary path following reach moves hits the goal within r steps.
                        let mut frontier = vec![v];
                        let mut hit_all = false;
                        for _ in 0..=r {
                            frontier.retain(|&u| !goal(u));
                            if frontier.is_empty() {
                                hit_all = true;
                                break;
                            }
                            let mut next = Vec::new();
                            for &u in &frontier {
                                if g.owner(u) == j {
                                    next.push(att.reach_move(u).ok_or("missing reach move")?);
                                } else {
                                    next.extend_from_slice(g.successors(u));
                                }
                            }
                            next.sort_unstable();
                            next.dedup();
                            frontier = next;
                        }
                        ensure!(hit_all, "reach strategy of {j} misses the goal from {v} within {r}");
                    }
                    None => {
                        ensure!(!goal(v), "goal vertex outside the attractor");
                        let nexts: Vec<usize> = if g.owner(v) == j {
                            g.successors(v).to_vec()
                        } else {
                            vec![att.avoid_move(v).ok_or("missing avoid move")?]
                        };
                        ensure!(nexts.iter().all(|&w| att.rank(w).is_none()), "avoid strategy leaves the safe region");
                    }
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} attractors over {} arenas", pool.arenas.len()))
}

fn criterion_9(pool: &mut Pool) -> Outcome {
    let mut n = 0;
    for (g, cert) in pool.unit.iter().chain(&pool.weighted) {
        ensure!(check_qualitative_nash(g, &cert.profile).unwrap().is_ok(), "qualitative check failed");
        n += 1;
    }
    let g = fork();
    let prof = memoryless(&g, &[(A, D)]);
    ensure!(check_qualitative_nash(&g, &prof).unwrap().is_ok(), "fork game qualitative");
    ensure!(check_nash(&g, &prof).unwrap().deviators() == vec![PlayerId(0)], "fork game quantitative");
    Ok(format!("{n} certificates lift, fork game counterexample holds"))
}

fn criterion_10(pool: &mut Pool) -> Outcome {
    for (i, (g, cert)) in pool.unit.iter().enumerate() {
        let norm = normalize_nash(cert, g).map_err(|e| format!("arena {i}: {e}"))?;
        ensure!(norm.eq_type == cert.eq_type, "arena {i}: type changed");
        ensure!(check_nash(g, &norm.profile).unwrap().is_ok(), "arena {i}: not Nash");
        ensure!(visit(&norm.outcome, g) == norm.eq_type, "arena {i}: type");
        let len = norm.outcome.span() - 1;
        let bound = (g.num_players() + 1) * g.num_vertices();
        ensure!(len < bound, "arena {i}: |alpha beta| = {len} not below {bound}");
    }
    Ok(format!("{} certificates normalized", pool.unit.len()))
}

fn main() {
    let mut pool = Pool::default();
    type Run = Box<dyn FnOnce(&mut Pool) -> Outcome>;
    let criteria: Vec<(&str, Run)> = vec![
        ("detour game golden suite", Box::new(|_| criterion_1())),
        ("branch game suite", Box::new(|_| criterion_2())),
        ("random Nash suite", Box::new(criterion_3)),
        ("oracle agreement", Box::new(criterion_4)),
        ("secure suite", Box::new(criterion_5)),
        ("safety suite", Box::new(criterion_6)),
        ("weighted suite", Box::new(criterion_7)),
        ("attractor suite", Box::new(criterion_8)),
        ("qualitative lift", Box::new(criterion_9)),
        ("normalization", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(|| run(&mut pool)))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panic".into())));
        match result {
            Ok(detail) => println!("PASS criterion {:>2} ({name}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} ({name}): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
