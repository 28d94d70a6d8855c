use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use num_traits::Zero;

use crate::arena::{Cost, GameArena, Lasso, ObjectiveKind, PlayerId, Rational, Vertex};
use crate::automaton::StrategyAutomaton;
use crate::error::{GameError, Result};

const MAX_PRODUCT: usize = 5_000_000;

/// The arena with every player but the deviator replaced by its automaton.
///
/// A state is a vertex together with the memory of each fixed automaton.
/// Only vertices of the deviator have more than one successor.
#[derive(Clone, Debug)]
pub struct Product {
    pub deviator: PlayerId,
    vertex: Vec<Vertex>,
    succ: Vec<Vec<usize>>,
}

impl Product {
    pub fn build(arena: &GameArena, profile: &[StrategyAutomaton], deviator: PlayerId) -> Result<Product> {
        let n = arena.num_players();
        let v0 = arena.initial();
        let mut start: Vec<u32> = vec![0; n + 1];
        start[0] = v0 as u32;
        for (i, a) in profile.iter().enumerate() {
            if i != deviator.0 {
                start[i + 1] = a.start(v0) as u32;
            }
        }
        let mut index: HashMap<Vec<u32>, usize> = HashMap::from([(start.clone(), 0)]);
        let mut keys = vec![start];
        let mut succ: Vec<Vec<usize>> = Vec::new();
        let mut i = 0;
        while i < keys.len() {
            let key = keys[i].clone();
            let v = key[0] as usize;
            let owner = arena.owner(v);
            let moves: Vec<Vertex> = if owner == deviator {
                arena.successors(v).to_vec()
            } else {
                vec![profile[owner.0].choose(arena, key[owner.0 + 1] as usize, v)]
            };
            let mut row = Vec::with_capacity(moves.len());
            for w in moves {
                let mut next = key.clone();
                next[0] = w as u32;
                for (k, a) in profile.iter().enumerate() {
                    if k != deviator.0 {
                        next[k + 1] = a.step(key[k + 1] as usize, w) as u32;
                    }
                }
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = keys.len();
                        if id >= MAX_PRODUCT {
                            return Err(GameError::InstanceTooLarge("product exceeds 5M states".into()));
                        }
                        index.insert(next.clone(), id);
                        keys.push(next);
                        id
                    }
                };
                row.push(id);
            }
            succ.push(row);
            i += 1;
        }
        let vertex = keys.iter().map(|k| k[0] as usize).collect();
        Ok(Product { deviator, vertex, succ })
    }

    pub fn num_states(&self) -> usize {
        self.vertex.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn vertex(&self, s: usize) -> Vertex {
        self.vertex[s]
    }

    pub fn successors(&self, s: usize) -> &[usize] {
        &self.succ[s]
    }

    /// Play that follows `path` and then always the first successor.
    pub fn lasso_from_path(&self, path: &[usize]) -> Lasso {
        let mut seq: Vec<usize> = path.to_vec();
        let base = seq.len() - 1;
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut cur = *seq.last().expect("nonempty path");
        loop {
            if let Some(&k) = seen.get(&cur) {
                let verts: Vec<Vertex> = seq.iter().map(|&s| self.vertex[s]).collect();
                let stem = verts[..=k].to_vec();
                let cycle = verts[k + 1..].to_vec();
                return Lasso::from_parts_unchecked(stem, cycle).canonical();
            }
            seen.insert(cur, base + seen.len());
            cur = self.succ[cur][0];
            seq.push(cur);
        }
    }

    fn path_to(&self, parent: &[usize], target: usize) -> Vec<usize> {
        let mut path = vec![target];
        let mut s = target;
        while s != self.initial() {
            s = parent[s];
            path.push(s);
        }
        path.reverse();
        path
    }
}

/// Best cost the deviator can secure against the fixed automata, with a
/// play achieving it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BestResponse {
    pub cost: Cost,
    pub witness: Lasso,
}

pub(crate) fn best_response_in(arena: &GameArena, prod: &Product) -> BestResponse {
    let j = prod.deviator;
    match arena.objective(j).kind {
        ObjectiveKind::Reach if arena.is_weighted() => cheapest_visit(arena, prod),
        ObjectiveKind::Reach => shortest_visit(arena, prod),
        ObjectiveKind::Safety => longest_delay(arena, prod),
    }
}

fn shortest_visit(arena: &GameArena, prod: &Product) -> BestResponse {
    let j = prod.deviator;
    let n = prod.num_states();
    let mut parent = vec![usize::MAX; n];
    let mut dist = vec![usize::MAX; n];
    dist[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        if arena.in_target(j, prod.vertex(s)) {
            let path = prod.path_to(&parent, s);
            return BestResponse { cost: Cost::int(dist[s] as i64), witness: prod.lasso_from_path(&path) };
        }
        for &t in prod.successors(s) {
            if dist[t] == usize::MAX {
                dist[t] = dist[s] + 1;
                parent[t] = s;
                queue.push_back(t);
            }
        }
    }
    BestResponse { cost: Cost::PlusInfinity, witness: prod.lasso_from_path(&[0]) }
}

fn cheapest_visit(arena: &GameArena, prod: &Product) -> BestResponse {
    let j = prod.deviator;
    let n = prod.num_states();
    let mut parent = vec![usize::MAX; n];
    let mut dist: Vec<Option<Rational>> = vec![None; n];
    let mut done = vec![false; n];
    dist[0] = Some(Rational::zero());
    let mut heap = BinaryHeap::from([Reverse((Rational::zero(), 0usize))]);
    while let Some(Reverse((d, s))) = heap.pop() {
        if done[s] {
            continue;
        }
        done[s] = true;
        let v = prod.vertex(s);
        if arena.in_target(j, v) {
            let path = prod.path_to(&parent, s);
            return BestResponse { cost: Cost::Finite(d), witness: prod.lasso_from_path(&path) };
        }
        for &t in prod.successors(s) {
            let nd = d + arena.cost(j, v, prod.vertex(t));
            if !done[t] && dist[t].is_none_or(|x| nd < x) {
                dist[t] = Some(nd);
                parent[t] = s;
                heap.push(Reverse((nd, t)));
            }
        }
    }
    BestResponse { cost: Cost::PlusInfinity, witness: prod.lasso_from_path(&[0]) }
}

fn longest_delay(arena: &GameArena, prod: &Product) -> BestResponse {
    let j = prod.deviator;
    let bad = |s: usize| arena.in_target(j, prod.vertex(s));
    if bad(0) {
        return BestResponse { cost: Cost::ZERO, witness: prod.lasso_from_path(&[0]) };
    }
    // Depth-first search restricted to safe states; a back edge is a safe cycle.
    let n = prod.num_states();
    const WHITE: u8 = 0;
    const GREY: u8 = 1;
    const BLACK: u8 = 2;
    let mut color = vec![WHITE; n];
    let mut down = vec![0usize; n];
    let mut next = vec![usize::MAX; n];
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    color[0] = GREY;
    while let Some(&mut (s, ref mut k)) = stack.last_mut() {
        let succ = prod.successors(s);
        if *k < succ.len() {
            let t = succ[*k];
            *k += 1;
            if bad(t) {
                continue;
            }
            match color[t] {
                WHITE => {
                    color[t] = GREY;
                    stack.push((t, 0));
                }
                GREY => {
                    let mut path: Vec<usize> = stack.iter().map(|&(x, _)| x).collect();
                    path.push(t);
                    return BestResponse {
                        cost: Cost::MinusInfinity,
                        witness: cycle_lasso(prod, &path),
                    };
                }
                _ => {}
            }
        } else {
            for &t in succ {
                if !bad(t) && (next[s] == usize::MAX || down[t] + 1 > down[s]) {
                    down[s] = down[t] + 1;
                    next[s] = t;
                }
            }
            color[s] = BLACK;
            stack.pop();
        }
    }
    let mut path = vec![0];
    let mut s = 0;
    while next[s] != usize::MAX {
        s = next[s];
        path.push(s);
    }
    let b = prod.successors(s).iter().copied().find(|&t| bad(t)).expect("dead end of the safe region");
    path.push(b);
    BestResponse { cost: Cost::int(-(path.len() as i64 - 1)), witness: prod.lasso_from_path(&path) }
}

/// Lasso of a path whose last state already occurs earlier on it.
fn cycle_lasso(prod: &Product, path: &[usize]) -> Lasso {
    let last = *path.last().expect("nonempty");
    let k = path.iter().position(|&s| s == last).expect("repeated state");
    let verts: Vec<Vertex> = path.iter().map(|&s| prod.vertex(s)).collect();
    Lasso::from_parts_unchecked(verts[..=k].to_vec(), verts[k + 1..].to_vec()).canonical()
}

/// Searches a play with own first visit exactly at `own` (or never, when
/// `own` is `None`) that avoids the opponent's target up to index `opp`.
pub(crate) fn secure_stage_two(
    arena: &GameArena,
    prod: &Product,
    opponent: PlayerId,
    own: Option<usize>,
    opp: usize,
) -> Option<Lasso> {
    let j = prod.deviator;
    let horizon = own.map_or(opp, |c| c.max(opp));
    let allowed = |s: usize, t: usize| {
        let v = prod.vertex(s);
        if t <= opp && arena.in_target(opponent, v) {
            return false;
        }
        match own {
            Some(c) if t < c => !arena.in_target(j, v),
            Some(c) if t == c => arena.in_target(j, v),
            _ => true,
        }
    };
    if !allowed(0, 0) {
        return None;
    }
    let mut layers: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::from([(0, usize::MAX)])];
    for t in 1..=horizon {
        let mut next: BTreeMap<usize, usize> = BTreeMap::new();
        for &s in layers[t - 1].keys() {
            for &u in prod.successors(s) {
                if allowed(u, t) {
                    next.entry(u).or_insert(s);
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        layers.push(next);
    }
    let mut s = *layers[horizon].keys().next().expect("nonempty layer");
    let mut path = vec![s];
    for t in (1..=horizon).rev() {
        s = layers[t][&s];
        path.push(s);
    }
    path.reverse();
    Some(prod.lasso_from_path(&path))
}

/// States reachable from the initial state whose vertex is in the target
/// of the deviator; returns a path to the first one found.
pub(crate) fn reach_any(arena: &GameArena, prod: &Product) -> Option<Lasso> {
    let j = prod.deviator;
    let n = prod.num_states();
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        if arena.in_target(j, prod.vertex(s)) {
            return Some(prod.lasso_from_path(&prod.path_to(&parent, s)));
        }
        for &t in prod.successors(s) {
            if !seen[t] {
                seen[t] = true;
                parent[t] = s;
                queue.push_back(t);
            }
        }
    }
    None
}
