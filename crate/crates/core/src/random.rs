//! Seeded random arenas for tests and experiments.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arena::{ArenaBuilder, GameArena, Objective, PlayerId, Rational};

/// Shape of a random arena.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    pub vertices: usize,
    pub players: usize,
    /// The last `safety_players` players get safety objectives.
    pub safety_players: usize,
    pub max_out_degree: usize,
    /// Chance that a vertex joins a given target set.
    pub target_density: f64,
    /// Chance that a target set is forced nonempty.
    pub nonempty_target: f64,
    /// Integer edge costs drawn from `1..=max_cost`; `None` keeps unit costs.
    pub max_cost: Option<u32>,
    /// Same cost for every player on each edge.
    pub uniform_costs: bool,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            vertices: 5,
            players: 2,
            safety_players: 0,
            max_out_degree: 3,
            target_density: 0.25,
            nonempty_target: 0.9,
            max_cost: None,
            uniform_costs: false,
        }
    }
}

/// Draws an arena; the same seed and parameters always give the same arena.
///
/// Vertices without a drawn successor get a self-loop, so the result has no
/// dead end.
pub fn gen_random(params: &RandomParams, seed: u64) -> GameArena {
    assert!(params.vertices > 0 && params.players > 0 && params.players <= 64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = params.vertices;
    let mut b = ArenaBuilder::new();
    let reach = params.players - params.safety_players.min(params.players);
    for i in 0..params.players {
        let mut target: Vec<usize> = (0..nv).filter(|_| rng.random_bool(params.target_density)).collect();
        if target.is_empty() && rng.random_bool(params.nonempty_target) {
            target.push(rng.random_range(0..nv));
        }
        b.player(if i < reach { Objective::reach(target) } else { Objective::safety(target) });
    }
    for v in 0..nv {
        let owner = PlayerId(rng.random_range(0..params.players));
        b.vertex(format!("v{v}"), owner);
    }
    for u in 0..nv {
        let deg = rng.random_range(0..=params.max_out_degree.min(nv));
        let mut succ: Vec<usize> = sample(&mut rng, nv, deg).into_vec();
        if succ.is_empty() {
            succ.push(u);
        }
        succ.sort_unstable();
        for v in succ {
            match params.max_cost {
                None => {
                    b.edge(u, v);
                }
                Some(max) => {
                    let draw = |rng: &mut ChaCha8Rng| Rational::from_integer(rng.random_range(1..=max.max(1)) as i64);
                    let costs = if params.uniform_costs {
                        vec![draw(&mut rng); params.players]
                    } else {
                        (0..params.players).map(|_| draw(&mut rng)).collect()
                    };
                    b.weighted_edge(u, v, costs);
                }
            }
        }
    }
    b.initial(0);
    b.build()
}
