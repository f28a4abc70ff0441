//! Seeded random instance generation for tests and the `gen` subcommand.
//!
//! Generated instances stay at desk scale: at most 5 routers, 2 cards per
//! router, 2 ports per card, 4 edges (8 directed links), 3 demands and 3
//! energy states. The edge set always spans every router and the top state
//! of every link can carry the combined volume of all demands, so every
//! generated instance is routable and capacity-feasible by construction.
//! Identical seeds produce identical instances.

use crate::model::{build_instance, Demand, Instance, LinkStateSpec, RawInstance};
use crate::rational::Rat;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MAX_ROUTERS: usize = 5;
const MAX_EDGES: usize = 4;
const MAX_DEMANDS: usize = 3;
const MAX_STATES: usize = 3;

/// Combined demand volume never exceeds 3 · 12 = 36; every link's top state
/// is clamped to at least this capacity.
const TOP_CAPACITY_FLOOR_HALVES: i64 = 80;

/// Deterministic pseudo-random instance for a seed.
pub fn generate_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(raw) = try_topology(&mut rng) {
            return build_instance(raw).expect("generated instances are valid");
        }
    }
}

/// The canonical instance file for a seed (what `gen` writes).
pub fn generate_file_json(seed: u64) -> String {
    crate::model::instance_to_json(&generate_instance(seed))
}

/// A value in halves: integers and x.5 both occur, exercising the exact
/// rational path end to end.
fn halves(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rat {
    Rat::from_ratio(rng.gen_range(lo..=hi), 2)
}

fn try_topology(rng: &mut ChaCha8Rng) -> Option<RawInstance> {
    let router_count = rng.gen_range(2..=MAX_ROUTERS);
    let state_count = rng.gen_range(1..=MAX_STATES);

    let mut raw = RawInstance {
        state_count,
        ..Default::default()
    };
    let mut free_ports: Vec<Vec<usize>> = Vec::new();
    for r in 0..router_count {
        raw.router_power.push(halves(rng, 0, 24));
        let mut ports_here = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            let card = raw.card_power.len();
            raw.card_power.push(halves(rng, 0, 16));
            raw.router_of_card.push(r);
            for _ in 0..rng.gen_range(1..=2) {
                ports_here.push(raw.card_of_port.len());
                raw.card_of_port.push(card);
            }
        }
        free_ports.push(ports_here);
    }

    let take_port = |free: &mut Vec<Vec<usize>>, r: usize, rng: &mut ChaCha8Rng| {
        let i = rng.gen_range(0..free[r].len());
        free[r].swap_remove(i)
    };

    // Spanning tree over the routers, then a few extra edges.
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for r in 1..router_count {
        let candidates: Vec<usize> = (0..r).filter(|&q| !free_ports[q].is_empty()).collect();
        if candidates.is_empty() || free_ports[r].is_empty() {
            return None; // unlucky port draw; redraw the whole topology
        }
        let q = candidates[rng.gen_range(0..candidates.len())];
        let pa = take_port(&mut free_ports, q, rng);
        let pb = take_port(&mut free_ports, r, rng);
        edges.push((pa, pb));
    }
    let extra = rng.gen_range(0..=MAX_EDGES - edges.len());
    for _ in 0..extra {
        let candidates: Vec<usize> = (0..router_count)
            .filter(|&r| !free_ports[r].is_empty())
            .collect();
        if candidates.len() < 2 {
            break;
        }
        let a = candidates[rng.gen_range(0..candidates.len())];
        let b = loop {
            let b = candidates[rng.gen_range(0..candidates.len())];
            if b != a {
                break b;
            }
        };
        let pa = take_port(&mut free_ports, a, rng);
        let pb = take_port(&mut free_ports, b, rng);
        edges.push((pa, pb));
    }

    for (pa, pb) in edges {
        raw.link_source.push(pa);
        raw.link_target.push(pb);
        raw.link_states.push(draw_states(rng, state_count));
        raw.link_source.push(pb);
        raw.link_target.push(pa);
        raw.link_states.push(draw_states(rng, state_count));
    }

    for _ in 0..rng.gen_range(1..=MAX_DEMANDS) {
        let source = rng.gen_range(0..router_count);
        let mut target = rng.gen_range(0..router_count - 1);
        if target >= source {
            target += 1;
        }
        raw.demands.push(Demand {
            source,
            target,
            volume: halves(rng, 2, 24),
        });
    }
    Some(raw)
}

fn draw_states(rng: &mut ChaCha8Rng, state_count: usize) -> Vec<LinkStateSpec> {
    let mut capacity_halves: Vec<i64> = (0..state_count).map(|_| rng.gen_range(20..=240)).collect();
    capacity_halves.sort_unstable();
    let top = capacity_halves.last_mut().expect("at least one state");
    *top = (*top).max(TOP_CAPACITY_FLOOR_HALVES);
    capacity_halves
        .into_iter()
        .map(|c| LinkStateSpec {
            capacity: Rat::from_ratio(c, 2),
            // Power is drawn independently of capacity, so a larger state is
            // sometimes the cheaper one and state selection must genuinely
            // minimize.
            power: halves(rng, 0, 30),
        })
        .collect()
}
