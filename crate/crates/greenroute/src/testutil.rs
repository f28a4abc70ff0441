//! Hand-built fixture instances shared across unit tests.

use crate::model::{build_instance, Demand, Instance, LinkStateSpec, RawInstance};
use crate::rational::Rat;

fn rat(s: &str) -> Rat {
    s.parse().unwrap()
}

fn states(table: &[(&str, &str)]) -> Vec<LinkStateSpec> {
    table
        .iter()
        .map(|(capacity, power)| LinkStateSpec {
            capacity: rat(capacity),
            power: rat(power),
        })
        .collect()
}

/// Two routers, one card and one port each, one edge between them
/// (links 0: p1→p2, 1: p2→p1), two states with capacities (10, 100) and
/// powers (1, 4) on both links, one demand r1→r2 of volume 5.
pub fn t1_raw() -> RawInstance {
    RawInstance {
        router_power: vec![rat("2"), rat("2")],
        card_power: vec![rat("1"), rat("1")],
        router_of_card: vec![0, 1],
        card_of_port: vec![0, 1],
        link_source: vec![0, 1],
        link_target: vec![1, 0],
        link_states: vec![states(&[("10", "1"), ("100", "4")]); 2],
        state_count: 2,
        demands: vec![Demand {
            source: 0,
            target: 1,
            volume: rat("5"),
        }],
        ..Default::default()
    }
}

pub fn t1_instance() -> Instance {
    build_instance(t1_raw()).expect("T1 is valid")
}

/// T1 plus a reverse demand r2→r1 of volume 50, which needs the high state
/// on the reverse link while the forward link alone would not.
pub fn t1_asym_instance() -> Instance {
    let mut raw = t1_raw();
    raw.demands.push(Demand {
        source: 1,
        target: 0,
        volume: rat("50"),
    });
    build_instance(raw).expect("T1-asym is valid")
}

/// T1 with the demand volume raised above every capacity.
pub fn t1_overload_instance() -> Instance {
    let mut raw = t1_raw();
    raw.demands[0].volume = rat("200");
    build_instance(raw).expect("overloaded T1 is structurally valid")
}

/// Three routers in a triangle: one card per router, two ports per card,
/// three edges (six directed links), uniform states.
///
/// Ports: r1 has p1 (to r2) and p2 (to r3); r2 has p3 (to r1) and p4
/// (to r3); r3 has p5 (to r1) and p6 (to r2). Links: 0: p1→p3, 1: p3→p1,
/// 2: p2→p5, 3: p5→p2, 4: p4→p6, 5: p6→p4.
pub fn t3_raw() -> RawInstance {
    RawInstance {
        router_power: vec![rat("2"); 3],
        card_power: vec![rat("1"); 3],
        router_of_card: vec![0, 1, 2],
        card_of_port: vec![0, 0, 1, 1, 2, 2],
        link_source: vec![0, 2, 1, 4, 3, 5],
        link_target: vec![2, 0, 4, 1, 5, 3],
        link_states: vec![states(&[("10", "1"), ("100", "4")]); 6],
        state_count: 2,
        demands: vec![],
        ..Default::default()
    }
}

pub fn t3_instance() -> Instance {
    build_instance(t3_raw()).expect("T3 is valid")
}

/// T3 with one demand r1→r2 of volume 5.
pub fn t3_one_demand_instance() -> Instance {
    let mut raw = t3_raw();
    raw.demands.push(Demand {
        source: 0,
        target: 1,
        volume: rat("5"),
    });
    build_instance(raw).expect("T3 with demand is valid")
}

/// A valid instance with routers and a card but no edges and no demands.
pub fn empty_instance() -> Instance {
    let raw = RawInstance {
        router_power: vec![rat("2")],
        card_power: vec![rat("1")],
        router_of_card: vec![0],
        card_of_port: vec![0],
        state_count: 1,
        ..Default::default()
    };
    build_instance(raw).expect("empty instance is valid")
}
