//! Hierarchical network instance: routers holding line cards, cards holding
//! ports, directed links between ports paired into undirected edges, traffic
//! demands between routers and per-link energy state tables.
//!
//! The raw description ([`RawInstance`]) is link-centric so that every
//! malformed wiring (dangling references, ports with several attached links,
//! half-connected ports, self-loop edges) is representable and rejected with
//! a named error by [`build_instance`]. A validated [`Instance`] is immutable
//! and safe to share across threads.

use crate::rational::Rat;
use serde_json::{Map, Value};
use std::collections::HashMap;
use std::fmt;

/// One energy state of a directed link: usable capacity and power draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkStateSpec {
    pub capacity: Rat,
    pub power: Rat,
}

/// Unsplittable traffic requirement between two routers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demand {
    pub source: usize,
    pub target: usize,
    pub volume: Rat,
}

/// Two oppositely directed links between the same pair of ports.
///
/// `forward` is always the smaller link index; `port_a` is the port the
/// forward link leaves and `port_b` the port it enters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct EdgePair {
    pub forward: usize,
    pub reverse: usize,
    pub port_a: usize,
    pub port_b: usize,
}

/// Unvalidated instance description. Counts are implied by vector lengths:
/// R = `router_power.len()`, C = `router_of_card.len()`,
/// P = `card_of_port.len()`, E = `link_source.len()`.
#[derive(Debug, Clone, Default)]
pub struct RawInstance {
    /// Display names; empty vectors get defaults `r1..`, `c1..`, `p1..`.
    pub router_names: Vec<String>,
    pub card_names: Vec<String>,
    pub port_names: Vec<String>,
    pub router_power: Vec<Rat>,
    pub card_power: Vec<Rat>,
    pub router_of_card: Vec<usize>,
    pub card_of_port: Vec<usize>,
    pub link_source: Vec<usize>,
    pub link_target: Vec<usize>,
    pub link_states: Vec<Vec<LinkStateSpec>>,
    pub state_count: usize,
    pub demands: Vec<Demand>,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("Schema: {0}")]
    Schema(String),
    #[error("DuplicateId: {kind} id {id:?} appears more than once")]
    DuplicateId { kind: &'static str, id: String },
    #[error("DanglingReference: {kind} reference {what} is not defined")]
    DanglingReference { kind: &'static str, what: String },
    #[error("InvalidCount: {what} must be {requirement}, got {value}")]
    InvalidCount {
        what: &'static str,
        requirement: &'static str,
        value: usize,
    },
    #[error("NegativeParameter: {what} must be nonnegative")]
    NegativeParameter { what: String },
    #[error("StateCountMismatch: link {link} has {found} states, expected {expected}")]
    StateCountMismatch {
        link: usize,
        expected: usize,
        found: usize,
    },
    #[error("AmbiguousPortPairing: port {port} has {outgoing} outgoing and {incoming} incoming links; at most one of each is allowed")]
    AmbiguousPortPairing {
        port: String,
        outgoing: usize,
        incoming: usize,
    },
    #[error("PartiallyConnectedPort: ports [{}] have only one link direction attached", ports.join(", "))]
    PartiallyConnectedPort { ports: Vec<String> },
    #[error("UnpairedPort: the outgoing link of port {port} reaches {out_remote} but its incoming link comes from {in_remote}; the two links of a port must form one edge")]
    UnpairedPort {
        port: String,
        out_remote: String,
        in_remote: String,
    },
    #[error("SelfLoopEdge: ports {port_a} and {port_b} are both on router {router}")]
    SelfLoopEdge {
        router: String,
        port_a: String,
        port_b: String,
    },
    #[error("BadDemand: demand {demand}: {reason}")]
    BadDemand { demand: usize, reason: String },
}

/// Validated, immutable network description.
#[derive(Debug, Clone)]
pub struct Instance {
    router_names: Vec<String>,
    card_names: Vec<String>,
    port_names: Vec<String>,
    router_power: Vec<Rat>,
    card_power: Vec<Rat>,
    router_of_card: Vec<usize>,
    card_of_port: Vec<usize>,
    link_source: Vec<usize>,
    link_target: Vec<usize>,
    link_states: Vec<Vec<LinkStateSpec>>,
    state_count: usize,
    demands: Vec<Demand>,
    // Derived, fixed at build time.
    out_link_of_port: Vec<Option<usize>>,
    in_link_of_port: Vec<Option<usize>>,
    cards_of_router: Vec<Vec<usize>>,
    ports_of_card: Vec<Vec<usize>>,
    edge_pairs: Vec<EdgePair>,
    router_out_links: Vec<Vec<usize>>,
    router_in_links: Vec<Vec<usize>>,
}

impl Instance {
    pub fn router_count(&self) -> usize {
        self.router_power.len()
    }
    pub fn card_count(&self) -> usize {
        self.router_of_card.len()
    }
    pub fn port_count(&self) -> usize {
        self.card_of_port.len()
    }
    pub fn link_count(&self) -> usize {
        self.link_source.len()
    }
    pub fn state_count(&self) -> usize {
        self.state_count
    }
    pub fn demand_count(&self) -> usize {
        self.demands.len()
    }

    pub fn router_name(&self, r: usize) -> &str {
        &self.router_names[r]
    }
    pub fn card_name(&self, c: usize) -> &str {
        &self.card_names[c]
    }
    pub fn port_name(&self, p: usize) -> &str {
        &self.port_names[p]
    }

    pub fn router_power(&self, r: usize) -> &Rat {
        &self.router_power[r]
    }
    pub fn card_power(&self, c: usize) -> &Rat {
        &self.card_power[c]
    }
    pub fn router_of_card(&self, c: usize) -> usize {
        self.router_of_card[c]
    }
    pub fn card_of_port(&self, p: usize) -> usize {
        self.card_of_port[p]
    }
    pub fn router_of_port(&self, p: usize) -> usize {
        self.router_of_card[self.card_of_port[p]]
    }
    pub fn link_source(&self, e: usize) -> usize {
        self.link_source[e]
    }
    pub fn link_target(&self, e: usize) -> usize {
        self.link_target[e]
    }
    pub fn link_states(&self, e: usize) -> &[LinkStateSpec] {
        &self.link_states[e]
    }
    pub fn demands(&self) -> &[Demand] {
        &self.demands
    }
    pub fn demand(&self, d: usize) -> &Demand {
        &self.demands[d]
    }

    pub fn out_link_of_port(&self, p: usize) -> Option<usize> {
        self.out_link_of_port[p]
    }
    pub fn in_link_of_port(&self, p: usize) -> Option<usize> {
        self.in_link_of_port[p]
    }
    pub fn cards_of_router(&self, r: usize) -> &[usize] {
        &self.cards_of_router[r]
    }
    pub fn ports_of_card(&self, c: usize) -> &[usize] {
        &self.ports_of_card[c]
    }

    /// Ports with an attached link, ascending.
    pub fn connected_ports(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.port_count()).filter(|&p| self.out_link_of_port[p].is_some())
    }

    /// All undirected edges, ordered by their forward (smaller) link index.
    /// Every directed link appears in exactly one pair.
    pub fn edge_pairs(&self) -> &[EdgePair] {
        &self.edge_pairs
    }

    /// The pair a link belongs to.
    pub fn pair_of_link(&self, e: usize) -> &EdgePair {
        self.edge_pairs
            .iter()
            .find(|pair| pair.forward == e || pair.reverse == e)
            .expect("validated link must be paired")
    }

    /// The oppositely directed link of the same edge.
    pub fn opposite_link(&self, e: usize) -> usize {
        let pair = self.pair_of_link(e);
        if pair.forward == e {
            pair.reverse
        } else {
            pair.forward
        }
    }

    /// Links leaving and entering a router, both sorted ascending.
    pub fn router_links(&self, r: usize) -> (&[usize], &[usize]) {
        (&self.router_out_links[r], &self.router_in_links[r])
    }

    // Dense incidence views. These recompute from the sparse maps; tests pin
    // the agreement between the two representations.

    /// l\[c]\[p]: port p belongs to card c.
    pub fn dense_card_port(&self) -> Vec<Vec<u8>> {
        let mut l = vec![vec![0u8; self.port_count()]; self.card_count()];
        for p in 0..self.port_count() {
            l[self.card_of_port[p]][p] = 1;
        }
        l
    }

    /// g\[r]\[c]: card c belongs to router r.
    pub fn dense_router_card(&self) -> Vec<Vec<u8>> {
        let mut g = vec![vec![0u8; self.card_count()]; self.router_count()];
        for c in 0..self.card_count() {
            g[self.router_of_card[c]][c] = 1;
        }
        g
    }

    /// a\[e]\[p]: link e is outgoing from port p.
    pub fn dense_link_out(&self) -> Vec<Vec<u8>> {
        let mut a = vec![vec![0u8; self.port_count()]; self.link_count()];
        for e in 0..self.link_count() {
            a[e][self.link_source[e]] = 1;
        }
        a
    }

    /// b\[e]\[p]: link e is incoming to port p.
    pub fn dense_link_in(&self) -> Vec<Vec<u8>> {
        let mut b = vec![vec![0u8; self.port_count()]; self.link_count()];
        for e in 0..self.link_count() {
            b[e][self.link_target[e]] = 1;
        }
        b
    }
}

fn default_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Validates a raw description and produces an immutable [`Instance`].
///
/// Checks, in order: vector length agreement, reference ranges, parameter
/// signs, state table sizes, port/link attachment (at most one link per
/// direction per port, never exactly one direction), edge pairing (the two
/// links of a port must connect the same remote port, forming an undirected
/// edge whose endpoints are on different routers) and demand sanity.
pub fn build_instance(raw: RawInstance) -> Result<Instance, ModelError> {
    let r_count = raw.router_power.len();
    let c_count = raw.router_of_card.len();
    let p_count = raw.card_of_port.len();
    let e_count = raw.link_source.len();

    let router_names = if raw.router_names.is_empty() {
        default_names("r", r_count)
    } else {
        raw.router_names
    };
    let card_names = if raw.card_names.is_empty() {
        default_names("c", c_count)
    } else {
        raw.card_names
    };
    let port_names = if raw.port_names.is_empty() {
        default_names("p", p_count)
    } else {
        raw.port_names
    };

    if r_count == 0 {
        return Err(ModelError::InvalidCount {
            what: "router count",
            requirement: "positive",
            value: 0,
        });
    }
    if c_count == 0 {
        return Err(ModelError::InvalidCount {
            what: "card count",
            requirement: "positive",
            value: 0,
        });
    }
    if p_count == 0 {
        return Err(ModelError::InvalidCount {
            what: "port count",
            requirement: "positive",
            value: 0,
        });
    }
    if raw.state_count == 0 {
        return Err(ModelError::InvalidCount {
            what: "state count",
            requirement: "positive",
            value: 0,
        });
    }
    for (name, want, got) in [
        ("router_names", r_count, router_names.len()),
        ("card_names", c_count, card_names.len()),
        ("port_names", p_count, port_names.len()),
        ("card_power", c_count, raw.card_power.len()),
        ("link_target", e_count, raw.link_target.len()),
        ("link_states", e_count, raw.link_states.len()),
    ] {
        if want != got {
            return Err(ModelError::Schema(format!(
                "{name} has length {got}, expected {want}"
            )));
        }
    }

    for (c, &r) in raw.router_of_card.iter().enumerate() {
        if r >= r_count {
            return Err(ModelError::DanglingReference {
                kind: "router",
                what: format!("#{r} (from card {})", card_names[c]),
            });
        }
    }
    for (p, &c) in raw.card_of_port.iter().enumerate() {
        if c >= c_count {
            return Err(ModelError::DanglingReference {
                kind: "card",
                what: format!("#{c} (from port {})", port_names[p]),
            });
        }
    }
    for e in 0..e_count {
        for (end, port) in [("source", raw.link_source[e]), ("target", raw.link_target[e])] {
            if port >= p_count {
                return Err(ModelError::DanglingReference {
                    kind: "port",
                    what: format!("#{port} ({end} of link {e})"),
                });
            }
        }
    }

    for (r, t) in raw.router_power.iter().enumerate() {
        if t.is_negative() {
            return Err(ModelError::NegativeParameter {
                what: format!("router power of {}", router_names[r]),
            });
        }
    }
    for (c, w) in raw.card_power.iter().enumerate() {
        if w.is_negative() {
            return Err(ModelError::NegativeParameter {
                what: format!("card power of {}", card_names[c]),
            });
        }
    }
    for (e, states) in raw.link_states.iter().enumerate() {
        if states.len() != raw.state_count {
            return Err(ModelError::StateCountMismatch {
                link: e,
                expected: raw.state_count,
                found: states.len(),
            });
        }
        for (k, state) in states.iter().enumerate() {
            if state.capacity.is_negative() {
                return Err(ModelError::NegativeParameter {
                    what: format!("capacity of link {e} in state {}", k + 1),
                });
            }
            if state.power.is_negative() {
                return Err(ModelError::NegativeParameter {
                    what: format!("power of link {e} in state {}", k + 1),
                });
            }
        }
    }

    // Per-port attachment: at most one outgoing and one incoming link.
    let mut out_links: Vec<Vec<usize>> = vec![Vec::new(); p_count];
    let mut in_links: Vec<Vec<usize>> = vec![Vec::new(); p_count];
    for e in 0..e_count {
        out_links[raw.link_source[e]].push(e);
        in_links[raw.link_target[e]].push(e);
    }
    for p in 0..p_count {
        if out_links[p].len() > 1 || in_links[p].len() > 1 {
            return Err(ModelError::AmbiguousPortPairing {
                port: port_names[p].clone(),
                outgoing: out_links[p].len(),
                incoming: in_links[p].len(),
            });
        }
    }
    let partial: Vec<String> = (0..p_count)
        .filter(|&p| out_links[p].len() != in_links[p].len())
        .map(|p| port_names[p].clone())
        .collect();
    if !partial.is_empty() {
        return Err(ModelError::PartiallyConnectedPort { ports: partial });
    }
    let out_link_of_port: Vec<Option<usize>> =
        out_links.iter().map(|v| v.first().copied()).collect();
    let in_link_of_port: Vec<Option<usize>> = in_links.iter().map(|v| v.first().copied()).collect();

    // Edge pairing: the outgoing and incoming link of a port must connect it
    // to the same remote port, and the two endpoints must sit on different
    // routers.
    let router_of_port = |p: usize| raw.router_of_card[raw.card_of_port[p]];
    for p in 0..p_count {
        let (out, inc) = match (out_link_of_port[p], in_link_of_port[p]) {
            (Some(o), Some(i)) => (o, i),
            _ => continue,
        };
        let out_remote = raw.link_target[out];
        let in_remote = raw.link_source[inc];
        if out_remote != in_remote {
            return Err(ModelError::UnpairedPort {
                port: port_names[p].clone(),
                out_remote: port_names[out_remote].clone(),
                in_remote: port_names[in_remote].clone(),
            });
        }
        if router_of_port(p) == router_of_port(out_remote) {
            return Err(ModelError::SelfLoopEdge {
                router: router_names[router_of_port(p)].clone(),
                port_a: port_names[p].clone(),
                port_b: port_names[out_remote].clone(),
            });
        }
    }

    for (d, demand) in raw.demands.iter().enumerate() {
        for (label, r) in [("source", demand.source), ("target", demand.target)] {
            if r >= r_count {
                return Err(ModelError::DanglingReference {
                    kind: "router",
                    what: format!("#{r} ({label} of demand {})", d + 1),
                });
            }
        }
        if demand.source == demand.target {
            return Err(ModelError::BadDemand {
                demand: d + 1,
                reason: format!(
                    "source and target are both router {}",
                    router_names[demand.source]
                ),
            });
        }
        if !demand.volume.is_positive() {
            return Err(ModelError::BadDemand {
                demand: d + 1,
                reason: format!("volume {} is not positive", demand.volume),
            });
        }
    }

    // Derived structures.
    let mut edge_pairs = Vec::with_capacity(e_count / 2);
    let mut paired = vec![false; e_count];
    for e in 0..e_count {
        if paired[e] {
            continue;
        }
        let partner = out_link_of_port[raw.link_target[e]].expect("validated pairing");
        let (forward, reverse) = (e.min(partner), e.max(partner));
        edge_pairs.push(EdgePair {
            forward,
            reverse,
            port_a: raw.link_source[forward],
            port_b: raw.link_target[forward],
        });
        paired[e] = true;
        paired[partner] = true;
    }

    let mut cards_of_router = vec![Vec::new(); r_count];
    for (c, &r) in raw.router_of_card.iter().enumerate() {
        cards_of_router[r].push(c);
    }
    let mut ports_of_card = vec![Vec::new(); c_count];
    for (p, &c) in raw.card_of_port.iter().enumerate() {
        ports_of_card[c].push(p);
    }
    let mut router_out_links = vec![Vec::new(); r_count];
    let mut router_in_links = vec![Vec::new(); r_count];
    for e in 0..e_count {
        router_out_links[router_of_port(raw.link_source[e])].push(e);
        router_in_links[router_of_port(raw.link_target[e])].push(e);
    }
    for r in 0..r_count {
        router_out_links[r].sort_unstable();
        router_in_links[r].sort_unstable();
    }

    Ok(Instance {
        router_names,
        card_names,
        port_names,
        router_power: raw.router_power,
        card_power: raw.card_power,
        router_of_card: raw.router_of_card,
        card_of_port: raw.card_of_port,
        link_source: raw.link_source,
        link_target: raw.link_target,
        link_states: raw.link_states,
        state_count: raw.state_count,
        demands: raw.demands,
        out_link_of_port,
        in_link_of_port,
        cards_of_router,
        ports_of_card,
        edge_pairs,
        router_out_links,
        router_in_links,
    })
}

// ---------------------------------------------------------------------------
// Instance file format (UTF-8 JSON).
//
// {
//   "routers": [{"id", "power_T", "cards": [{"id", "power_W",
//                "ports": [{"id"}]}]}],
//   "edges":   [{"port_a", "port_b", "states": [{"capacity_fwd",
//                "capacity_rev", "power_fwd", "power_rev"}]}],
//   "demands": [{"source_router", "target_router", "volume"}]
// }
//
// Each edge expands to two directed links (forward port_a→port_b at even
// index, reverse at the following odd index). Ids are strings; dense indices
// follow file order. Numeric fields accept decimal strings or JSON numbers,
// both read verbatim into exact rationals.
// ---------------------------------------------------------------------------

/// Parses and validates an instance file.
pub fn instance_from_json(text: &str) -> Result<Instance, ModelError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
    build_instance(raw_from_value(&value)?)
}

fn raw_from_value(value: &Value) -> Result<RawInstance, ModelError> {
    let top = as_object(value, "top level")?;
    let mut raw = RawInstance::default();
    let mut port_index: HashMap<String, usize> = HashMap::new();
    let mut router_index: HashMap<String, usize> = HashMap::new();

    for (r, router) in iter_array(top, "routers")?.enumerate() {
        let router = as_object(router, &format!("routers[{r}]"))?;
        let id = get_string(router, "id", &format!("routers[{r}]"))?;
        if router_index.insert(id.clone(), r).is_some() {
            return Err(ModelError::DuplicateId {
                kind: "router",
                id,
            });
        }
        raw.router_names.push(id.clone());
        raw.router_power
            .push(get_rat(router, "power_T", &format!("router {id}"))?);
        for card in iter_array(router, "cards")? {
            let c = raw.card_names.len();
            let ctx = format!("router {id} cards[{}]", raw.card_names.len());
            let card = as_object(card, &ctx)?;
            let cid = get_string(card, "id", &ctx)?;
            if raw.card_names.contains(&cid) {
                return Err(ModelError::DuplicateId {
                    kind: "card",
                    id: cid,
                });
            }
            raw.card_names.push(cid.clone());
            raw.router_of_card.push(r);
            raw.card_power
                .push(get_rat(card, "power_W", &format!("card {cid}"))?);
            for port in iter_array(card, "ports")? {
                let ctx = format!("card {cid} ports[{}]", raw.port_names.len());
                let port = as_object(port, &ctx)?;
                let pid = get_string(port, "id", &ctx)?;
                if port_index.insert(pid.clone(), raw.port_names.len()).is_some() {
                    return Err(ModelError::DuplicateId {
                        kind: "port",
                        id: pid,
                    });
                }
                raw.port_names.push(pid);
                raw.card_of_port.push(c);
            }
        }
    }

    for (i, edge) in iter_array(top, "edges")?.enumerate() {
        let ctx = format!("edges[{i}]");
        let edge = as_object(edge, &ctx)?;
        let resolve = |field: &str| -> Result<usize, ModelError> {
            let id = get_string(edge, field, &ctx)?;
            port_index
                .get(&id)
                .copied()
                .ok_or(ModelError::DanglingReference {
                    kind: "port",
                    what: format!("{id:?} ({ctx}.{field})"),
                })
        };
        let port_a = resolve("port_a")?;
        let port_b = resolve("port_b")?;
        let mut fwd_states = Vec::new();
        let mut rev_states = Vec::new();
        for (k, state) in iter_array(edge, "states")?.enumerate() {
            let sctx = format!("{ctx}.states[{k}]");
            let state = as_object(state, &sctx)?;
            fwd_states.push(LinkStateSpec {
                capacity: get_rat(state, "capacity_fwd", &sctx)?,
                power: get_rat(state, "power_fwd", &sctx)?,
            });
            rev_states.push(LinkStateSpec {
                capacity: get_rat(state, "capacity_rev", &sctx)?,
                power: get_rat(state, "power_rev", &sctx)?,
            });
        }
        if i == 0 {
            raw.state_count = fwd_states.len();
        }
        raw.link_source.push(port_a);
        raw.link_target.push(port_b);
        raw.link_states.push(fwd_states);
        raw.link_source.push(port_b);
        raw.link_target.push(port_a);
        raw.link_states.push(rev_states);
    }
    if raw.link_source.is_empty() {
        // No edges carry no state table; a single nominal state keeps the
        // state count positive.
        raw.state_count = 1;
    }

    for (d, demand) in iter_array(top, "demands")?.enumerate() {
        let ctx = format!("demands[{d}]");
        let demand = as_object(demand, &ctx)?;
        let resolve = |field: &str| -> Result<usize, ModelError> {
            let id = get_string(demand, field, &ctx)?;
            router_index
                .get(&id)
                .copied()
                .ok_or(ModelError::DanglingReference {
                    kind: "router",
                    what: format!("{id:?} ({ctx}.{field})"),
                })
        };
        raw.demands.push(Demand {
            source: resolve("source_router")?,
            target: resolve("target_router")?,
            volume: get_rat(demand, "volume", &ctx)?,
        });
    }

    Ok(raw)
}

/// Canonical file form of an instance (inverse of [`instance_from_json`] up
/// to formatting).
pub fn instance_to_json(inst: &Instance) -> String {
    let routers: Vec<Value> = (0..inst.router_count())
        .map(|r| {
            let cards: Vec<Value> = inst
                .cards_of_router(r)
                .iter()
                .map(|&c| {
                    let ports: Vec<Value> = inst
                        .ports_of_card(c)
                        .iter()
                        .map(|&p| serde_json::json!({ "id": inst.port_name(p) }))
                        .collect();
                    serde_json::json!({
                        "id": inst.card_name(c),
                        "power_W": inst.card_power(c).to_string(),
                        "ports": ports,
                    })
                })
                .collect();
            serde_json::json!({
                "id": inst.router_name(r),
                "power_T": inst.router_power(r).to_string(),
                "cards": cards,
            })
        })
        .collect();
    let edges: Vec<Value> = inst
        .edge_pairs()
        .iter()
        .map(|pair| {
            let states: Vec<Value> = (0..inst.state_count())
                .map(|k| {
                    let fwd = &inst.link_states(pair.forward)[k];
                    let rev = &inst.link_states(pair.reverse)[k];
                    serde_json::json!({
                        "capacity_fwd": fwd.capacity.to_string(),
                        "power_fwd": fwd.power.to_string(),
                        "capacity_rev": rev.capacity.to_string(),
                        "power_rev": rev.power.to_string(),
                    })
                })
                .collect();
            serde_json::json!({
                "port_a": inst.port_name(pair.port_a),
                "port_b": inst.port_name(pair.port_b),
                "states": states,
            })
        })
        .collect();
    let demands: Vec<Value> = inst
        .demands()
        .iter()
        .map(|d| {
            serde_json::json!({
                "source_router": inst.router_name(d.source),
                "target_router": inst.router_name(d.target),
                "volume": d.volume.to_string(),
            })
        })
        .collect();
    let doc = serde_json::json!({
        "routers": routers,
        "edges": edges,
        "demands": demands,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("instance serializes");
    text.push('\n');
    text
}

fn as_object<'a>(value: &'a Value, ctx: &str) -> Result<&'a Map<String, Value>, ModelError> {
    value
        .as_object()
        .ok_or_else(|| ModelError::Schema(format!("{ctx}: expected an object")))
}

fn iter_array<'a>(
    obj: &'a Map<String, Value>,
    field: &str,
) -> Result<std::slice::Iter<'a, Value>, ModelError> {
    match obj.get(field) {
        Some(Value::Array(items)) => Ok(items.iter()),
        Some(_) => Err(ModelError::Schema(format!("{field}: expected an array"))),
        None => Err(ModelError::Schema(format!("missing field {field:?}"))),
    }
}

fn get_string(obj: &Map<String, Value>, field: &str, ctx: &str) -> Result<String, ModelError> {
    match obj.get(field) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(ModelError::Schema(format!(
            "{ctx}.{field}: expected a string"
        ))),
        None => Err(ModelError::Schema(format!("{ctx}: missing field {field:?}"))),
    }
}

fn get_rat(obj: &Map<String, Value>, field: &str, ctx: &str) -> Result<Rat, ModelError> {
    let value = obj
        .get(field)
        .ok_or_else(|| ModelError::Schema(format!("{ctx}: missing field {field:?}")))?;
    let literal = match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => {
            return Err(ModelError::Schema(format!(
                "{ctx}.{field}: expected a number or decimal string"
            )))
        }
    };
    literal
        .parse()
        .map_err(|e| ModelError::Schema(format!("{ctx}.{field}: {e}")))
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "instance with {} routers, {} cards, {} ports, {} links, {} states, {} demands",
            self.router_count(),
            self.card_count(),
            self.port_count(),
            self.link_count(),
            self.state_count(),
            self.demand_count()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{t1_instance, t1_raw, t3_instance};

    #[test]
    fn t1_builds_and_satisfies_invariants() {
        let inst = t1_instance();
        assert_eq!(inst.router_count(), 2);
        assert_eq!(inst.card_count(), 2);
        assert_eq!(inst.port_count(), 2);
        assert_eq!(inst.link_count(), 2);
        assert_eq!(inst.state_count(), 2);
        assert_eq!(inst.demand_count(), 1);
        assert_eq!(inst.out_link_of_port(0), Some(0));
        assert_eq!(inst.in_link_of_port(0), Some(1));
        assert_eq!(inst.router_of_port(1), 1);
        // Every link has exactly one source and one target in the dense view.
        let a = inst.dense_link_out();
        let b = inst.dense_link_in();
        for e in 0..inst.link_count() {
            assert_eq!(a[e].iter().map(|&x| x as usize).sum::<usize>(), 1);
            assert_eq!(b[e].iter().map(|&x| x as usize).sum::<usize>(), 1);
        }
    }

    #[test]
    fn t1_with_equal_endpoints_is_bad_demand() {
        let mut raw = t1_raw();
        raw.demands[0].target = 0;
        match build_instance(raw) {
            Err(ModelError::BadDemand { demand: 1, .. }) => {}
            other => panic!("expected BadDemand, got {other:?}"),
        }
    }

    #[test]
    fn nonpositive_volume_is_bad_demand() {
        let mut raw = t1_raw();
        raw.demands[0].volume = Rat::zero();
        assert!(matches!(
            build_instance(raw),
            Err(ModelError::BadDemand { .. })
        ));
    }

    #[test]
    fn deleting_one_link_reports_both_partial_ports() {
        let mut raw = t1_raw();
        raw.link_source.truncate(1);
        raw.link_target.truncate(1);
        raw.link_states.truncate(1);
        match build_instance(raw) {
            Err(ModelError::PartiallyConnectedPort { ports }) => {
                assert_eq!(ports, vec!["p1".to_string(), "p2".to_string()]);
            }
            other => panic!("expected PartiallyConnectedPort, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_attachment_is_ambiguous() {
        let mut raw = t1_raw();
        // Second link also leaves p1: p1 then has two outgoing links.
        raw.link_source[1] = 0;
        assert!(matches!(
            build_instance(raw),
            Err(ModelError::AmbiguousPortPairing { .. })
        ));
    }

    #[test]
    fn three_cycle_of_ports_is_rejected() {
        // p1 -> p2 -> p3 -> p1 over three routers: every port has one link in
        // each direction but no port pair forms an edge.
        let raw = RawInstance {
            router_power: vec![Rat::one(), Rat::one(), Rat::one()],
            card_power: vec![Rat::one(), Rat::one(), Rat::one()],
            router_of_card: vec![0, 1, 2],
            card_of_port: vec![0, 1, 2],
            link_source: vec![0, 1, 2],
            link_target: vec![1, 2, 0],
            link_states: vec![
                vec![LinkStateSpec {
                    capacity: Rat::from_int(10),
                    power: Rat::one(),
                }];
                3
            ],
            state_count: 1,
            demands: vec![],
            ..Default::default()
        };
        assert!(matches!(
            build_instance(raw),
            Err(ModelError::UnpairedPort { .. })
        ));
    }

    #[test]
    fn self_loop_edge_is_rejected() {
        // Both ports on the same router.
        let raw = RawInstance {
            router_power: vec![Rat::one()],
            card_power: vec![Rat::one()],
            router_of_card: vec![0],
            card_of_port: vec![0, 0],
            link_source: vec![0, 1],
            link_target: vec![1, 0],
            link_states: vec![
                vec![LinkStateSpec {
                    capacity: Rat::from_int(10),
                    power: Rat::one(),
                }];
                2
            ],
            state_count: 1,
            demands: vec![],
            ..Default::default()
        };
        assert!(matches!(
            build_instance(raw),
            Err(ModelError::SelfLoopEdge { .. })
        ));
    }

    #[test]
    fn state_count_mismatch_is_rejected() {
        let mut raw = t1_raw();
        raw.link_states[1].pop();
        assert!(matches!(
            build_instance(raw),
            Err(ModelError::StateCountMismatch {
                link: 1,
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn t1_edge_pairs_single_pair() {
        let inst = t1_instance();
        assert_eq!(
            inst.edge_pairs(),
            &[EdgePair {
                forward: 0,
                reverse: 1,
                port_a: 0,
                port_b: 1
            }]
        );
        assert_eq!(inst.opposite_link(0), 1);
        assert_eq!(inst.opposite_link(1), 0);
    }

    #[test]
    fn no_links_means_no_pairs() {
        let raw = RawInstance {
            router_power: vec![Rat::one()],
            card_power: vec![Rat::one()],
            router_of_card: vec![0],
            card_of_port: vec![0],
            state_count: 1,
            ..Default::default()
        };
        let inst = build_instance(raw).unwrap();
        assert!(inst.edge_pairs().is_empty());
    }

    #[test]
    fn t3_pairs_cover_each_link_once() {
        let inst = t3_instance();
        let pairs = inst.edge_pairs();
        assert_eq!(pairs.len(), 3);
        // Brute-force check over the dense incidence entries: each pair is
        // the unique opposite-direction combination for its two ports.
        let a = inst.dense_link_out();
        let b = inst.dense_link_in();
        let mut seen = vec![0usize; inst.link_count()];
        for pair in pairs {
            assert_eq!(a[pair.forward][pair.port_a], 1);
            assert_eq!(b[pair.forward][pair.port_b], 1);
            assert_eq!(a[pair.reverse][pair.port_b], 1);
            assert_eq!(b[pair.reverse][pair.port_a], 1);
            seen[pair.forward] += 1;
            seen[pair.reverse] += 1;
        }
        assert!(seen.iter().all(|&n| n == 1));
        // Ordered by forward link id.
        assert!(pairs.windows(2).all(|w| w[0].forward < w[1].forward));
    }

    #[test]
    fn t1_router_links() {
        let inst = t1_instance();
        assert_eq!(inst.router_links(0), (&[0usize][..], &[1usize][..]));
        assert_eq!(inst.router_links(1), (&[1usize][..], &[0usize][..]));
    }

    #[test]
    #[allow(clippy::needless_range_loop)] // loops spell out the triple sums
    fn t3_router_links_match_dense_triple_sum() {
        let inst = t3_instance();
        let g = inst.dense_router_card();
        let l = inst.dense_card_port();
        let a = inst.dense_link_out();
        let b = inst.dense_link_in();
        for r in 0..inst.router_count() {
            let (out, inc) = inst.router_links(r);
            assert_eq!(out.len(), 2);
            assert_eq!(inc.len(), 2);
            for e in 0..inst.link_count() {
                let out_sum: usize = (0..inst.card_count())
                    .map(|c| {
                        (0..inst.port_count())
                            .map(|p| (g[r][c] * l[c][p] * a[e][p]) as usize)
                            .sum::<usize>()
                    })
                    .sum();
                let in_sum: usize = (0..inst.card_count())
                    .map(|c| {
                        (0..inst.port_count())
                            .map(|p| (g[r][c] * l[c][p] * b[e][p]) as usize)
                            .sum::<usize>()
                    })
                    .sum();
                assert_eq!(out.contains(&e), out_sum == 1);
                assert_eq!(inc.contains(&e), in_sum == 1);
            }
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn sparse_and_dense_views_agree() {
        let inst = t3_instance();
        let l = inst.dense_card_port();
        let g = inst.dense_router_card();
        for p in 0..inst.port_count() {
            for c in 0..inst.card_count() {
                assert_eq!(l[c][p] == 1, inst.card_of_port(p) == c);
            }
        }
        for c in 0..inst.card_count() {
            for r in 0..inst.router_count() {
                assert_eq!(g[r][c] == 1, inst.router_of_card(c) == r);
            }
        }
    }

    #[test]
    fn file_round_trip_preserves_structure() {
        let inst = t1_instance();
        let text = instance_to_json(&inst);
        let again = instance_from_json(&text).unwrap();
        assert_eq!(instance_to_json(&again), text);
        assert_eq!(again.demands(), inst.demands());
        assert_eq!(again.edge_pairs(), inst.edge_pairs());
    }

    #[test]
    fn duplicate_port_id_rejected() {
        let text = r#"{
            "routers": [
                {"id": "r1", "power_T": "1", "cards": [
                    {"id": "c1", "power_W": "1", "ports": [{"id": "p1"}, {"id": "p1"}]}
                ]}
            ],
            "edges": [],
            "demands": []
        }"#;
        assert!(matches!(
            instance_from_json(text),
            Err(ModelError::DuplicateId { kind: "port", .. })
        ));
    }

    #[test]
    fn unknown_port_reference_rejected() {
        let text = r#"{
            "routers": [
                {"id": "r1", "power_T": "1", "cards": [
                    {"id": "c1", "power_W": "1", "ports": [{"id": "p1"}]}
                ]}
            ],
            "edges": [{"port_a": "p1", "port_b": "nope", "states": []}],
            "demands": []
        }"#;
        assert!(matches!(
            instance_from_json(text),
            Err(ModelError::DanglingReference { kind: "port", .. })
        ));
    }

    #[test]
    fn json_numbers_parse_verbatim() {
        let text = r#"{
            "routers": [
                {"id": "r1", "power_T": 2.5, "cards": [
                    {"id": "c1", "power_W": 0.1, "ports": [{"id": "p1"}]}
                ]},
                {"id": "r2", "power_T": "2.5", "cards": [
                    {"id": "c2", "power_W": "0.1", "ports": [{"id": "p2"}]}
                ]}
            ],
            "edges": [{"port_a": "p1", "port_b": "p2", "states": [
                {"capacity_fwd": 10, "power_fwd": 1, "capacity_rev": 10, "power_rev": 1}
            ]}],
            "demands": []
        }"#;
        let inst = instance_from_json(text).unwrap();
        assert_eq!(inst.router_power(0), inst.router_power(1));
        assert_eq!(inst.card_power(0), inst.card_power(1));
        assert_eq!(inst.card_power(0), &"0.1".parse().unwrap());
    }
}
