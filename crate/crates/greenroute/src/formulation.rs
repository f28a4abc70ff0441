//! Objective and constraint families of the routing/energy binary program,
//! materialized as a generic [`LinearModel`] over named binary variables.
//!
//! Three builders share the same variable space:
//!
//! * [`build_corrected`] — router-level flow conservation, card/router
//!   activation, single active state per link, capacity, and per-port state
//!   symmetry rows that force both links of an edge into the same state;
//! * [`build_relaxed`] — the corrected model minus the symmetry family;
//! * [`build_original_literal`] — a literal instantiation of the flawed
//!   port-quantified flow equations, which produces [`StructuralDefect`]
//!   reports instead of a model whenever there is anything to instantiate.
//!
//! Constraint names are stable (`family[idx=..,..]`): demand and state
//! ordinals are 1-based, links use their 1-based position, routers, cards
//! and ports use their string ids. Variable names in the LP sense
//! (`x_c0`, `y_e1_k0`, `z_r1`, `u_e1_d0`) use 0-based dense indices.

use crate::model::Instance;
use crate::rational::Rat;
use std::fmt;

/// A binary decision variable.
///
/// The four kinds mirror the model's decision vector: card activation x_c,
/// link energy state y_ek, router activation z_r and demand routing u_ed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// x_c — card `card` is used for data transmission.
    CardUsed { card: usize },
    /// y_ek — link `link` operates in state `state`.
    LinkState { link: usize, state: usize },
    /// z_r — router `router` is used for data transmission.
    RouterUsed { router: usize },
    /// u_ed — demand `demand` is routed over link `link`.
    LinkCarries { link: usize, demand: usize },
}

impl Var {
    /// LP-format variable name (0-based dense indices).
    pub fn lp_name(&self) -> String {
        match *self {
            Var::CardUsed { card } => format!("x_c{card}"),
            Var::LinkState { link, state } => format!("y_e{link}_k{state}"),
            Var::RouterUsed { router } => format!("z_r{router}"),
            Var::LinkCarries { link, demand } => format!("u_e{link}_d{demand}"),
        }
    }

    /// Inverse of [`Var::lp_name`].
    pub fn from_lp_name(name: &str) -> Option<Var> {
        fn index(s: &str) -> Option<usize> {
            if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            s.parse().ok()
        }
        if let Some(rest) = name.strip_prefix("x_c") {
            return Some(Var::CardUsed { card: index(rest)? });
        }
        if let Some(rest) = name.strip_prefix("y_e") {
            let (link, state) = rest.split_once("_k")?;
            return Some(Var::LinkState {
                link: index(link)?,
                state: index(state)?,
            });
        }
        if let Some(rest) = name.strip_prefix("z_r") {
            return Some(Var::RouterUsed {
                router: index(rest)?,
            });
        }
        if let Some(rest) = name.strip_prefix("u_e") {
            let (link, demand) = rest.split_once("_d")?;
            return Some(Var::LinkCarries {
                link: index(link)?,
                demand: index(demand)?,
            });
        }
        None
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lp_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn holds(&self, lhs: &Rat, rhs: &Rat) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl serde::Serialize for Relation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

/// One linear constraint `sum(terms) relation rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(Rat, Var)>,
    pub relation: Relation,
    pub rhs: Rat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
}

/// A binary program: declared variables, a linear objective and named
/// linear constraints. All variables are binary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearModel {
    pub variables: Vec<Var>,
    pub objective: Vec<(Rat, Var)>,
    pub constraints: Vec<LinearConstraint>,
    pub sense: Sense,
}

impl LinearModel {
    pub fn constraint_names(&self) -> impl Iterator<Item = &str> {
        self.constraints.iter().map(|c| c.name.as_str())
    }

    /// Constraints of one family (`name` up to the opening bracket).
    pub fn family(&self, family: &str) -> impl Iterator<Item = &LinearConstraint> {
        let prefix = format!("{family}[");
        self.constraints
            .iter()
            .filter(move |c| c.name.starts_with(&prefix))
    }
}

/// Which constraint set to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Corrected,
    Relaxed,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Corrected => "corrected",
            Variant::Relaxed => "relaxed",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A structural flaw found while instantiating the literal original flow
/// equations. `witness` holds 1-based indices, documented per family:
/// `flow-transit` carries (demand, router, port), `flow-endpoint` carries
/// (demand, router).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct StructuralDefect {
    pub family: String,
    pub description: String,
    pub witness: Vec<usize>,
}

/// Outcome of reading the original flow equations literally: a model when
/// nothing is there to trip over (no demands), otherwise the defect list.
#[derive(Debug, Clone, PartialEq)]
pub enum OriginalModel {
    Model(LinearModel),
    Defective(Vec<StructuralDefect>),
}

/// All variables of an instance in declaration order: x by card, y by
/// (link, state), z by router, u by (link, demand).
pub fn declare_variables(inst: &Instance) -> Vec<Var> {
    let mut vars =
        Vec::with_capacity(inst.card_count() + inst.link_count() * inst.state_count()
            + inst.router_count()
            + inst.link_count() * inst.demand_count());
    for card in 0..inst.card_count() {
        vars.push(Var::CardUsed { card });
    }
    for link in 0..inst.link_count() {
        for state in 0..inst.state_count() {
            vars.push(Var::LinkState { link, state });
        }
    }
    for router in 0..inst.router_count() {
        vars.push(Var::RouterUsed { router });
    }
    for link in 0..inst.link_count() {
        for demand in 0..inst.demand_count() {
            vars.push(Var::LinkCarries { link, demand });
        }
    }
    vars
}

/// Objective terms: total power of link states, cards and routers.
/// Exactly E·K + C + R terms, coefficients taken verbatim from the instance.
pub fn build_objective(inst: &Instance) -> Vec<(Rat, Var)> {
    let mut terms = Vec::new();
    for link in 0..inst.link_count() {
        for (state, spec) in inst.link_states(link).iter().enumerate() {
            terms.push((spec.power.clone(), Var::LinkState { link, state }));
        }
    }
    for card in 0..inst.card_count() {
        terms.push((inst.card_power(card).clone(), Var::CardUsed { card }));
    }
    for router in 0..inst.router_count() {
        terms.push((inst.router_power(router).clone(), Var::RouterUsed { router }));
    }
    terms
}

/// Evaluates a term list against a 0/1 valuation.
pub fn evaluate_terms<F: Fn(Var) -> bool>(terms: &[(Rat, Var)], value: F) -> Rat {
    let mut total = Rat::zero();
    for (coefficient, var) in terms {
        if value(*var) {
            total += coefficient;
        }
    }
    total
}

fn card_flow_rows(inst: &Instance, outgoing: bool) -> Vec<LinearConstraint> {
    let family = if outgoing { "card_out" } else { "card_in" };
    let mut rows = Vec::new();
    for d in 0..inst.demand_count() {
        for c in 0..inst.card_count() {
            let mut terms = Vec::new();
            for &p in inst.ports_of_card(c) {
                let link = if outgoing {
                    inst.out_link_of_port(p)
                } else {
                    inst.in_link_of_port(p)
                };
                if let Some(link) = link {
                    terms.push((Rat::one(), Var::LinkCarries { link, demand: d }));
                }
            }
            terms.push((-Rat::one(), Var::CardUsed { card: c }));
            rows.push(LinearConstraint {
                name: format!("{family}[d={},c={}]", d + 1, inst.card_name(c)),
                terms,
                relation: Relation::Le,
                rhs: Rat::zero(),
            });
        }
    }
    rows
}

fn router_activation_rows(inst: &Instance) -> Vec<LinearConstraint> {
    // Rows with g_rc = 0 reduce to 0 <= z_r and are pruned, leaving one row
    // per card.
    let mut rows = Vec::new();
    for r in 0..inst.router_count() {
        for &c in inst.cards_of_router(r) {
            rows.push(LinearConstraint {
                name: format!(
                    "router_activation[r={},c={}]",
                    inst.router_name(r),
                    inst.card_name(c)
                ),
                terms: vec![
                    (Rat::one(), Var::CardUsed { card: c }),
                    (-Rat::one(), Var::RouterUsed { router: r }),
                ],
                relation: Relation::Le,
                rhs: Rat::zero(),
            });
        }
    }
    rows
}

fn single_state_rows(inst: &Instance) -> Vec<LinearConstraint> {
    (0..inst.link_count())
        .map(|link| LinearConstraint {
            name: format!("single_state[e={}]", link + 1),
            terms: (0..inst.state_count())
                .map(|state| (Rat::one(), Var::LinkState { link, state }))
                .collect(),
            relation: Relation::Le,
            rhs: Rat::one(),
        })
        .collect()
}

fn flow_rows(inst: &Instance) -> Vec<LinearConstraint> {
    let mut rows = Vec::new();
    for d in 0..inst.demand_count() {
        let demand = inst.demand(d);
        for r in 0..inst.router_count() {
            let mut terms = Vec::new();
            // Literal triple sum over the router's cards and ports; each
            // connected port contributes +u on its outgoing and -u on its
            // incoming link, in ascending link order.
            for link in 0..inst.link_count() {
                let src_router = inst.router_of_port(inst.link_source(link));
                let dst_router = inst.router_of_port(inst.link_target(link));
                if src_router == r {
                    terms.push((Rat::one(), Var::LinkCarries { link, demand: d }));
                }
                if dst_router == r {
                    terms.push((-Rat::one(), Var::LinkCarries { link, demand: d }));
                }
            }
            let rhs = if r == demand.source {
                Rat::one()
            } else if r == demand.target {
                -Rat::one()
            } else {
                Rat::zero()
            };
            rows.push(LinearConstraint {
                name: format!("flow[d={},r={}]", d + 1, inst.router_name(r)),
                terms,
                relation: Relation::Eq,
                rhs,
            });
        }
    }
    rows
}

fn capacity_rows(inst: &Instance) -> Vec<LinearConstraint> {
    (0..inst.link_count())
        .map(|link| {
            let mut terms = Vec::new();
            for (d, demand) in inst.demands().iter().enumerate() {
                terms.push((demand.volume.clone(), Var::LinkCarries { link, demand: d }));
            }
            for (state, spec) in inst.link_states(link).iter().enumerate() {
                terms.push((-spec.capacity.clone(), Var::LinkState { link, state }));
            }
            LinearConstraint {
                name: format!("capacity[e={}]", link + 1),
                terms,
                relation: Relation::Le,
                rhs: Rat::zero(),
            }
        })
        .collect()
}

fn symmetry_rows(inst: &Instance) -> Vec<LinearConstraint> {
    // One row per connected port and state; unconnected ports would yield
    // the vacuous 0 = 0 and are skipped.
    let mut rows = Vec::new();
    for p in inst.connected_ports() {
        let out = inst.out_link_of_port(p).expect("connected");
        let inc = inst.in_link_of_port(p).expect("connected");
        for state in 0..inst.state_count() {
            rows.push(LinearConstraint {
                name: format!("symmetry[p={},k={}]", inst.port_name(p), state + 1),
                terms: vec![
                    (Rat::one(), Var::LinkState { link: out, state }),
                    (-Rat::one(), Var::LinkState { link: inc, state }),
                ],
                relation: Relation::Eq,
                rhs: Rat::zero(),
            });
        }
    }
    rows
}

fn build_model(inst: &Instance, variant: Variant) -> LinearModel {
    let mut constraints = Vec::new();
    constraints.extend(card_flow_rows(inst, true));
    constraints.extend(card_flow_rows(inst, false));
    constraints.extend(router_activation_rows(inst));
    constraints.extend(single_state_rows(inst));
    constraints.extend(flow_rows(inst));
    constraints.extend(capacity_rows(inst));
    if variant == Variant::Corrected {
        constraints.extend(symmetry_rows(inst));
    }
    LinearModel {
        variables: declare_variables(inst),
        objective: build_objective(inst),
        constraints,
        sense: Sense::Minimize,
    }
}

/// The corrected model: card/router activation, one state per link,
/// router-level flow conservation, capacity, and state symmetry per port.
pub fn build_corrected(inst: &Instance) -> LinearModel {
    build_model(inst, Variant::Corrected)
}

/// The corrected model without the symmetry family.
pub fn build_relaxed(inst: &Instance) -> LinearModel {
    build_model(inst, Variant::Relaxed)
}

/// Builds the model of `variant`.
pub fn build_variant(inst: &Instance, variant: Variant) -> LinearModel {
    build_model(inst, variant)
}

/// Attempts a literal reading of the original, port-quantified flow
/// equations.
///
/// The transit equation fixes a port in its quantifier and then rebinds the
/// same index inside its summations, so it cannot be instantiated at all;
/// the endpoint equations pin the flow balance of *every* router to ±1 while
/// multiplying by a port-membership indicator that vanishes for all routers
/// but one, leaving unsatisfiable `0 = ±1` rows. With no demands there is
/// nothing to instantiate and the remaining families form a working model.
pub fn build_original_literal(inst: &Instance) -> OriginalModel {
    let mut defects = Vec::new();
    if inst.demand_count() > 0 && inst.port_count() > 0 {
        defects.push(StructuralDefect {
            family: "flow-transit".to_string(),
            description: "the transit flow equation quantifies over a fixed port and then \
                          reuses the same port index as the summation variable inside its \
                          card sums; the outer port never reaches any term, so the equation \
                          cannot be instantiated as written"
                .to_string(),
            witness: vec![1, 1, 1],
        });
        for (d, demand) in inst.demands().iter().enumerate() {
            // The endpoint equation fixes port p = source of the demand.
            // Reading the source as a router, the natural stand-in is that
            // router's lowest port; any router not containing it zeroes the
            // whole left side against rhs 1. The target-side equation fails
            // the same way with rhs -1.
            let source_port = (0..inst.port_count())
                .find(|&p| inst.router_of_port(p) == demand.source);
            for r in 0..inst.router_count() {
                let contains = match source_port {
                    Some(p) => inst.router_of_port(p) == r,
                    None => false,
                };
                if contains {
                    continue;
                }
                let port_text = match source_port {
                    Some(p) => format!("port {}", inst.port_name(p)),
                    None => "a port of the source router (which has none)".to_string(),
                };
                defects.push(StructuralDefect {
                    family: "flow-endpoint".to_string(),
                    description: format!(
                        "the source-side flow equation for demand {} fixes {port_text} and \
                         multiplies by the card-port indicator; router {} does not contain \
                         that port, so the left side is identically 0 against right side 1 \
                         (the target-side equation fails symmetrically)",
                        d + 1,
                        inst.router_name(r)
                    ),
                    witness: vec![d + 1, r + 1],
                });
            }
        }
    }
    if !defects.is_empty() {
        return OriginalModel::Defective(defects);
    }
    // Nothing to instantiate: emit the remaining families in the original
    // listing order (single state, card activation, router activation,
    // capacity).
    let mut constraints = Vec::new();
    constraints.extend(single_state_rows(inst));
    constraints.extend(card_flow_rows(inst, true));
    constraints.extend(card_flow_rows(inst, false));
    constraints.extend(router_activation_rows(inst));
    constraints.extend(capacity_rows(inst));
    OriginalModel::Model(LinearModel {
        variables: declare_variables(inst),
        objective: build_objective(inst),
        constraints,
        sense: Sense::Minimize,
    })
}
