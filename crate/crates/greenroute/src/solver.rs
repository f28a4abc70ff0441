//! Exact desk-scale solving: simple-path enumeration per demand at the
//! router level, branch-and-bound over path choices with a greedy-but-exact
//! support derivation for the activation and state variables, and an
//! independent exhaustive oracle.
//!
//! Branching fixes demands in input order and each demand's paths in
//! lexicographic link-id order. The lower bound of a node is the support
//! cost of the demands fixed so far; it is admissible because adding load
//! can only shrink the set of capacity-feasible states and grow the set of
//! powered components, and every cost coefficient is nonnegative. Ties
//! between optima resolve toward the lexicographically smallest path-index
//! vector, so results are deterministic (and identical for any thread
//! count on runs that complete within budget).

use crate::formulation::Var;
use crate::model::{Demand, Instance};
use crate::rational::Rat;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

/// Default per-demand cap on enumerated simple paths. Exceeding the cap is
/// a hard error ([`SolveError::TooManyPaths`]), never silent truncation.
pub const DEFAULT_MAX_PATHS: usize = 10_000;

/// Guard on the number of path combinations the oracle will enumerate.
pub const ORACLE_GUARD: u128 = 1_000_000;

/// A full binary assignment plus its objective value. The objective is
/// always recomputed from the assignment by the producing code path, never
/// copied from elsewhere — except for assignments loaded from files, which
/// carry their claimed value so the checker can flag a mismatch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// x_c per card.
    pub card_used: Vec<bool>,
    /// y_ek per link and state.
    pub link_state_on: Vec<Vec<bool>>,
    /// z_r per router.
    pub router_used: Vec<bool>,
    /// u_ed per link and demand.
    pub link_carries: Vec<Vec<bool>>,
    pub objective_value: Rat,
}

impl Solution {
    pub fn all_zero(inst: &Instance) -> Solution {
        Solution {
            card_used: vec![false; inst.card_count()],
            link_state_on: vec![vec![false; inst.state_count()]; inst.link_count()],
            router_used: vec![false; inst.router_count()],
            link_carries: vec![vec![false; inst.demand_count()]; inst.link_count()],
            objective_value: Rat::zero(),
        }
    }

    pub fn dims_match(&self, inst: &Instance) -> bool {
        self.card_used.len() == inst.card_count()
            && self.router_used.len() == inst.router_count()
            && self.link_state_on.len() == inst.link_count()
            && self.link_state_on.iter().all(|s| s.len() == inst.state_count())
            && self.link_carries.len() == inst.link_count()
            && self.link_carries.iter().all(|d| d.len() == inst.demand_count())
    }

    pub fn var_value(&self, var: Var) -> bool {
        match var {
            Var::CardUsed { card } => self.card_used[card],
            Var::LinkState { link, state } => self.link_state_on[link][state],
            Var::RouterUsed { router } => self.router_used[router],
            Var::LinkCarries { link, demand } => self.link_carries[link][demand],
        }
    }

    /// Objective recomputed from the assignment and instance parameters.
    pub fn recompute_objective(&self, inst: &Instance) -> Rat {
        let mut total = Rat::zero();
        for e in 0..inst.link_count() {
            for (k, spec) in inst.link_states(e).iter().enumerate() {
                if self.link_state_on[e][k] {
                    total += &spec.power;
                }
            }
        }
        for c in 0..inst.card_count() {
            if self.card_used[c] {
                total += inst.card_power(c);
            }
        }
        for r in 0..inst.router_count() {
            if self.router_used[r] {
                total += inst.router_power(r);
            }
        }
        total
    }

    /// All variable values keyed by LP name (`x_c0`, `y_e0_k1`, ...).
    pub fn assignment(&self) -> BTreeMap<String, u8> {
        let mut map = BTreeMap::new();
        for (c, &v) in self.card_used.iter().enumerate() {
            map.insert(Var::CardUsed { card: c }.lp_name(), v as u8);
        }
        for (e, states) in self.link_state_on.iter().enumerate() {
            for (k, &v) in states.iter().enumerate() {
                map.insert(Var::LinkState { link: e, state: k }.lp_name(), v as u8);
            }
        }
        for (r, &v) in self.router_used.iter().enumerate() {
            map.insert(Var::RouterUsed { router: r }.lp_name(), v as u8);
        }
        for (e, demands) in self.link_carries.iter().enumerate() {
            for (d, &v) in demands.iter().enumerate() {
                map.insert(Var::LinkCarries { link: e, demand: d }.lp_name(), v as u8);
            }
        }
        map
    }

    /// Builds a solution from `(lp_name, bit)` entries. Missing variables
    /// default to 0. With `claimed_objective` absent the objective is
    /// recomputed, so only explicit claims can mismatch.
    pub fn from_assignment<I>(
        inst: &Instance,
        entries: I,
        claimed_objective: Option<Rat>,
    ) -> Result<Solution, String>
    where
        I: IntoIterator<Item = (String, u8)>,
    {
        let mut sol = Solution::all_zero(inst);
        for (name, bit) in entries {
            let var = Var::from_lp_name(&name)
                .ok_or_else(|| format!("unknown variable name {name:?}"))?;
            if bit > 1 {
                return Err(format!("variable {name} must be 0 or 1, got {bit}"));
            }
            let value = bit == 1;
            let in_range = match var {
                Var::CardUsed { card } => card < inst.card_count(),
                Var::LinkState { link, state } => {
                    link < inst.link_count() && state < inst.state_count()
                }
                Var::RouterUsed { router } => router < inst.router_count(),
                Var::LinkCarries { link, demand } => {
                    link < inst.link_count() && demand < inst.demand_count()
                }
            };
            if !in_range {
                return Err(format!("variable {name} is out of range for the instance"));
            }
            match var {
                Var::CardUsed { card } => sol.card_used[card] = value,
                Var::LinkState { link, state } => sol.link_state_on[link][state] = value,
                Var::RouterUsed { router } => sol.router_used[router] = value,
                Var::LinkCarries { link, demand } => sol.link_carries[link][demand] = value,
            }
        }
        sol.objective_value = match claimed_objective {
            Some(claimed) => claimed,
            None => sol.recompute_objective(inst),
        };
        Ok(sol)
    }

    /// Links carrying demand `d`.
    pub fn links_of_demand(&self, d: usize) -> Vec<usize> {
        self.link_carries
            .iter()
            .enumerate()
            .filter(|(_, col)| col[d])
            .map(|(e, _)| e)
            .collect()
    }
}

/// A simple router-level path for one demand, as an ordered link sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouterPath {
    pub demand: usize,
    pub links: Vec<usize>,
}

/// All simple paths from the demand's source router to its target router,
/// in lexicographic link-id order, truncated at `max_paths`. Empty iff the
/// target is unreachable.
pub fn enumerate_paths(inst: &Instance, demand: usize, max_paths: usize) -> Vec<RouterPath> {
    assert!(max_paths >= 1);
    let spec = inst.demand(demand);
    let mut paths = Vec::new();
    let mut visited = vec![false; inst.router_count()];
    let mut links = Vec::new();
    visited[spec.source] = true;
    walk(
        inst, demand, spec.source, spec.target, max_paths, &mut visited, &mut links, &mut paths,
    );
    paths
}

#[allow(clippy::too_many_arguments)]
fn walk(
    inst: &Instance,
    demand: usize,
    at: usize,
    target: usize,
    max_paths: usize,
    visited: &mut Vec<bool>,
    links: &mut Vec<usize>,
    paths: &mut Vec<RouterPath>,
) {
    if paths.len() >= max_paths {
        return;
    }
    let (outgoing, _) = inst.router_links(at);
    for &link in outgoing {
        let next = inst.router_of_port(inst.link_target(link));
        links.push(link);
        if next == target {
            paths.push(RouterPath {
                demand,
                links: links.clone(),
            });
            if paths.len() >= max_paths {
                links.pop();
                return;
            }
        } else if !visited[next] {
            visited[next] = true;
            walk(inst, demand, next, target, max_paths, visited, links, paths);
            visited[next] = false;
        }
        links.pop();
    }
}

/// True iff `links` (as an unordered set) forms a simple router-level path
/// from the demand's source to its target.
pub fn forms_simple_path(inst: &Instance, demand: &Demand, links: &[usize]) -> bool {
    let mut remaining: Vec<usize> = links.to_vec();
    let mut at = demand.source;
    let mut visited = vec![false; inst.router_count()];
    visited[at] = true;
    while at != demand.target {
        let leaving: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&e| inst.router_of_port(inst.link_source(e)) == at)
            .collect();
        if leaving.len() != 1 {
            return false;
        }
        let step = leaving[0];
        remaining.retain(|&e| e != step);
        at = inst.router_of_port(inst.link_target(step));
        if visited[at] {
            return false;
        }
        visited[at] = true;
    }
    remaining.is_empty()
}

/// Activation and state variables supporting a routing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    pub card_used: Vec<bool>,
    pub router_used: Vec<bool>,
    pub link_state_on: Vec<Vec<bool>>,
}

/// Derives the cheapest (x, z, y) supporting the routing `u` (`u[link][demand]`).
///
/// Cards touched by a used link and their routers switch on. Under
/// [`Variant::Corrected`](crate::formulation::Variant) each edge with any
/// used link gets the single state minimizing the summed power of its two
/// links subject to both loads fitting; under `Variant::Relaxed` each
/// loaded link independently gets its cheapest fitting state and idle links
/// stay off. Ties break toward the lowest state. Returns `None` when some
/// load fits no state.
///
/// The caller must supply a flow-conserving routing; debug builds assert it.
pub fn derive_support(
    inst: &Instance,
    u: &[Vec<bool>],
    variant: crate::formulation::Variant,
) -> Option<Support> {
    debug_assert!(flow_conserved(inst, u), "routing violates flow conservation");
    support_for_routing(inst, u, variant)
}

fn flow_conserved(inst: &Instance, u: &[Vec<bool>]) -> bool {
    for (d, demand) in inst.demands().iter().enumerate() {
        for r in 0..inst.router_count() {
            let (out, inc) = inst.router_links(r);
            let net = out.iter().filter(|&&e| u[e][d]).count() as i64
                - inc.iter().filter(|&&e| u[e][d]).count() as i64;
            let want = if r == demand.source {
                1
            } else if r == demand.target {
                -1
            } else {
                0
            };
            if net != want {
                return false;
            }
        }
    }
    true
}

fn link_loads(inst: &Instance, u: &[Vec<bool>]) -> Vec<Rat> {
    (0..inst.link_count())
        .map(|e| {
            let mut load = Rat::zero();
            for (d, demand) in inst.demands().iter().enumerate() {
                if u[e][d] {
                    load += &demand.volume;
                }
            }
            load
        })
        .collect()
}

fn support_for_routing(
    inst: &Instance,
    u: &[Vec<bool>],
    variant: crate::formulation::Variant,
) -> Option<Support> {
    use crate::formulation::Variant;
    let loads = link_loads(inst, u);
    let mut support = Support {
        card_used: vec![false; inst.card_count()],
        router_used: vec![false; inst.router_count()],
        link_state_on: vec![vec![false; inst.state_count()]; inst.link_count()],
    };
    for (e, load) in loads.iter().enumerate() {
        if !load.is_zero() {
            support.card_used[inst.card_of_port(inst.link_source(e))] = true;
            support.card_used[inst.card_of_port(inst.link_target(e))] = true;
        }
    }
    for c in 0..inst.card_count() {
        if support.card_used[c] {
            support.router_used[inst.router_of_card(c)] = true;
        }
    }
    match variant {
        Variant::Corrected => {
            for pair in inst.edge_pairs() {
                let (fwd, rev) = (pair.forward, pair.reverse);
                if loads[fwd].is_zero() && loads[rev].is_zero() {
                    continue;
                }
                let mut best: Option<(usize, Rat)> = None;
                for k in 0..inst.state_count() {
                    let f = &inst.link_states(fwd)[k];
                    let r = &inst.link_states(rev)[k];
                    if f.capacity >= loads[fwd] && r.capacity >= loads[rev] {
                        let cost = f.power.clone() + &r.power;
                        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
                            best = Some((k, cost));
                        }
                    }
                }
                let (k, _) = best?;
                support.link_state_on[fwd][k] = true;
                support.link_state_on[rev][k] = true;
            }
        }
        Variant::Relaxed => {
            for (e, load) in loads.iter().enumerate() {
                if load.is_zero() {
                    continue;
                }
                let mut best: Option<(usize, Rat)> = None;
                for (k, spec) in inst.link_states(e).iter().enumerate() {
                    if spec.capacity >= *load
                        && best.as_ref().is_none_or(|(_, c)| spec.power < *c)
                    {
                        best = Some((k, spec.power.clone()));
                    }
                }
                let (k, _) = best?;
                support.link_state_on[e][k] = true;
            }
        }
    }
    Some(support)
}

fn support_cost(inst: &Instance, support: &Support) -> Rat {
    let mut total = Rat::zero();
    for e in 0..inst.link_count() {
        for (k, spec) in inst.link_states(e).iter().enumerate() {
            if support.link_state_on[e][k] {
                total += &spec.power;
            }
        }
    }
    for c in 0..inst.card_count() {
        if support.card_used[c] {
            total += inst.card_power(c);
        }
    }
    for r in 0..inst.router_count() {
        if support.router_used[r] {
            total += inst.router_power(r);
        }
    }
    total
}

fn assemble_solution(inst: &Instance, u: Vec<Vec<bool>>, support: Support) -> Solution {
    let mut sol = Solution {
        card_used: support.card_used,
        link_state_on: support.link_state_on,
        router_used: support.router_used,
        link_carries: u,
        objective_value: Rat::zero(),
    };
    sol.objective_value = sol.recompute_objective(inst);
    sol
}

fn routing_of(inst: &Instance, paths: &[&RouterPath]) -> Vec<Vec<bool>> {
    let mut u = vec![vec![false; inst.demand_count()]; inst.link_count()];
    for path in paths {
        for &e in &path.links {
            u[e][path.demand] = true;
        }
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    BudgetExceeded,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::BudgetExceeded => "budget_exceeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// The optimum, or the best incumbent when the budget ran out.
    pub solution: Option<Solution>,
    pub nodes_explored: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("TooManyPaths: demand {demand} has more than {cap} simple paths (set GREENROUTE_MAX_PATHS to raise the cap)")]
    TooManyPaths { demand: usize, cap: usize },
    #[error("OracleTooLarge: {combinations} path combinations exceed the exhaustive guard of {guard}")]
    OracleTooLarge { combinations: u128, guard: u128 },
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Maximum number of search nodes to expand.
    pub budget: u64,
    /// Worker threads over the first demand's subtrees. Any value yields the
    /// same result on runs that finish within budget.
    pub threads: usize,
    /// Per-demand cap on enumerated simple paths.
    pub max_paths: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            budget: 1_000_000,
            threads: 1,
            max_paths: DEFAULT_MAX_PATHS,
        }
    }
}

struct Incumbent {
    cost: Rat,
    choice: Vec<usize>,
    solution: Solution,
}

struct SearchCtx<'a> {
    inst: &'a Instance,
    variant: crate::formulation::Variant,
    paths: &'a [Vec<RouterPath>],
    budget: u64,
    nodes: AtomicU64,
    aborted: AtomicBool,
    best: Mutex<Option<Incumbent>>,
}

impl SearchCtx<'_> {
    fn consume_node(&self) -> bool {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.budget {
            self.aborted.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }

    fn prunable(&self, cost: &Rat) -> bool {
        let best = self.best.lock().unwrap();
        match best.as_ref() {
            Some(incumbent) => *cost > incumbent.cost,
            None => false,
        }
    }

    fn offer(&self, cost: Rat, choice: Vec<usize>, solution: Solution) {
        let mut best = self.best.lock().unwrap();
        let replace = match best.as_ref() {
            None => true,
            Some(incumbent) => {
                cost < incumbent.cost || (cost == incumbent.cost && choice < incumbent.choice)
            }
        };
        if replace {
            *best = Some(Incumbent {
                cost,
                choice,
                solution,
            });
        }
    }

    /// Evaluates the node where demands `0..choice.len()` are fixed and, if
    /// it survives bounding, expands it.
    fn explore(&self, choice: &mut Vec<usize>) {
        if self.aborted.load(Ordering::Relaxed) {
            return;
        }
        let fixed: Vec<&RouterPath> = choice
            .iter()
            .enumerate()
            .map(|(d, &i)| &self.paths[d][i])
            .collect();
        let u = routing_of(self.inst, &fixed);
        let support = match support_for_routing(self.inst, &u, self.variant) {
            Some(s) => s,
            None => return, // loads already exceed every state
        };
        let cost = support_cost(self.inst, &support);
        if self.prunable(&cost) {
            return;
        }
        let d = choice.len();
        if d == self.paths.len() {
            self.offer(cost, choice.clone(), assemble_solution(self.inst, u, support));
            return;
        }
        for i in 0..self.paths[d].len() {
            if !self.consume_node() {
                return;
            }
            choice.push(i);
            self.explore(choice);
            choice.pop();
            if self.aborted.load(Ordering::Relaxed) {
                return;
            }
        }
    }
}

fn enumerate_all(
    inst: &Instance,
    max_paths: usize,
) -> Result<Option<Vec<Vec<RouterPath>>>, SolveError> {
    let mut per_demand = Vec::with_capacity(inst.demand_count());
    for d in 0..inst.demand_count() {
        let paths = enumerate_paths(inst, d, max_paths + 1);
        if paths.len() > max_paths {
            return Err(SolveError::TooManyPaths {
                demand: d,
                cap: max_paths,
            });
        }
        if paths.is_empty() {
            return Ok(None);
        }
        per_demand.push(paths);
    }
    Ok(Some(per_demand))
}

/// Solves an instance exactly by branch-and-bound over per-demand path
/// choices. On `Optimal` the returned solution is feasible for the chosen
/// variant and no feasible assignment has a lower objective; ties resolve
/// to the lexicographically smallest path-index vector.
pub fn solve_exact(
    inst: &Instance,
    variant: crate::formulation::Variant,
    options: &SolveOptions,
) -> Result<SolveOutcome, SolveError> {
    assert!(options.budget >= 1, "budget must be at least 1");
    let paths = match enumerate_all(inst, options.max_paths)? {
        Some(paths) => paths,
        None => {
            return Ok(SolveOutcome {
                status: SolveStatus::Infeasible,
                solution: None,
                nodes_explored: 0,
            })
        }
    };
    let ctx = SearchCtx {
        inst,
        variant,
        paths: &paths,
        budget: options.budget,
        nodes: AtomicU64::new(0),
        aborted: AtomicBool::new(false),
        best: Mutex::new(None),
    };
    let workers = options.threads.max(1);
    if workers == 1 || paths.is_empty() || paths[0].len() == 1 {
        ctx.explore(&mut Vec::new());
    } else {
        // Split the first demand's subtrees round-robin across workers. The
        // shared incumbent only sharpens pruning; the lexicographic offer
        // rule makes the joined result order-independent.
        std::thread::scope(|scope| {
            for w in 0..workers.min(paths[0].len()) {
                let ctx = &ctx;
                scope.spawn(move || {
                    let mut i = w;
                    while i < ctx.paths[0].len() {
                        if !ctx.consume_node() {
                            return;
                        }
                        let mut choice = vec![i];
                        ctx.explore(&mut choice);
                        i += workers;
                    }
                });
            }
        });
    }
    let nodes_explored = ctx.nodes.load(Ordering::Relaxed).min(ctx.budget);
    let best = ctx.best.into_inner().unwrap();
    if ctx.aborted.load(Ordering::Relaxed) {
        return Ok(SolveOutcome {
            status: SolveStatus::BudgetExceeded,
            solution: best.map(|b| b.solution),
            nodes_explored,
        });
    }
    match best {
        Some(incumbent) => Ok(SolveOutcome {
            status: SolveStatus::Optimal,
            solution: Some(incumbent.solution),
            nodes_explored,
        }),
        None => Ok(SolveOutcome {
            status: SolveStatus::Infeasible,
            solution: None,
            nodes_explored,
        }),
    }
}

/// Exhaustively evaluates every combination of enumerated paths and returns
/// the minimum. Shares only path enumeration and support derivation with
/// [`solve_exact`]; there is no pruning and no branching logic here.
pub fn brute_force_oracle(
    inst: &Instance,
    variant: crate::formulation::Variant,
) -> Result<SolveOutcome, SolveError> {
    let paths = match enumerate_all(inst, DEFAULT_MAX_PATHS)? {
        Some(paths) => paths,
        None => {
            return Ok(SolveOutcome {
                status: SolveStatus::Infeasible,
                solution: None,
                nodes_explored: 0,
            })
        }
    };
    let combinations: u128 = paths.iter().map(|p| p.len() as u128).product();
    if combinations > ORACLE_GUARD {
        return Err(SolveError::OracleTooLarge {
            combinations,
            guard: ORACLE_GUARD,
        });
    }
    let mut best: Option<(Rat, Vec<usize>, Solution)> = None;
    let mut odometer = vec![0usize; paths.len()];
    let mut evaluated: u64 = 0;
    loop {
        evaluated += 1;
        let fixed: Vec<&RouterPath> = odometer
            .iter()
            .enumerate()
            .map(|(d, &i)| &paths[d][i])
            .collect();
        let u = routing_of(inst, &fixed);
        if let Some(support) = support_for_routing(inst, &u, variant) {
            let cost = support_cost(inst, &support);
            let better = match best.as_ref() {
                None => true,
                Some((b, choice, _)) => cost < *b || (cost == *b && odometer < *choice),
            };
            if better {
                let sol = assemble_solution(inst, u, support);
                best = Some((cost, odometer.clone(), sol));
            }
        }
        // Advance the odometer; most-significant digit first so combinations
        // run in lexicographic order.
        let mut pos = paths.len();
        loop {
            if pos == 0 {
                return Ok(match best {
                    Some((_, _, solution)) => SolveOutcome {
                        status: SolveStatus::Optimal,
                        solution: Some(solution),
                        nodes_explored: evaluated,
                    },
                    None => SolveOutcome {
                        status: SolveStatus::Infeasible,
                        solution: None,
                        nodes_explored: evaluated,
                    },
                });
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < paths[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}
