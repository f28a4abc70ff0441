//! Property tests over seeded random instances: structural invariants of
//! the model, count identities of the generated programs, LP round-trips
//! and rejection behaviour under single-entry mutations.

use greenroute::formulation::{build_corrected, build_relaxed};
use greenroute::generate::generate_instance;
use greenroute::lpexport::{export_lp, parse_lp};
use greenroute::model::{build_instance, Instance, RawInstance};
use proptest::prelude::*;

/// Rebuilds the raw description of a validated instance so tests can mutate
/// single entries.
fn raw_of(inst: &Instance) -> RawInstance {
    RawInstance {
        router_names: (0..inst.router_count())
            .map(|r| inst.router_name(r).to_string())
            .collect(),
        card_names: (0..inst.card_count())
            .map(|c| inst.card_name(c).to_string())
            .collect(),
        port_names: (0..inst.port_count())
            .map(|p| inst.port_name(p).to_string())
            .collect(),
        router_power: (0..inst.router_count())
            .map(|r| inst.router_power(r).clone())
            .collect(),
        card_power: (0..inst.card_count())
            .map(|c| inst.card_power(c).clone())
            .collect(),
        router_of_card: (0..inst.card_count())
            .map(|c| inst.router_of_card(c))
            .collect(),
        card_of_port: (0..inst.port_count())
            .map(|p| inst.card_of_port(p))
            .collect(),
        link_source: (0..inst.link_count()).map(|e| inst.link_source(e)).collect(),
        link_target: (0..inst.link_count()).map(|e| inst.link_target(e)).collect(),
        link_states: (0..inst.link_count())
            .map(|e| inst.link_states(e).to_vec())
            .collect(),
        state_count: inst.state_count(),
        demands: inst.demands().to_vec(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Every directed link belongs to exactly one edge pair.
    #[test]
    fn pairing_partitions_links(seed in any::<u64>()) {
        let inst = generate_instance(seed);
        let mut covered = vec![0usize; inst.link_count()];
        for pair in inst.edge_pairs() {
            covered[pair.forward] += 1;
            covered[pair.reverse] += 1;
            prop_assert!(pair.forward < pair.reverse);
            prop_assert_eq!(inst.link_source(pair.forward), pair.port_a);
            prop_assert_eq!(inst.link_target(pair.forward), pair.port_b);
            prop_assert_eq!(inst.link_source(pair.reverse), pair.port_b);
            prop_assert_eq!(inst.link_target(pair.reverse), pair.port_a);
        }
        prop_assert!(covered.iter().all(|&n| n == 1));
    }

    /// router_links agrees with the dense-matrix triple sums.
    #[test]
    #[allow(clippy::needless_range_loop)] // loops spell out the triple sums
    fn router_links_match_dense_sums(seed in any::<u64>()) {
        let inst = generate_instance(seed);
        let g = inst.dense_router_card();
        let l = inst.dense_card_port();
        let a = inst.dense_link_out();
        let b = inst.dense_link_in();
        for r in 0..inst.router_count() {
            let (out, inc) = inst.router_links(r);
            for e in 0..inst.link_count() {
                let mut out_sum = 0usize;
                let mut in_sum = 0usize;
                for c in 0..inst.card_count() {
                    for p in 0..inst.port_count() {
                        out_sum += (g[r][c] * l[c][p] * a[e][p]) as usize;
                        in_sum += (g[r][c] * l[c][p] * b[e][p]) as usize;
                    }
                }
                prop_assert_eq!(out.contains(&e), out_sum == 1);
                prop_assert_eq!(inc.contains(&e), in_sum == 1);
            }
            prop_assert!(out.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(inc.windows(2).all(|w| w[0] < w[1]));
        }
    }

    /// Variable and per-family constraint counts match their closed forms.
    #[test]
    fn model_counts_match_closed_forms(seed in any::<u64>()) {
        let inst = generate_instance(seed);
        let model = build_corrected(&inst);
        let (r, c, p, e, k, d) = (
            inst.router_count(),
            inst.card_count(),
            inst.port_count(),
            inst.link_count(),
            inst.state_count(),
            inst.demand_count(),
        );
        let connected = (0..p).filter(|&p| inst.out_link_of_port(p).is_some()).count();
        prop_assert_eq!(model.variables.len(), c + e * k + r + e * d);
        prop_assert_eq!(model.objective.len(), e * k + c + r);
        prop_assert_eq!(model.family("card_out").count(), d * c);
        prop_assert_eq!(model.family("card_in").count(), d * c);
        prop_assert_eq!(model.family("router_activation").count(), c);
        prop_assert_eq!(model.family("single_state").count(), e);
        prop_assert_eq!(model.family("flow").count(), d * r);
        prop_assert_eq!(model.family("capacity").count(), e);
        prop_assert_eq!(model.family("symmetry").count(), connected * k);
        let total = d * c * 2 + c + e * 2 + d * r + connected * k;
        prop_assert_eq!(model.constraints.len(), total);
    }

    /// Corrected and relaxed builds differ exactly by the symmetry family,
    /// and both build deterministically.
    #[test]
    fn relaxed_is_corrected_minus_symmetry(seed in any::<u64>()) {
        let inst = generate_instance(seed);
        let corrected = build_corrected(&inst);
        let relaxed = build_relaxed(&inst);
        prop_assert_eq!(&corrected, &build_corrected(&inst));
        prop_assert_eq!(&relaxed, &build_relaxed(&inst));
        let kept: Vec<_> = corrected
            .constraints
            .iter()
            .filter(|c| !c.name.starts_with("symmetry["))
            .cloned()
            .collect();
        prop_assert_eq!(kept, relaxed.constraints);
    }

    /// export_lp is deterministic and parse_lp inverts it.
    #[test]
    fn lp_round_trip_identity(seed in any::<u64>()) {
        let inst = generate_instance(seed);
        for model in [build_corrected(&inst), build_relaxed(&inst)] {
            let doc = export_lp(&model).unwrap();
            prop_assert_eq!(&doc, &export_lp(&model).unwrap());
            let parsed = parse_lp(&doc.text).unwrap();
            prop_assert_eq!(parsed, model);
        }
    }

    /// Mutating any single incidence entry of a valid instance either keeps
    /// it valid or yields exactly one named error — never a panic — and the
    /// outcome is deterministic.
    #[test]
    fn single_entry_mutations_are_rejected_cleanly(
        seed in any::<u64>(),
        which in 0usize..4,
        slot in any::<prop::sample::Index>(),
        value in any::<prop::sample::Index>(),
    ) {
        let inst = generate_instance(seed);
        let raw = raw_of(&inst);
        // Sanity: the unmutated raw form rebuilds.
        prop_assert!(build_instance(raw.clone()).is_ok());

        let mut mutated = raw;
        // New value may be any index up to one past the valid range, so
        // dangling references are exercised too.
        match which {
            0 => {
                let p = slot.index(mutated.card_of_port.len());
                mutated.card_of_port[p] = value.index(mutated.router_of_card.len() + 1);
            }
            1 => {
                let c = slot.index(mutated.router_of_card.len());
                mutated.router_of_card[c] = value.index(mutated.router_power.len() + 1);
            }
            2 => {
                if mutated.link_source.is_empty() {
                    return Ok(());
                }
                let e = slot.index(mutated.link_source.len());
                mutated.link_source[e] = value.index(mutated.card_of_port.len() + 1);
            }
            _ => {
                if mutated.link_target.is_empty() {
                    return Ok(());
                }
                let e = slot.index(mutated.link_target.len());
                mutated.link_target[e] = value.index(mutated.card_of_port.len() + 1);
            }
        }
        let first = build_instance(mutated.clone());
        let second = build_instance(mutated);
        match (&first, &second) {
            (Ok(_), Ok(_)) => {}
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            _ => prop_assert!(false, "nondeterministic validation outcome"),
        }
    }
}
