//! Constraint-by-constraint solution checking and machine-readable
//! demonstrations of the two structural defects of the uncorrected model.
//!
//! The checker evaluates the generated [`LinearModel`] directly rather than
//! re-implementing the constraint families, so mutation tests exercise the
//! generator as well. All violations are reported, not just the first.

use crate::formulation::{
    build_original_literal, build_variant, evaluate_terms, LinearModel, OriginalModel, Relation,
    StructuralDefect, Variant,
};
use crate::model::{EdgePair, Instance};
use crate::rational::Rat;
use crate::solver::{solve_exact, SolveOptions, SolveStatus, Solution};

/// A constraint the assignment fails, with both sides fully evaluated.
/// For the synthetic `objective[]` row, `lhs` is the claimed objective and
/// `rhs` the value re-derived from the assignment.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub constraint: String,
    pub lhs: Rat,
    pub relation: Relation,
    pub rhs: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

#[derive(Debug, thiserror::Error)]
pub enum ValidateError {
    #[error("DimensionMismatch: solution dimensions do not match the instance")]
    DimensionMismatch,
}

/// Evaluates every constraint of the chosen variant on the assignment and
/// re-derives the objective, flagging a mismatch as violation `objective[]`.
pub fn check_solution(
    inst: &Instance,
    solution: &Solution,
    variant: Variant,
) -> Result<CheckReport, ValidateError> {
    if !solution.dims_match(inst) {
        return Err(ValidateError::DimensionMismatch);
    }
    let model = build_variant(inst, variant);
    Ok(check_against_model(&model, solution))
}

/// Checks a solution against an explicit model (used for cross-validation
/// in tests as well as by [`check_solution`]).
pub fn check_against_model(model: &LinearModel, solution: &Solution) -> CheckReport {
    let mut violations = Vec::new();
    for constraint in &model.constraints {
        let lhs = evaluate_terms(&constraint.terms, |v| solution.var_value(v));
        if !constraint.relation.holds(&lhs, &constraint.rhs) {
            violations.push(Violation {
                constraint: constraint.name.clone(),
                lhs,
                relation: constraint.relation,
                rhs: constraint.rhs.clone(),
            });
        }
    }
    let derived = evaluate_terms(&model.objective, |v| solution.var_value(v));
    if derived != solution.objective_value {
        violations.push(Violation {
            constraint: "objective[]".to_string(),
            lhs: solution.objective_value.clone(),
            relation: Relation::Eq,
            rhs: derived,
        });
    }
    CheckReport {
        passed: violations.is_empty(),
        violations,
    }
}

/// Optima of both variants and the witness of their difference.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SymmetryGap {
    pub corrected_objective: Rat,
    pub relaxed_objective: Rat,
    /// corrected − relaxed; nonnegative because the relaxed feasible set
    /// contains the corrected one.
    pub gap: Rat,
    /// The relaxed optimum.
    #[serde(serialize_with = "serialize_solution")]
    pub witness: Solution,
    /// Edge pairs on which the witness runs its two links in different
    /// states; nonempty whenever the gap is positive.
    pub violating_pairs: Vec<EdgePair>,
}

fn serialize_solution<S: serde::Serializer>(sol: &Solution, s: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize;
    #[derive(serde::Serialize)]
    struct Repr {
        objective: String,
        assignment: std::collections::BTreeMap<String, u8>,
    }
    Repr {
        objective: sol.objective_value.to_string(),
        assignment: sol.assignment(),
    }
    .serialize(s)
}

#[derive(Debug, thiserror::Error)]
pub enum GapError {
    #[error("Infeasible: the {variant} variant has no feasible assignment")]
    Infeasible { variant: Variant },
    #[error("BudgetExceeded: the {variant} variant was not solved within the node budget")]
    BudgetExceeded { variant: Variant },
    #[error(transparent)]
    Solve(#[from] crate::solver::SolveError),
}

fn solve_to_optimum(
    inst: &Instance,
    variant: Variant,
    options: &SolveOptions,
) -> Result<Solution, GapError> {
    let outcome = solve_exact(inst, variant, options)?;
    match outcome.status {
        SolveStatus::Optimal => Ok(outcome.solution.expect("optimal outcome has a solution")),
        SolveStatus::Infeasible => Err(GapError::Infeasible { variant }),
        SolveStatus::BudgetExceeded => Err(GapError::BudgetExceeded { variant }),
    }
}

/// Pairs whose two links run in different states under `solution`.
pub fn asymmetric_pairs(inst: &Instance, solution: &Solution) -> Vec<EdgePair> {
    inst.edge_pairs()
        .iter()
        .filter(|pair| {
            solution.link_state_on[pair.forward] != solution.link_state_on[pair.reverse]
        })
        .copied()
        .collect()
}

/// Solves both variants exactly and reports the objective gap the symmetry
/// rows close, with the relaxed optimum as witness.
pub fn symmetry_gap(inst: &Instance, options: &SolveOptions) -> Result<SymmetryGap, GapError> {
    let corrected = solve_to_optimum(inst, Variant::Corrected, options)?;
    let relaxed = solve_to_optimum(inst, Variant::Relaxed, options)?;
    let gap = corrected.objective_value.clone() - &relaxed.objective_value;
    let violating_pairs = asymmetric_pairs(inst, &relaxed);
    Ok(SymmetryGap {
        corrected_objective: corrected.objective_value.clone(),
        relaxed_objective: relaxed.objective_value.clone(),
        gap,
        witness: relaxed,
        violating_pairs,
    })
}

/// Machine-readable witnesses of both defects of the uncorrected model on a
/// given instance: the non-instantiable flow equations (`error1`) and the
/// objective gap left by the missing state-symmetry rows (`error2`,
/// present only when the gap is strictly positive).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DefectReport {
    pub error1: Vec<StructuralDefect>,
    pub error2: Option<SymmetryGap>,
}

pub fn demonstrate_defects(
    inst: &Instance,
    options: &SolveOptions,
) -> Result<DefectReport, GapError> {
    let error1 = match build_original_literal(inst) {
        OriginalModel::Defective(defects) => defects,
        OriginalModel::Model(_) => Vec::new(),
    };
    let gap = symmetry_gap(inst, options)?;
    let error2 = if gap.gap.is_positive() { Some(gap) } else { None };
    Ok(DefectReport { error1, error2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, Demand};
    use crate::rational::Rat;
    use crate::solver::solve_exact;
    use crate::testutil::{empty_instance, t1_asym_instance, t1_instance, t1_raw};

    fn rat(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn t1_optimum(variant: Variant) -> (crate::model::Instance, Solution) {
        let inst = t1_instance();
        let outcome = solve_exact(&inst, variant, &SolveOptions::default()).unwrap();
        (inst, outcome.solution.unwrap())
    }

    #[test]
    fn t1_optimum_passes() {
        let (inst, sol) = t1_optimum(Variant::Corrected);
        let report = check_solution(&inst, &sol, Variant::Corrected).unwrap();
        assert!(report.passed, "violations: {:?}", report.violations);
    }

    #[test]
    fn flipping_one_state_bit_breaks_symmetry_rows() {
        let (inst, mut sol) = t1_optimum(Variant::Corrected);
        // The optimum runs both links in the first state; switch the reverse
        // link off.
        assert!(sol.link_state_on[1][0]);
        sol.link_state_on[1][0] = false;
        sol.objective_value = sol.recompute_objective(&inst);
        let report = check_solution(&inst, &sol, Variant::Corrected).unwrap();
        assert!(!report.passed);
        let names: Vec<_> = report
            .violations
            .iter()
            .map(|v| v.constraint.as_str())
            .collect();
        assert!(names.contains(&"symmetry[p=p2,k=1]"), "{names:?}");
        assert!(names.contains(&"symmetry[p=p1,k=1]"), "{names:?}");
    }

    #[test]
    fn all_zero_solution_fails_flow_row_one_rhs_one() {
        let inst = t1_instance();
        let sol = Solution::all_zero(&inst);
        let report = check_solution(&inst, &sol, Variant::Corrected).unwrap();
        assert!(!report.passed);
        let v = report
            .violations
            .iter()
            .find(|v| v.constraint == "flow[d=1,r=r1]")
            .expect("source flow row must be violated");
        assert_eq!(v.lhs, Rat::zero());
        assert_eq!(v.rhs, Rat::one());
    }

    #[test]
    fn claimed_objective_mismatch_is_flagged() {
        let (inst, mut sol) = t1_optimum(Variant::Corrected);
        sol.objective_value = rat("99");
        let report = check_solution(&inst, &sol, Variant::Corrected).unwrap();
        let v = report
            .violations
            .iter()
            .find(|v| v.constraint == "objective[]")
            .expect("objective mismatch must be flagged");
        assert_eq!(v.lhs, rat("99"));
        assert_eq!(v.rhs, rat("8"));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let inst = t1_instance();
        let other = empty_instance();
        let sol = Solution::all_zero(&other);
        assert!(matches!(
            check_solution(&inst, &sol, Variant::Corrected),
            Err(ValidateError::DimensionMismatch)
        ));
    }

    #[test]
    fn t1_gap_is_one_with_sound_witness() {
        let inst = t1_instance();
        let gap = symmetry_gap(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(gap.corrected_objective, rat("8"));
        assert_eq!(gap.relaxed_objective, rat("7"));
        assert_eq!(gap.gap, rat("1"));
        assert_eq!(gap.violating_pairs.len(), 1);
        // The witness fails at least one symmetry row of the corrected model
        // and passes every relaxed row.
        let corrected = check_solution(&inst, &gap.witness, Variant::Corrected).unwrap();
        assert!(corrected
            .violations
            .iter()
            .any(|v| v.constraint.starts_with("symmetry[")));
        let relaxed = check_solution(&inst, &gap.witness, Variant::Relaxed).unwrap();
        assert!(relaxed.passed);
    }

    #[test]
    fn symmetric_volumes_close_the_gap() {
        let mut raw = t1_raw();
        raw.demands = vec![
            Demand {
                source: 0,
                target: 1,
                volume: rat("50"),
            },
            Demand {
                source: 1,
                target: 0,
                volume: rat("50"),
            },
        ];
        let inst = build_instance(raw).unwrap();
        let gap = symmetry_gap(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(gap.gap, Rat::zero());
        assert!(gap.violating_pairs.is_empty());
    }

    #[test]
    fn no_demands_no_gap() {
        let gap = symmetry_gap(&empty_instance(), &SolveOptions::default()).unwrap();
        assert_eq!(gap.corrected_objective, Rat::zero());
        assert_eq!(gap.relaxed_objective, Rat::zero());
        assert_eq!(gap.gap, Rat::zero());
    }

    #[test]
    fn gap_propagates_infeasibility() {
        let inst = crate::testutil::t1_overload_instance();
        assert!(matches!(
            symmetry_gap(&inst, &SolveOptions::default()),
            Err(GapError::Infeasible { .. })
        ));
    }

    #[test]
    fn corrected_feasible_implies_relaxed_feasible() {
        // The relaxed constraint set is a subset, so every assignment the
        // corrected checker passes must pass the relaxed checker too.
        for seed in 0..20 {
            let inst = crate::generate::generate_instance(seed);
            let outcome = solve_exact(&inst, Variant::Corrected, &SolveOptions::default())
                .unwrap();
            let optimum = outcome.solution.unwrap();
            assert!(check_solution(&inst, &optimum, Variant::Corrected).unwrap().passed);
            assert!(check_solution(&inst, &optimum, Variant::Relaxed).unwrap().passed);
        }
    }

    #[test]
    fn every_optimum_passes_its_own_variant() {
        for seed in 0..20 {
            let inst = crate::generate::generate_instance(seed);
            for variant in [Variant::Corrected, Variant::Relaxed] {
                let outcome = solve_exact(&inst, variant, &SolveOptions::default()).unwrap();
                let optimum = outcome.solution.unwrap();
                let report = check_solution(&inst, &optimum, variant).unwrap();
                assert!(report.passed, "seed {seed} {variant}: {:?}", report.violations);
            }
        }
    }

    #[test]
    fn positive_gaps_come_with_sound_witnesses() {
        let mut positive = 0;
        for seed in 0..40 {
            let inst = crate::generate::generate_instance(seed);
            let gap = symmetry_gap(&inst, &SolveOptions::default()).unwrap();
            assert!(!gap.gap.is_negative(), "seed {seed}");
            if gap.gap.is_positive() {
                positive += 1;
                assert!(!gap.violating_pairs.is_empty(), "seed {seed}");
                let corrected = check_solution(&inst, &gap.witness, Variant::Corrected).unwrap();
                assert!(
                    corrected
                        .violations
                        .iter()
                        .any(|v| v.constraint.starts_with("symmetry[")),
                    "seed {seed}"
                );
                assert!(
                    check_solution(&inst, &gap.witness, Variant::Relaxed).unwrap().passed,
                    "seed {seed}"
                );
            }
        }
        // The generator's asymmetric power tables make positive gaps common.
        assert!(positive > 0, "no positive gap in 40 seeds");
    }

    #[test]
    fn defect_report_on_t1_asym_has_both_errors() {
        let report =
            demonstrate_defects(&t1_asym_instance(), &SolveOptions::default()).unwrap();
        assert!(!report.error1.is_empty());
        let error2 = report.error2.expect("gap must be positive");
        assert_eq!(error2.gap, rat("3"));
    }

    #[test]
    fn defect_report_on_t1_has_gap_one() {
        let report = demonstrate_defects(&t1_instance(), &SolveOptions::default()).unwrap();
        assert!(!report.error1.is_empty());
        assert_eq!(report.error2.expect("gap 8-7").gap, rat("1"));
    }

    #[test]
    fn defect_report_without_demands_is_empty() {
        let report = demonstrate_defects(&empty_instance(), &SolveOptions::default()).unwrap();
        assert!(report.error1.is_empty());
        assert!(report.error2.is_none());
    }
}
