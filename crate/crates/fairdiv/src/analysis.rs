//! Executable proof machinery for the factor-2 manipulation bound of the
//! singleton-value picking mechanism on subadditive cancelable valuations.
//!
//! Given a truthful and a manipulated run differing only in agent 1's
//! report, a chain of stage mappings `M_k : X_k → B_k` is constructed
//! where `B_k` is agent 1's truthful bundle after stage `k` and
//! `X_k = B_k' ∪ (G_k' ∖ G_k)` collects the goods agent 1 could still
//! capture under the manipulation. Each mapping is *valid*: every good maps
//! to one at least as valuable (Property 1) and no target has more than two
//! preimages (Property 2). Splitting the final domain into two pointwise
//! dominated halves then bounds the manipulated utility by twice the
//! truthful one via cancelability and subadditivity.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::mechanism::{Mechanism, Run};
use crate::model::{Bundle, Good, Value};
use crate::valuation::Valuation;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("pointwise dominance precondition fails at position {0}")]
    PreconditionViolation(usize),
    #[error("sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("traces are not comparable: {0}")]
    TraceMismatch(String),
    #[error("mapping at stage {stage} violates property {property}")]
    PropertyViolated { stage: usize, property: u8 },
    #[error("a target good has more than two preimages; the mapping is invalid")]
    InvalidMapping,
}

/// Checks the cancelable dominance step: if `v(x_j) ≥ v(y_j)` pointwise,
/// then `v(X) ≥ v(Y)` as sets. A `false` return refutes cancelability of
/// the valuation.
pub fn dominance_check(
    valuation: &Valuation,
    x: &[Good],
    y: &[Good],
) -> Result<bool, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    for (j, (&xg, &yg)) in x.iter().zip(y).enumerate() {
        if valuation.singleton(xg) < valuation.singleton(yg) {
            return Err(AnalysisError::PreconditionViolation(j));
        }
    }
    let xv = valuation.value(&x.iter().copied().collect());
    let yv = valuation.value(&y.iter().copied().collect());
    Ok(xv >= yv)
}

/// The mapping after one stage: `domain()` is `X_k`, values lie in `B_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageMapping {
    pub stage: usize,
    pub mapping: BTreeMap<Good, Good>,
    /// Agent 1's truthful bundle `B_k` at this stage.
    pub truthful_bundle: Bundle,
}

impl StageMapping {
    pub fn domain(&self) -> Bundle {
        self.mapping.keys().copied().collect()
    }
}

/// Builds the full chain `M_0, ..., M_m` from a truthful and a manipulated
/// run of the singleton-value picking mechanism, manipulator fixed to
/// agent 1 (rotate the profile for other agents). Fails when the traces
/// could not have come from such a pair of runs, or when a stage mapping
/// cannot be made valid (which refutes the subadditive-cancelable
/// hypothesis on the true valuation).
pub fn build_stage_mappings(
    true_valuation: &Valuation,
    truthful: &Run,
    manipulated: &Run,
) -> Result<Vec<StageMapping>, AnalysisError> {
    for run in [truthful, manipulated] {
        if run.trace.mechanism != Mechanism::RoundRobin {
            return Err(AnalysisError::TraceMismatch(format!(
                "expected a singleton-value picking trace, got {}",
                run.trace.mechanism
            )));
        }
    }
    let m = truthful.trace.steps.len();
    if manipulated.trace.steps.len() != m {
        return Err(AnalysisError::TraceMismatch(format!(
            "stage counts differ: {} vs {}",
            m,
            manipulated.trace.steps.len()
        )));
    }
    for k in 0..m {
        let (a, b) = (truthful.trace.steps[k].agent, manipulated.trace.steps[k].agent);
        if a != b {
            return Err(AnalysisError::TraceMismatch(format!(
                "stage {} assigns to different agents ({} vs {})",
                k + 1,
                a + 1,
                b + 1
            )));
        }
    }

    let mut mappings = Vec::with_capacity(m + 1);
    mappings.push(StageMapping {
        stage: 0,
        mapping: BTreeMap::new(),
        truthful_bundle: Bundle::empty(),
    });

    let mut truthful_bundle = Bundle::empty(); // B_k
    let mut manip_bundle = Bundle::empty(); // B_k'
    let mut remaining = Bundle::universe(truthful.allocation.m()); // G_k
    let mut manip_remaining = remaining.clone(); // G_k'
    let mut mapping: BTreeMap<Good, Good> = BTreeMap::new();

    for k in 1..=m {
        let step = &truthful.trace.steps[k - 1];
        let manip_step = &manipulated.trace.steps[k - 1];
        let (g_k, g_k_prime) = (step.good, manip_step.good);
        remaining.remove(g_k);
        manip_remaining.remove(g_k_prime);
        if step.agent == 0 {
            truthful_bundle.insert(g_k);
            manip_bundle.insert(g_k_prime);
        }

        // The displaced good's image must be read before goods leaving the
        // domain are dropped: the good the other agent takes under the
        // manipulation is exactly the one that leaves.
        let displaced_image = mapping.get(&g_k_prime).copied();
        let domain = manip_bundle.union(&manip_remaining.difference(&remaining));
        mapping.retain(|g, _| domain.contains(*g));
        let new_goods: Vec<Good> =
            domain.iter().filter(|g| !mapping.contains_key(g)).collect();
        if step.agent == 0 {
            // Agent 1's stage: every new good maps to the good they just
            // received truthfully.
            for g in &new_goods {
                if *g != g_k && *g != g_k_prime {
                    return Err(AnalysisError::TraceMismatch(format!(
                        "unexpected new good g{g} at agent-1 stage {k}"
                    )));
                }
                mapping.insert(*g, g_k);
            }
        } else {
            // Another agent's stage: the only possible new good is the one
            // they truthfully receive, inheriting the image of the good
            // they received under the manipulation.
            for g in &new_goods {
                if *g != g_k {
                    return Err(AnalysisError::TraceMismatch(format!(
                        "unexpected new good g{g} at stage {k} (agent {})",
                        step.agent + 1
                    )));
                }
                let image = displaced_image.ok_or_else(|| {
                    AnalysisError::TraceMismatch(format!(
                        "displaced good g{g_k_prime} at stage {k} has no image yet"
                    ))
                })?;
                mapping.insert(g_k, image);
            }
        }

        let stage = StageMapping {
            stage: k,
            mapping: mapping.clone(),
            truthful_bundle: truthful_bundle.clone(),
        };
        validate(true_valuation, &stage)?;
        mappings.push(stage);
    }
    Ok(mappings)
}

fn validate(v: &Valuation, stage: &StageMapping) -> Result<(), AnalysisError> {
    let mut preimages: BTreeMap<Good, usize> = BTreeMap::new();
    for (&g, &target) in &stage.mapping {
        if !stage.truthful_bundle.contains(target) {
            return Err(AnalysisError::TraceMismatch(format!(
                "stage {} maps g{g} outside the truthful bundle",
                stage.stage
            )));
        }
        if v.singleton(g) > v.singleton(target) {
            return Err(AnalysisError::PropertyViolated { stage: stage.stage, property: 1 });
        }
        *preimages.entry(target).or_default() += 1;
    }
    if preimages.values().any(|&c| c > 2) {
        return Err(AnalysisError::PropertyViolated { stage: stage.stage, property: 2 });
    }
    Ok(())
}

/// The factor-2 verdict with all intermediate inequalities.
#[derive(Clone, Debug)]
pub struct FactorTwoCheck {
    pub r1: Bundle,
    pub r2: Bundle,
    /// `v_1(R_1) ≤ v_1(B_m)` and `v_1(R_2) ≤ v_1(B_m)` (dominance +
    /// monotonicity).
    pub halves_bounded: bool,
    /// `v_1(B_m') ≤ v_1(R_1) + v_1(R_2)` (subadditivity).
    pub split_covers: bool,
    /// `v_1(B_m') ≤ 2·v_1(B_m)`.
    pub bound_holds: bool,
    pub truthful_utility: Value,
    pub manipulated_utility: Value,
}

/// Splits the final mapping's domain into two halves with at most one
/// preimage of each target apiece (first preimage to `R_1`, second to
/// `R_2`, deterministically in good order) and checks the inequality chain
/// down to the factor-2 bound.
pub fn verify_factor_two_bound(
    true_valuation: &Valuation,
    mappings: &[StageMapping],
    manipulated: &Run,
) -> Result<FactorTwoCheck, AnalysisError> {
    let last = mappings.last().expect("the chain contains at least M_0");
    let manip_bundle = manipulated.allocation.bundle(0);
    let mut r1 = Bundle::empty();
    let mut r2 = Bundle::empty();
    let mut seen: BTreeMap<Good, usize> = BTreeMap::new();
    for (&g, &target) in &last.mapping {
        let count = seen.entry(target).or_default();
        *count += 1;
        match count {
            1 => r1.insert(g),
            2 => r2.insert(g),
            _ => return Err(AnalysisError::InvalidMapping),
        };
    }
    let value = |b: &Bundle| true_valuation.value(b);
    let truthful_utility = value(&last.truthful_bundle);
    let manipulated_utility = value(manip_bundle);
    let halves_bounded =
        value(&r1) <= truthful_utility && value(&r2) <= truthful_utility;
    let split_covers = manipulated_utility <= value(&r1) + value(&r2);
    let bound_holds = manipulated_utility <= truthful_utility.clone() + truthful_utility.clone();
    Ok(FactorTwoCheck {
        r1,
        r2,
        halves_bounded,
        split_covers,
        bound_holds,
        truthful_utility,
        manipulated_utility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incentives::order_report;
    use crate::mechanism::run_mechanism;
    use crate::valuation::Valuation;

    fn additive(rows: &[&[i64]]) -> Vec<Valuation> {
        rows.iter().map(|r| Valuation::additive_ints(r)).collect()
    }

    #[test]
    fn dominance_on_multiplicative() {
        let v = Valuation::Multiplicative(
            crate::valuation::MultiplicativeValuation::new(
                [2, 3, 4, 5].map(crate::model::rational_int).to_vec(),
            )
            .unwrap(),
        );
        assert!(dominance_check(&v, &[3, 4], &[1, 2]).unwrap());
        assert!(dominance_check(&v, &[3, 4], &[3, 4]).unwrap());
    }

    #[test]
    fn dominance_on_additive() {
        let v = Valuation::additive_ints(&[1, 2, 3, 4]);
        assert!(dominance_check(&v, &[4, 2], &[3, 1]).unwrap());
        assert_eq!(
            dominance_check(&v, &[1, 2], &[3, 4]).unwrap_err(),
            AnalysisError::PreconditionViolation(0)
        );
        assert_eq!(
            dominance_check(&v, &[1], &[1, 2]).unwrap_err(),
            AnalysisError::LengthMismatch(1, 2)
        );
    }

    fn mapping_chain(
        profile: &[Valuation],
        misreport_order: &[Good],
    ) -> (Vec<StageMapping>, Run) {
        let truthful = run_mechanism(Mechanism::RoundRobin, profile).unwrap();
        let mut reported = profile.to_vec();
        let m = profile[0].m();
        reported[0] = Valuation::Additive(order_report(misreport_order, m));
        let manipulated = run_mechanism(Mechanism::RoundRobin, &reported).unwrap();
        let chain = build_stage_mappings(&profile[0], &truthful, &manipulated).unwrap();
        (chain, manipulated)
    }

    #[test]
    fn hand_checked_chain_on_the_19_over_18_instance() {
        let profile = additive(&[&[10, 9, 8, 0], &[0, 10, 0, 9]]);
        let (chain, manipulated) = mapping_chain(&profile, &[2, 1, 3, 4]);
        assert_eq!(chain.len(), 5);
        let last = &chain[4];
        assert_eq!(last.domain(), Bundle::from([1, 2]));
        assert_eq!(last.mapping[&1], 1);
        assert_eq!(last.mapping[&2], 1);

        let check = verify_factor_two_bound(&profile[0], &chain, &manipulated).unwrap();
        assert_eq!(check.r1, Bundle::from([1]));
        assert_eq!(check.r2, Bundle::from([2]));
        assert!(check.halves_bounded && check.split_covers && check.bound_holds);
        assert_eq!(check.manipulated_utility, Value::from_int(19));
        assert_eq!(check.truthful_utility, Value::from_int(18));
    }

    #[test]
    fn identical_traces_map_identically() {
        let profile = additive(&[&[4, 3, 2, 1], &[1, 2, 3, 4]]);
        let (chain, manipulated) = mapping_chain(&profile, &[1, 2, 3, 4]);
        let last = chain.last().unwrap();
        // truthful report as "misreport": B_m' = B_m, identity mapping
        assert_eq!(last.domain(), last.truthful_bundle);
        for (g, target) in &last.mapping {
            assert_eq!(g, target);
        }
        let check = verify_factor_two_bound(&profile[0], &chain, &manipulated).unwrap();
        assert!(check.bound_holds);
        assert_eq!(check.truthful_utility, check.manipulated_utility);
    }

    #[test]
    fn zero_goods_has_only_the_empty_mapping() {
        let profile = additive(&[&[], &[]]);
        let run = run_mechanism(Mechanism::RoundRobin, &profile).unwrap();
        let chain = build_stage_mappings(&profile[0], &run, &run).unwrap();
        assert_eq!(chain.len(), 1);
        assert!(chain[0].mapping.is_empty());
    }

    #[test]
    fn final_domain_is_the_manipulated_bundle() {
        let profile = additive(&[&[7, 5, 3, 2, 1], &[5, 7, 1, 3, 2], &[1, 1, 1, 1, 1]]);
        let (chain, manipulated) = mapping_chain(&profile, &[2, 1, 4, 3, 5]);
        assert_eq!(chain.last().unwrap().domain(), *manipulated.allocation.bundle(0));
    }

    #[test]
    fn wrong_mechanism_is_rejected() {
        let profile = additive(&[&[1, 2], &[2, 1]]);
        let run = run_mechanism(Mechanism::EnvyGraph, &profile).unwrap();
        assert!(matches!(
            build_stage_mappings(&profile[0], &run, &run),
            Err(AnalysisError::TraceMismatch(_))
        ));
    }
}
