//! Canonical hard instances and proof chains, plus auditors that replay
//! the arguments against concrete mechanisms.
//!
//! Two kinds of artifacts live here. *Profile chains* encode the
//! impossibility arguments pinning down the incentive-ratio lower bounds
//! of fair mechanisms for additive and subadditive cancelable valuations:
//! any mechanism that is fair at the stated level must, on some chain
//! edge, reward a deviation by at least the stated factor. *Hard
//! instances* are single profiles with a known profitable misreport and a
//! closed-form expected ratio, replayable exactly.

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::fairness::{audit_alpha_ef1, FairnessReport};
use crate::incentives::Ratio;
use crate::mechanism::{run_mechanism, Mechanism, MechanismError};
use crate::model::{rational, rational_int, Allocation, Bundle, Rational, Value};
use crate::valuation::{
    AdditiveValuation, DiscountedValuation, TableValuation, Valuation, XosValuation,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("delta must be at least 5")]
    DeltaTooSmall,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("profile chain is malformed: {0}")]
    MalformedChain(String),
    #[error(
        "no fairness violation and no deviation reaching the threshold; \
         this contradicts the impossibility argument and indicates a bug"
    )]
    NoWitness,
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// The golden ratio `(1+√5)/2` as a fixed rational approximation
/// (consecutive Fibonacci numbers; error below 1e-12).
pub fn phi() -> Rational {
    rational(2_178_309, 1_346_269)
}

#[derive(Clone, Debug)]
pub struct NamedProfile {
    pub name: String,
    pub profile: Vec<Valuation>,
}

/// A claimed profitable deviation: the agent in `from`'s profile misreports
/// so that the mechanism sees `to`'s profile, gaining at least
/// `claimed_ratio` (measured with their `from` valuation).
#[derive(Clone, Debug)]
pub struct DeviationEdge {
    pub from: usize,
    pub to: usize,
    pub agent: usize,
    pub claimed_ratio: Rational,
}

#[derive(Clone, Debug)]
pub struct ProfileChain {
    pub profiles: Vec<NamedProfile>,
    pub edges: Vec<DeviationEdge>,
}

impl ProfileChain {
    /// Each edge's endpoint profiles must differ in exactly the deviating
    /// agent's valuation.
    fn validate(self) -> Result<Self, InstanceError> {
        for (k, edge) in self.edges.iter().enumerate() {
            let from = &self.profiles[edge.from].profile;
            let to = &self.profiles[edge.to].profile;
            if from.len() != to.len() {
                return Err(InstanceError::MalformedChain(format!(
                    "edge {k} joins profiles with different agent counts"
                )));
            }
            for (i, (a, b)) in from.iter().zip(to).enumerate() {
                let differs = a != b;
                if differs != (i == edge.agent) {
                    return Err(InstanceError::MalformedChain(format!(
                        "edge {k} must differ exactly in agent {}'s valuation",
                        edge.agent + 1
                    )));
                }
            }
        }
        Ok(self)
    }

    /// The same chain with zero-value throwaway goods appended up to
    /// universe size `m`. The original arguments posit extra goods pinned
    /// to agent 1; they never affect the deviations.
    pub fn padded(&self, m: u32) -> Result<ProfileChain, InstanceError> {
        let current = self.profiles[0].profile[0].m();
        if m < current {
            return Err(InstanceError::ParameterOutOfRange(format!(
                "cannot pad {current} goods down to {m}"
            )));
        }
        let profiles = self
            .profiles
            .iter()
            .map(|p| NamedProfile {
                name: p.name.clone(),
                profile: p.profile.iter().map(|v| pad_valuation(v, m)).collect(),
            })
            .collect();
        ProfileChain { profiles, edges: self.edges.clone() }.validate()
    }

    /// The chain with the two agents' roles exchanged.
    fn swapped(&self) -> ProfileChain {
        let profiles = self
            .profiles
            .iter()
            .map(|p| {
                let mut profile = p.profile.clone();
                profile.reverse();
                NamedProfile { name: format!("{} (agents swapped)", p.name), profile }
            })
            .collect();
        let n = self.profiles[0].profile.len();
        let edges = self
            .edges
            .iter()
            .map(|e| DeviationEdge { agent: n - 1 - e.agent, ..e.clone() })
            .collect();
        ProfileChain { profiles, edges }
    }
}

fn pad_valuation(v: &Valuation, m: u32) -> Valuation {
    match v {
        Valuation::Additive(a) => {
            let mut per_good = a.per_good().to_vec();
            per_good.resize(m as usize, Rational::zero());
            Valuation::Additive(AdditiveValuation::new(per_good).expect("padded values"))
        }
        Valuation::Table(t) => Valuation::Table(t.with_universe(m).expect("padded table")),
        other => other.clone(),
    }
}

fn additive_rats(values: Vec<Rational>) -> Valuation {
    Valuation::Additive(AdditiveValuation::new(values).expect("chain values are non-negative"))
}

/// The six-profile chain showing that every (½+ε)-EF1 mechanism for
/// additive valuations has incentive ratio at least 1.5.
pub fn thm1_chain(delta: &Rational) -> Result<ProfileChain, InstanceError> {
    if delta < &rational_int(5) {
        return Err(InstanceError::DeltaTooSmall);
    }
    let base_v2 = additive_rats(vec![
        Rational::one(),
        Rational::one(),
        Rational::one(),
        Rational::one(),
    ]);
    let scale = rational(3, 2);
    chain_from_parts(ChainParts {
        v1: base_v2.clone(),
        v2: base_v2,
        v1_prime: additive_rats(vec![
            delta.clone(),
            &scale * delta,
            Rational::zero(),
            Rational::zero(),
        ]),
        v1_double: additive_rats(vec![
            &scale * delta,
            delta.clone(),
            Rational::zero(),
            Rational::zero(),
        ]),
        v2_prime: additive_rats(vec![
            Rational::zero(),
            delta.clone(),
            Rational::one(),
            Rational::one(),
        ]),
        v2_double: additive_rats(vec![
            delta.clone(),
            delta.clone(),
            Rational::one(),
            Rational::one(),
        ]),
        // the strict σ/(σ−1), 2, σ/(σ−1)·(σ−1)... thresholds of the proof
        ratio_low: rational(5, 3),        // 2.5/1.5
        ratio_mid: rational_int(2),       // agent 2's first deviation
        ratio_back: rational(3, 2),       // agent 2's reverse deviation
        ratio_final: delta / rational_int(2),
    })
}

/// The subadditive-cancelable variant: agent 2's valuation becomes a
/// cardinality table built on the golden ratio, and the guaranteed
/// deviation factor rises to φ.
pub fn thm4_chain(delta: &Rational, epsilon: &Rational) -> Result<ProfileChain, InstanceError> {
    if delta < &rational_int(5) {
        return Err(InstanceError::DeltaTooSmall);
    }
    if !epsilon.is_positive() || epsilon >= &rational(1, 10) {
        return Err(InstanceError::ParameterOutOfRange(
            "epsilon must lie in (0, 1/10)".into(),
        ));
    }
    let phi = phi();
    let phi_sq = &phi * &phi;
    let by_size = [
        Rational::zero(),
        Rational::one(),
        &phi + epsilon,
        phi_sq.clone(),
        &phi_sq + epsilon,
    ];
    let table = TableValuation::by_cardinality(4, Bundle::universe(4), &by_size)
        .expect("the cardinality table is monotone");
    chain_from_parts(ChainParts {
        v1: additive_rats(vec![
            Rational::one(),
            Rational::one(),
            Rational::one(),
            Rational::one(),
        ]),
        v2: Valuation::Table(table),
        v1_prime: additive_rats(vec![
            delta.clone(),
            &phi * delta,
            Rational::zero(),
            Rational::zero(),
        ]),
        v1_double: additive_rats(vec![
            &phi * delta,
            delta.clone(),
            Rational::zero(),
            Rational::zero(),
        ]),
        v2_prime: additive_rats(vec![
            Rational::zero(),
            delta.clone(),
            Rational::one(),
            Rational::one(),
        ]),
        v2_double: additive_rats(vec![
            delta.clone(),
            delta.clone(),
            Rational::one(),
            Rational::one(),
        ]),
        ratio_low: (&phi + Rational::one()) / &phi, // = φ up to the approximation
        ratio_mid: rational_int(2),
        ratio_back: &phi_sq / (&phi + epsilon),
        ratio_final: delta / rational_int(2),
    })
}

struct ChainParts {
    v1: Valuation,
    v2: Valuation,
    v1_prime: Valuation,
    v1_double: Valuation,
    v2_prime: Valuation,
    v2_double: Valuation,
    ratio_low: Rational,
    ratio_mid: Rational,
    ratio_back: Rational,
    ratio_final: Rational,
}

fn chain_from_parts(parts: ChainParts) -> Result<ProfileChain, InstanceError> {
    let named = |name: &str, a: &Valuation, b: &Valuation| NamedProfile {
        name: name.to_string(),
        profile: vec![a.clone(), b.clone()],
    };
    let profiles = vec![
        named("v(0)", &parts.v1, &parts.v2),
        named("v(1)", &parts.v1_prime, &parts.v2),
        named("v(2)", &parts.v1_double, &parts.v2),
        named("v(3)", &parts.v1_prime, &parts.v2_prime),
        named("v(4)", &parts.v1_double, &parts.v2_double),
        named("v(5)", &parts.v1_double, &parts.v2_prime),
    ];
    let edge = |from, to, agent, claimed_ratio| DeviationEdge { from, to, agent, claimed_ratio };
    let edges = vec![
        edge(1, 0, 0, parts.ratio_low.clone()),
        edge(2, 0, 0, parts.ratio_low.clone()),
        edge(3, 1, 1, parts.ratio_mid),
        edge(1, 3, 1, parts.ratio_back),
        edge(5, 3, 0, parts.ratio_low),
        edge(5, 4, 1, parts.ratio_final),
    ];
    ProfileChain { profiles, edges }.validate()
}

/// What an audit found first: an unfair allocation or a profitable
/// deviation along a chain edge.
#[derive(Debug)]
pub enum AuditFinding {
    Unfair {
        profile: String,
        report: FairnessReport,
    },
    Deviation(ChainWitness),
}

#[derive(Clone, Debug)]
pub struct ChainWitness {
    pub from: String,
    pub to: String,
    pub agent: usize,
    pub ratio: Ratio,
    pub claimed_ratio: Rational,
    /// Whether the witness comes from the agent-swapped chain (the
    /// argument's "without loss of generality" resolved the other way).
    pub agents_swapped: bool,
}

/// Runs an arbitrary allocator over the chain and returns either an
/// `alpha_fair`-EF1 violation on some profile or a deviation edge whose
/// realized utility ratio reaches `ratio_threshold`. The agent-swapped
/// chain is tried second, covering mechanisms that resolve the argument's
/// symmetric choice the other way. `NoWitness` contradicts the argument
/// the chain encodes and indicates an implementation bug.
pub fn audit_chain_with<F>(
    mut allocate: F,
    chain: &ProfileChain,
    alpha_fair: &Rational,
    ratio_threshold: &Rational,
) -> Result<AuditFinding, InstanceError>
where
    F: FnMut(&[Valuation]) -> Result<Allocation, MechanismError>,
{
    for (chain, swapped) in [(chain.clone(), false), (chain.swapped(), true)] {
        let mut allocations = Vec::with_capacity(chain.profiles.len());
        for p in &chain.profiles {
            let allocation = allocate(&p.profile)?;
            let report = audit_alpha_ef1(&p.profile, &allocation, alpha_fair);
            if !report.satisfied && !swapped {
                return Ok(AuditFinding::Unfair { profile: p.name.clone(), report });
            }
            allocations.push(allocation);
        }
        for edge in &chain.edges {
            let truth = &chain.profiles[edge.from].profile[edge.agent];
            let honest = truth.value(allocations[edge.from].bundle(edge.agent));
            let deviated = truth.value(allocations[edge.to].bundle(edge.agent));
            let ratio = Ratio::of(&deviated, &honest);
            if ratio >= Ratio::Finite(ratio_threshold.clone()) {
                return Ok(AuditFinding::Deviation(ChainWitness {
                    from: chain.profiles[edge.from].name.clone(),
                    to: chain.profiles[edge.to].name.clone(),
                    agent: edge.agent,
                    ratio,
                    claimed_ratio: edge.claimed_ratio.clone(),
                    agents_swapped: swapped,
                }));
            }
        }
    }
    Err(InstanceError::NoWitness)
}

/// [`audit_chain_with`] specialized to one of the built-in mechanisms.
pub fn audit_chain(
    mechanism: Mechanism,
    chain: &ProfileChain,
    alpha_fair: &Rational,
    ratio_threshold: &Rational,
) -> Result<AuditFinding, InstanceError> {
    audit_chain_with(
        |profile| run_mechanism(mechanism, profile).map(|run| run.allocation),
        chain,
        alpha_fair,
        ratio_threshold,
    )
}

/// A single profile with a known profitable misreport and its closed-form
/// expected ratio under a specific mechanism.
#[derive(Clone, Debug)]
pub struct HardInstance {
    pub name: String,
    pub mechanism: Mechanism,
    pub profile: Vec<Valuation>,
    pub manipulator: usize,
    pub misreport: Valuation,
    pub expected_ratio: Rational,
}

#[derive(Clone, Debug)]
pub struct Replay {
    pub truthful_utility: Value,
    pub manipulated_utility: Value,
    pub ratio: Ratio,
    pub truthful_allocation: Allocation,
    pub manipulated_allocation: Allocation,
    /// Exact match against the instance's expected ratio.
    pub matches_expected: bool,
}

impl HardInstance {
    /// Runs the mechanism truthfully and with the misreport and compares
    /// the realized ratio against the closed form, exactly.
    pub fn replay(&self) -> Result<Replay, MechanismError> {
        let truth = &self.profile[self.manipulator];
        let truthful = run_mechanism(self.mechanism, &self.profile)?;
        let mut reported = self.profile.clone();
        reported[self.manipulator] = self.misreport.clone();
        let manipulated = run_mechanism(self.mechanism, &reported)?;
        let truthful_utility = truth.value(truthful.allocation.bundle(self.manipulator));
        let manipulated_utility =
            truth.value(manipulated.allocation.bundle(self.manipulator));
        let ratio = Ratio::of(&manipulated_utility, &truthful_utility);
        let matches_expected = ratio == Ratio::Finite(self.expected_ratio.clone());
        Ok(Replay {
            truthful_utility,
            manipulated_utility,
            ratio,
            truthful_allocation: truthful.allocation,
            manipulated_allocation: manipulated.allocation,
            matches_expected,
        })
    }
}

/// The submodular instance driving the marginal-value picking mechanism to
/// ratio `(wn−n+1)/w ≈ n`: goods split into a small block `G_1` that only
/// agent 1 truly wants and a large filler block `G_2`; each other agent's
/// valuation discounts their `G_1` column once they hold their trigger
/// good, so a misreport by agent 1 that skips the triggers re-routes all
/// other agents into the filler.
pub fn submodular_hard_instance(
    n: usize,
    w: u32,
    t: u32,
) -> Result<HardInstance, InstanceError> {
    if n < 2 {
        return Err(InstanceError::ParameterOutOfRange("n must be at least 2".into()));
    }
    if w < 1 {
        return Err(InstanceError::ParameterOutOfRange("w must be at least 1".into()));
    }
    let n_u32 = n as u32;
    if t < w * n_u32 * n_u32 {
        return Err(InstanceError::ParameterOutOfRange(format!(
            "T must be at least w·n² = {}",
            w * n_u32 * n_u32
        )));
    }
    let m = w * n_u32 + t;
    let block = w * n_u32; // |G_1|
    let mut profile = Vec::with_capacity(n);
    let indicator = |pred: &dyn Fn(u32) -> bool| {
        additive_rats(
            (1..=m).map(|g| if pred(g) { Rational::one() } else { Rational::zero() }).collect(),
        )
    };
    profile.push(indicator(&|g| g <= block));
    for i in 2..=n_u32 {
        let trigger = i - 1;
        let column: Bundle = (0..w).map(|c| c * n_u32 + i).collect();
        let base = AdditiveValuation::new(
            (1..=m)
                .map(|g| {
                    if g == trigger {
                        rational_int(w as i64)
                    } else if column.contains(g) || g > block {
                        rational_int(2)
                    } else {
                        Rational::zero()
                    }
                })
                .collect(),
        )
        .expect("non-negative values");
        profile.push(Valuation::Discounted(
            DiscountedValuation::new(base, trigger, column)
                .expect("trigger covers the column discount"),
        ));
    }
    let misreport = indicator(&|g| g >= n_u32 && g <= block);
    Ok(HardInstance {
        name: format!("submodular n={n} w={w} T={t}"),
        mechanism: Mechanism::RoundRobinMarginal,
        profile,
        manipulator: 0,
        misreport,
        expected_ratio: rational_int((w * n_u32 - n_u32 + 1) as i64)
            / rational_int(w as i64),
    })
}

/// The XOS instance with ratio `⌈m/n⌉` under the marginal-value picking
/// mechanism. Goods are grouped into consecutive blocks `G_1..G_n`; agents
/// 1 and 2 hold two additive clauses each, steering the truthful run to
/// `(G_1, ..., G_n)` while a misreport hands agent 1 all of `G_2`.
pub fn xos_hard_instance(n: usize, m: u32) -> Result<HardInstance, InstanceError> {
    if n < 2 {
        return Err(InstanceError::ParameterOutOfRange("n must be at least 2".into()));
    }
    if (m as usize) < n {
        return Err(InstanceError::ParameterOutOfRange("m must be at least n".into()));
    }
    let n_u32 = n as u32;
    // group sizes s_i = ⌈(m−i+1)/n⌉ and consecutive groups G_1..G_n
    let sizes: Vec<u32> = (1..=n_u32).map(|i| (m - i + 1).div_ceil(n_u32)).collect();
    let mut groups = Vec::with_capacity(n);
    let mut next = 1u32;
    for &s in &sizes {
        groups.push((next..next + s).collect::<Bundle>());
        next += s;
    }
    debug_assert_eq!(next, m + 1);
    let s1 = sizes[0];
    let g_s1 = s1; // the last good of G_1
    let g_after = s1 + 1; // the first good of G_2

    let clause = |f: &dyn Fn(u32) -> Rational| {
        AdditiveValuation::new((1..=m).map(f).collect()).expect("non-negative clause")
    };
    let one_if = |pred: bool| if pred { Rational::one() } else { Rational::zero() };
    let f11 = clause(&|g| one_if(g == 1));
    let f21 = clause(&|g| one_if(groups[1].contains(g) || g == g_s1));
    let f12 = clause(&|g| one_if(groups[0].contains(g)));
    let f22 = clause(&|g| {
        if g == g_after {
            rational_int(2)
        } else {
            one_if(groups[1].contains(g))
        }
    });
    let mut profile = vec![
        Valuation::Xos(XosValuation::new(vec![f11, f21]).unwrap()),
        Valuation::Xos(XosValuation::new(vec![f12, f22]).unwrap()),
    ];
    for group in groups.iter().skip(2) {
        profile.push(Valuation::Additive(clause(&|g| one_if(group.contains(g)))));
    }
    let misreport = Valuation::Additive(clause(&|g| {
        if groups[1].contains(g) {
            rational_int(2)
        } else {
            one_if(g == g_s1)
        }
    }));
    Ok(HardInstance {
        name: format!("xos n={n} m={m}"),
        mechanism: Mechanism::RoundRobinMarginal,
        profile,
        manipulator: 0,
        misreport,
        expected_ratio: rational_int(s1 as i64),
    })
}

/// The two additive instances on which the envy-graph procedures admit an
/// unbounded incentive ratio: the manipulator's truthful utility is ε (or
/// 1 against 1/ε), vanishing as ε → 0.
pub fn envy_graph_hard_instances(
    epsilon: &Rational,
) -> Result<[HardInstance; 2], InstanceError> {
    if !epsilon.is_positive() || epsilon >= &Rational::one() {
        return Err(InstanceError::ParameterOutOfRange(
            "epsilon must lie in (0, 1)".into(),
        ));
    }
    let fixed_order = HardInstance {
        name: "envy-graph fixed order".into(),
        mechanism: Mechanism::EnvyGraph,
        profile: vec![
            Valuation::additive_ints(&[0, 0, 0]),
            additive_rats(vec![epsilon.clone(), epsilon.clone(), Rational::one()]),
        ],
        manipulator: 1,
        misreport: Valuation::additive_ints(&[1, 0, 0]),
        expected_ratio: (Rational::one() + epsilon) / epsilon,
    };
    let favorite_good = HardInstance {
        name: "envy-graph favorite good".into(),
        mechanism: Mechanism::EnvyGraphFavorite,
        profile: vec![
            additive_rats(vec![
                Rational::one(),
                rational(3, 5),
                Rational::zero(),
                rational(3, 5),
            ]),
            additive_rats(vec![
                Rational::one(),
                Rational::zero(),
                Rational::zero(),
                epsilon.clone(),
            ]),
            Valuation::additive_ints(&[0, 1, 1, 1]),
        ],
        manipulator: 1,
        misreport: additive_rats(vec![
            Rational::one(),
            epsilon.clone(),
            Rational::zero(),
            Rational::zero(),
        ]),
        expected_ratio: Rational::one() / epsilon,
    };
    Ok([fixed_order, favorite_good])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::max_envy;
    use crate::valuation::{check_class, ValuationClass};

    #[test]
    fn thm1_profile_values() {
        let chain = thm1_chain(&rational_int(5)).unwrap();
        assert_eq!(chain.profiles.len(), 6);
        let v1_prime = &chain.profiles[1].profile[0];
        assert_eq!(v1_prime.singleton(1), Value::from_int(5));
        assert_eq!(v1_prime.singleton(2), Value::Exact(rational(15, 2)));
        assert_eq!(chain.edges[0].claimed_ratio, rational(5, 3)); // 2.5/1.5
        assert_eq!(chain.edges[5].claimed_ratio, rational(5, 2)); // δ/2
        assert_eq!(thm1_chain(&rational_int(4)).unwrap_err(), InstanceError::DeltaTooSmall);
    }

    #[test]
    fn thm4_table_and_classes() {
        let eps = rational(1, 100);
        let chain = thm4_chain(&rational_int(5), &eps).unwrap();
        let v2 = &chain.profiles[0].profile[1];
        let phi = phi();
        assert_eq!(v2.value(&[1, 2, 3].into()), Value::Exact(&phi * &phi));
        assert_eq!(v2.value(&[1, 4].into()), Value::Exact(&phi + &eps));
        assert!(check_class(v2, ValuationClass::Subadditive).unwrap().holds);
        assert!(check_class(v2, ValuationClass::Cancelable).unwrap().holds);
        assert!(
            thm4_chain(&rational_int(5), &rational(1, 5)).is_err(),
            "epsilon above 1/10 must be rejected"
        );
    }

    #[test]
    fn singleton_picking_fails_the_additive_chain() {
        let chain = thm1_chain(&rational_int(5)).unwrap();
        let finding =
            audit_chain(Mechanism::RoundRobin, &chain, &rational(3, 5), &rational(3, 2))
                .unwrap();
        match finding {
            AuditFinding::Deviation(w) => {
                assert!(w.ratio >= Ratio::Finite(rational(3, 2)), "ratio {}", w.ratio);
            }
            AuditFinding::Unfair { profile, .. } => {
                panic!("expected a deviation, found unfairness on {profile}")
            }
        }
    }

    #[test]
    fn singleton_picking_fails_the_golden_ratio_chain() {
        let phi = phi();
        let chain = thm4_chain(&rational_int(5), &rational(1, 100)).unwrap();
        let finding = audit_chain(
            Mechanism::RoundRobin,
            &chain,
            &(&phi - Rational::one()),
            &phi,
        )
        .unwrap();
        match finding {
            AuditFinding::Deviation(w) => assert!(w.ratio >= Ratio::Finite(phi)),
            AuditFinding::Unfair { profile, .. } => {
                panic!("expected a deviation, found unfairness on {profile}")
            }
        }
    }

    #[test]
    fn greedy_hoarder_is_caught_as_unfair() {
        // a mechanism that hands everything to agent 1
        let chain = thm1_chain(&rational_int(5)).unwrap();
        let finding = audit_chain_with(
            |profile| {
                let m = profile[0].m();
                let mut bundles = vec![Bundle::empty(); profile.len()];
                bundles[0] = Bundle::universe(m);
                Ok(crate::model::make_allocation(m, bundles).expect("valid"))
            },
            &chain,
            &rational(3, 5),
            &rational(3, 2),
        )
        .unwrap();
        match finding {
            AuditFinding::Unfair { profile, .. } => assert_eq!(profile, "v(0)"),
            AuditFinding::Deviation(_) => panic!("expected a fairness violation"),
        }
    }

    #[test]
    fn padded_chain_audits_identically() {
        let chain = thm1_chain(&rational_int(5)).unwrap().padded(7).unwrap();
        assert_eq!(chain.profiles[0].profile[0].m(), 7);
        let finding =
            audit_chain(Mechanism::RoundRobin, &chain, &rational(3, 5), &rational(3, 2))
                .unwrap();
        assert!(matches!(finding, AuditFinding::Deviation(_)));
    }

    #[test]
    fn submodular_instance_small() {
        let inst = submodular_hard_instance(2, 2, 8).unwrap();
        assert_eq!(inst.profile[0].m(), 12);
        // u_2(g_1) = w
        assert_eq!(inst.profile[1].singleton(1), Value::from_int(2));
        let replay = inst.replay().unwrap();
        assert_eq!(replay.truthful_utility, Value::from_int(2));
        assert_eq!(replay.manipulated_utility, Value::from_int(3));
        assert_eq!(replay.ratio, Ratio::Finite(rational(3, 2)));
        assert!(replay.matches_expected);
    }

    #[test]
    fn submodular_valuations_are_submodular() {
        let inst = submodular_hard_instance(2, 2, 8).unwrap();
        assert!(check_class(&inst.profile[1], ValuationClass::Submodular).unwrap().holds);
        // ... and match their coverage-function interpretation
        if let Valuation::Discounted(d) = &inst.profile[1] {
            let cov = Valuation::Coverage(d.coverage_view().expect("integral base"));
            for mask in (0u64..1 << 12).step_by(37) {
                let b = Bundle::from_mask(mask);
                assert_eq!(inst.profile[1].value(&b), cov.value(&b));
            }
        } else {
            panic!("expected the discounted representation");
        }
    }

    #[test]
    fn submodular_instance_larger_parameters() {
        let inst = submodular_hard_instance(3, 10, 90).unwrap();
        let replay = inst.replay().unwrap();
        assert_eq!(replay.truthful_utility, Value::from_int(10));
        assert_eq!(replay.manipulated_utility, Value::from_int(28));
        assert!(replay.matches_expected);
    }

    #[test]
    fn submodular_parameter_validation() {
        assert!(submodular_hard_instance(1, 2, 8).is_err());
        assert!(submodular_hard_instance(2, 2, 7).is_err()); // T < wn²
    }

    #[test]
    fn xos_instance_small() {
        let inst = xos_hard_instance(2, 5).unwrap();
        // f_2^2(g_{s_1+1}) = 2 with s_1 = 3
        assert_eq!(inst.profile[1].singleton(4), Value::from_int(2));
        let replay = inst.replay().unwrap();
        assert_eq!(replay.truthful_utility, Value::one());
        assert_eq!(replay.manipulated_utility, Value::from_int(3));
        assert!(replay.matches_expected);
        // truthful allocation is the group partition
        assert_eq!(replay.truthful_allocation.bundle(0), &Bundle::from([1, 2, 3]));
        assert_eq!(replay.truthful_allocation.bundle(1), &Bundle::from([4, 5]));
    }

    #[test]
    fn xos_three_agents() {
        let inst = xos_hard_instance(3, 7).unwrap();
        let replay = inst.replay().unwrap();
        assert_eq!(replay.ratio, Ratio::Finite(rational_int(3)));
        assert!(replay.matches_expected);
    }

    #[test]
    fn xos_envy_grows_linearly_in_group_size() {
        // max envy on the truthful run is s_2 − 1 = Θ(m/n)
        for m in [4u32, 8, 16, 32] {
            let inst = xos_hard_instance(2, m).unwrap();
            let replay = inst.replay().unwrap();
            let s2 = (m - 1).div_ceil(2);
            assert_eq!(
                max_envy(&inst.profile, &replay.truthful_allocation),
                Some(rational_int(s2 as i64 - 1)),
                "m = {m}"
            );
        }
    }

    #[test]
    fn envy_graph_instances_replay() {
        let [fixed, favorite] = envy_graph_hard_instances(&rational(1, 100)).unwrap();
        let replay = fixed.replay().unwrap();
        assert_eq!(replay.ratio, Ratio::Finite(rational_int(101)));
        assert!(replay.matches_expected);
        let replay = favorite.replay().unwrap();
        assert_eq!(replay.ratio, Ratio::Finite(rational_int(100)));
        assert!(replay.matches_expected);

        let [fixed, _] = envy_graph_hard_instances(&rational(1, 2)).unwrap();
        assert_eq!(fixed.replay().unwrap().ratio, Ratio::Finite(rational_int(3)));

        assert!(envy_graph_hard_instances(&rational_int(1)).is_err());
    }
}
