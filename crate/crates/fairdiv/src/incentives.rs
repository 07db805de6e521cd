//! Manipulation search, per-instance incentive ratios, strongly-desire and
//! control probes, and the exponential-lift reduction.
//!
//! The incentive ratio of a misreport is the agent's true-valuation utility
//! under the manipulated run divided by their truthful utility. The sup in
//! the definition is finitized by [`MisreportFamily`]: ordinal all-orders
//! reports (outcome-complete for the singleton-value picking mechanism),
//! explicit report lists, or an additive value grid.

use std::cmp::Ordering;
use std::fmt;

use itertools::Itertools;
use num::{BigInt, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::mechanism::{run_mechanism, Mechanism, MechanismError, Run};
use crate::model::{Bundle, Good, Rational, Value};
use crate::valuation::{AdditiveValuation, LiftedValuation, Valuation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("the misreport family is empty")]
    EmptyFamily,
    #[error("agent index {0} out of range for {1} agents")]
    AgentOutOfRange(usize, usize),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// Extended non-negative ratio; `Infinite` when a zero truthful utility is
/// improved upon. The 0/0 case is defined as 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ratio {
    Finite(Rational),
    Infinite,
}

impl Ratio {
    pub fn one() -> Ratio {
        Ratio::Finite(Rational::one())
    }

    /// Ratio of two utilities under the sup convention.
    pub fn of(manipulated: &Value, truthful: &Value) -> Ratio {
        if truthful.is_zero() {
            return if manipulated.is_zero() { Ratio::one() } else { Ratio::Infinite };
        }
        match (manipulated.as_exact(), truthful.as_exact()) {
            (Some(num), Some(den)) => Ratio::Finite(num / den),
            // Lifted utilities: e^a / e^b, approximated through f64.
            _ => {
                let log_ratio = log_of(manipulated) - log_of(truthful);
                Ratio::Finite(
                    Rational::from_float(log_ratio.exp()).expect("finite utility ratio"),
                )
            }
        }
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            Ratio::Finite(r) => Some(r),
            Ratio::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Ratio::Finite(r) => r.to_f64().unwrap_or(f64::NAN),
            Ratio::Infinite => f64::INFINITY,
        }
    }
}

fn log_of(v: &Value) -> f64 {
    match v {
        Value::Exact(r) => r.to_f64().expect("finite value").ln(),
        Value::Exp(x) => *x,
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Ratio::Finite(a), Ratio::Finite(b)) => a.cmp(b),
            (Ratio::Infinite, Ratio::Infinite) => Ordering::Equal,
            (Ratio::Infinite, Ratio::Finite(_)) => Ordering::Greater,
            (Ratio::Finite(_), Ratio::Infinite) => Ordering::Less,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

/// How a misreport was specified.
#[derive(Clone, Debug, PartialEq)]
pub enum Misreport {
    /// A strict total order on the goods, most preferred first, submitted
    /// as the additive report `m, m−1, ..., 1` along the order.
    Order(Vec<Good>),
    Valuation(Valuation),
}

impl Misreport {
    pub fn as_valuation(&self, m: u32) -> Valuation {
        match self {
            Misreport::Order(order) => Valuation::Additive(order_report(order, m)),
            Misreport::Valuation(v) => v.clone(),
        }
    }
}

/// Additive encoding of an ordinal report: values `m, m−1, ..., 1` along
/// the order.
pub fn order_report(order: &[Good], m: u32) -> AdditiveValuation {
    let mut values = vec![Rational::zero(); m as usize];
    for (pos, &g) in order.iter().enumerate() {
        values[(g - 1) as usize] = crate::model::rational_int((m as usize - pos) as i64);
    }
    AdditiveValuation::new(values).expect("positive order values")
}

/// The best misreport found in a family, with both runs' utilities under
/// the agent's true valuation.
#[derive(Clone, Debug)]
pub struct Witness {
    pub agent: usize,
    pub misreport: Misreport,
    pub truthful_utility: Value,
    pub manipulated_utility: Value,
    pub ratio: Ratio,
    pub truthful_bundle: Bundle,
    pub manipulated_bundle: Bundle,
}

impl Witness {
    pub fn profitable(&self) -> bool {
        self.ratio > Ratio::one()
    }
}

/// A finite, enumerable set of candidate misreports.
#[derive(Clone, Debug)]
pub enum MisreportFamily {
    /// Every strict total order on the goods.
    AllOrders,
    /// User-supplied reports.
    Explicit(Vec<Valuation>),
    /// Additive reports with every per-good value a multiple of `step`
    /// in `[0, 1]`.
    Grid { step: Rational },
}

impl MisreportFamily {
    pub fn explicit(reports: Vec<Valuation>) -> MisreportFamily {
        MisreportFamily::Explicit(reports)
    }

    /// Enumerates the family for an `m`-good universe, lexicographic
    /// orders first.
    pub fn members(&self, m: u32) -> Vec<Misreport> {
        match self {
            MisreportFamily::AllOrders => (1..=m)
                .permutations(m as usize)
                .map(Misreport::Order)
                .collect(),
            MisreportFamily::Explicit(reports) => {
                reports.iter().cloned().map(Misreport::Valuation).collect()
            }
            MisreportFamily::Grid { step } => {
                let levels = (Rational::one() / step)
                    .floor()
                    .to_integer()
                    .to_u64()
                    .expect("grid step not unreasonably small");
                let values: Vec<Rational> = (0..=levels)
                    .map(|k| Rational::from_integer(BigInt::from(k)) * step)
                    .collect();
                (0..m)
                    .map(|_| values.iter().cloned())
                    .multi_cartesian_product()
                    .map(|per_good| {
                        Misreport::Valuation(Valuation::Additive(
                            AdditiveValuation::new(per_good).expect("non-negative grid values"),
                        ))
                    })
                    .collect()
            }
        }
    }
}

/// Finds the family member maximizing `agent`'s true-valuation utility
/// under `mechanism`; ties keep the earliest member in enumeration order.
pub fn best_manipulation(
    mechanism: Mechanism,
    profile: &[Valuation],
    agent: usize,
    family: &MisreportFamily,
) -> Result<Witness, SearchError> {
    if agent >= profile.len() {
        return Err(SearchError::AgentOutOfRange(agent, profile.len()));
    }
    let truth = &profile[agent];
    let m = truth.m();
    let members = family.members(m);
    if members.is_empty() {
        return Err(SearchError::EmptyFamily);
    }
    let truthful = run_mechanism(mechanism, profile)?;
    let truthful_bundle = truthful.allocation.bundle(agent).clone();
    let truthful_utility = truth.value(&truthful_bundle);

    let mut best: Option<Witness> = None;
    let mut reported = profile.to_vec();
    for misreport in members {
        reported[agent] = misreport.as_valuation(m);
        let run = run_mechanism(mechanism, &reported)?;
        let bundle = run.allocation.bundle(agent).clone();
        let utility = truth.value(&bundle);
        let better = match &best {
            Some(b) => utility > b.manipulated_utility,
            None => true,
        };
        if better {
            let ratio = Ratio::of(&utility, &truthful_utility);
            best = Some(Witness {
                agent,
                misreport,
                truthful_utility: truthful_utility.clone(),
                manipulated_utility: utility,
                ratio,
                truthful_bundle: truthful_bundle.clone(),
                manipulated_bundle: bundle,
            });
        }
    }
    Ok(best.expect("non-empty family"))
}

/// The instance's incentive ratio over the family: the maximum of
/// [`best_manipulation`] across all agents, lowest agent kept on ties.
pub fn instance_incentive_ratio(
    mechanism: Mechanism,
    profile: &[Valuation],
    family: &MisreportFamily,
) -> Result<(Ratio, Witness), SearchError> {
    let mut best: Option<Witness> = None;
    for agent in 0..profile.len() {
        let w = best_manipulation(mechanism, profile, agent, family)?;
        let better = match &best {
            Some(b) => w.ratio > b.ratio,
            None => true,
        };
        if better {
            best = Some(w);
        }
    }
    let w = best.ok_or(SearchError::EmptyFamily)?;
    Ok((w.ratio.clone(), w))
}

/// Whether the valuation values `good` strictly more than α times
/// everything else: `v(g) > α · v(G − g)`.
pub fn strongly_desires(valuation: &Valuation, good: Good, alpha: &Rational) -> bool {
    let rest = Bundle::universe(valuation.m()).without(good);
    valuation.singleton(good) > valuation.value(&rest).scale(alpha)
}

/// Outcome of an empirical control probe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ControlProbe {
    /// In every tested profile where this agent α-strongly desires the
    /// good, the mechanism gave it to them — and no other agent matches.
    Agent(usize),
    /// The finite family cannot single out an agent.
    Inconclusive,
}

/// Empirically probes which agent, if any, controls `good` at level α
/// across the profile family. A finite probe can never certify the
/// universal claim, so a clean single candidate is still only evidence.
pub fn probe_control(
    mechanism: Mechanism,
    good: Good,
    alpha: &Rational,
    profiles: &[Vec<Valuation>],
) -> Result<ControlProbe, SearchError> {
    let mut candidates = Vec::new();
    let n = profiles.iter().map(|p| p.len()).max().unwrap_or(0);
    for agent in 0..n {
        let mut desired_somewhere = false;
        let mut always_received = true;
        for profile in profiles {
            if agent >= profile.len() || !strongly_desires(&profile[agent], good, alpha) {
                continue;
            }
            desired_somewhere = true;
            let run = run_mechanism(mechanism, profile)?;
            if !run.allocation.bundle(agent).contains(good) {
                always_received = false;
                break;
            }
        }
        if desired_somewhere && always_received {
            candidates.push(agent);
        }
    }
    Ok(match candidates.as_slice() {
        [only] => ControlProbe::Agent(*only),
        _ => ControlProbe::Inconclusive,
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LiftError {
    #[error("epsilon must lie in (0, 1]")]
    EpsilonOutOfRange,
    #[error("alpha bound must be at least 1")]
    AlphaBelowOne,
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// A lifted run: the inner mechanism's output on the exponentially lifted
/// profile, with the chosen exponent.
#[derive(Debug)]
pub struct LiftedRun {
    pub run: Run,
    /// `None` when the profile had no positive value and the inner
    /// mechanism ran on the unlifted profile.
    pub delta: Option<f64>,
}

/// Runs `inner` on the profile lifted by `v ↦ exp(δ·v)`, choosing
/// `δ = 10·max{ln(1/ε), ln α} / min{v_i(g) : v_i(g) > 0}` so that the
/// lift's approximation error is bounded; for additive valuations the
/// smallest positive subset value is the smallest positive per-good value.
/// Degenerate numerator (ε = 1, α = 1) falls back to δ = 1; an all-zero
/// profile runs `inner` unlifted.
pub fn lift_mechanism(
    inner: Mechanism,
    epsilon: &Rational,
    alpha_bound: &Rational,
    profile: &[AdditiveValuation],
) -> Result<LiftedRun, LiftError> {
    if !epsilon.is_positive() || epsilon > &Rational::one() {
        return Err(LiftError::EpsilonOutOfRange);
    }
    if alpha_bound < &Rational::one() {
        return Err(LiftError::AlphaBelowOne);
    }
    let min_positive = profile
        .iter()
        .flat_map(|v| v.per_good())
        .filter(|x| x.is_positive())
        .min();
    let Some(min_positive) = min_positive else {
        let plain: Vec<Valuation> =
            profile.iter().cloned().map(Valuation::Additive).collect();
        return Ok(LiftedRun { run: run_mechanism(inner, &plain)?, delta: None });
    };
    let numerator = (Rational::one() / epsilon)
        .to_f64()
        .expect("finite epsilon")
        .ln()
        .max(alpha_bound.to_f64().expect("finite alpha").ln());
    let delta = if numerator > 0.0 {
        10.0 * numerator / min_positive.to_f64().expect("finite minimum")
    } else {
        1.0
    };
    let lifted: Vec<Valuation> = profile
        .iter()
        .map(|v| {
            Valuation::Lifted(
                LiftedValuation::new(v.clone(), delta).expect("delta is positive"),
            )
        })
        .collect();
    Ok(LiftedRun { run: run_mechanism(inner, &lifted)?, delta: Some(delta) })
}
