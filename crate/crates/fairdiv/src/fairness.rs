//! EF1 and envy-freeness audits.
//!
//! An allocation is α-EF1 for agent `i` against agent `j` if either `j`'s
//! bundle is empty, or some good `g` in it satisfies
//! `v_i(A_i) ≥ α · v_i(A_j − g)`. Plain EF1 is α = 1; envy-freeness drops
//! the good removal entirely.

use crate::model::{Allocation, Bundle, Good, Rational, Value};
use crate::valuation::Valuation;

/// One agent pair's EF1 status: the removal certificate when satisfied, or
/// the violation gap when not.
#[derive(Clone, Debug)]
pub struct PairAudit {
    pub envious: usize,
    pub envied: usize,
    pub satisfied: bool,
    /// A good whose removal certifies the bound, when one exists. Empty
    /// envied bundles satisfy EF1 vacuously with no certificate.
    pub certificate: Option<Good>,
    /// `v_i(A_i)` and the best (smallest) remaining value
    /// `min_g v_i(A_j − g)`; the latter is `None` for empty envied bundles.
    pub own_value: Value,
    pub best_remaining: Option<Value>,
}

#[derive(Clone, Debug)]
pub struct FairnessReport {
    pub alpha: Rational,
    pub satisfied: bool,
    pub pairs: Vec<PairAudit>,
}

impl FairnessReport {
    pub fn violations(&self) -> impl Iterator<Item = &PairAudit> {
        self.pairs.iter().filter(|p| !p.satisfied)
    }
}

/// Audits every ordered agent pair for α-EF1.
pub fn audit_alpha_ef1(
    profile: &[Valuation],
    allocation: &Allocation,
    alpha: &Rational,
) -> FairnessReport {
    let n = profile.len();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n {
        let own = profile[i].value(allocation.bundle(i));
        for j in 0..n {
            if i == j {
                continue;
            }
            pairs.push(audit_pair(&profile[i], &own, i, j, allocation.bundle(j), alpha));
        }
    }
    FairnessReport {
        alpha: alpha.clone(),
        satisfied: pairs.iter().all(|p| p.satisfied),
        pairs,
    }
}

fn audit_pair(
    v: &Valuation,
    own: &Value,
    i: usize,
    j: usize,
    envied: &Bundle,
    alpha: &Rational,
) -> PairAudit {
    if envied.is_empty() {
        return PairAudit {
            envious: i,
            envied: j,
            satisfied: true,
            certificate: None,
            own_value: own.clone(),
            best_remaining: None,
        };
    }
    let mut best: Option<(Good, Value)> = None;
    let mut certificate = None;
    for g in envied.iter() {
        let remaining = v.value(&envied.without(g));
        if certificate.is_none() && *own >= remaining.scale(alpha) {
            certificate = Some(g);
        }
        match &best {
            Some((_, b)) if *b <= remaining => {}
            _ => best = Some((g, remaining)),
        }
    }
    PairAudit {
        envious: i,
        envied: j,
        satisfied: certificate.is_some(),
        certificate,
        own_value: own.clone(),
        best_remaining: best.map(|(_, v)| v),
    }
}

/// Whether the allocation is α-EF1 for every ordered pair of agents.
pub fn is_alpha_ef1(profile: &[Valuation], allocation: &Allocation, alpha: &Rational) -> bool {
    audit_alpha_ef1(profile, allocation, alpha).satisfied
}

/// Plain EF1 (α = 1).
pub fn is_ef1(profile: &[Valuation], allocation: &Allocation) -> bool {
    is_alpha_ef1(profile, allocation, &Rational::from_integer(1.into()))
}

/// Envy-free: no agent strictly prefers another agent's bundle.
pub fn is_envy_free(profile: &[Valuation], allocation: &Allocation) -> bool {
    let n = profile.len();
    (0..n).all(|i| {
        let own = profile[i].value(allocation.bundle(i));
        (0..n).all(|j| i == j || profile[i].value(allocation.bundle(j)) <= own)
    })
}

/// The largest envy difference `v_i(A_j) − v_i(A_i)` over all ordered
/// pairs, floored at zero. Exact profiles only (`None` with lifted
/// valuations).
pub fn max_envy(profile: &[Valuation], allocation: &Allocation) -> Option<Rational> {
    let n = profile.len();
    let mut worst = Rational::from_integer(0.into());
    for i in 0..n {
        let own = profile[i].value(allocation.bundle(i));
        for j in 0..n {
            if i == j {
                continue;
            }
            let envy = profile[i]
                .value(allocation.bundle(j))
                .checked_sub(&own)?
                .as_exact()?
                .clone();
            if envy > worst {
                worst = envy;
            }
        }
    }
    Some(worst)
}
