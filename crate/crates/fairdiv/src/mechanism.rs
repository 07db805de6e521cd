//! The four allocation mechanisms and their execution traces.
//!
//! Mechanisms 1 and 2 are picking sequences: agents pick in cyclic order
//! `1, 2, ..., n, 1, ...` and the picker takes the remaining good with the
//! highest singleton value (mechanism 1) or highest marginal value with
//! respect to their current bundle (mechanism 2). Mechanisms 3 and 4 are
//! envy-graph procedures: each round the next good goes to a source of the
//! envy graph (an agent nobody envies), after which envy cycles are
//! eliminated by rotating bundles along the cycle. Mechanism 3 consumes
//! goods in index order; mechanism 4 gives the chosen source its favorite
//! remaining good.
//!
//! All ties break lexicographically: lowest good index, lowest agent index.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{make_allocation, Allocation, Bundle, Good, Value};
use crate::valuation::Valuation;

/// Mechanism selector, numbered 1-4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mechanism {
    /// Round-robin picking by singleton value.
    RoundRobin = 1,
    /// Round-robin picking by marginal value.
    RoundRobinMarginal = 2,
    /// Envy-graph procedure, goods in index order.
    EnvyGraph = 3,
    /// Envy-graph procedure, source picks its favorite good.
    EnvyGraphFavorite = 4,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [
        Mechanism::RoundRobin,
        Mechanism::RoundRobinMarginal,
        Mechanism::EnvyGraph,
        Mechanism::EnvyGraphFavorite,
    ];

    pub fn from_number(n: u32) -> Option<Mechanism> {
        match n {
            1 => Some(Mechanism::RoundRobin),
            2 => Some(Mechanism::RoundRobinMarginal),
            3 => Some(Mechanism::EnvyGraph),
            4 => Some(Mechanism::EnvyGraphFavorite),
            _ => None,
        }
    }

    pub fn number(self) -> u32 {
        self as u32
    }
}

impl std::fmt::Display for Mechanism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Mechanism::RoundRobin => "round-robin",
            Mechanism::RoundRobinMarginal => "round-robin-marginal",
            Mechanism::EnvyGraph => "envy-graph",
            Mechanism::EnvyGraphFavorite => "envy-graph-favorite",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MechanismError {
    #[error("a mechanism run needs at least one agent")]
    NoAgents,
    #[error("agent {0}'s valuation covers {1} goods, expected {2}")]
    UniverseMismatch(usize, u32, u32),
    #[error("good order is not a permutation of 1..={0}")]
    InvalidOrder(u32),
    #[error("a good order only applies to the fixed-order envy-graph mechanism")]
    OrderUnsupported,
}

/// One step of a mechanism run: which agent received which good, and (for
/// envy-graph mechanisms) any bundle rotations that followed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// 0-based agent index of the receiver.
    pub agent: usize,
    pub good: Good,
    /// Envy cycles eliminated after this assignment, as the 0-based agent
    /// sequence of each rotated cycle, in elimination order.
    pub rotations: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub mechanism: Mechanism,
    pub steps: Vec<TraceStep>,
}

/// A finished run: the allocation plus the step-by-step trace.
#[derive(Clone, Debug)]
pub struct Run {
    pub allocation: Allocation,
    pub trace: Trace,
}

/// Runs `mechanism` on the reported valuation profile.
pub fn run_mechanism(
    mechanism: Mechanism,
    profile: &[Valuation],
) -> Result<Run, MechanismError> {
    run_mechanism_with_order(mechanism, profile, None)
}

/// Like [`run_mechanism`], but the fixed-order envy-graph mechanism
/// consumes goods in the given order instead of index order. The order
/// must be a permutation of `1..=m` and is rejected for every other
/// mechanism.
pub fn run_mechanism_with_order(
    mechanism: Mechanism,
    profile: &[Valuation],
    order: Option<&[Good]>,
) -> Result<Run, MechanismError> {
    let n = profile.len();
    if n == 0 {
        return Err(MechanismError::NoAgents);
    }
    let m = profile[0].m();
    for (i, v) in profile.iter().enumerate() {
        if v.m() != m {
            return Err(MechanismError::UniverseMismatch(i, v.m(), m));
        }
    }
    if let Some(order) = order {
        if mechanism != Mechanism::EnvyGraph {
            return Err(MechanismError::OrderUnsupported);
        }
        let mut seen: Vec<Good> = order.to_vec();
        seen.sort_unstable();
        if seen != (1..=m).collect::<Vec<_>>() {
            return Err(MechanismError::InvalidOrder(m));
        }
    }
    let run = match mechanism {
        Mechanism::RoundRobin => round_robin(profile, m, false),
        Mechanism::RoundRobinMarginal => round_robin(profile, m, true),
        Mechanism::EnvyGraph => envy_graph(profile, m, false, order),
        Mechanism::EnvyGraphFavorite => envy_graph(profile, m, true, None),
    };
    Ok(Run {
        allocation: make_allocation(m, run.0).expect("mechanism output partitions the goods"),
        trace: Trace { mechanism, steps: run.1 },
    })
}

fn round_robin(profile: &[Valuation], m: u32, marginal: bool) -> (Vec<Bundle>, Vec<TraceStep>) {
    let n = profile.len();
    let mut bundles = vec![Bundle::empty(); n];
    let mut remaining: Vec<Good> = (1..=m).collect();
    let mut steps = Vec::with_capacity(m as usize);
    for turn in 0.. {
        if remaining.is_empty() {
            break;
        }
        let agent = turn % n;
        let v = &profile[agent];
        // Strict max keeps the lowest-index good on ties (remaining is sorted).
        let mut best = 0usize;
        let mut best_value = pick_value(v, remaining[0], &bundles[agent], marginal);
        for (idx, &g) in remaining.iter().enumerate().skip(1) {
            let val = pick_value(v, g, &bundles[agent], marginal);
            if val > best_value {
                best = idx;
                best_value = val;
            }
        }
        let good = remaining.remove(best);
        bundles[agent].insert(good);
        steps.push(TraceStep { agent, good, rotations: Vec::new() });
    }
    (bundles, steps)
}

fn pick_value(v: &Valuation, good: Good, bundle: &Bundle, marginal: bool) -> Value {
    if marginal {
        v.marginal(good, bundle).expect("good not yet picked")
    } else {
        v.singleton(good)
    }
}

/// The envy graph of an allocation: edge `(i, j)` iff agent `i` values
/// agent `j`'s bundle strictly above their own. Returned as an adjacency
/// matrix, `edges[i][j]`.
pub fn build_envy_graph(profile: &[Valuation], bundles: &[Bundle]) -> Vec<Vec<bool>> {
    let n = profile.len();
    let mut edges = vec![vec![false; n]; n];
    for i in 0..n {
        let own = profile[i].value(&bundles[i]);
        for j in 0..n {
            if i != j && profile[i].value(&bundles[j]) > own {
                edges[i][j] = true;
            }
        }
    }
    edges
}

/// Eliminates every envy cycle by rotating bundles along it: each agent in
/// the cycle takes the bundle of the agent they envy. Cycles are found by
/// depth-first search from the lowest-index vertex with neighbors visited
/// in ascending order, taking the first back edge; the graph is rebuilt
/// after each rotation. Returns the rotated cycles in elimination order.
pub fn eliminate_envy_cycles(profile: &[Valuation], bundles: &mut [Bundle]) -> Vec<Vec<usize>> {
    let mut rotations = Vec::new();
    loop {
        let edges = build_envy_graph(profile, bundles);
        let Some(cycle) = find_cycle(&edges) else {
            break;
        };
        // Each agent strictly prefers the next agent's bundle, so the
        // rotation strictly improves everyone on the cycle.
        let first = bundles[cycle[0]].clone();
        for k in 0..cycle.len() - 1 {
            bundles[cycle[k]] = bundles[cycle[k + 1]].clone();
        }
        bundles[*cycle.last().expect("non-empty cycle")] = first;
        rotations.push(cycle);
    }
    rotations
}

fn find_cycle(edges: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = edges.len();
    let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
    let mut stack: Vec<usize> = Vec::new();
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        if let Some(cycle) = dfs(start, edges, &mut state, &mut stack) {
            return Some(cycle);
        }
    }
    None
}

fn dfs(v: usize, edges: &[Vec<bool>], state: &mut Vec<u8>, stack: &mut Vec<usize>) -> Option<Vec<usize>> {
    state[v] = 1;
    stack.push(v);
    for w in 0..edges.len() {
        if !edges[v][w] {
            continue;
        }
        match state[w] {
            1 => {
                // Back edge: the cycle is the stack suffix starting at w.
                let pos = stack.iter().position(|&x| x == w).expect("w is on the stack");
                return Some(stack[pos..].to_vec());
            }
            0 => {
                if let Some(cycle) = dfs(w, edges, state, stack) {
                    return Some(cycle);
                }
            }
            _ => {}
        }
    }
    stack.pop();
    state[v] = 2;
    None
}

fn envy_graph(
    profile: &[Valuation],
    m: u32,
    favorite: bool,
    order: Option<&[Good]>,
) -> (Vec<Bundle>, Vec<TraceStep>) {
    let n = profile.len();
    let mut bundles = vec![Bundle::empty(); n];
    let mut remaining: Vec<Good> = match order {
        Some(order) => order.to_vec(),
        None => (1..=m).collect(),
    };
    let mut steps = Vec::with_capacity(m as usize);
    while !remaining.is_empty() {
        let edges = build_envy_graph(profile, &bundles);
        let source = (0..n)
            .find(|&j| (0..n).all(|i| !edges[i][j]))
            .expect("an envy graph without cycles has a source");
        let good = if favorite {
            // Favorite remaining good by marginal value; strict max keeps
            // the lowest index on ties.
            let mut best = 0usize;
            let mut best_value = profile[source]
                .marginal(remaining[0], &bundles[source])
                .expect("remaining good");
            for (idx, &g) in remaining.iter().enumerate().skip(1) {
                let val = profile[source].marginal(g, &bundles[source]).expect("remaining good");
                if val > best_value {
                    best = idx;
                    best_value = val;
                }
            }
            remaining.remove(best)
        } else {
            remaining.remove(0)
        };
        bundles[source].insert(good);
        let rotations = eliminate_envy_cycles(profile, &mut bundles);
        steps.push(TraceStep { agent: source, good, rotations });
    }
    (bundles, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::Valuation;

    fn additive(rows: &[&[i64]]) -> Vec<Valuation> {
        rows.iter().map(|r| Valuation::additive_ints(r)).collect()
    }

    #[test]
    fn round_robin_identical_values_alternate() {
        let profile = additive(&[&[3, 2, 1], &[3, 2, 1]]);
        let run = run_mechanism(Mechanism::RoundRobin, &profile).unwrap();
        assert_eq!(run.allocation.bundle(0), &Bundle::from([1, 3]));
        assert_eq!(run.allocation.bundle(1), &Bundle::from([2]));
    }

    #[test]
    fn round_robin_lexicographic_tie() {
        let profile = additive(&[&[5, 5, 1], &[1, 1, 1]]);
        let run = run_mechanism(Mechanism::RoundRobin, &profile).unwrap();
        // agent 1 takes g1 (tie with g2 broken by index), agent 2 takes g2
        assert_eq!(run.allocation.bundle(0), &Bundle::from([1, 3]));
        assert_eq!(run.allocation.bundle(1), &Bundle::from([2]));
    }

    #[test]
    fn round_robin_more_agents_than_goods() {
        let profile = additive(&[&[1, 2], &[2, 1], &[9, 9]]);
        let run = run_mechanism(Mechanism::RoundRobin, &profile).unwrap();
        assert_eq!(run.allocation.bundle(0), &Bundle::from([2]));
        assert_eq!(run.allocation.bundle(1), &Bundle::from([1]));
        assert!(run.allocation.bundle(2).is_empty());
    }

    #[test]
    fn marginal_variant_differs_on_coverage() {
        // Under g1's cover {0,1}, g2 ({1,2}) has marginal 1 but singleton 2;
        // the singleton rule and the marginal rule pick differently.
        let v = Valuation::Coverage(
            crate::valuation::CoverageValuation::unit(5, vec![vec![0, 1], vec![1, 2], vec![3, 4]])
                .unwrap(),
        );
        let profile = vec![v];
        let by_singleton = run_mechanism(Mechanism::RoundRobin, &profile).unwrap();
        let by_marginal = run_mechanism(Mechanism::RoundRobinMarginal, &profile).unwrap();
        assert_eq!(
            by_singleton.trace.steps.iter().map(|s| s.good).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
        assert_eq!(
            by_marginal.trace.steps.iter().map(|s| s.good).collect::<Vec<_>>(),
            vec![1, 3, 2]
        );
    }

    #[test]
    fn envy_graph_source_selection() {
        // After g1 goes to agent 1, agent 2 envies them, so agent 2 is the
        // unenvied source for g2.
        let profile = additive(&[&[1, 1], &[1, 1]]);
        let run = run_mechanism(Mechanism::EnvyGraph, &profile).unwrap();
        assert_eq!(run.allocation.bundle(0), &Bundle::from([1]));
        assert_eq!(run.allocation.bundle(1), &Bundle::from([2]));
        assert!(run.trace.steps.iter().all(|s| s.rotations.is_empty()));
    }

    #[test]
    fn envy_cycle_rotation() {
        // Agents 1 and 2 each hold the other's favorite: a 2-cycle that a
        // rotation resolves by swapping bundles.
        let profile = additive(&[&[1, 5], &[5, 1]]);
        let mut bundles = vec![Bundle::from([1]), Bundle::from([2])];
        let rotations = eliminate_envy_cycles(&profile, &mut bundles);
        assert_eq!(rotations, vec![vec![0, 1]]);
        assert_eq!(bundles[0], Bundle::from([2]));
        assert_eq!(bundles[1], Bundle::from([1]));
        assert!(build_envy_graph(&profile, &bundles).iter().flatten().all(|&e| !e));
    }

    #[test]
    fn envy_graph_runs_produce_partitions() {
        let profile = additive(&[&[4, 1, 3, 2, 5], &[2, 2, 2, 2, 2], &[1, 5, 1, 5, 1]]);
        for mech in [Mechanism::EnvyGraph, Mechanism::EnvyGraphFavorite] {
            let run = run_mechanism(mech, &profile).unwrap();
            assert_eq!(run.allocation.m(), 5);
            assert_eq!(run.trace.steps.len(), 5);
        }
    }

    #[test]
    fn custom_good_order_changes_fixed_envy_graph() {
        let profile = additive(&[&[1, 1, 1], &[1, 1, 1]]);
        let run = run_mechanism_with_order(Mechanism::EnvyGraph, &profile, Some(&[3, 1, 2]))
            .unwrap();
        assert_eq!(
            run.trace.steps.iter().map(|s| s.good).collect::<Vec<_>>(),
            vec![3, 1, 2]
        );
        assert!(matches!(
            run_mechanism_with_order(Mechanism::EnvyGraph, &profile, Some(&[3, 1, 1])),
            Err(MechanismError::InvalidOrder(3))
        ));
        assert!(matches!(
            run_mechanism_with_order(Mechanism::RoundRobin, &profile, Some(&[3, 1, 2])),
            Err(MechanismError::OrderUnsupported)
        ));
    }

    #[test]
    fn empty_profile_is_an_error() {
        assert!(matches!(
            run_mechanism(Mechanism::RoundRobin, &[]),
            Err(MechanismError::NoAgents)
        ));
    }

    #[test]
    fn zero_goods() {
        let profile = additive(&[&[], &[]]);
        let run = run_mechanism(Mechanism::EnvyGraphFavorite, &profile).unwrap();
        assert_eq!(run.allocation.m(), 0);
        assert!(run.trace.steps.is_empty());
    }
}
