//! Instance and allocation file formats.
//!
//! An instance is JSON of the form `{"m": 4, "agents": [spec, ...]}` where
//! each spec is one of
//!
//! ```text
//! {"kind": "additive",       "values":  ["1/2", 3, ...]}
//! {"kind": "multiplicative", "factors": [...]}
//! {"kind": "xos",            "clauses": [[...], ...]}
//! {"kind": "coverage",       "universe": k, "sets": [[0, 1], ...], "weight": "1/3"}
//! {"kind": "table",          "support": [1, 2], "entries": {"1,2": "5/2", ...}}
//! {"kind": "discounted",     "base": [...], "trigger": 1, "discounted": [2, 4]}
//! ```
//!
//! Rationals are written as `"p/q"` strings; bare JSON integers are also
//! accepted on input. An allocation file is `{"bundles": [[1, 3], [2]]}`.

use std::collections::BTreeMap;

use num::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

use crate::model::{make_allocation, Allocation, AllocationError, Bundle, Rational};
use crate::valuation::{
    AdditiveValuation, CoverageValuation, DiscountedValuation, MultiplicativeValuation,
    TableValuation, Valuation, ValuationError, XosValuation,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("agent {agent}: {field}: {message}")]
    Field { agent: usize, field: &'static str, message: String },
    #[error("agent {agent}: {source}")]
    Valuation {
        agent: usize,
        #[source]
        source: ValuationError,
    },
    #[error("allocation: {0}")]
    Allocation(#[from] AllocationError),
    #[error("cannot serialize a lifted valuation; its exponent is not rational")]
    UnsupportedValuation,
}

/// Parses `"p/q"` or `"p"`; bare JSON integers arrive as already-parsed
/// numbers elsewhere.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let mut parts = s.splitn(2, '/');
    let p: BigInt = parts
        .next()
        .unwrap()
        .trim()
        .parse()
        .map_err(|_| format!("invalid numerator in `{s}`"))?;
    let q: BigInt = match parts.next() {
        Some(q) => q.trim().parse().map_err(|_| format!("invalid denominator in `{s}`"))?,
        None => BigInt::from(1),
    };
    if q == BigInt::from(0) {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(Rational::new(p, q))
}

/// Canonical `"p/q"` rendering, always including the denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RationalSpec {
    Int(i64),
    Str(String),
}

impl RationalSpec {
    fn to_rational(&self) -> Result<Rational, String> {
        match self {
            RationalSpec::Int(n) => Ok(crate::model::rational_int(*n)),
            RationalSpec::Str(s) => parse_rational(s),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ValuationSpec {
    Additive {
        values: Vec<RationalSpec>,
    },
    Multiplicative {
        factors: Vec<RationalSpec>,
    },
    Xos {
        clauses: Vec<Vec<RationalSpec>>,
    },
    Coverage {
        universe: u32,
        sets: Vec<Vec<u32>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<RationalSpec>,
    },
    Table {
        support: Vec<u32>,
        entries: BTreeMap<String, RationalSpec>,
    },
    Discounted {
        base: Vec<RationalSpec>,
        trigger: u32,
        discounted: Vec<u32>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct InstanceSpec {
    m: u32,
    agents: Vec<ValuationSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct AllocationSpec {
    bundles: Vec<Vec<u32>>,
}

fn rationals(
    specs: &[RationalSpec],
    agent: usize,
    field: &'static str,
) -> Result<Vec<Rational>, IoError> {
    specs
        .iter()
        .map(|s| {
            s.to_rational().map_err(|message| IoError::Field { agent, field, message })
        })
        .collect()
}

fn expect_len(
    len: usize,
    m: u32,
    agent: usize,
    field: &'static str,
) -> Result<(), IoError> {
    if len != m as usize {
        return Err(IoError::Field {
            agent,
            field,
            message: format!("expected {m} entries, found {len}"),
        });
    }
    Ok(())
}

/// `"1,2,3"` (ascending indices) or `""` for the empty set.
fn parse_subset_key(key: &str) -> Result<Bundle, String> {
    if key.trim().is_empty() {
        return Ok(Bundle::empty());
    }
    key.split(',')
        .map(|part| part.trim().parse::<u32>().map_err(|_| format!("bad subset key `{key}`")))
        .collect()
}

fn format_subset_key(bundle: &Bundle) -> String {
    bundle.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",")
}

fn build_valuation(spec: &ValuationSpec, m: u32, agent: usize) -> Result<Valuation, IoError> {
    let wrap = |source| IoError::Valuation { agent, source };
    match spec {
        ValuationSpec::Additive { values } => {
            expect_len(values.len(), m, agent, "values")?;
            Ok(Valuation::Additive(
                AdditiveValuation::new(rationals(values, agent, "values")?).map_err(wrap)?,
            ))
        }
        ValuationSpec::Multiplicative { factors } => {
            expect_len(factors.len(), m, agent, "factors")?;
            Ok(Valuation::Multiplicative(
                MultiplicativeValuation::new(rationals(factors, agent, "factors")?)
                    .map_err(wrap)?,
            ))
        }
        ValuationSpec::Xos { clauses } => {
            let mut parsed = Vec::with_capacity(clauses.len());
            for clause in clauses {
                expect_len(clause.len(), m, agent, "clauses")?;
                parsed.push(
                    AdditiveValuation::new(rationals(clause, agent, "clauses")?)
                        .map_err(wrap)?,
                );
            }
            Ok(Valuation::Xos(XosValuation::new(parsed).map_err(wrap)?))
        }
        ValuationSpec::Coverage { universe, sets, weight } => {
            expect_len(sets.len(), m, agent, "sets")?;
            let weight = match weight {
                Some(w) => w
                    .to_rational()
                    .map_err(|message| IoError::Field { agent, field: "weight", message })?,
                None => num::One::one(),
            };
            Ok(Valuation::Coverage(
                CoverageValuation::new(*universe, sets.clone(), weight).map_err(wrap)?,
            ))
        }
        ValuationSpec::Table { support, entries } => {
            let support: Bundle = support.iter().copied().collect();
            let mut parsed = BTreeMap::new();
            for (key, value) in entries {
                let subset = parse_subset_key(key)
                    .map_err(|message| IoError::Field { agent, field: "entries", message })?;
                let value = value
                    .to_rational()
                    .map_err(|message| IoError::Field { agent, field: "entries", message })?;
                parsed.insert(subset, value);
            }
            Ok(Valuation::Table(TableValuation::new(m, support, parsed).map_err(wrap)?))
        }
        ValuationSpec::Discounted { base, trigger, discounted } => {
            expect_len(base.len(), m, agent, "base")?;
            let base =
                AdditiveValuation::new(rationals(base, agent, "base")?).map_err(wrap)?;
            Ok(Valuation::Discounted(
                DiscountedValuation::new(base, *trigger, discounted.iter().copied().collect())
                    .map_err(wrap)?,
            ))
        }
    }
}

fn spec_of(valuation: &Valuation) -> Result<ValuationSpec, IoError> {
    let rats = |values: &[Rational]| {
        values.iter().map(|r| RationalSpec::Str(format_rational(r))).collect::<Vec<_>>()
    };
    match valuation {
        Valuation::Additive(v) => Ok(ValuationSpec::Additive { values: rats(v.per_good()) }),
        Valuation::Multiplicative(v) => {
            Ok(ValuationSpec::Multiplicative { factors: rats(v.factors()) })
        }
        Valuation::Xos(v) => Ok(ValuationSpec::Xos {
            clauses: v.clauses().iter().map(|c| rats(c.per_good())).collect(),
        }),
        Valuation::Coverage(v) => Ok(ValuationSpec::Coverage {
            universe: v.universe(),
            sets: v.cover_sets().to_vec(),
            weight: if num::One::is_one(v.weight()) {
                None
            } else {
                Some(RationalSpec::Str(format_rational(v.weight())))
            },
        }),
        Valuation::Table(v) => Ok(ValuationSpec::Table {
            support: v.support().iter().collect(),
            entries: v
                .entries()
                .iter()
                .map(|(b, r)| (format_subset_key(b), RationalSpec::Str(format_rational(r))))
                .collect(),
        }),
        Valuation::Discounted(v) => Ok(ValuationSpec::Discounted {
            base: rats(v.base().per_good()),
            trigger: v.trigger(),
            discounted: v.discounted().iter().collect(),
        }),
        Valuation::Lifted(_) => Err(IoError::UnsupportedValuation),
    }
}

/// Parses an instance file into a valuation profile.
pub fn parse_instance(text: &str) -> Result<Vec<Valuation>, IoError> {
    let spec: InstanceSpec = serde_json::from_str(text)?;
    spec.agents
        .iter()
        .enumerate()
        .map(|(agent, v)| build_valuation(v, spec.m, agent))
        .collect()
}

/// Serializes a profile as a deterministic, round-trippable instance file.
pub fn write_instance(profile: &[Valuation]) -> Result<String, IoError> {
    let m = profile.first().map(Valuation::m).unwrap_or(0);
    let spec = InstanceSpec {
        m,
        agents: profile.iter().map(spec_of).collect::<Result<_, _>>()?,
    };
    Ok(serde_json::to_string_pretty(&spec).expect("instance spec serializes"))
}

/// The instance-file JSON value for a profile, for embedding in reports.
pub fn instance_json(profile: &[Valuation]) -> Result<Json, IoError> {
    let m = profile.first().map(Valuation::m).unwrap_or(0);
    let spec = InstanceSpec {
        m,
        agents: profile.iter().map(spec_of).collect::<Result<_, _>>()?,
    };
    Ok(serde_json::to_value(spec).expect("instance spec serializes"))
}

/// The instance-file JSON value for a single valuation.
pub fn valuation_json(valuation: &Valuation) -> Result<Json, IoError> {
    Ok(serde_json::to_value(spec_of(valuation)?).expect("valuation spec serializes"))
}

/// Parses an allocation file against a known universe size.
pub fn parse_allocation(text: &str, m: u32) -> Result<Allocation, IoError> {
    let spec: AllocationSpec = serde_json::from_str(text)?;
    let bundles = spec.bundles.into_iter().map(|b| b.into_iter().collect()).collect();
    Ok(make_allocation(m, bundles)?)
}

/// `{"bundles": [[...], ...]}`.
pub fn allocation_json(allocation: &Allocation) -> Json {
    serde_json::json!({
        "bundles": allocation
            .bundles()
            .iter()
            .map(|b| b.iter().collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}
