//! Concrete valuation representations, oracle evaluation, and brute-force
//! class-membership checkers.
//!
//! Every valuation is normalized (`v(∅) = 0`) and monotone; constructors
//! reject representations that could violate either. Class membership
//! (additive, subadditive, submodular, cancelable) is decided by exhaustive
//! enumeration over small universes, gated by [`max_universe`].

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Bundle, Good, Rational, Value};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValuationError {
    #[error("per-good value for g{0} is negative")]
    NegativeValue(Good),
    #[error("multiplicative factor for g{0} is below 1")]
    FactorBelowOne(Good),
    #[error("table valuation is not monotone: v({0}) > v({1})")]
    NonMonotoneTable(Bundle, Bundle),
    #[error("table entry for {0} is negative")]
    NegativeTableEntry(Bundle),
    #[error("table support good g{0} is outside the universe 1..={1}")]
    SupportOutOfRange(Good, u32),
    #[error("table support has {0} goods; exhaustive validation caps it at {1}")]
    SupportTooLarge(usize, usize),
    #[error("xos valuation needs at least one clause")]
    EmptyClauses,
    #[error("xos clauses disagree on universe size")]
    ClauseSizeMismatch,
    #[error("coverage set for g{0} references element {1} outside the universe 0..{2}")]
    CoverageElementOutOfRange(Good, u32, u32),
    #[error("coverage weight is negative")]
    NegativeWeight,
    #[error("lift requires a positive delta")]
    NonPositiveDelta,
    #[error("discount trigger g{0} is worth less than the {1} discounted goods")]
    DiscountExceedsTrigger(Good, usize),
    #[error("discounted good g{0} is worth less than 1")]
    DiscountedGoodBelowOne(Good),
    #[error("good g{0} is outside the universe 1..={1}")]
    GoodOutOfRange(Good, u32),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MarginalError {
    #[error("good g{0} is already in the bundle")]
    GoodAlreadyPresent(Good),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("universe of size {0} exceeds the brute-force gate {1} (override with FAIRDIV_MAX_UNIVERSE)")]
    UniverseTooLarge(u32, u32),
}

/// `v(S) = Σ_{g∈S} per_good[g]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditiveValuation {
    per_good: Vec<Rational>,
}

impl AdditiveValuation {
    pub fn new(per_good: Vec<Rational>) -> Result<Self, ValuationError> {
        if let Some(idx) = per_good.iter().position(|v| v.is_negative()) {
            return Err(ValuationError::NegativeValue(idx as u32 + 1));
        }
        Ok(AdditiveValuation { per_good })
    }

    pub fn from_ints(values: &[i64]) -> Self {
        AdditiveValuation::new(values.iter().map(|&v| crate::model::rational_int(v)).collect())
            .expect("non-negative integer values")
    }

    pub fn per_good(&self) -> &[Rational] {
        &self.per_good
    }

    pub fn good_value(&self, good: Good) -> &Rational {
        &self.per_good[(good - 1) as usize]
    }

    pub fn m(&self) -> u32 {
        self.per_good.len() as u32
    }

    fn eval(&self, bundle: &Bundle) -> Rational {
        bundle.iter().map(|g| self.good_value(g).clone()).sum()
    }
}

/// `v(S) = Π_{g∈S} per_good[g]` with every factor ≥ 1, and `v(∅) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicativeValuation {
    per_good: Vec<Rational>,
}

impl MultiplicativeValuation {
    pub fn new(per_good: Vec<Rational>) -> Result<Self, ValuationError> {
        if let Some(idx) = per_good.iter().position(|v| v < &Rational::one()) {
            return Err(ValuationError::FactorBelowOne(idx as u32 + 1));
        }
        Ok(MultiplicativeValuation { per_good })
    }

    pub fn m(&self) -> u32 {
        self.per_good.len() as u32
    }

    pub fn factors(&self) -> &[Rational] {
        &self.per_good
    }

    fn eval(&self, bundle: &Bundle) -> Rational {
        if bundle.is_empty() {
            return Rational::zero();
        }
        bundle
            .iter()
            .map(|g| self.per_good[(g - 1) as usize].clone())
            .product()
    }
}

/// Construction of a table valuation validates monotonicity over every
/// subset pair of the support; this caps the scan.
pub const TABLE_SUPPORT_LIMIT: usize = 16;

/// Explicit subset table over a support `G' ⊆ {1..m}`; goods outside the
/// support contribute nothing: `v(S) = v(S ∩ G')`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableValuation {
    m: u32,
    support: Bundle,
    entries: BTreeMap<Bundle, Rational>,
}

impl TableValuation {
    pub fn new(
        m: u32,
        support: Bundle,
        entries: BTreeMap<Bundle, Rational>,
    ) -> Result<Self, ValuationError> {
        if support.len() > TABLE_SUPPORT_LIMIT {
            return Err(ValuationError::SupportTooLarge(support.len(), TABLE_SUPPORT_LIMIT));
        }
        for g in support.iter() {
            if g == 0 || g > m {
                return Err(ValuationError::SupportOutOfRange(g, m));
            }
        }
        let table = TableValuation { m, support, entries };
        // Monotonicity over the support is validated exhaustively up front;
        // a violating table is a construction error, not a latent state.
        let support_goods: Vec<Good> = table.support.iter().collect();
        let k = support_goods.len();
        for mask in 0u64..1 << k {
            let s = subset_of(&support_goods, mask);
            let vs = table.lookup(&s);
            if vs.is_negative() {
                return Err(ValuationError::NegativeTableEntry(s));
            }
            for (bit, &g) in support_goods.iter().enumerate() {
                if mask >> bit & 1 == 0 {
                    let t = s.with(g);
                    if vs > table.lookup(&t) {
                        return Err(ValuationError::NonMonotoneTable(s, t));
                    }
                }
            }
        }
        Ok(table)
    }

    /// Cardinality-based table: `v(S) = by_size[|S ∩ support|]`.
    pub fn by_cardinality(
        m: u32,
        support: Bundle,
        by_size: &[Rational],
    ) -> Result<Self, ValuationError> {
        assert_eq!(by_size.len(), support.len() + 1);
        let goods: Vec<Good> = support.iter().collect();
        let mut entries = BTreeMap::new();
        for mask in 0u64..1 << goods.len() {
            let s = subset_of(&goods, mask);
            let size = s.len();
            entries.insert(s, by_size[size].clone());
        }
        TableValuation::new(m, support, entries)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn support(&self) -> &Bundle {
        &self.support
    }

    pub fn entries(&self) -> &BTreeMap<Bundle, Rational> {
        &self.entries
    }

    /// The same table over a different universe size; values outside the
    /// support stay irrelevant.
    pub fn with_universe(&self, m: u32) -> Result<TableValuation, ValuationError> {
        TableValuation::new(m, self.support.clone(), self.entries.clone())
    }

    fn lookup(&self, restricted: &Bundle) -> Rational {
        if restricted.is_empty() {
            return Rational::zero();
        }
        self.entries.get(restricted).cloned().unwrap_or_else(Rational::zero)
    }

    fn eval(&self, bundle: &Bundle) -> Rational {
        self.lookup(&bundle.intersection(&self.support))
    }
}

fn subset_of(goods: &[Good], mask: u64) -> Bundle {
    goods
        .iter()
        .enumerate()
        .filter(|(bit, _)| mask >> bit & 1 == 1)
        .map(|(_, &g)| g)
        .collect()
}

/// `v(S) = weight · |∪_{g∈S} cover_sets[g]|`; submodular by construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageValuation {
    universe: u32,
    cover_sets: Vec<Vec<u32>>,
    weight: Rational,
}

impl CoverageValuation {
    pub fn new(
        universe: u32,
        cover_sets: Vec<Vec<u32>>,
        weight: Rational,
    ) -> Result<Self, ValuationError> {
        if weight.is_negative() {
            return Err(ValuationError::NegativeWeight);
        }
        for (idx, set) in cover_sets.iter().enumerate() {
            for &e in set {
                if e >= universe {
                    return Err(ValuationError::CoverageElementOutOfRange(
                        idx as u32 + 1,
                        e,
                        universe,
                    ));
                }
            }
        }
        Ok(CoverageValuation { universe, cover_sets, weight })
    }

    pub fn unit(universe: u32, cover_sets: Vec<Vec<u32>>) -> Result<Self, ValuationError> {
        CoverageValuation::new(universe, cover_sets, Rational::one())
    }

    pub fn m(&self) -> u32 {
        self.cover_sets.len() as u32
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn cover_sets(&self) -> &[Vec<u32>] {
        &self.cover_sets
    }

    pub fn weight(&self) -> &Rational {
        &self.weight
    }

    fn covered(&self, bundle: &Bundle) -> u64 {
        let mut elems = vec![false; self.universe as usize];
        let mut count = 0u64;
        for g in bundle.iter() {
            for &e in &self.cover_sets[(g - 1) as usize] {
                if !elems[e as usize] {
                    elems[e as usize] = true;
                    count += 1;
                }
            }
        }
        count
    }

    fn eval(&self, bundle: &Bundle) -> Rational {
        crate::model::rational_int(self.covered(bundle) as i64) * &self.weight
    }
}

/// `v(S) = max_k clause_k(S)` over a non-empty list of additive clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XosValuation {
    clauses: Vec<AdditiveValuation>,
}

impl XosValuation {
    pub fn new(clauses: Vec<AdditiveValuation>) -> Result<Self, ValuationError> {
        if clauses.is_empty() {
            return Err(ValuationError::EmptyClauses);
        }
        let m = clauses[0].m();
        if clauses.iter().any(|c| c.m() != m) {
            return Err(ValuationError::ClauseSizeMismatch);
        }
        Ok(XosValuation { clauses })
    }

    pub fn m(&self) -> u32 {
        self.clauses[0].m()
    }

    pub fn clauses(&self) -> &[AdditiveValuation] {
        &self.clauses
    }

    fn eval(&self, bundle: &Bundle) -> Rational {
        self.clauses
            .iter()
            .map(|c| c.eval(bundle))
            .max()
            .expect("at least one clause")
    }
}

/// Additive base with a per-good discount of 1 on `discounted` goods that
/// activates once `trigger` is in the bundle:
/// `v(S) = base(S) − |discounted ∩ S|` when `trigger ∈ S`, else `base(S)`.
/// Equivalent to a coverage function where the trigger's element set
/// overlaps each discounted good's set in one element
/// (see [`DiscountedValuation::coverage_view`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscountedValuation {
    base: AdditiveValuation,
    trigger: Good,
    discounted: Bundle,
}

impl DiscountedValuation {
    pub fn new(
        base: AdditiveValuation,
        trigger: Good,
        discounted: Bundle,
    ) -> Result<Self, ValuationError> {
        let m = base.m();
        if trigger == 0 || trigger > m {
            return Err(ValuationError::GoodOutOfRange(trigger, m));
        }
        for g in discounted.iter() {
            if g == 0 || g > m {
                return Err(ValuationError::GoodOutOfRange(g, m));
            }
            if base.good_value(g) < &Rational::one() {
                return Err(ValuationError::DiscountedGoodBelowOne(g));
            }
        }
        // Monotonicity of adding the trigger needs its base value to cover
        // the whole discount.
        let total = crate::model::rational_int(discounted.len() as i64);
        if base.good_value(trigger) < &total {
            return Err(ValuationError::DiscountExceedsTrigger(trigger, discounted.len()));
        }
        Ok(DiscountedValuation { base, trigger, discounted })
    }

    pub fn m(&self) -> u32 {
        self.base.m()
    }

    pub fn base(&self) -> &AdditiveValuation {
        &self.base
    }

    pub fn trigger(&self) -> Good {
        self.trigger
    }

    pub fn discounted(&self) -> &Bundle {
        &self.discounted
    }

    fn eval(&self, bundle: &Bundle) -> Rational {
        let base = self.base.eval(bundle);
        if bundle.contains(self.trigger) {
            let overlap = self.discounted.intersection(bundle).len() as i64;
            base - crate::model::rational_int(overlap)
        } else {
            base
        }
    }

    /// The equivalent unit-weight coverage function, usable on small
    /// universes to certify submodularity. Requires every base value to be
    /// integral.
    pub fn coverage_view(&self) -> Option<CoverageValuation> {
        let m = self.m();
        let mut sets: Vec<Vec<u32>> = vec![Vec::new(); m as usize];
        let mut next = 0u32;
        // Discounted goods: private elements plus one shared with the trigger.
        let mut shared_with_trigger = Vec::new();
        for (idx, v) in self.base.per_good().iter().enumerate() {
            if !v.is_integer() {
                return None;
            }
            let g = idx as u32 + 1;
            let count = v.to_integer().to_u32()?;
            if g == self.trigger {
                continue;
            }
            let set = &mut sets[idx];
            if self.discounted.contains(g) {
                let shared = next;
                next += 1;
                shared_with_trigger.push(shared);
                set.push(shared);
                for _ in 1..count {
                    set.push(next);
                    next += 1;
                }
            } else {
                for _ in 0..count {
                    set.push(next);
                    next += 1;
                }
            }
        }
        let trigger_count = self.base.good_value(self.trigger).to_integer().to_u32()?;
        if (trigger_count as usize) < shared_with_trigger.len() {
            return None;
        }
        let trigger_set = &mut sets[(self.trigger - 1) as usize];
        trigger_set.extend(shared_with_trigger.iter().copied());
        for _ in shared_with_trigger.len() as u32..trigger_count {
            trigger_set.push(next);
            next += 1;
        }
        CoverageValuation::unit(next, sets).ok()
    }
}

/// `v(S) = exp(δ · base(S))` for non-empty `S`, `v(∅) = 0`. The exponent is
/// evaluated lazily; comparisons happen in log space with the crate-wide
/// real tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedValuation {
    base: AdditiveValuation,
    delta: f64,
}

impl LiftedValuation {
    pub fn new(base: AdditiveValuation, delta: f64) -> Result<Self, ValuationError> {
        if !(delta > 0.0) {
            return Err(ValuationError::NonPositiveDelta);
        }
        Ok(LiftedValuation { base, delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn base(&self) -> &AdditiveValuation {
        &self.base
    }

    pub fn m(&self) -> u32 {
        self.base.m()
    }

    fn log_value(&self, bundle: &Bundle) -> f64 {
        self.delta * self.base.eval(bundle).to_f64().expect("finite base value")
    }

    fn eval(&self, bundle: &Bundle) -> Value {
        if bundle.is_empty() {
            Value::zero()
        } else {
            Value::Exp(self.log_value(bundle))
        }
    }
}

/// Lift an additive valuation into the exponential (multiplicative) domain.
pub fn lift(base: AdditiveValuation, delta: f64) -> Result<LiftedValuation, ValuationError> {
    LiftedValuation::new(base, delta)
}

/// A valuation oracle of any supported representation.
#[derive(Clone, Debug, PartialEq)]
pub enum Valuation {
    Additive(AdditiveValuation),
    Multiplicative(MultiplicativeValuation),
    Table(TableValuation),
    Coverage(CoverageValuation),
    Xos(XosValuation),
    Discounted(DiscountedValuation),
    Lifted(LiftedValuation),
}

impl Valuation {
    pub fn additive_ints(values: &[i64]) -> Valuation {
        Valuation::Additive(AdditiveValuation::from_ints(values))
    }

    /// Universe size `m`.
    pub fn m(&self) -> u32 {
        match self {
            Valuation::Additive(v) => v.m(),
            Valuation::Multiplicative(v) => v.m(),
            Valuation::Table(v) => v.m(),
            Valuation::Coverage(v) => v.m(),
            Valuation::Xos(v) => v.m(),
            Valuation::Discounted(v) => v.m(),
            Valuation::Lifted(v) => v.m(),
        }
    }

    /// Oracle evaluation `v(S)`.
    pub fn value(&self, bundle: &Bundle) -> Value {
        match self {
            Valuation::Additive(v) => Value::Exact(v.eval(bundle)),
            Valuation::Multiplicative(v) => Value::Exact(v.eval(bundle)),
            Valuation::Table(v) => Value::Exact(v.eval(bundle)),
            Valuation::Coverage(v) => Value::Exact(v.eval(bundle)),
            Valuation::Xos(v) => Value::Exact(v.eval(bundle)),
            Valuation::Discounted(v) => Value::Exact(v.eval(bundle)),
            Valuation::Lifted(v) => v.eval(bundle),
        }
    }

    pub fn singleton(&self, good: Good) -> Value {
        self.value(&Bundle::from([good]))
    }

    /// Marginal value `v(g | S) = v(S + g) − v(S)`.
    pub fn marginal(&self, good: Good, bundle: &Bundle) -> Result<Value, MarginalError> {
        if bundle.contains(good) {
            return Err(MarginalError::GoodAlreadyPresent(good));
        }
        if let Valuation::Lifted(v) = self {
            // e^a − e^b computed stably in log space.
            if bundle.is_empty() {
                return Ok(v.eval(&Bundle::from([good])));
            }
            let with = v.log_value(&bundle.with(good));
            let without = v.log_value(bundle);
            if with <= without {
                return Ok(Value::zero());
            }
            return Ok(Value::Exp(without + (with - without).exp_m1().ln()));
        }
        let with = self.value(&bundle.with(good));
        let without = self.value(bundle);
        Ok(with.checked_sub(&without).expect("exact valuation"))
    }
}

/// Valuation classes decidable by brute force on small universes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValuationClass {
    Normalized,
    Monotone,
    Additive,
    Subadditive,
    Submodular,
    Cancelable,
}

impl fmt::Display for ValuationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValuationClass::Normalized => "normalized",
            ValuationClass::Monotone => "monotone",
            ValuationClass::Additive => "additive",
            ValuationClass::Subadditive => "subadditive",
            ValuationClass::Submodular => "submodular",
            ValuationClass::Cancelable => "cancelable",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ValuationClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normalized" => Ok(ValuationClass::Normalized),
            "monotone" => Ok(ValuationClass::Monotone),
            "additive" => Ok(ValuationClass::Additive),
            "subadditive" => Ok(ValuationClass::Subadditive),
            "submodular" => Ok(ValuationClass::Submodular),
            "cancelable" => Ok(ValuationClass::Cancelable),
            other => Err(format!("unknown valuation class `{other}`")),
        }
    }
}

/// A violating witness: for pairwise conditions `t` is the second subset,
/// for pointwise conditions it is absent; `good` is the quantified good
/// when the condition has one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub s: Bundle,
    pub t: Option<Bundle>,
    pub good: Option<Good>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCheck {
    pub class: ValuationClass,
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
}

impl ClassCheck {
    fn pass(class: ValuationClass) -> Self {
        ClassCheck { class, holds: true, counterexample: None }
    }

    fn fail(class: ValuationClass, s: Bundle, t: Option<Bundle>, good: Option<Good>) -> Self {
        ClassCheck { class, holds: false, counterexample: Some(Counterexample { s, t, good }) }
    }
}

/// Brute-force gate for subset-pair enumerations; `FAIRDIV_MAX_UNIVERSE`
/// overrides both this and the cancelable gate.
pub fn max_universe(default: u32) -> u32 {
    std::env::var("FAIRDIV_MAX_UNIVERSE")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(default)
}

const PAIR_CHECK_LIMIT: u32 = 16;
const CANCELABLE_CHECK_LIMIT: u32 = 12;

/// Decides class membership by exhaustive enumeration; returns a violating
/// witness when the defining condition fails.
pub fn check_class(
    valuation: &Valuation,
    class: ValuationClass,
) -> Result<ClassCheck, CheckError> {
    let m = valuation.m();
    let gate = match class {
        ValuationClass::Cancelable => max_universe(CANCELABLE_CHECK_LIMIT),
        _ => max_universe(PAIR_CHECK_LIMIT),
    };
    if m > gate {
        return Err(CheckError::UniverseTooLarge(m, gate));
    }

    // Cache v over all subsets once; everything below is comparisons.
    let size = 1usize << m;
    let cache: Vec<Value> = (0..size)
        .map(|mask| valuation.value(&Bundle::from_mask(mask as u64)))
        .collect();
    let goods: Vec<u32> = (0..m).collect(); // bit positions

    let check = match class {
        ValuationClass::Normalized => {
            if cache[0].is_zero() {
                ClassCheck::pass(class)
            } else {
                ClassCheck::fail(class, Bundle::empty(), None, None)
            }
        }
        ValuationClass::Monotone => {
            'mono: {
                for s in 0..size {
                    for &g in &goods {
                        if s >> g & 1 == 0 {
                            let t = s | 1 << g;
                            if cache[s] > cache[t] {
                                break 'mono ClassCheck::fail(
                                    class,
                                    Bundle::from_mask(s as u64),
                                    Some(Bundle::from_mask(t as u64)),
                                    Some(g + 1),
                                );
                            }
                        }
                    }
                }
                ClassCheck::pass(class)
            }
        }
        ValuationClass::Additive => {
            'add: {
                for s in 0..size {
                    let sum: Value = goods
                        .iter()
                        .filter(|&&g| s >> g & 1 == 1)
                        .map(|&g| cache[1 << g].clone())
                        .sum();
                    if cache[s] != sum {
                        break 'add ClassCheck::fail(class, Bundle::from_mask(s as u64), None, None);
                    }
                }
                ClassCheck::pass(class)
            }
        }
        ValuationClass::Subadditive => {
            // Disjoint pairs suffice under monotonicity.
            'sub: {
                for s in 0..size {
                    let complement = !s & (size - 1);
                    let mut t = complement;
                    loop {
                        if cache[s | t] > cache[s].clone() + cache[t].clone() {
                            break 'sub ClassCheck::fail(
                                class,
                                Bundle::from_mask(s as u64),
                                Some(Bundle::from_mask(t as u64)),
                                None,
                            );
                        }
                        if t == 0 {
                            break;
                        }
                        t = (t - 1) & complement;
                    }
                }
                ClassCheck::pass(class)
            }
        }
        ValuationClass::Submodular => {
            // Local characterization, rearranged to additions only:
            // v(S+g) + v(S+h) ≥ v(S+g+h) + v(S).
            'smod: {
                for s in 0..size {
                    for &g in &goods {
                        if s >> g & 1 == 1 {
                            continue;
                        }
                        for &h in &goods {
                            if h == g || s >> h & 1 == 1 {
                                continue;
                            }
                            let lhs = cache[s | 1 << g].clone() + cache[s | 1 << h].clone();
                            let rhs = cache[s | 1 << g | 1 << h].clone() + cache[s].clone();
                            if lhs < rhs {
                                break 'smod ClassCheck::fail(
                                    class,
                                    Bundle::from_mask(s as u64),
                                    Some(Bundle::from_mask((s | 1 << h) as u64)),
                                    Some(g + 1),
                                );
                            }
                        }
                    }
                }
                ClassCheck::pass(class)
            }
        }
        ValuationClass::Cancelable => {
            // v(S+g) > v(T+g) must imply v(S) > v(T), for g ∉ S ∪ T.
            'canc: {
                for s in 0..size {
                    for t in 0..size {
                        for &g in &goods {
                            let bit = 1usize << g;
                            if s & bit != 0 || t & bit != 0 {
                                continue;
                            }
                            if cache[s | bit] > cache[t | bit] && cache[s] <= cache[t] {
                                break 'canc ClassCheck::fail(
                                    class,
                                    Bundle::from_mask(s as u64),
                                    Some(Bundle::from_mask(t as u64)),
                                    Some(g + 1),
                                );
                            }
                        }
                    }
                }
                ClassCheck::pass(class)
            }
        }
    };
    Ok(check)
}
