//! Goods, bundles, allocations and the exact value arithmetic shared by the
//! rest of the crate.
//!
//! Goods are identified by 1-based indices `1..=m`, matching the usual
//! `g_1, ..., g_m` numbering. All bundle values are exact rationals except
//! for exponentially lifted valuations, which carry a real approximation in
//! log space (see [`Value::Exp`]).

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num::{BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational scalar used throughout.
pub type Rational = BigRational;

/// 1-based good index.
pub type Good = u32;

/// Absolute tolerance for comparisons involving lifted (real-valued)
/// quantities. Exact rationals are always compared exactly.
pub const REAL_TOLERANCE: f64 = 1e-9;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn rational_int(num: i64) -> Rational {
    Rational::from_integer(num.into())
}

/// A set of goods.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bundle(BTreeSet<Good>);

impl Bundle {
    pub fn empty() -> Self {
        Bundle(BTreeSet::new())
    }

    pub fn contains(&self, good: Good) -> bool {
        self.0.contains(&good)
    }

    pub fn insert(&mut self, good: Good) -> bool {
        self.0.insert(good)
    }

    pub fn remove(&mut self, good: Good) -> bool {
        self.0.remove(&good)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Good> + '_ {
        self.0.iter().copied()
    }

    pub fn with(&self, good: Good) -> Bundle {
        let mut b = self.clone();
        b.insert(good);
        b
    }

    pub fn without(&self, good: Good) -> Bundle {
        let mut b = self.clone();
        b.remove(good);
        b
    }

    pub fn union(&self, other: &Bundle) -> Bundle {
        Bundle(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &Bundle) -> Bundle {
        Bundle(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &Bundle) -> Bundle {
        Bundle(self.0.difference(&other.0).copied().collect())
    }

    /// The full universe `{1..m}`.
    pub fn universe(m: u32) -> Bundle {
        (1..=m).collect()
    }

    /// Bundle from the set bits of `mask`, bit `i` meaning good `i + 1`.
    /// Only meaningful for small universes used by brute-force checkers.
    pub fn from_mask(mask: u64) -> Bundle {
        (0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
    }

    pub fn to_mask(&self) -> u64 {
        self.iter().fold(0u64, |acc, g| acc | 1 << (g - 1))
    }
}

impl FromIterator<Good> for Bundle {
    fn from_iter<T: IntoIterator<Item = Good>>(iter: T) -> Self {
        Bundle(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[Good; N]> for Bundle {
    fn from(goods: [Good; N]) -> Self {
        goods.into_iter().collect()
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, g) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "g{g}")?;
        }
        write!(f, "}}")
    }
}

/// A utility amount. `Exact` carries a rational compared exactly; `Exp(x)`
/// stands for `e^x` and is the only place real arithmetic enters. `Exp`
/// comparisons happen in log space with [`REAL_TOLERANCE`]; mixed
/// comparisons go through logarithms.
#[derive(Clone, Debug)]
pub enum Value {
    Exact(Rational),
    Exp(f64),
}

impl Value {
    pub fn zero() -> Value {
        Value::Exact(Rational::zero())
    }

    pub fn one() -> Value {
        Value::Exact(Rational::one())
    }

    pub fn from_int(n: i64) -> Value {
        Value::Exact(rational_int(n))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_zero(),
            Value::Exp(_) => false,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Exp(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Exp(x) => x.exp(),
        }
    }

    /// Scale by a non-negative rational factor.
    pub fn scale(&self, factor: &Rational) -> Value {
        match self {
            Value::Exact(r) => Value::Exact(r * factor),
            Value::Exp(x) => {
                if factor.is_zero() {
                    Value::zero()
                } else {
                    Value::Exp(x + factor.to_f64().expect("finite factor").ln())
                }
            }
        }
    }

    /// Exact difference; `None` when a lifted operand prevents exactness.
    pub fn checked_sub(&self, other: &Value) -> Option<Value> {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Some(Value::Exact(a - b)),
            _ => None,
        }
    }
}

impl std::ops::Add for Value {
    type Output = Value;
    fn add(self, rhs: Value) -> Value {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            (Value::Exp(a), Value::Exp(b)) => {
                // log(e^a + e^b), evaluated stably from the larger exponent.
                let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                Value::Exp(hi + (lo - hi).exp().ln_1p())
            }
            (Value::Exact(a), Value::Exp(x)) | (Value::Exp(x), Value::Exact(a)) => {
                if a.is_zero() {
                    Value::Exp(x)
                } else {
                    let af = a.to_f64().expect("finite value");
                    assert!(af > 0.0, "cannot add a negative exact value to a lifted value");
                    let (hi, lo) = if x >= af.ln() { (x, af.ln()) } else { (af.ln(), x) };
                    Value::Exp(hi + (lo - hi).exp().ln_1p())
                }
            }
        }
    }
}

impl std::iter::Sum for Value {
    fn sum<I: Iterator<Item = Value>>(iter: I) -> Value {
        iter.fold(Value::zero(), |a, b| a + b)
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a.cmp(b),
            (Value::Exp(a), Value::Exp(b)) => cmp_real(*a, *b),
            (Value::Exact(a), Value::Exp(x)) => {
                if !a.is_positive() {
                    Ordering::Less
                } else {
                    cmp_real(a.to_f64().expect("finite value").ln(), *x)
                }
            }
            (Value::Exp(x), Value::Exact(a)) => {
                if !a.is_positive() {
                    Ordering::Greater
                } else {
                    cmp_real(*x, a.to_f64().expect("finite value").ln())
                }
            }
        }
    }
}

fn cmp_real(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= REAL_TOLERANCE {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Value::Exp(x) => write!(f, "{:.12e}", x.exp()),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AllocationError {
    #[error("good g{0} appears in more than one bundle")]
    Overlap(Good),
    #[error("good g{0} is not allocated to any bundle")]
    Coverage(Good),
    #[error("good g{0} is outside the universe 1..={1}")]
    OutOfRange(Good, u32),
    #[error("an allocation needs at least one agent")]
    NoAgents,
}

/// A partition of `{1..m}` into one bundle per agent. Empty bundles are
/// legal (the `m < n` case).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    m: u32,
    bundles: Vec<Bundle>,
}

impl Allocation {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundle(&self, agent: usize) -> &Bundle {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }
}

/// Validates that `bundles` partition `{1..m}`.
pub fn make_allocation(m: u32, bundles: Vec<Bundle>) -> Result<Allocation, AllocationError> {
    if bundles.is_empty() {
        return Err(AllocationError::NoAgents);
    }
    let mut seen = vec![false; m as usize];
    for bundle in &bundles {
        for g in bundle.iter() {
            if g == 0 || g > m {
                return Err(AllocationError::OutOfRange(g, m));
            }
            let slot = &mut seen[(g - 1) as usize];
            if *slot {
                return Err(AllocationError::Overlap(g));
            }
            *slot = true;
        }
    }
    if let Some(idx) = seen.iter().position(|covered| !covered) {
        return Err(AllocationError::Coverage(idx as u32 + 1));
    }
    debug_assert_eq!(bundles.iter().map(Bundle::len).sum::<usize>(), m as usize);
    Ok(Allocation { m, bundles })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_universe_two_agents() {
        let alloc = make_allocation(0, vec![Bundle::empty(), Bundle::empty()]).unwrap();
        assert_eq!(alloc.agents(), 2);
        assert!(alloc.bundle(0).is_empty());
    }

    #[test]
    fn explicit_partition() {
        let alloc = make_allocation(4, vec![[1, 3].into(), [2, 4].into()]).unwrap();
        assert_eq!(alloc.bundle(1), &Bundle::from([2, 4]));
    }

    #[test]
    fn duplicated_good_is_overlap() {
        let err = make_allocation(2, vec![[1].into(), [1, 2].into()]).unwrap_err();
        assert_eq!(err, AllocationError::Overlap(1));
    }

    #[test]
    fn missing_good_is_coverage_error() {
        let err = make_allocation(3, vec![[1].into(), [2].into()]).unwrap_err();
        assert_eq!(err, AllocationError::Coverage(3));
    }

    #[test]
    fn value_ordering_mixes_exact_and_lifted() {
        let two = Value::from_int(2);
        let e_log2 = Value::Exp(2f64.ln());
        assert_eq!(two.cmp(&e_log2), Ordering::Equal);
        assert!(Value::zero() < Value::Exp(-100.0));
        assert!(Value::Exp(1.0) > Value::Exp(0.5));
    }

    #[test]
    fn value_sum_in_log_space() {
        let v = Value::Exp(1.0) + Value::Exp(1.0);
        match v {
            Value::Exp(x) => assert!((x - (1.0 + 2f64.ln())).abs() < 1e-12),
            _ => panic!("expected lifted sum"),
        }
    }

    #[test]
    fn mask_round_trip() {
        let b = Bundle::from([1, 3, 7]);
        assert_eq!(Bundle::from_mask(b.to_mask()), b);
    }
}
