//! Vectors in `ℓ2` over finite vertex subsets and the subset vectors whose
//! inner products detect intersection.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use super::FactorError;
use crate::graph::VertexId;
use crate::logreal::LogReal;

/// Largest subset that [`xi_vector`] materializes (support size `2^|S|`).
pub const DEFAULT_SUBSET_CAP: usize = 20;

/// A finite vertex subset as a strictly increasing id list.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SubsetKey(Arc<[VertexId]>);

impl SubsetKey {
    pub fn empty() -> Self {
        SubsetKey(Arc::from(Vec::new()))
    }

    /// Sorts and deduplicates.
    pub fn new(mut ids: Vec<VertexId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        SubsetKey(Arc::from(ids))
    }

    /// Takes an already strictly increasing list.
    pub fn from_sorted(ids: Vec<VertexId>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        SubsetKey(Arc::from(ids))
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn intersection_len(&self, other: &SubsetKey) -> usize {
        let (a, b) = (&self.0, &other.0);
        let (mut p, mut q, mut n) = (0, 0, 0);
        while p < a.len() && q < b.len() {
            match a[p].cmp(&b[q]) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    p += 1;
                    q += 1;
                }
            }
        }
        n
    }

    /// The subset picked out by the bits of `mask` (bit `i` ↦ `i`-th member).
    fn sub(&self, mask: u64) -> SubsetKey {
        SubsetKey::from_sorted(
            (0..self.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| self.0[i])
                .collect(),
        )
    }
}

impl fmt::Debug for SubsetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl Serialize for SubsetKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.as_ref().serialize(s)
    }
}

/// Finitely supported map from subsets to complex scalars, with
/// `⟨f,g⟩ = Σ_ω conj(f(ω))·g(ω)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubsetVector {
    entries: BTreeMap<SubsetKey, Complex64>,
}

impl SubsetVector {
    pub fn zero() -> Self {
        SubsetVector::default()
    }

    /// `δ_∅`.
    pub fn delta_empty() -> Self {
        let mut v = SubsetVector::zero();
        v.set(SubsetKey::empty(), Complex64::new(1.0, 0.0));
        v
    }

    pub fn get(&self, key: &SubsetKey) -> Complex64 {
        self.entries.get(key).copied().unwrap_or_default()
    }

    /// Stores `value`, dropping the entry when it is zero.
    pub fn set(&mut self, key: SubsetKey, value: Complex64) {
        if value == Complex64::new(0.0, 0.0) {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SubsetKey, &Complex64)> {
        self.entries.iter()
    }

    pub fn inner(&self, other: &SubsetVector) -> Complex64 {
        if self.entries.len() <= other.entries.len() {
            self.entries
                .iter()
                .filter_map(|(k, a)| other.entries.get(k).map(|b| a.conj() * b))
                .sum()
        } else {
            other
                .entries
                .iter()
                .filter_map(|(k, b)| self.entries.get(k).map(|a| a.conj() * b))
                .sum()
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, c: Complex64) -> SubsetVector {
        let mut out = SubsetVector::zero();
        for (k, v) in &self.entries {
            out.set(k.clone(), v * c);
        }
        out
    }

    pub fn add(&self, other: &SubsetVector) -> SubsetVector {
        let mut out = self.clone();
        for (k, v) in &other.entries {
            let s = out.get(k) + v;
            out.set(k.clone(), s);
        }
        out
    }

    pub fn sub(&self, other: &SubsetVector) -> SubsetVector {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }
}

/// Converts an inner product of integer vectors back to an integer, if it is one.
pub fn exact_int(c: Complex64) -> Option<i64> {
    (c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() < 9.0e15).then_some(c.re as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

/// `ξ̃±_S` (tilde) or `ξ±_S` as a structured vector: the coefficient of
/// `ω ⊆ S` depends only on `|ω|`, so inner products reduce to a binomial sum
/// over the intersection.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct XiVector {
    pub set: SubsetKey,
    pub sign: Sign,
    pub tilde: bool,
}

impl XiVector {
    pub fn new(set: SubsetKey, sign: Sign, tilde: bool) -> Self {
        XiVector { set, sign, tilde }
    }

    /// Coefficient on subsets of size `j`.
    pub fn rank_coefficient(&self, j: usize) -> i64 {
        let alt = if j.is_multiple_of(2) { 1 } else { -1 };
        match (self.sign, self.tilde) {
            (Sign::Plus, true) => 1,
            (Sign::Minus, true) => alt,
            (_, false) if j == 0 => 0,
            (Sign::Plus, false) => 1,
            (Sign::Minus, false) => -alt,
        }
    }

    /// `(a0, α, ε)` with coefficient `a0` on `∅` and `α·ε^j` on size `j ≥ 1`.
    fn shape(&self) -> (i64, i64, i64) {
        match (self.sign, self.tilde) {
            (Sign::Plus, true) => (1, 1, 1),
            (Sign::Minus, true) => (1, 1, -1),
            (Sign::Plus, false) => (0, 1, 1),
            (Sign::Minus, false) => (0, -1, -1),
        }
    }

    /// `⟨self, other⟩` in closed form.
    pub fn inner(&self, other: &XiVector) -> BinomialValue {
        let m = self.set.intersection_len(&other.set) as u32;
        let (a0, alpha, ea) = self.shape();
        let (b0, beta, eb) = other.shape();
        // Σ_{j≥1} C(m,j)(ea·eb)^j is 2^m − 1 or −[m ≥ 1]
        if ea * eb == 1 {
            BinomialValue {
                coeff: alpha * beta,
                exp: m,
                offset: a0 * b0 - alpha * beta,
            }
        } else {
            BinomialValue {
                coeff: 0,
                exp: 0,
                offset: a0 * b0 - alpha * beta * i64::from(m >= 1),
            }
        }
    }

    pub fn norm_sq(&self) -> BinomialValue {
        self.inner(self)
    }

    pub fn materialize(&self, cap: usize) -> Result<SubsetVector, FactorError> {
        xi_vector(&self.set, self.sign, self.tilde, cap)
    }
}

/// An integer of the form `coeff·2^exp + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BinomialValue {
    pub coeff: i64,
    pub exp: u32,
    pub offset: i64,
}

impl BinomialValue {
    pub fn to_bigint(self) -> BigInt {
        BigInt::from(self.coeff) * (BigInt::from(1) << self.exp) + self.offset
    }

    pub fn to_i128(self) -> Option<i128> {
        if self.coeff == 0 {
            return Some(self.offset as i128);
        }
        let p = 1i128.checked_shl(self.exp).filter(|_| self.exp < 126)?;
        Some(self.coeff as i128 * p + self.offset as i128)
    }

    pub fn is_zero(self) -> bool {
        match self.to_i128() {
            Some(v) => v == 0,
            None => false,
        }
    }

    pub fn to_logreal(self) -> LogReal {
        if let Some(v) = self.to_i128().filter(|v| v.unsigned_abs() < 1u128 << 100) {
            return LogReal::from_f64(v as f64);
        }
        // |offset| is tiny next to 2^exp here
        let rel = self.offset as f64 / self.coeff as f64 * (-(self.exp as f64)).exp2();
        let mag = LogReal::pow2(self.exp as f64) * LogReal::from_f64((self.coeff.abs()) as f64);
        let v = mag * LogReal::from_f64(1.0 + rel);
        if self.coeff < 0 {
            -v
        } else {
            v
        }
    }
}

/// The explicit vector `ξ̃±_S` (tilde) or `ξ±_S`:
/// `ξ̃+_S(ω) = 1` and `ξ̃−_S(ω) = (−1)^|ω|` for `ω ⊆ S`,
/// `ξ+_S = ξ̃+_S − δ_∅` and `ξ−_S = −(ξ̃−_S − δ_∅)`.
pub fn xi_vector(
    set: &SubsetKey,
    sign: Sign,
    tilde: bool,
    cap: usize,
) -> Result<SubsetVector, FactorError> {
    if set.len() > cap {
        return Err(FactorError::SubsetTooLarge {
            size: set.len(),
            cap,
        });
    }
    let shape = XiVector::new(set.clone(), sign, tilde);
    let mut v = SubsetVector::zero();
    for mask in 0u64..(1u64 << set.len()) {
        let c = shape.rank_coefficient(mask.count_ones() as usize);
        v.set(set.sub(mask), Complex64::new(c as f64, 0.0));
    }
    Ok(v)
}

/// `⟨ξ−_T, ξ+_S⟩` evaluated on the explicit vectors.
pub fn xi_inner(s: &SubsetKey, t: &SubsetKey) -> Result<i64, FactorError> {
    let plus = xi_vector(s, Sign::Plus, false, DEFAULT_SUBSET_CAP)?;
    let minus = xi_vector(t, Sign::Minus, false, DEFAULT_SUBSET_CAP)?;
    exact_int(minus.inner(&plus)).ok_or(FactorError::NotExact)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BinomialSuiteReport {
    pub universe: usize,
    pub subsets: usize,
    pub norm_checks: usize,
    pub pairs_checked: usize,
    pub violations: usize,
    /// First failing `(S, T)` as bit masks over the universe.
    pub first_violation: Option<(u64, u64)>,
}

impl BinomialSuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Exhaustive check over all subsets `S, T` of `{0, …, universe−1}`:
/// `‖ξ̃±_S‖² = 2^|S|`, `‖ξ±_S‖² = 2^|S| − 1`, and
/// `⟨ξ−_T, ξ+_S⟩ = [S ∩ T ≠ ∅]`, all in exact integers on the explicit
/// vectors, plus agreement of the closed forms.
pub fn binomial_suite(universe: usize) -> Result<BinomialSuiteReport, FactorError> {
    assert!(universe <= 16, "universe too large for an exhaustive suite");
    let all = SubsetKey::from_sorted((0..universe as VertexId).collect());
    let count = 1u64 << universe;
    let keys: Vec<SubsetKey> = (0..count).map(|m| all.sub(m)).collect();
    let build = |sign, tilde| -> Result<Vec<SubsetVector>, FactorError> {
        keys.iter()
            .map(|k| xi_vector(k, sign, tilde, DEFAULT_SUBSET_CAP))
            .collect()
    };
    let plus = build(Sign::Plus, false)?;
    let minus = build(Sign::Minus, false)?;
    let plus_t = build(Sign::Plus, true)?;
    let minus_t = build(Sign::Minus, true)?;
    let mut violations = 0;
    let mut first = None;
    let mut norm_checks = 0;
    for (m, key) in keys.iter().enumerate() {
        let p = 1i64 << key.len();
        for (v, want) in [
            (&plus_t[m], p),
            (&minus_t[m], p),
            (&plus[m], p - 1),
            (&minus[m], p - 1),
        ] {
            norm_checks += 1;
            if exact_int(v.inner(v)) != Some(want) {
                violations += 1;
                first.get_or_insert((m as u64, m as u64));
            }
        }
    }
    for s in 0..count as usize {
        for t in 0..count as usize {
            let want = i64::from(s & t != 0);
            let explicit = exact_int(minus[t].inner(&plus[s]));
            let closed = XiVector::new(keys[t].clone(), Sign::Minus, false)
                .inner(&XiVector::new(keys[s].clone(), Sign::Plus, false))
                .to_i128();
            if explicit != Some(want) || closed != Some(want as i128) {
                violations += 1;
                first.get_or_insert((s as u64, t as u64));
            }
        }
    }
    Ok(BinomialSuiteReport {
        universe,
        subsets: count as usize,
        norm_checks,
        pairs_checked: (count * count) as usize,
        violations,
        first_violation: first,
    })
}
