use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::xi::{SubsetKey, XiVector};
use super::FactorError;
use crate::logreal::LogReal;

/// An elementary tensor `v_0 ⊗ v_1 ⊗ … ⊗ v_R` of subset vectors. Inner
/// products factor, so the tensor is never expanded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TensorVector {
    pub factors: Vec<XiVector>,
}

impl TensorVector {
    pub fn inner(&self, other: &TensorVector) -> LogReal {
        assert_eq!(self.factors.len(), other.factors.len(), "factor count mismatch");
        let mut acc = LogReal::ONE;
        for (a, b) in self.factors.iter().zip(&other.factors) {
            let v = a.inner(b);
            if v.is_zero() {
                return LogReal::ZERO;
            }
            acc = acc * v.to_logreal();
        }
        acc
    }

    /// The inner product as an exact integer, when it fits in `i128`.
    pub fn inner_exact(&self, other: &TensorVector) -> Option<i128> {
        assert_eq!(self.factors.len(), other.factors.len(), "factor count mismatch");
        let mut acc: i128 = 1;
        for (a, b) in self.factors.iter().zip(&other.factors) {
            let v = a.inner(b);
            if v.is_zero() {
                return Some(0);
            }
            acc = acc.checked_mul(v.to_i128()?)?;
        }
        Some(acc)
    }

    pub fn norm_sq(&self) -> LogReal {
        self.inner(self)
    }

    /// Full expansion into a map over tuples of subsets; only for tiny
    /// factors, as a reference for the factored inner product.
    pub fn expand(&self, cap: usize) -> Result<BTreeMap<Vec<SubsetKey>, Complex64>, FactorError> {
        let mut acc: BTreeMap<Vec<SubsetKey>, Complex64> = BTreeMap::new();
        acc.insert(Vec::new(), Complex64::new(1.0, 0.0));
        for f in &self.factors {
            let v = f.materialize(cap)?;
            let mut next = BTreeMap::new();
            for (key, c) in &acc {
                for (s, d) in v.iter() {
                    let mut k = key.clone();
                    k.push(s.clone());
                    next.insert(k, c * d);
                }
            }
            acc = next;
        }
        Ok(acc)
    }
}

/// `Σ conj(f)·g` over two expanded tensors.
#[cfg(test)]
pub(crate) fn expanded_inner(
    f: &BTreeMap<Vec<SubsetKey>, Complex64>,
    g: &BTreeMap<Vec<SubsetKey>, Complex64>,
) -> Complex64 {
    f.iter()
        .filter_map(|(k, a)| g.get(k).map(|b| a.conj() * b))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::xi::Sign;
    use proptest::prelude::*;

    fn xi(ids: &[u32], sign: Sign, tilde: bool) -> XiVector {
        XiVector::new(SubsetKey::new(ids.to_vec()), sign, tilde)
    }

    #[test]
    fn factored_inner_matches_expansion() {
        let a = TensorVector {
            factors: vec![xi(&[1, 2], Sign::Plus, false), xi(&[2, 3], Sign::Plus, true)],
        };
        let b = TensorVector {
            factors: vec![xi(&[2], Sign::Minus, false), xi(&[4], Sign::Minus, true)],
        };
        let ea = a.expand(8).unwrap();
        let eb = b.expand(8).unwrap();
        for (x, ex) in [(&a, &ea), (&b, &eb)] {
            for (y, ey) in [(&a, &ea), (&b, &eb)] {
                assert_eq!(
                    Some(expanded_inner(ex, ey).re as i128),
                    x.inner_exact(y)
                );
            }
        }
        assert_eq!(b.inner_exact(&a), Some(1));
    }

    proptest! {
        #[test]
        fn product_rule(
            sets in proptest::collection::vec(
                (proptest::collection::btree_set(0u32..6, 0..4), proptest::collection::btree_set(0u32..6, 0..4)),
                1..4),
            signs in proptest::collection::vec((any::<bool>(), any::<bool>()), 3),
        ) {
            let mk = |s: &std::collections::BTreeSet<u32>, plus: bool, j: usize| {
                XiVector::new(SubsetKey::new(s.iter().copied().collect()),
                    if plus { Sign::Plus } else { Sign::Minus }, j > 0)
            };
            let a = TensorVector { factors: sets.iter().enumerate().map(|(j, (s, _))| mk(s, signs[0].0, j)).collect() };
            let b = TensorVector { factors: sets.iter().enumerate().map(|(j, (_, t))| mk(t, signs[1].1, j)).collect() };
            let e = expanded_inner(&a.expand(8).unwrap(), &b.expand(8).unwrap());
            prop_assert_eq!(Some(e.re as i128), a.inner_exact(&b));
            let l = a.inner(&b).to_f64();
            prop_assert!((l - e.re).abs() <= 1e-9 * e.re.abs().max(1.0));
        }
    }
}
