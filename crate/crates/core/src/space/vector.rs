use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Finitely supported real sequence indexed from 1. Stores only nonzero
/// entries, with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector<T> {
    entries: Vec<(u64, T)>,
}

impl<T: Real> SparseVector<T> {
    pub fn zero() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// Builds from `(index, value)` pairs; zeros are dropped, indices must be
    /// positive and distinct (any order).
    pub fn from_entries(entries: impl IntoIterator<Item = (u64, T)>) -> Result<Self> {
        let mut v: Vec<(u64, T)> = entries.into_iter().collect();
        v.sort_by_key(|e| e.0);
        for w in v.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidVector(format!("duplicate index {}", w[0].0)));
            }
        }
        if let Some(&(i, x)) = v.iter().find(|&&(i, x)| i == 0 || !x.is_finite()) {
            return Err(Error::InvalidVector(format!(
                "entry ({i}, {x}) needs a positive index and a finite value"
            )));
        }
        v.retain(|e| e.1 != T::zero());
        Ok(Self { entries: v })
    }

    /// Dense values at indices `1..=len`.
    pub fn from_dense(values: &[T]) -> Self {
        Self {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != T::zero())
                .map(|(i, &x)| (i as u64 + 1, x))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(u64, T)] {
        &self.entries
    }

    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: u64) -> T {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map(|k| self.entries[k].1)
            .unwrap_or_else(|_| T::zero())
    }

    pub fn max_abs(&self) -> T {
        self.values().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, c: T) -> Self {
        if c == T::zero() {
            return Self::zero();
        }
        Self {
            entries: self.entries.iter().map(|&(i, x)| (i, c * x)).collect(),
        }
    }

    pub fn map_values(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|&(i, x)| (i, f(x)))
                .filter(|e| e.1 != T::zero())
                .collect(),
        }
    }

    /// Merged walk over the union of supports: `f(index, self_i, other_i)`.
    pub fn zip_union<R>(&self, other: &Self, mut f: impl FnMut(u64, T, T) -> R) -> Vec<R> {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(a.len().max(b.len()));
        while i < a.len() || j < b.len() {
            if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(f(a[i].0, a[i].1, T::zero()));
                i += 1;
            } else if i >= a.len() || b[j].0 < a[i].0 {
                out.push(f(b[j].0, T::zero(), b[j].1));
                j += 1;
            } else {
                out.push(f(a[i].0, a[i].1, b[j].1));
                i += 1;
                j += 1;
            }
        }
        out
    }

    fn combine(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            entries: self
                .zip_union(other, |i, x, y| (i, f(x, y)))
                .into_iter()
                .filter(|e| e.1 != T::zero())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |x, y| x - y)
    }

    /// Plain `ℓ_p` norm, `p >= 1`.
    pub fn lp_norm(&self, p: T) -> T {
        let m = self.max_abs();
        if m == T::zero() {
            return T::zero();
        }
        // scaled by the max entry to stay clear of over/underflow
        let s: T = self.values().map(|x| (x.abs() / m).powf(p)).sum();
        m * s.powf(p.recip())
    }

    pub fn l2_norm(&self) -> T {
        self.lp_norm(T::one() + T::one())
    }
}

impl<T: Real> Serialize for SparseVector<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a, T> {
            entries: &'a [(u64, T)],
        }
        Repr {
            entries: &self.entries,
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for SparseVector<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "T: Real")]
        struct Repr<T> {
            entries: Vec<(u64, T)>,
        }
        let r = Repr::<T>::deserialize(d)?;
        SparseVector::from_entries(r.entries).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn drops_zeros_and_sorts() {
        let v = SparseVector::from_entries([(5, 1.0), (2, 0.0), (1, -2.0)]).unwrap();
        assert_eq!(v.entries(), &[(1, -2.0), (5, 1.0)]);
        assert_eq!(v.get(2), 0.0);
        assert!(SparseVector::from_entries([(1, 1.0), (1, 2.0)]).is_err());
        assert!(SparseVector::from_entries([(0, 1.0)]).is_err());
        assert!(SparseVector::from_entries([(1, f64::NAN)]).is_err());
    }

    #[test]
    fn arithmetic_cancels_exactly() {
        let x = SparseVector::from_dense(&[1.0, 2.0, 0.0, 3.0]);
        let y = SparseVector::from_dense(&[1.0, 0.0, 5.0]);
        assert_eq!(x.sub(&y).entries(), &[(2, 2.0), (3, -5.0), (4, 3.0)]);
        assert!(x.sub(&x).is_zero());
        assert_eq!(x.add(&y).get(1), 2.0);
        assert_eq!(SparseVector::from_dense(&[3.0, 4.0]).l2_norm(), 5.0);
    }

    #[test]
    fn json_form() {
        let v: SparseVector<f64> = serde_json::from_str(r#"{"entries": [[2, 4.0], [1, 3.0]]}"#).unwrap();
        assert_eq!(v.entries(), &[(1, 3.0), (2, 4.0)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"entries":[[1,3.0],[2,4.0]]}"#);
        assert!(serde_json::from_str::<SparseVector<f64>>(r#"{"entries": [[0, 1.0]]}"#).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip(vals in proptest::collection::vec((1u64..50, -1e3f64..1e3), 0..12)) {
            let mut seen = std::collections::BTreeMap::new();
            for (i, x) in vals { seen.insert(i, x); }
            let v = SparseVector::from_entries(seen).unwrap();
            let back: SparseVector<f64> = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
            prop_assert_eq!(v, back);
        }
    }
}
