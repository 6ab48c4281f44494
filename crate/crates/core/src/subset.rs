//! Ground sets and bitmask subsets.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported ground set.
pub const MAX_ELEMENTS: usize = 30;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundSet {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("ground set must be nonempty".into()));
        }
        if n > MAX_ELEMENTS {
            return Err(Error::capacity("ground set size", n, MAX_ELEMENTS));
        }
        Ok(GroundSet { n, labels: None })
    }

    pub fn full(&self) -> Subset {
        Subset::full(self.n)
    }

    pub fn contains(&self, s: Subset) -> bool {
        s.0 & !self.full().0 == 0
    }

    pub fn check(&self, s: Subset) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::contract(format!(
                "subset {s} has elements outside a ground set of size {}",
                self.n
            )))
        }
    }
}

/// A subset of `{0, .., n-1}` stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(pub u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn full(n: usize) -> Subset {
        debug_assert!(n <= MAX_ELEMENTS);
        Subset(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(e: usize) -> Subset {
        Subset(1 << e)
    }

    pub fn from_elements(elements: impl IntoIterator<Item = usize>) -> Subset {
        Subset(elements.into_iter().fold(0, |m, e| m | (1 << e)))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, e: usize) -> bool {
        e < 32 && self.0 >> e & 1 == 1
    }

    pub fn insert(self, e: usize) -> Subset {
        Subset(self.0 | 1 << e)
    }

    pub fn remove(self, e: usize) -> Subset {
        Subset(self.0 & !(1 << e))
    }

    pub fn union(self, o: Subset) -> Subset {
        Subset(self.0 | o.0)
    }

    pub fn intersection(self, o: Subset) -> Subset {
        Subset(self.0 & o.0)
    }

    pub fn difference(self, o: Subset) -> Subset {
        Subset(self.0 & !o.0)
    }

    pub fn complement(self, n: usize) -> Subset {
        Subset(!self.0 & Subset::full(n).0)
    }

    pub fn is_subset_of(self, o: Subset) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_proper_subset_of(self, o: Subset) -> bool {
        self.is_subset_of(o) && self != o
    }

    /// Neither set contains the other.
    pub fn crosses(self, o: Subset) -> bool {
        !self.is_subset_of(o) && !o.is_subset_of(self)
    }

    pub fn elements(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let e = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(e)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.elements().collect()
    }

    /// All subsets of `{0..n-1}` in mask order, the empty set first.
    pub fn all(n: usize) -> impl Iterator<Item = Subset> {
        (0..1u64 << n).map(|m| Subset(m as u32))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elements().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

// Serialized as the sorted list of element indices.
impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.elements())
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        if let Some(&e) = v.iter().find(|&&e| e >= MAX_ELEMENTS) {
            return Err(serde::de::Error::custom(format!(
                "element {e} out of supported range"
            )));
        }
        Ok(Subset::from_elements(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_algebra() {
        let a = Subset::from_elements([0, 2, 3]);
        let b = Subset::from_elements([2, 4]);
        assert_eq!(a.union(b).to_vec(), vec![0, 2, 3, 4]);
        assert_eq!(a.intersection(b).to_vec(), vec![2]);
        assert_eq!(a.difference(b).to_vec(), vec![0, 3]);
        assert_eq!(a.complement(5).to_vec(), vec![1, 4]);
        assert_eq!(a.len(), 3);
        assert!(a.contains(3) && !a.contains(1));
        assert!(a.crosses(b));
        assert!(Subset::from_elements([2]).is_proper_subset_of(b));
        assert_eq!(Subset::full(30).len(), 30);
    }

    #[test]
    fn ground_set_bounds() {
        assert!(GroundSet::new(0).is_err());
        assert!(matches!(GroundSet::new(31), Err(Error::Capacity { .. })));
        let g = GroundSet::new(3).unwrap();
        assert!(g.check(Subset::from_elements([0, 2])).is_ok());
        assert!(g.check(Subset::from_elements([3])).is_err());
    }

    #[test]
    fn json_is_sorted_element_list() {
        let s = Subset::from_elements([4, 1]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,4]");
        let back: Subset = serde_json::from_str("[4,1]").unwrap();
        assert_eq!(back, s);
    }
}
