//! Lovász extension and the translation between fractional vectors and
//! weighted chains of level sets.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::function::SubmodularFn;
use crate::rational::Rat;
use crate::subset::Subset;

/// A point of `[0,1]^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalVector(Vec<Rat>);

impl FractionalVector {
    pub fn new(x: Vec<Rat>) -> Result<Self> {
        if let Some(j) = x.iter().position(|v| v.is_negative() || *v > Rat::one()) {
            return Err(Error::contract(format!("coordinate {j} outside [0, 1]")));
        }
        Ok(FractionalVector(x))
    }

    pub fn zero(n: usize) -> Self {
        FractionalVector(vec![Rat::zero(); n])
    }

    pub fn indicator(n: usize, s: Subset) -> Self {
        FractionalVector((0..n).map(|e| if s.contains(e) { Rat::one() } else { Rat::zero() }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[Rat] {
        &self.0
    }

    /// Element indices by descending coordinate, ties by ascending index.
    fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.0.len()).collect();
        idx.sort_by(|&a, &b| self.0[b].cmp(&self.0[a]).then(a.cmp(&b)));
        idx
    }
}

/// Sets `S_1 ⊋ S_2 ⊋ ...`, each nonempty with a positive weight.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeightedChain {
    entries: Vec<(Subset, Rat)>,
}

impl WeightedChain {
    pub fn new(entries: Vec<(Subset, Rat)>) -> Result<Self> {
        for (idx, (s, w)) in entries.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::contract("chain sets must be nonempty"));
            }
            if !w.is_positive() {
                return Err(Error::contract(format!("chain weight on {s} is not positive")));
            }
            if idx > 0 && !s.is_proper_subset_of(entries[idx - 1].0) {
                return Err(Error::contract(format!(
                    "{s} is not strictly inside {}",
                    entries[idx - 1].0
                )));
            }
        }
        let chain = WeightedChain { entries };
        if let Some(first) = chain.entries.first() {
            for e in first.0.elements() {
                if chain.coverage(e) > Rat::one() {
                    return Err(Error::contract(format!("element {e} covered more than once")));
                }
            }
        }
        Ok(chain)
    }

    pub fn empty() -> Self {
        WeightedChain::default()
    }

    pub fn entries(&self) -> &[(Subset, Rat)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn coverage(&self, e: usize) -> Rat {
        self.entries
            .iter()
            .filter(|(s, _)| s.contains(e))
            .fold(Rat::zero(), |acc, (_, w)| acc + w)
    }

    /// `Σ_S w(S) f(S)`.
    pub fn cost(&self, f: &SubmodularFn) -> Result<Rat> {
        let mut total = Rat::zero();
        for (s, w) in &self.entries {
            total += w * f.eval(*s)?;
        }
        Ok(total)
    }
}

fn check_dim(f: &SubmodularFn, x: &FractionalVector) -> Result<()> {
    if x.len() != f.n() {
        return Err(Error::contract(format!(
            "vector has dimension {}, function has ground size {}",
            x.len(),
            f.n()
        )));
    }
    Ok(())
}

/// `f̂(x) = Σ_j (x_j - x_{j+1}) f(S_j)` over coordinates sorted descending.
pub fn lovasz_value(f: &SubmodularFn, x: &FractionalVector) -> Result<Rat> {
    check_dim(f, x)?;
    let order = x.order();
    let mut total = Rat::zero();
    let mut prefix = Subset::EMPTY;
    for (pos, &e) in order.iter().enumerate() {
        prefix = prefix.insert(e);
        let next = order
            .get(pos + 1)
            .map(|&e2| x.0[e2].clone())
            .unwrap_or_else(Rat::zero);
        let gap = &x.0[e] - next;
        if !gap.is_zero() {
            total += gap * f.value(prefix);
        }
    }
    Ok(total)
}

/// Level-set decomposition of `x`, largest set first.
pub fn vector_to_chain(x: &FractionalVector) -> WeightedChain {
    let order = x.order();
    let mut entries = Vec::new();
    let mut prefix = Subset::EMPTY;
    for (pos, &e) in order.iter().enumerate() {
        prefix = prefix.insert(e);
        let next = order
            .get(pos + 1)
            .map(|&e2| x.0[e2].clone())
            .unwrap_or_else(Rat::zero);
        let gap = &x.0[e] - next;
        if gap.is_positive() {
            entries.push((prefix, gap));
        }
    }
    entries.reverse();
    WeightedChain { entries }
}

pub fn chain_to_vector(n: usize, c: &WeightedChain) -> FractionalVector {
    let mut x = vec![Rat::zero(); n];
    for (s, w) in &c.entries {
        for e in s.elements() {
            x[e] += w;
        }
    }
    FractionalVector(x)
}
