//! Turning a feasible allocation into one whose per-function supports are chains.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::Instance;
use crate::lovasz::{chain_to_vector, vector_to_chain, FractionalVector, WeightedChain};
use crate::lp_relaxation::{check_feasible, FractionalAllocation, SupportEntry};
use crate::rational::{serde_rat, Rat};
use crate::subset::Subset;

/// Per-function chains `C_i^1 ⊋ C_i^2 ⊋ ... ⊋ C_i^{d_i}` with positive weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainAllocation {
    chains: Vec<WeightedChain>,
}

impl ChainAllocation {
    pub fn new(chains: Vec<WeightedChain>) -> Self {
        ChainAllocation { chains }
    }

    pub fn k(&self) -> usize {
        self.chains.len()
    }

    pub fn chains(&self) -> &[WeightedChain] {
        &self.chains
    }

    pub fn chain(&self, i: usize) -> &WeightedChain {
        &self.chains[i]
    }

    /// Chain length `d_i`.
    pub fn depth(&self, i: usize) -> usize {
        self.chains[i].len()
    }

    pub fn to_allocation(&self) -> FractionalAllocation {
        FractionalAllocation::new(self.chains.iter().map(|c| c.entries().to_vec()).collect())
    }

    pub fn objective(&self, inst: &Instance) -> Result<Rat> {
        self.to_allocation().objective(inst)
    }

    pub fn to_json(&self, objective: &Rat, iterations: Option<u64>) -> Result<String> {
        let mut support = Vec::new();
        for (i, c) in self.chains.iter().enumerate() {
            for (idx, (s, w)) in c.entries().iter().enumerate() {
                support.push(SupportEntry {
                    i,
                    set: *s,
                    weight: w.clone(),
                    chain_index: Some(idx),
                });
            }
        }
        let doc = SolutionDoc {
            objective: objective.clone(),
            support,
            iterations,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// A serialized solution file: either a raw LP solution or a chain allocation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionDoc {
    #[serde(with = "serde_rat")]
    pub objective: Rat,
    pub support: Vec<SupportEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
}

impl SolutionDoc {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn allocation(&self, k: usize) -> Result<FractionalAllocation> {
        FractionalAllocation::from_entries(k, &self.support)
    }
}

fn aggregate(n: usize, block: &[(Subset, Rat)]) -> Result<FractionalVector> {
    let mut x = vec![Rat::zero(); n];
    for (s, w) in block {
        for e in s.elements() {
            x[e] += w;
        }
    }
    FractionalVector::new(x)
}

fn require_feasible(inst: &Instance, y: &FractionalAllocation) -> Result<()> {
    let rep = check_feasible(inst, y);
    if rep.pass {
        Ok(())
    } else {
        Err(Error::contract(format!(
            "allocation is infeasible: {}",
            rep.violations.join("; ")
        )))
    }
}

/// Level-set uncrossing: each `y_i` is replaced by the chain of level sets of
/// its aggregate vector `Σ_S y_i(S) χ_S`. Feasibility is preserved exactly and,
/// for submodular `f_i`, the objective cannot increase.
pub fn uncross(inst: &Instance, y: &FractionalAllocation) -> Result<ChainAllocation> {
    require_feasible(inst, y)?;
    let n = inst.n();
    let chains = y
        .blocks()
        .iter()
        .map(|block| aggregate(n, block).map(|x| vector_to_chain(&x)))
        .collect::<Result<Vec<_>>>()?;
    let out = ChainAllocation { chains };
    debug_assert!(out
        .chains
        .iter()
        .zip(y.blocks())
        .all(|(c, b)| chain_to_vector(n, c) == aggregate(n, b).unwrap()));
    Ok(out)
}

/// Classic pairwise uncrossing: while some support holds incomparable `S, T`,
/// move `ε = min(y(S), y(T))` from both onto `S ∩ T` and `S ∪ T`. The pair is
/// the lexicographically smallest `(mask(S), mask(T))`. Kept as an independent
/// cross-check of [`uncross`].
pub fn pairwise_uncross_oracle(inst: &Instance, y: &FractionalAllocation) -> Result<ChainAllocation> {
    require_feasible(inst, y)?;
    let mut chains = Vec::with_capacity(y.k());
    for block in y.blocks() {
        let mut measure: BTreeMap<u32, Rat> = BTreeMap::new();
        for (s, w) in block {
            if w.is_positive() && !s.is_empty() {
                *measure.entry(s.mask()).or_insert_with(Rat::zero) += w;
            }
        }
        while let Some((s, t)) = first_crossing_pair(&measure) {
            let eps = measure[&s].clone().min(measure[&t].clone());
            for m in [s, t] {
                let w = measure.get_mut(&m).expect("pair is in the support");
                *w -= &eps;
                if w.is_zero() {
                    measure.remove(&m);
                }
            }
            for m in [s & t, s | t] {
                if m != 0 {
                    *measure.entry(m).or_insert_with(Rat::zero) += &eps;
                }
            }
        }
        let mut entries: Vec<(Subset, Rat)> = measure.into_iter().map(|(m, w)| (Subset(m), w)).collect();
        entries.sort_by_key(|e| std::cmp::Reverse(e.0.len()));
        chains.push(WeightedChain::new(entries)?);
    }
    Ok(ChainAllocation { chains })
}

fn first_crossing_pair(measure: &BTreeMap<u32, Rat>) -> Option<(u32, u32)> {
    let masks: Vec<u32> = measure.keys().copied().collect();
    for (a, &s) in masks.iter().enumerate() {
        for &t in &masks[a + 1..] {
            if Subset(s).crosses(Subset(t)) {
                return Some((s, t));
            }
        }
    }
    None
}
