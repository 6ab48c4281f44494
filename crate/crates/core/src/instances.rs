//! Instance generators: the lower-bound family with its fractional witness,
//! and seeded random coverage and facility-location families.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::function::{Instance, SubmodularFn, MAX_UNIVERSE};
use crate::lp_relaxation::FractionalAllocation;
use crate::rational::{int, rat, Rat};
use crate::subset::{GroundSet, Subset, MAX_ELEMENTS};

/// The gap family: one element `e_v` per vector `v ∈ Z_+^k` with coordinate
/// sum `s = pk - k + 1`, plus `pad` zero-cost elements.
#[derive(Debug, PartialEq, Eq)]
pub struct LowerBoundFamily {
    k: usize,
    p: usize,
    pad: usize,
    vectors: Vec<Vec<u32>>,
    /// Per function `i`: elements with `v_i >= 1`.
    n_masks: Vec<Subset>,
    /// Per function `i`: elements with `v_i = 0`.
    z_masks: Vec<Subset>,
}

impl LowerBoundFamily {
    pub fn new(k: usize, p: usize, pad: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Invalid(format!("lower-bound family needs k >= 2, got {k}")));
        }
        if p < 1 {
            return Err(Error::Invalid(format!("lower-bound family needs p >= 1, got {p}")));
        }
        let count = binomial(p * k, k - 1);
        let required = count.clone() + BigUint::from(pad);
        if required > BigUint::from(MAX_ELEMENTS) {
            return Err(Error::capacity(
                format!("lower-bound family (k={k}, p={p}, pad={pad}) ground set"),
                required,
                MAX_ELEMENTS,
            ));
        }
        let s = (p * k - k + 1) as u32;
        let vectors = compositions(s, k);
        debug_assert_eq!(Some(vectors.len()), count.to_usize());

        let n_masks = (0..k)
            .map(|i| Subset::from_elements((0..vectors.len()).filter(|&e| vectors[e][i] >= 1)))
            .collect();
        let z_masks = (0..k)
            .map(|i| Subset::from_elements((0..vectors.len()).filter(|&e| vectors[e][i] == 0)))
            .collect();
        Ok(LowerBoundFamily {
            k,
            p,
            pad,
            vectors,
            n_masks,
            z_masks,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    /// Coordinate sum `pk - k + 1`.
    pub fn level_count(&self) -> usize {
        self.p * self.k - self.k + 1
    }

    /// Number of vector elements `|V|`.
    pub fn vector_count(&self) -> usize {
        self.vectors.len()
    }

    pub fn n(&self) -> usize {
        self.vectors.len() + self.pad
    }

    /// Vectors in lexicographic order; element `e` corresponds to `vectors()[e]`.
    pub fn vectors(&self) -> &[Vec<u32>] {
        &self.vectors
    }

    pub fn element_of(&self, v: &[u32]) -> Option<usize> {
        self.vectors.binary_search_by(|w| w.as_slice().cmp(v)).ok()
    }

    pub fn n_mask(&self, i: usize) -> Subset {
        self.n_masks[i]
    }

    pub fn z_mask(&self, i: usize) -> Subset {
        self.z_masks[i]
    }

    /// Elements outside every `N_i` and `Z_i`.
    pub fn pad_mask(&self) -> Subset {
        Subset::full(self.n()).difference(Subset::full(self.vectors.len()))
    }

    /// `N_i^j = {e_v : v_i >= j}`.
    pub fn level_set(&self, i: usize, j: u32) -> Subset {
        Subset::from_elements((0..self.vectors.len()).filter(|&e| self.vectors[e][i] >= j))
    }

    pub(crate) fn value(&self, i: usize, s: Subset) -> u64 {
        let (k, p) = (self.k as u64, self.p as u64);
        if !s.intersection(self.z_masks[i]).is_empty() {
            return 2 * p * k + 1;
        }
        let hit = s.intersection(self.n_masks[i]);
        hit.elements()
            .map(|e| (2 * p + 1).saturating_sub(self.vectors[e][i] as u64))
            .max()
            .unwrap_or(0)
    }

    /// Exact objective of the fractional witness,
    /// `(k/s)·Σ_{j≤s} max{0, 2p+1-j}` with `s = pk-k+1`.
    pub fn witness_objective(&self) -> Rat {
        let (k, p, s) = (self.k as i64, self.p as i64, self.level_count() as i64);
        let sum: i64 = (1..=s.min(2 * p)).map(|j| 2 * p + 1 - j).sum();
        rat(k * sum, s)
    }

    /// `pk(2p+1)/(pk-k+1)`, an upper bound on the witness objective that is
    /// tight exactly when `pk-k+1 ≥ 2p`.
    pub fn witness_objective_bound(&self) -> Rat {
        let (k, p) = (self.k as i64, self.p as i64);
        rat(p * k * (2 * p + 1), p * k - k + 1)
    }

    /// Every partition costs at least `pk + k`.
    pub fn integral_lower_bound(&self) -> Rat {
        int((self.p * self.k + self.k) as i64)
    }
}

/// All `v ∈ Z_+^k` with `Σ v = s`, lexicographically ascending.
fn compositions(s: u32, k: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(rest);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for x in 0..=rest {
            prefix.push(x);
            rec(rest - x, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(s, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::from(0u32);
    }
    let r = r.min(n - r);
    (0..r).fold(BigUint::from(1u32), |acc, t| acc * BigUint::from(n - t) / BigUint::from(t + 1))
}

pub fn gen_lower_bound(k: usize, p: usize, pad: usize) -> Result<Instance> {
    let family = Arc::new(LowerBoundFamily::new(k, p, pad)?);
    let ground = GroundSet::new(family.n())?;
    let functions = (0..k)
        .map(|i| SubmodularFn::lower_bound(family.clone(), i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Instance::new(ground, functions)?
        .with_metadata("generator", "lowerbound")
        .with_metadata("k", k)
        .with_metadata("p", p)
        .with_metadata("pad", pad))
}

/// The feasible fractional solution `z`: weight `1/(pk-k+1)` on `N_1^j ∪ N^c`
/// for the first function and on `N_i^j` for the others.
pub fn lower_bound_witness(family: &LowerBoundFamily) -> FractionalAllocation {
    let s = family.level_count();
    let w = rat(1, s as i64);
    let pad = family.pad_mask();
    let blocks = (0..family.k())
        .map(|i| {
            (1..=s as u32)
                .map(|j| {
                    let mut set = family.level_set(i, j);
                    if i == 0 {
                        set = set.union(pad);
                    }
                    (set, w.clone())
                })
                .collect()
        })
        .collect();
    FractionalAllocation::new(blocks)
}

#[derive(Clone, Debug)]
pub struct CoverageParams {
    pub n: usize,
    pub k: usize,
    pub universe: usize,
    /// Probability that an element covers a given universe item.
    pub density: f64,
    /// Use weight 1 for every item instead of random rationals.
    pub unit_weights: bool,
    pub seed: u64,
}

pub fn gen_coverage(params: &CoverageParams) -> Result<Instance> {
    let CoverageParams {
        n,
        k,
        universe,
        density,
        unit_weights,
        seed,
    } = *params;
    let ground = GroundSet::new(n)?;
    if k < 2 {
        return Err(Error::Invalid(format!("need k >= 2, got {k}")));
    }
    if universe > MAX_UNIVERSE {
        return Err(Error::capacity("coverage universe", universe, MAX_UNIVERSE));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Invalid(format!("density {density} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut functions = Vec::with_capacity(k);
    for _ in 0..k {
        let weights: Vec<Rat> = (0..universe)
            .map(|_| {
                if unit_weights {
                    int(1)
                } else {
                    rat(rng.gen_range(1..=12), rng.gen_range(1..=4))
                }
            })
            .collect();
        let covers: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..universe).filter(|_| rng.gen_bool(density)).collect())
            .collect();
        functions.push(SubmodularFn::coverage(n, weights, &covers)?);
    }
    Ok(Instance::new(ground, functions)?
        .with_metadata("generator", "coverage")
        .with_metadata("seed", seed)
        .with_metadata("universe", universe)
        .with_metadata("density", density)
        .with_metadata("unit_weights", unit_weights))
}

#[derive(Clone, Debug)]
pub struct FacilityParams {
    pub n: usize,
    pub k: usize,
    /// Inclusive integer range for opening costs.
    pub opening: (u32, u32),
    /// Inclusive integer range for per-element costs.
    pub assignment: (u32, u32),
    pub seed: u64,
}

pub fn gen_facility_location(params: &FacilityParams) -> Result<Instance> {
    let FacilityParams {
        n,
        k,
        opening,
        assignment,
        seed,
    } = *params;
    let ground = GroundSet::new(n)?;
    if k < 2 {
        return Err(Error::Invalid(format!("need k >= 2, got {k}")));
    }
    if opening.0 > opening.1 || assignment.0 > assignment.1 {
        return Err(Error::Invalid("cost range lower end exceeds upper end".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut functions = Vec::with_capacity(k);
    for _ in 0..k {
        let q = int(rng.gen_range(opening.0..=opening.1) as i64);
        let costs = (0..n)
            .map(|_| int(rng.gen_range(assignment.0..=assignment.1) as i64))
            .collect();
        functions.push(SubmodularFn::facility_location(q, costs)?);
    }
    Ok(Instance::new(ground, functions)?
        .with_metadata("generator", "facility")
        .with_metadata("seed", seed)
        .with_metadata("opening", format!("{}..={}", opening.0, opening.1))
        .with_metadata("assignment", format!("{}..={}", assignment.0, assignment.1)))
}
