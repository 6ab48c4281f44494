//! The k/2 rounding of a chain allocation.
//!
//! The chain allocation is scaled by `M = k(k-1)·L` (`L` the lcm of the weight
//! denominators), so that each chain `i` becomes a multiset of `M` sets ordered
//! from largest to smallest: `U_i^j` is the `j`-th one, and `∅` past the end.
//! The sets are never materialized; `U_i^j` is found by binary search over the
//! prefix counts `P_i^ℓ = Σ_{p ≤ ℓ} M·y_i(C_i^p)`.
//!
//! With `m = M / (k(k-1))` and period `T = 2m(k-1)`, the index tuples
//!
//! ```text
//! a_i^j = mod(2m(i-1) + j)                          for i < k
//! a_k^j = mod((2m - j + 1)(k-1)) - floor((j-1)/2m)
//! ```
//!
//! for `j ∈ [1, T]` each satisfy `Σ_i a_i^j = M + k - ceil(j/2m) ≤ M + k - 1`,
//! hence cover the ground set, and per coordinate they are pairwise distinct.
//! The cheapest of these `T` covers costs at most `k/2` times the fractional
//! objective. Its sets are shrunk to a partition by assigning each element to
//! the first covering block.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::chains::ChainAllocation;
use crate::error::{Error, Result};
use crate::function::Instance;
use crate::rational::{lcm_denominators, render, serde_opt_rat, serde_rat, Rat};
use crate::subset::Subset;

/// Largest period for which the exhaustive scan over every `j` is also run.
pub const FULL_SCAN_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledChain {
    n: usize,
    big_m: BigInt,
    m: BigInt,
    sets: Vec<Vec<Subset>>,
    prefix: Vec<Vec<BigInt>>,
}

impl ScaledChain {
    pub fn k(&self) -> usize {
        self.sets.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The scale `M`.
    pub fn big_m(&self) -> &BigInt {
        &self.big_m
    }

    /// `m = M / (k(k-1))`.
    pub fn m(&self) -> &BigInt {
        &self.m
    }

    /// Number of tuples, `2m(k-1)`.
    pub fn period(&self) -> BigInt {
        BigInt::from(2 * (self.k() - 1)) * &self.m
    }

    pub fn sets(&self, i: usize) -> &[Subset] {
        &self.sets[i]
    }

    pub fn prefix(&self, i: usize) -> &[BigInt] {
        &self.prefix[i]
    }

    /// Index `ℓ` (0-based) of `U_i^j` in chain `i`, or `d_i` when it is empty.
    fn level(&self, i: usize, j: &BigInt) -> usize {
        self.prefix[i].partition_point(|p| p < j)
    }

    fn set_at_level(&self, i: usize, level: usize) -> Subset {
        self.sets[i].get(level).copied().unwrap_or(Subset::EMPTY)
    }

    /// `U_i^j` for `j ∈ [1, M]`.
    pub fn u_set(&self, i: usize, j: &BigInt) -> Result<Subset> {
        if i >= self.k() {
            return Err(Error::contract(format!("function index {i} out of range")));
        }
        if j < &BigInt::one() || j > &self.big_m {
            return Err(Error::contract(format!("index {j} outside [1, {}]", self.big_m)));
        }
        Ok(self.set_at_level(i, self.level(i, j)))
    }

    /// Number of `j ∈ [1, M]` with `U_i^j = C_i^ℓ`, from prefix counts.
    pub fn multiplicity(&self, i: usize, level: usize) -> BigInt {
        let hi = &self.prefix[i][level];
        if level == 0 {
            hi.clone()
        } else {
            hi - &self.prefix[i][level - 1]
        }
    }
}

/// Scales a chain allocation over a ground set of `n` elements.
pub fn scale_chain(c: &ChainAllocation, n: usize) -> Result<ScaledChain> {
    let k = c.k();
    if k < 2 {
        return Err(Error::contract(format!("need k >= 2 chains, got {k}")));
    }
    let lcm = lcm_denominators(c.chains().iter().flat_map(|ch| ch.entries().iter().map(|(_, w)| w)));
    let m = lcm;
    let big_m = BigInt::from(k * (k - 1)) * &m;
    let scale = Rat::from_integer(big_m.clone());
    let mut sets = Vec::with_capacity(k);
    let mut prefix = Vec::with_capacity(k);
    for ch in c.chains() {
        let mut acc = BigInt::zero();
        let mut p = Vec::with_capacity(ch.len());
        for (_, w) in ch.entries() {
            let count = w * &scale;
            debug_assert!(count.is_integer() && count.is_positive());
            acc += count.to_integer();
            p.push(acc.clone());
        }
        if acc > big_m {
            return Err(Error::contract("chain weights sum above one"));
        }
        sets.push(ch.entries().iter().map(|(s, _)| *s).collect());
        prefix.push(p);
    }
    Ok(ScaledChain {
        n,
        big_m,
        m,
        sets,
        prefix,
    })
}

/// The `k` coordinates `a_1^j, .., a_k^j` of tuple `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleIndex {
    pub j: BigInt,
    pub a: Vec<BigInt>,
}

/// Representative of `x` modulo `period` in `[1, period]`.
///
/// Arguments of the last coordinate are zero or negative once `j > 2m + 1`;
/// they are reduced by ordinary congruence.
fn mod_period(x: &BigInt, period: &BigInt) -> BigInt {
    let r = x.mod_floor(period);
    if r.is_zero() {
        period.clone()
    } else {
        r
    }
}

pub fn tuple_at(sc: &ScaledChain, j: &BigInt) -> Result<TupleIndex> {
    let k = sc.k();
    let period = sc.period();
    if j < &BigInt::one() || j > &period {
        return Err(Error::contract(format!("tuple index {j} outside [1, {period}]")));
    }
    let two_m = &sc.m * 2;
    let km1 = BigInt::from(k - 1);
    let mut a = Vec::with_capacity(k);
    for idx in 0..k - 1 {
        a.push(mod_period(&(&two_m * idx + j), &period));
    }
    let last = mod_period(&((&two_m - j + 1) * &km1), &period) - (j - 1u32).div_floor(&two_m);
    a.push(last);

    let block = j.div_ceil(&two_m);
    let sum: BigInt = a.iter().sum();
    if sum != &sc.big_m + k - &block || a.iter().any(|x| x < &BigInt::one() || x > &sc.big_m) {
        return Err(Error::Internal(format!("tuple {j} breaks its range or sum identity")));
    }
    Ok(TupleIndex { j: j.clone(), a })
}

/// Whether `∪_i U_i^{a_i}` is the whole ground set.
pub fn covering_check(sc: &ScaledChain, t: &TupleIndex) -> Result<bool> {
    if t.a.len() != sc.k() {
        return Err(Error::contract("tuple length differs from k"));
    }
    let mut union = Subset::EMPTY;
    for (i, a) in t.a.iter().enumerate() {
        union = union.union(sc.u_set(i, a)?);
    }
    Ok(union == Subset::full(sc.n))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JStar {
    pub j: BigInt,
    pub tuple: TupleIndex,
    pub value: Rat,
    /// Breakpoints `j_q` at which the cost was evaluated.
    pub evaluated: Vec<BigInt>,
    /// Minimizer and minimum of the exhaustive scan, when it was run.
    pub full_scan: Option<(BigInt, Rat)>,
}

/// Cost `f_i(C_i^ℓ)` for every level, with a trailing zero for `∅`.
fn level_costs(inst: &Instance, sc: &ScaledChain) -> Result<Vec<Vec<Rat>>> {
    (0..sc.k())
        .map(|i| {
            let mut v = sc.sets[i]
                .iter()
                .map(|s| inst.functions[i].eval(*s))
                .collect::<Result<Vec<_>>>()?;
            v.push(Rat::zero());
            Ok(v)
        })
        .collect()
}

/// Indices where some `U_i^{a_i^j}` can change, plus `1` and every piece start.
///
/// Each `a_i^j` is piecewise linear in `j`: coordinates `i < k` have slope `+1`
/// with one wrap at `j = 2m(k-i)`; coordinate `k` has slope `-(k-1)` on each
/// block `[2m(p-1)+1, 2mp]`. Crossings of the prefix thresholds are solved
/// per piece.
pub fn breakpoint_candidates(sc: &ScaledChain) -> Vec<BigInt> {
    let k = sc.k();
    let period = sc.period();
    let two_m = &sc.m * 2;
    let km1 = BigInt::from(k - 1);
    let mut out: BTreeSet<BigInt> = BTreeSet::new();
    out.insert(BigInt::one());

    for idx in 0..k - 1 {
        let base: BigInt = &two_m * idx;
        let mut pieces = vec![(BigInt::one(), &period - &base, base.clone())];
        if base.is_positive() {
            pieces.push((&period - &base + 1, period.clone(), &base - &period));
        }
        for (lo, hi, off) in pieces {
            for p in &sc.prefix[idx] {
                let j = p + 1 - &off;
                if j > lo && j <= hi {
                    out.insert(j);
                }
            }
            out.insert(lo);
        }
    }

    let last = k - 1;
    for p in 1..k {
        let lo = &two_m * (p - 1) + 1;
        let hi = &two_m * p;
        for threshold in &sc.prefix[last] {
            let j = &hi + 1 - (threshold + (p - 1)).div_floor(&km1);
            if j > lo && j <= hi {
                out.insert(j);
            }
        }
        out.insert(lo);
    }
    out.into_iter().collect()
}

/// Minimizes `Σ_i f_i(U_i^{a_i^j})` over `j ∈ [1, 2m(k-1)]`, evaluating only at
/// the indices where the tuple of sets changes. Ties go to the smallest `j`.
pub fn find_jstar(inst: &Instance, sc: &ScaledChain) -> Result<JStar> {
    if inst.k != sc.k() || inst.n() != sc.n {
        return Err(Error::contract("scaled chain does not match the instance"));
    }
    let costs = level_costs(inst, sc)?;
    let eval = |levels: &[usize]| -> Rat {
        levels
            .iter()
            .enumerate()
            .fold(Rat::zero(), |acc, (i, &l)| acc + &costs[i][l])
    };

    let mut best: Option<(BigInt, Rat)> = None;
    let mut evaluated = Vec::new();
    let mut prev: Option<Vec<usize>> = None;
    for j in breakpoint_candidates(sc) {
        let t = tuple_at(sc, &j)?;
        let levels: Vec<usize> = t.a.iter().enumerate().map(|(i, a)| sc.level(i, a)).collect();
        if prev.as_ref() == Some(&levels) {
            continue;
        }
        let v = eval(&levels);
        if best.as_ref().is_none_or(|(_, b)| &v < b) {
            best = Some((j.clone(), v));
        }
        evaluated.push(j);
        prev = Some(levels);
    }
    let (j, value) = best.expect("j = 1 is always a candidate");

    let period = sc.period();
    let full_scan = match period.to_u64() {
        Some(t) if t <= FULL_SCAN_LIMIT => Some(full_scan(sc, &costs, t)?),
        _ => None,
    };
    if let Some((fj, fv)) = &full_scan {
        if fv != &value || fj != &j {
            return Err(Error::Internal(format!(
                "breakpoint scan found j = {j} with value {}, full scan found j = {fj} with value {}",
                render(&value),
                render(fv)
            )));
        }
    }
    let tuple = tuple_at(sc, &j)?;
    Ok(JStar {
        j,
        tuple,
        value,
        evaluated,
        full_scan,
    })
}

fn full_scan(sc: &ScaledChain, costs: &[Vec<Rat>], period: u64) -> Result<(BigInt, Rat)> {
    let k = sc.k();
    let m = sc.m.to_u64().expect("m fits when the period does");
    let two_m = 2 * m;
    let prefix: Vec<Vec<u64>> = sc
        .prefix
        .iter()
        .map(|p| p.iter().map(|x| x.to_u64().expect("prefix counts are at most M")).collect())
        .collect();
    let mut cache: HashMap<Vec<usize>, Rat> = HashMap::new();
    let mut best: Option<(u64, Rat)> = None;
    let mut levels = vec![0usize; k];
    for j in 1..=period {
        for idx in 0..k - 1 {
            let a = (two_m * idx as u64 + j - 1) % period + 1;
            levels[idx] = prefix[idx].partition_point(|&p| p < a);
        }
        let raw = (2 * m as i128 - j as i128 + 1) * (k as i128 - 1);
        let a_last = (raw - 1).rem_euclid(period as i128) + 1 - ((j - 1) / two_m) as i128;
        levels[k - 1] = prefix[k - 1].partition_point(|&p| (p as i128) < a_last);
        let v = cache
            .entry(levels.clone())
            .or_insert_with(|| {
                levels
                    .iter()
                    .enumerate()
                    .fold(Rat::zero(), |acc, (i, &l)| acc + &costs[i][l])
            })
            .clone();
        if best.as_ref().is_none_or(|(_, b)| &v < b) {
            best = Some((j, v));
        }
    }
    let (j, v) = best.expect("period is positive");
    Ok((BigInt::from(j), v))
}

/// Assignment of every element to one of `k` blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub assignment: Vec<usize>,
}

impl Partition {
    pub fn from_blocks(n: usize, blocks: &[Subset]) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n];
        for (i, b) in blocks.iter().enumerate() {
            for e in b.elements() {
                if e >= n {
                    return Err(Error::contract(format!("element {e} outside ground set")));
                }
                if assignment[e] != usize::MAX {
                    return Err(Error::contract(format!("element {e} assigned twice")));
                }
                assignment[e] = i;
            }
        }
        if let Some(e) = assignment.iter().position(|&a| a == usize::MAX) {
            return Err(Error::contract(format!("element {e} unassigned")));
        }
        Ok(Partition { assignment })
    }

    pub fn blocks(&self, k: usize) -> Vec<Subset> {
        let mut out = vec![Subset::EMPTY; k];
        for (e, &i) in self.assignment.iter().enumerate() {
            out[i] = out[i].insert(e);
        }
        out
    }

    pub fn cost(&self, inst: &Instance) -> Result<Rat> {
        if self.assignment.len() != inst.n() || self.assignment.iter().any(|&i| i >= inst.k) {
            return Err(Error::contract("partition does not match the instance"));
        }
        inst.cost(&self.blocks(inst.k))
    }
}

/// Assigns each element to the first cover set containing it.
pub fn extract_partition(inst: &Instance, cover: &[Subset]) -> Result<Partition> {
    if cover.len() != inst.k {
        return Err(Error::contract(format!("expected {} cover sets", inst.k)));
    }
    let n = inst.n();
    let assignment = (0..n)
        .map(|e| {
            cover
                .iter()
                .position(|s| s.contains(e))
                .ok_or_else(|| Error::contract(format!("cover misses element {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Partition { assignment })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundingOutcome {
    pub big_m: BigInt,
    pub m: BigInt,
    pub jstar: BigInt,
    pub tuple: Vec<BigInt>,
    pub cover: Vec<Subset>,
    pub partition: Partition,
    pub value: Rat,
    /// `Σ f_i(U_i^{a_i})` at `j*`, an upper bound on `value`.
    pub cover_value: Rat,
    pub lp_value: Rat,
    pub candidates_evaluated: usize,
    pub full_scan_value: Option<Rat>,
}

impl RoundingOutcome {
    /// `value / lp_value`, undefined for a zero optimum.
    pub fn ratio(&self) -> Option<Rat> {
        (!self.lp_value.is_zero()).then(|| &self.value / &self.lp_value)
    }

    pub fn to_json(&self) -> Result<String> {
        let k = self.cover.len();
        let doc = RoundingDoc {
            big_m: self.big_m.to_string(),
            m: self.m.to_string(),
            jstar: self.jstar.to_string(),
            tuple: self.tuple.iter().map(|a| a.to_string()).collect(),
            cover: self.cover.clone(),
            partition: self.partition.blocks(k),
            value: self.value.clone(),
            cover_value: self.cover_value.clone(),
            lp_value: self.lp_value.clone(),
            ratio: self.ratio(),
            candidates_evaluated: Some(self.candidates_evaluated),
            full_scan_value: self.full_scan_value.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str, n: usize) -> Result<Self> {
        let doc: RoundingDoc = serde_json::from_str(s)?;
        let int = |x: &str| -> Result<BigInt> {
            x.parse().map_err(|_| Error::Parse(format!("not an integer: {x:?}")))
        };
        Ok(RoundingOutcome {
            big_m: int(&doc.big_m)?,
            m: int(&doc.m)?,
            jstar: int(&doc.jstar)?,
            tuple: doc.tuple.iter().map(|a| int(a)).collect::<Result<_>>()?,
            partition: Partition::from_blocks(n, &doc.partition)?,
            cover: doc.cover,
            value: doc.value,
            cover_value: doc.cover_value,
            lp_value: doc.lp_value,
            candidates_evaluated: doc.candidates_evaluated.unwrap_or(0),
            full_scan_value: doc.full_scan_value,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RoundingDoc {
    #[serde(rename = "M")]
    big_m: String,
    m: String,
    jstar: String,
    tuple: Vec<String>,
    cover: Vec<Subset>,
    partition: Vec<Subset>,
    #[serde(with = "serde_rat")]
    value: Rat,
    #[serde(with = "serde_rat")]
    cover_value: Rat,
    #[serde(with = "serde_rat")]
    lp_value: Rat,
    #[serde(with = "serde_opt_rat")]
    ratio: Option<Rat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    candidates_evaluated: Option<usize>,
    #[serde(default, with = "serde_opt_rat", skip_serializing_if = "Option::is_none")]
    full_scan_value: Option<Rat>,
}

/// Scale, scan for the best tuple, and shrink its cover to a partition.
pub fn round(inst: &Instance, c: &ChainAllocation) -> Result<RoundingOutcome> {
    if c.k() != inst.k {
        return Err(Error::contract("chain allocation does not match k"));
    }
    let sc = scale_chain(c, inst.n())?;
    let js = find_jstar(inst, &sc)?;
    let cover = js
        .tuple
        .a
        .iter()
        .enumerate()
        .map(|(i, a)| sc.u_set(i, a))
        .collect::<Result<Vec<_>>>()?;
    let partition = extract_partition(inst, &cover)?;
    let value = partition.cost(inst)?;
    let lp_value = c.objective(inst)?;
    let bound = Rat::new(BigInt::from(inst.k), BigInt::from(2)) * &lp_value;
    if value > js.value || value > bound {
        return Err(Error::Internal(format!(
            "rounded value {} exceeds cover value {} or k/2 bound {}",
            render(&value),
            render(&js.value),
            render(&bound)
        )));
    }
    Ok(RoundingOutcome {
        big_m: sc.big_m.clone(),
        m: sc.m.clone(),
        jstar: js.j,
        tuple: js.tuple.a,
        cover,
        partition,
        value,
        cover_value: js.value,
        lp_value,
        candidates_evaluated: js.evaluated.len(),
        full_scan_value: js.full_scan.map(|(_, v)| v),
    })
}
