//! The allocation LP over explicit `(function, subset)` columns, solved exactly
//! with a revised simplex on rationals.
//!
//! Rows are ground-set elements, columns are pairs `(i, S)` with `S ≠ ∅`,
//! ordered by `(i, mask)`. The singleton columns of the first function give
//! an identity starting basis. Bland's rule picks both the entering column
//! and the leaving row, so the method terminates without cycling.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::Instance;
use crate::rational::{lcm_denominators, render, serde_rat, Rat};
use crate::subset::Subset;

/// Largest ground set accepted by [`solve_lp`].
pub const MAX_LP_ELEMENTS: usize = 16;

/// Per-function lists of `(S, y_i(S))`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FractionalAllocation {
    blocks: Vec<Vec<(Subset, Rat)>>,
}

impl FractionalAllocation {
    pub fn new(blocks: Vec<Vec<(Subset, Rat)>>) -> Self {
        FractionalAllocation { blocks }
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<(Subset, Rat)>] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut Vec<Vec<(Subset, Rat)>> {
        &mut self.blocks
    }

    pub fn support_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// `Σ_{i,S} y_i(S) f_i(S)`.
    pub fn objective(&self, inst: &Instance) -> Result<Rat> {
        if self.k() != inst.k {
            return Err(Error::contract(format!(
                "allocation has {} blocks, instance has k = {}",
                self.k(),
                inst.k
            )));
        }
        let mut total = Rat::zero();
        for (f, block) in inst.functions.iter().zip(&self.blocks) {
            for (s, w) in block {
                total += w * f.eval(*s)?;
            }
        }
        Ok(total)
    }

    /// `Σ_{i, S ∋ e} y_i(S)` for every element `e < n`.
    pub fn coverage(&self, n: usize) -> Vec<Rat> {
        let mut cov = vec![Rat::zero(); n];
        for block in &self.blocks {
            for (s, w) in block {
                for e in s.elements() {
                    if e < n {
                        cov[e] += w;
                    }
                }
            }
        }
        cov
    }

    pub fn to_entries(&self) -> Vec<SupportEntry> {
        let mut out = Vec::new();
        for (i, block) in self.blocks.iter().enumerate() {
            for (s, w) in block {
                out.push(SupportEntry {
                    i,
                    set: *s,
                    weight: w.clone(),
                    chain_index: None,
                });
            }
        }
        out
    }

    pub fn from_entries(k: usize, entries: &[SupportEntry]) -> Result<Self> {
        let mut blocks = vec![Vec::new(); k];
        for e in entries {
            if e.i >= k {
                return Err(Error::Invalid(format!("support entry for function {} but k = {k}", e.i)));
            }
            blocks[e.i].push((e.set, e.weight.clone()));
        }
        Ok(FractionalAllocation { blocks })
    }
}

/// One `(i, S, weight)` row of a serialized solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub i: usize,
    pub set: Subset,
    #[serde(with = "serde_rat")]
    pub weight: Rat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    #[serde(serialize_with = "ser_rats")]
    pub coverage: Vec<Rat>,
    pub pass: bool,
    pub violations: Vec<String>,
}

fn ser_rats<S: serde::Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(render))
}

/// Checks `Σ_{i,S} y_i(S) χ_S = 1` exactly and `y ≥ 0`.
pub fn check_feasible(inst: &Instance, y: &FractionalAllocation) -> FeasibilityReport {
    let n = inst.n();
    let mut violations = Vec::new();
    if y.k() != inst.k {
        violations.push(format!("allocation has {} blocks, instance has k = {}", y.k(), inst.k));
    }
    for (i, block) in y.blocks.iter().enumerate() {
        for (s, w) in block {
            if w.is_negative() {
                violations.push(format!("negative weight {} on function {i}, set {s}", render(w)));
            }
            if !inst.ground.contains(*s) {
                violations.push(format!("set {s} of function {i} leaves the ground set"));
            }
        }
    }
    let coverage = y.coverage(n);
    for (e, c) in coverage.iter().enumerate() {
        if !c.is_one() {
            violations.push(format!("element {e} has coverage {} (expected 1)", render(c)));
        }
    }
    FeasibilityReport {
        pass: violations.is_empty(),
        coverage,
        violations,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub allocation: FractionalAllocation,
    pub objective: Rat,
    pub iterations: u64,
    /// Basic columns `(i, S)` of the optimal basis, in row order.
    pub basis: Vec<(usize, Subset)>,
}

#[derive(Serialize, Deserialize)]
struct LpDoc {
    #[serde(with = "serde_rat")]
    objective: Rat,
    support: Vec<SupportEntry>,
    iterations: u64,
}

impl LpSolution {
    pub fn to_json(&self) -> Result<String> {
        let doc = LpDoc {
            objective: self.objective.clone(),
            support: self.allocation.to_entries(),
            iterations: self.iterations,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

struct Columns {
    per_fn: usize,
    /// Costs scaled to integers by a common denominator.
    costs: Vec<BigInt>,
    small_costs: Option<Vec<i128>>,
}

impl Columns {
    fn decode(&self, c: usize) -> (usize, Subset) {
        (c / self.per_fn, Subset((c % self.per_fn + 1) as u32))
    }

    fn encode(&self, i: usize, s: Subset) -> usize {
        i * self.per_fn + s.mask() as usize - 1
    }
}

/// Solves the relaxation to an exact optimal basic solution.
pub fn solve_lp(inst: &Instance) -> Result<LpSolution> {
    let n = inst.n();
    if n > MAX_LP_ELEMENTS {
        return Err(Error::capacity("LP ground set size", n, MAX_LP_ELEMENTS));
    }
    let per_fn = (1usize << n) - 1;

    let mut values = Vec::with_capacity(inst.k * per_fn);
    for f in &inst.functions {
        for m in 1..=per_fn {
            values.push(f.value(Subset(m as u32)));
        }
    }
    let scale = Rat::from_integer(lcm_denominators(&values));
    let costs: Vec<BigInt> = values.iter().map(|v| (v * &scale).to_integer()).collect();
    let small_costs = costs.iter().map(|c| c.to_i128()).collect::<Option<Vec<_>>>();
    let cols = Columns {
        per_fn,
        costs,
        small_costs,
    };

    let mut simplex = Simplex::new(n, &cols);
    let iterations = simplex.run()?;

    let mut blocks = vec![Vec::new(); inst.k];
    let mut basis = Vec::with_capacity(n);
    for (r, &c) in simplex.basic.iter().enumerate() {
        let (i, s) = cols.decode(c);
        basis.push((i, s));
        if simplex.x[r].is_positive() {
            blocks[i].push((s, simplex.x[r].clone()));
        }
    }
    for block in &mut blocks {
        block.sort_by(|a: &(Subset, Rat), b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
    }
    let allocation = FractionalAllocation { blocks };
    let objective = allocation.objective(inst)?;
    debug_assert_eq!(
        objective,
        simplex
            .basic
            .iter()
            .zip(&simplex.x)
            .fold(Rat::zero(), |acc, (&c, x)| acc + x * &values[c])
    );
    Ok(LpSolution {
        allocation,
        objective,
        iterations,
        basis,
    })
}

struct Simplex<'a> {
    n: usize,
    cols: &'a Columns,
    basic: Vec<usize>,
    /// Row-major basis inverse.
    inv: Vec<Vec<Rat>>,
    x: Vec<Rat>,
}

impl<'a> Simplex<'a> {
    fn new(n: usize, cols: &'a Columns) -> Self {
        let basic = (0..n).map(|e| cols.encode(0, Subset::singleton(e))).collect();
        let inv = (0..n)
            .map(|r| (0..n).map(|c| if r == c { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        Simplex {
            n,
            cols,
            basic,
            inv,
            x: vec![Rat::one(); n],
        }
    }

    fn run(&mut self) -> Result<u64> {
        let mut iterations = 0u64;
        while let Some(q) = self.entering() {
            let dir = self.direction(q);
            let r = self.leaving(&dir).ok_or_else(|| {
                Error::Internal("simplex reported an unbounded ray on a bounded LP".into())
            })?;
            self.pivot(r, q, &dir);
            iterations += 1;
        }
        Ok(iterations)
    }

    /// Dual prices `c_B^T B^{-1}` as integers over a common positive denominator.
    fn prices(&self) -> (Vec<BigInt>, BigInt) {
        let mut pi = vec![Rat::zero(); self.n];
        for (r, &c) in self.basic.iter().enumerate() {
            let cost = &self.cols.costs[c];
            if cost.is_zero() {
                continue;
            }
            let cost = Rat::from_integer(cost.clone());
            for (e, p) in pi.iter_mut().enumerate() {
                if !self.inv[r][e].is_zero() {
                    *p += &cost * &self.inv[r][e];
                }
            }
        }
        let d = pi.iter().fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
        let scaled = pi
            .iter()
            .map(|p| p.numer() * (&d / p.denom()))
            .collect();
        (scaled, d)
    }

    /// Lowest-index column with negative reduced cost.
    fn entering(&self) -> Option<usize> {
        let (pi, d) = self.prices();
        let size = 1usize << self.n;
        if let (Some(small), Some(pi_small), Some(d_small)) = (
            self.cols.small_costs.as_ref(),
            pi.iter().map(|p| p.to_i128()).collect::<Option<Vec<_>>>(),
            d.to_i128(),
        ) {
            if let Some(sums) = subset_sums_i128(&pi_small, size) {
                let mut overflow = false;
                for (c, &cost) in small.iter().enumerate() {
                    let m = c % self.cols.per_fn + 1;
                    match cost.checked_mul(d_small) {
                        Some(lhs) => {
                            if lhs < sums[m] {
                                return Some(c);
                            }
                        }
                        None => {
                            overflow = true;
                            break;
                        }
                    }
                }
                if !overflow {
                    return None;
                }
            }
        }
        let mut sums = vec![BigInt::zero(); size];
        for m in 1..size {
            let low = m.trailing_zeros() as usize;
            sums[m] = &sums[m & (m - 1)] + &pi[low];
        }
        self.cols.costs.iter().enumerate().position(|(c, cost)| {
            let m = c % self.cols.per_fn + 1;
            cost * &d < sums[m]
        })
    }

    /// `B^{-1} χ_S` for the entering column.
    fn direction(&self, q: usize) -> Vec<Rat> {
        let (_, s) = self.cols.decode(q);
        (0..self.n)
            .map(|r| {
                s.elements()
                    .fold(Rat::zero(), |acc, e| acc + &self.inv[r][e])
            })
            .collect()
    }

    /// Minimum ratio row; ties go to the lowest basic column index.
    #[allow(clippy::needless_range_loop)]
    fn leaving(&self, dir: &[Rat]) -> Option<usize> {
        let mut best: Option<(usize, Rat)> = None;
        for r in 0..self.n {
            if !dir[r].is_positive() {
                continue;
            }
            let ratio = &self.x[r] / &dir[r];
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    if ratio < bratio || (ratio == bratio && self.basic[r] < self.basic[br]) {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    #[allow(clippy::needless_range_loop)]
    fn pivot(&mut self, r: usize, q: usize, dir: &[Rat]) {
        let piv = dir[r].clone();
        for v in self.inv[r].iter_mut() {
            *v /= &piv;
        }
        self.x[r] /= &piv;
        let pivot_row = self.inv[r].clone();
        let pivot_x = self.x[r].clone();
        for t in 0..self.n {
            if t == r || dir[t].is_zero() {
                continue;
            }
            let factor = &dir[t];
            for (v, p) in self.inv[t].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= factor * p;
                }
            }
            self.x[t] -= factor * &pivot_x;
        }
        self.basic[r] = q;
    }
}

fn subset_sums_i128(pi: &[i128], size: usize) -> Option<Vec<i128>> {
    let mut sums = vec![0i128; size];
    for m in 1..size {
        let low = m.trailing_zeros() as usize;
        sums[m] = sums[m & (m - 1)].checked_add(pi[low])?;
    }
    Some(sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::SubmodularFn;
    use crate::rational::{int, rat};
    use crate::subset::GroundSet;

    fn facility(costs: &[(i64, Vec<i64>)]) -> Instance {
        let n = costs[0].1.len();
        let fs = costs
            .iter()
            .map(|(q, c)| SubmodularFn::facility_location(int(*q), c.iter().map(|&v| int(v)).collect()).unwrap())
            .collect();
        Instance::new(GroundSet::new(n).unwrap(), fs).unwrap()
    }

    #[test]
    fn single_element_picks_cheaper_function() {
        let inst = facility(&[(0, vec![1]), (0, vec![3])]);
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.objective, int(1));
        assert_eq!(sol.allocation.blocks()[0], vec![(Subset::singleton(0), int(1))]);
        assert!(sol.allocation.blocks()[1].is_empty());
    }

    #[test]
    fn expensive_first_function_is_pivoted_out() {
        let inst = facility(&[(0, vec![5]), (0, vec![2])]);
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.objective, int(2));
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.basis, vec![(1, Subset::singleton(0))]);
    }

    #[test]
    fn shared_opening_cost() {
        // One function opens once for both elements: 4 + 1 + 1 = 6 versus 2 * 4.
        let inst = facility(&[(4, vec![1, 1]), (0, vec![4, 4])]);
        let sol = solve_lp(&inst).unwrap();
        assert_eq!(sol.objective, int(6));
        assert!(check_feasible(&inst, &sol.allocation).pass);
    }

    #[test]
    fn feasibility_report() {
        let inst = facility(&[(0, vec![1]), (0, vec![3])]);
        let y = FractionalAllocation::new(vec![vec![(Subset::singleton(0), rat(1, 2))], vec![]]);
        let rep = check_feasible(&inst, &y);
        assert!(!rep.pass);
        assert_eq!(rep.coverage, vec![rat(1, 2)]);
        assert!(rep.violations[0].contains("element 0"));

        let neg = FractionalAllocation::new(vec![
            vec![(Subset::singleton(0), rat(3, 2))],
            vec![(Subset::singleton(0), rat(-1, 2))],
        ]);
        assert!(!check_feasible(&inst, &neg).pass);
    }

    #[test]
    fn capacity_guard() {
        let inst = facility(&[(0, vec![1; 17]), (0, vec![1; 17])]);
        assert!(matches!(solve_lp(&inst), Err(Error::Capacity { .. })));
    }

    #[test]
    fn zero_costs_give_zero_optimum() {
        let inst = facility(&[(0, vec![0, 0, 0]), (2, vec![1, 1, 1])]);
        assert_eq!(solve_lp(&inst).unwrap().objective, int(0));
    }

    #[test]
    fn json_shape() {
        let inst = facility(&[(0, vec![1]), (0, vec![3])]);
        let v: serde_json::Value = serde_json::from_str(&solve_lp(&inst).unwrap().to_json().unwrap()).unwrap();
        assert_eq!(v["objective"], "1");
        assert_eq!(v["support"][0]["i"], 0);
        assert_eq!(v["support"][0]["set"], serde_json::json!([0]));
        assert_eq!(v["support"][0]["weight"], "1");
        assert_eq!(v["iterations"], 0);
    }
}
