//! Independent oracles: exhaustive optimum, submodularity and monotonicity
//! checkers, and the structural checks run against a full pipeline.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chains::ChainAllocation;
use crate::error::{Error, Result};
use crate::function::{Instance, SubmodularFn, MAX_TABLE_ELEMENTS};
use crate::instances::{lower_bound_witness, LowerBoundFamily};
use crate::lp_relaxation::{check_feasible, FractionalAllocation};
use crate::rational::{lcm_denominators, render, Rat};
use crate::rounding::{
    breakpoint_candidates, covering_check, find_jstar, scale_chain, tuple_at, Partition,
    RoundingOutcome, ScaledChain, TupleIndex, FULL_SCAN_LIMIT,
};
use crate::subset::Subset;

/// Default cap on the `k^n` assignments enumerated by [`brute_force_opt`].
pub const BRUTE_BUDGET: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteResult {
    pub partition: Partition,
    pub value: Rat,
    pub assignments: u64,
}

#[derive(Serialize)]
struct BruteDoc {
    value: String,
    partition: Vec<Subset>,
    assignment: Vec<usize>,
    assignments: u64,
}

#[derive(serde::Deserialize)]
struct BruteDocIn {
    value: String,
    assignment: Vec<usize>,
    #[serde(default)]
    assignments: u64,
}

impl BruteResult {
    pub fn to_json(&self, k: usize) -> Result<String> {
        Ok(serde_json::to_string_pretty(&BruteDoc {
            value: render(&self.value),
            partition: self.partition.blocks(k),
            assignment: self.partition.assignment.clone(),
            assignments: self.assignments,
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: BruteDocIn = serde_json::from_str(s)?;
        Ok(BruteResult {
            value: crate::rational::parse(&doc.value)?,
            partition: Partition {
                assignment: doc.assignment,
            },
            assignments: doc.assignments,
        })
    }
}

/// `k^n`, saturating.
pub fn assignment_count(k: usize, n: usize) -> u128 {
    (0..n).fold(1u128, |acc, _| acc.saturating_mul(k as u128))
}

pub fn brute_force_opt(inst: &Instance) -> Result<BruteResult> {
    brute_force_opt_with_budget(inst, BRUTE_BUDGET)
}

/// Exact optimum over all `k^n` assignments. Ties go to the lexicographically
/// smallest assignment vector.
pub fn brute_force_opt_with_budget(inst: &Instance, budget: u64) -> Result<BruteResult> {
    let (n, k) = (inst.n(), inst.k);
    let total = assignment_count(k, n);
    if total > budget as u128 {
        return Err(Error::capacity(
            format!("brute force over {k}^{n} assignments"),
            total,
            budget,
        ));
    }
    let (assignment, value) = if n <= MAX_TABLE_ELEMENTS {
        match Tables::build(&inst.functions)? {
            Tables::Small { values, denom } => {
                let (a, v) = enumerate_parallel(n, k, |i, m| values[i][m as usize]);
                (a, Rat::new(BigInt::from(v), denom))
            }
            Tables::Exact(values) => enumerate_parallel(n, k, |i, m| values[i][m as usize].clone()),
        }
    } else {
        enumerate_parallel(n, k, |i, m| inst.functions[i].value(Subset(m)))
    };
    Ok(BruteResult {
        partition: Partition { assignment },
        value,
        assignments: total as u64,
    })
}

/// Per-function value tables, scaled to `i64` over a common denominator when
/// every value (and any sum of `k` of them) fits.
enum Tables {
    Small { values: Vec<Vec<i64>>, denom: BigInt },
    Exact(Vec<Vec<Rat>>),
}

impl Tables {
    fn build(fs: &[SubmodularFn]) -> Result<Self> {
        let exact = fs.iter().map(|f| f.table()).collect::<Result<Vec<_>>>()?;
        let denom = lcm_denominators(exact.iter().flatten());
        let limit = i64::MAX / (fs.len() as i64 + 1);
        let scale = Rat::from_integer(denom.clone());
        let small = exact
            .iter()
            .map(|t| {
                t.iter()
                    .map(|v| (v * &scale).to_integer().to_i64().filter(|x| x.abs() < limit))
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>();
        Ok(match small {
            Some(values) => Tables::Small { values, denom },
            None => Tables::Exact(exact),
        })
    }
}

/// Splits on the first element's block and reduces the branch optima.
fn enumerate_parallel<T, F>(n: usize, k: usize, cost: F) -> (Vec<usize>, T)
where
    T: Clone + Ord + Send + Zero + std::ops::Sub<Output = T> + for<'a> std::ops::AddAssign<&'a T>,
    F: Fn(usize, u32) -> T + Sync,
{
    (0..k)
        .into_par_iter()
        .map(|first| enumerate_branch(n, k, first, &cost))
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("k >= 1")
}

/// Lexicographic odometer over assignments with element 0 fixed to `first`.
/// Only blocks touched by a step are re-evaluated.
fn enumerate_branch<T, F>(n: usize, k: usize, first: usize, cost: &F) -> (Vec<usize>, T)
where
    T: Clone + Ord + Zero + std::ops::Sub<Output = T> + for<'a> std::ops::AddAssign<&'a T>,
    F: Fn(usize, u32) -> T,
{
    let mut a = vec![0usize; n];
    a[0] = first;
    let mut masks = vec![0u32; k];
    for (e, &b) in a.iter().enumerate() {
        masks[b] |= 1 << e;
    }
    let mut vals: Vec<T> = (0..k).map(|i| cost(i, masks[i])).collect();
    let mut total = T::zero();
    for v in &vals {
        total += v;
    }
    let mut best = (a.clone(), total.clone());
    // Advance the rightmost non-maximal digit among elements 1..n.
    while let Some(p) = (1..n).rev().find(|&p| a[p] + 1 < k) {
        let mut touched = 0u64;
        for e in p + 1..n {
            masks[a[e]] &= !(1 << e);
            touched |= 1 << a[e];
            a[e] = 0;
            masks[0] |= 1 << e;
        }
        if p + 1 < n {
            touched |= 1;
        }
        masks[a[p]] &= !(1 << p);
        touched |= 1 << a[p];
        a[p] += 1;
        masks[a[p]] |= 1 << p;
        touched |= 1 << a[p];

        let mut bits = touched;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let v = cost(i, masks[i]);
            total = total - vals[i].clone();
            total += &v;
            vals[i] = v;
        }
        if total < best.1 {
            best = (a.clone(), total.clone());
        }
    }
    best
}

fn check_table_size(f: &SubmodularFn) -> Result<()> {
    if f.n() > MAX_TABLE_ELEMENTS {
        return Err(Error::capacity("exhaustive check ground size", f.n(), MAX_TABLE_ELEMENTS));
    }
    Ok(())
}

/// Exhaustive local test `f(S+e) + f(S+e') ≥ f(S+e+e') + f(S)` for all
/// `S` and distinct `e, e' ∉ S`, which is equivalent to submodularity.
pub fn check_submodular(f: &SubmodularFn) -> Result<bool> {
    check_table_size(f)?;
    let n = f.n();
    Ok(match Tables::build(std::slice::from_ref(f))? {
        Tables::Small { values, .. } => local_submodular(n, &values[0]),
        Tables::Exact(values) => local_submodular(n, &values[0]),
    })
}

fn local_submodular<T>(n: usize, t: &[T]) -> bool
where
    T: Ord + Clone + Sync + std::ops::Add<Output = T>,
{
    (0..1usize << n).into_par_iter().all(|s| {
        for e in 0..n {
            if s >> e & 1 == 1 {
                continue;
            }
            for e2 in e + 1..n {
                if s >> e2 & 1 == 1 {
                    continue;
                }
                let lhs = t[s | 1 << e].clone() + t[s | 1 << e2].clone();
                let rhs = t[s | 1 << e | 1 << e2].clone() + t[s].clone();
                if lhs < rhs {
                    return false;
                }
            }
        }
        true
    })
}

/// Exhaustive test that every marginal is nonnegative.
pub fn check_monotone(f: &SubmodularFn) -> Result<bool> {
    check_table_size(f)?;
    let t = f.table()?;
    let n = f.n();
    Ok((0..1usize << n).all(|s| (0..n).all(|e| s >> e & 1 == 1 || t[s | 1 << e] >= t[s])))
}

/// The defining inequality `f(S) + f(T) ≥ f(S∪T) + f(S∩T)` over all pairs.
pub fn check_submodular_pairwise(f: &SubmodularFn) -> Result<bool> {
    if f.n() > 10 {
        return Err(Error::capacity("pairwise submodularity check ground size", f.n(), 10));
    }
    let t = f.table()?;
    let size = 1usize << f.n();
    Ok((0..size).all(|s| (0..size).all(|u| &t[s] + &t[u] >= &t[s | u] + &t[s & u])))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub details: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    fn push(&mut self, name: &str, pass: bool, details: impl Into<String>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            pass,
            details: details.into(),
        });
    }

    fn push_result(&mut self, name: &str, r: std::result::Result<String, String>) {
        match r {
            Ok(d) => self.push(name, true, d),
            Err(d) => self.push(name, false, d),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Everything a pipeline run produced, any of which may have come from files.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    /// The fractional solution under test.
    pub allocation: FractionalAllocation,
    /// Objective stated alongside the allocation, if any.
    pub claimed_objective: Option<Rat>,
    /// Exact optimum from [`crate::lp_relaxation::solve_lp`], when known.
    pub lp_optimum: Option<Rat>,
    pub chain: Option<ChainAllocation>,
    pub rounding: Option<RoundingOutcome>,
    pub brute: Option<BruteResult>,
}

/// Number of random tuples with `Σ a_i ≤ M + k - 1` tested for covering.
const COVERING_SAMPLES: usize = 256;

/// Runs every applicable structural check and reports each separately.
pub fn verify_lemma_suite(inst: &Instance, art: &Artifacts) -> VerificationReport {
    let mut rep = VerificationReport::default();
    let (n, k) = (inst.n(), inst.k);

    let feas = check_feasible(inst, &art.allocation);
    rep.push(
        "lp_feasibility",
        feas.pass,
        if feas.pass {
            format!("all {n} coverage sums equal 1")
        } else {
            feas.violations.join("; ")
        },
    );
    let alloc_obj = art.allocation.objective(inst).ok();

    if let Some(claimed) = &art.claimed_objective {
        let ok = alloc_obj.as_ref() == Some(claimed);
        rep.push(
            "solution_objective",
            ok,
            format!(
                "claimed {}, recomputed {}",
                render(claimed),
                alloc_obj.as_ref().map(render).unwrap_or_else(|| "n/a".into())
            ),
        );
    }
    if let (Some(opt), Some(obj)) = (&art.lp_optimum, &alloc_obj) {
        rep.push(
            "lp_optimality",
            opt == obj,
            format!("allocation {}, LP optimum {}", render(obj), render(opt)),
        );
    }

    if n <= MAX_TABLE_ELEMENTS {
        rep.push_result("monotone_submodular", monotone_submodular(inst));
    }
    if let Some(fam) = lower_bound_family(inst) {
        rep.push_result("witness", witness_check(inst, fam, art.lp_optimum.as_ref()));
        if let Some(b) = &art.brute {
            let bound = fam.integral_lower_bound();
            rep.push(
                "integral_lower_bound",
                b.value >= bound,
                format!("optimum {} vs pk + k = {}", render(&b.value), render(&bound)),
            );
        }
    }

    let Some(chain) = &art.chain else {
        if !feas.pass {
            rep.push("chain_form", false, "no chain allocation: input infeasible");
        }
        return rep;
    };
    rep.push_result("chain_form", chain_form(inst, chain, alloc_obj.as_ref()));

    let sc = match scale_chain(chain, n) {
        Ok(sc) => sc,
        Err(e) => {
            rep.push("scaling", false, e.to_string());
            return rep;
        }
    };
    let chain_obj = chain.objective(inst).ok();
    rep.push_result("multiplicity", multiplicity_check(chain, &sc));
    rep.push_result("cost_identity", cost_identity(inst, &sc, chain_obj.as_ref()));
    rep.push_result("covering", covering_samples(&sc));
    let (tuples, sums) = tuple_conditions(&sc);
    rep.push_result("tuple_conditions", tuples);
    rep.push_result("sum_identity", sums);
    rep.push_result("scan_equivalence", scan_equivalence(inst, &sc));

    if let Some(r) = &art.rounding {
        rep.push_result("rounding_consistency", rounding_consistency(inst, &sc, r, chain_obj.as_ref()));
        let bound = Rat::new(BigInt::from(k), BigInt::from(2)) * &r.lp_value;
        rep.push(
            "k_half_bound",
            r.value <= bound,
            format!("rounded {} vs (k/2)·LP {}", render(&r.value), render(&bound)),
        );
        if k == 2 {
            rep.push(
                "k2_dual_integrality",
                r.value == r.lp_value,
                format!("rounded {} vs LP {}", render(&r.value), render(&r.lp_value)),
            );
        }
    }
    if let Some(b) = &art.brute {
        rep.push_result("brute_consistency", brute_consistency(inst, b, art, alloc_obj.as_ref()));
    }
    rep
}

/// The family shared by all functions, when the instance is the gap family.
pub fn lower_bound_family(inst: &Instance) -> Option<&LowerBoundFamily> {
    use crate::function::FnKind;
    let mut fam: Option<&LowerBoundFamily> = None;
    for (i, f) in inst.functions.iter().enumerate() {
        match f.kind() {
            FnKind::LowerBound { family, index } if *index == i => match fam {
                None => fam = Some(family),
                Some(prev) if prev == family.as_ref() => {}
                _ => return None,
            },
            _ => return None,
        }
    }
    fam.filter(|f| f.k() == inst.k)
}

type Outcome = std::result::Result<String, String>;

fn monotone_submodular(inst: &Instance) -> Outcome {
    for (i, f) in inst.functions.iter().enumerate() {
        if !check_monotone(f).map_err(|e| e.to_string())? {
            return Err(format!("function {i} is not monotone"));
        }
        if !check_submodular(f).map_err(|e| e.to_string())? {
            return Err(format!("function {i} is not submodular"));
        }
    }
    Ok(format!("{} functions monotone and submodular", inst.k))
}

fn witness_check(inst: &Instance, fam: &LowerBoundFamily, lp: Option<&Rat>) -> Outcome {
    let z = lower_bound_witness(fam);
    let feas = check_feasible(inst, &z);
    if !feas.pass {
        return Err(format!("witness infeasible: {}", feas.violations.join("; ")));
    }
    let obj = z.objective(inst).map_err(|e| e.to_string())?;
    if obj != fam.witness_objective() {
        return Err(format!(
            "witness objective {} differs from closed form {}",
            render(&obj),
            render(&fam.witness_objective())
        ));
    }
    let bound = fam.witness_objective_bound();
    if obj > bound {
        return Err(format!("witness objective {} above pk(2p+1)/(pk-k+1) = {}", render(&obj), render(&bound)));
    }
    if let Some(lp) = lp {
        if lp > &obj {
            return Err(format!("LP optimum {} above witness {}", render(lp), render(&obj)));
        }
    }
    Ok(format!("witness feasible, objective {}", render(&obj)))
}

fn chain_form(inst: &Instance, chain: &ChainAllocation, source: Option<&Rat>) -> Outcome {
    let n = inst.n();
    for (i, c) in chain.chains().iter().enumerate() {
        if c.len() > n {
            return Err(format!("chain {i} has {} > n sets", c.len()));
        }
        for w in c.entries().windows(2) {
            if !w[1].0.is_proper_subset_of(w[0].0) {
                return Err(format!("chain {i}: {} not strictly inside {}", w[1].0, w[0].0));
            }
        }
    }
    let feas = check_feasible(inst, &chain.to_allocation());
    if !feas.pass {
        return Err(feas.violations.join("; "));
    }
    let obj = chain.objective(inst).map_err(|e| e.to_string())?;
    if let Some(src) = source {
        if &obj > src {
            return Err(format!("chain objective {} above source {}", render(&obj), render(src)));
        }
    }
    Ok(format!("strict chains, feasible, objective {}", render(&obj)))
}

fn multiplicity_check(chain: &ChainAllocation, sc: &ScaledChain) -> Outcome {
    let big_m = Rat::from_integer(sc.big_m().clone());
    for (i, c) in chain.chains().iter().enumerate() {
        let mut start = BigInt::one();
        for (l, (s, w)) in c.entries().iter().enumerate() {
            let count = sc.multiplicity(i, l);
            if Rat::from_integer(count.clone()) != w * &big_m {
                return Err(format!("chain {i} level {l}: {count} copies, M·y = {}", render(&(w * &big_m))));
            }
            let end = &sc.prefix(i)[l];
            for j in [&start, end] {
                if sc.u_set(i, j).map_err(|e| e.to_string())? != *s {
                    return Err(format!("U_{i}^{j} is not level {l}"));
                }
            }
            if end < sc.big_m() && sc.u_set(i, &(end + 1)).map_err(|e| e.to_string())? == *s {
                return Err(format!("level {l} of chain {i} extends past its count"));
            }
            start = end + 1;
        }
    }
    Ok(format!("multiplicities match M·y with M = {}", sc.big_m()))
}

fn cost_identity(inst: &Instance, sc: &ScaledChain, chain_obj: Option<&Rat>) -> Outcome {
    let big_m = Rat::from_integer(sc.big_m().clone());
    let mut total = Rat::zero();
    for i in 0..sc.k() {
        for (l, s) in sc.sets(i).iter().enumerate() {
            let f = inst.functions[i].eval(*s).map_err(|e| e.to_string())?;
            total += Rat::from_integer(sc.multiplicity(i, l)) / &big_m * f;
        }
    }
    match chain_obj {
        Some(obj) if obj == &total => Ok(format!("(1/M)·Σ f_i(U_i^j) = {}", render(&total))),
        Some(obj) => Err(format!("(1/M)·Σ f_i(U_i^j) = {} but objective is {}", render(&total), render(obj))),
        None => Err("chain objective unavailable".into()),
    }
}

fn covering_samples(sc: &ScaledChain) -> Outcome {
    let k = sc.k();
    let big_m = sc.big_m();
    let slack = big_m - 1; // Σ (a_i - 1) ≤ M - 1
    let mut tuples: Vec<Vec<BigInt>> = Vec::new();
    for i in 0..k {
        let mut a = vec![BigInt::one(); k];
        a[i] = big_m.clone();
        tuples.push(a);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..COVERING_SAMPLES {
        // Random composition of a random budget into k parts.
        let budget = BigInt::from(rng.gen::<u64>()) % (&slack + 1);
        let mut cuts: Vec<BigInt> = (0..k - 1)
            .map(|_| BigInt::from(rng.gen::<u64>()) % (&budget + 1))
            .collect();
        cuts.push(BigInt::zero());
        cuts.push(budget);
        cuts.sort();
        tuples.push(cuts.windows(2).map(|w| &w[1] - &w[0] + 1).collect());
    }
    for a in tuples {
        let sum: BigInt = a.iter().sum();
        debug_assert!(sum < big_m + k);
        let t = TupleIndex { j: BigInt::zero(), a };
        if !covering_check(sc, &t).map_err(|e| e.to_string())? {
            return Err(format!("tuple {:?} with sum {sum} does not cover", t.a));
        }
    }
    Ok(format!("{} tuples with Σ a_i ≤ M + k - 1 all cover", k + COVERING_SAMPLES))
}

/// Tuples checked for the tuple conditions: all of them when the period is
/// small, otherwise the breakpoint candidates.
fn tuple_indices(sc: &ScaledChain) -> (Vec<BigInt>, bool) {
    match sc.period().to_u64() {
        Some(t) if t <= FULL_SCAN_LIMIT => ((1..=t).map(BigInt::from).collect(), true),
        _ => (breakpoint_candidates(sc), false),
    }
}

fn tuple_conditions(sc: &ScaledChain) -> (Outcome, Outcome) {
    let k = sc.k();
    let (js, exhaustive) = tuple_indices(sc);
    let two_m = sc.m() * 2;
    let mut seen = vec![std::collections::HashSet::new(); k];
    let mut l4: Outcome = Ok(String::new());
    let mut sums: Outcome = Ok(String::new());
    for j in &js {
        let t = match tuple_at(sc, j) {
            Ok(t) => t,
            Err(e) => return (Err(e.to_string()), Err(e.to_string())),
        };
        if l4.is_ok() {
            if let Some(i) = t.a.iter().position(|a| a < &BigInt::one() || a > sc.big_m()) {
                l4 = Err(format!("a_{i}^{j} = {} outside [1, M]", t.a[i]));
            } else if let Some(i) = (0..k).find(|&i| !seen[i].insert(t.a[i].clone())) {
                l4 = Err(format!("a_{i}^{j} = {} repeats", t.a[i]));
            } else if !covering_check(sc, &t).unwrap_or(false) {
                l4 = Err(format!("tuple {j} does not cover"));
            }
        }
        if sums.is_ok() {
            let p = num_integer::Integer::div_ceil(j, &two_m);
            let want = sc.big_m() + k - &p;
            let got: BigInt = t.a.iter().sum();
            if got != want {
                sums = Err(format!("tuple {j}: Σ a = {got}, expected M + k - p = {want}"));
            }
        }
    }
    let scope = if exhaustive { "all" } else { "candidate" };
    let count = js.len();
    (
        l4.map(|_| format!("{scope} {count} tuples in range, distinct per coordinate, covering")),
        sums.map(|_| format!("{scope} {count} tuples satisfy Σ a_i = M + k - ceil(j/2m)")),
    )
}

fn scan_equivalence(inst: &Instance, sc: &ScaledChain) -> Outcome {
    let js = find_jstar(inst, sc).map_err(|e| e.to_string())?;
    let limit = inst.k * inst.n() + 3 * inst.k;
    if js.evaluated.len() > limit {
        return Err(format!("{} breakpoints evaluated, limit kn + 3k = {limit}", js.evaluated.len()));
    }
    match &js.full_scan {
        Some((fj, fv)) if fj == &js.j && fv == &js.value => Ok(format!(
            "j* = {} with value {}; {} breakpoints; full scan agrees",
            js.j,
            render(&js.value),
            js.evaluated.len()
        )),
        Some((fj, fv)) => Err(format!(
            "breakpoint j* = {} value {}, full scan j = {fj} value {}",
            js.j,
            render(&js.value),
            render(fv)
        )),
        None => Ok(format!(
            "j* = {} with value {}; {} breakpoints; period too large for a full scan",
            js.j,
            render(&js.value),
            js.evaluated.len()
        )),
    }
}

fn rounding_consistency(inst: &Instance, sc: &ScaledChain, r: &RoundingOutcome, chain_obj: Option<&Rat>) -> Outcome {
    if &r.big_m != sc.big_m() || &r.m != sc.m() {
        return Err(format!("report has M = {}, m = {}; chain gives {}, {}", r.big_m, r.m, sc.big_m(), sc.m()));
    }
    let t = tuple_at(sc, &r.jstar).map_err(|e| e.to_string())?;
    if t.a != r.tuple {
        return Err(format!("tuple for j* = {} differs from the report", r.jstar));
    }
    for (i, a) in t.a.iter().enumerate() {
        if sc.u_set(i, a).map_err(|e| e.to_string())? != r.cover[i] {
            return Err(format!("cover set {i} differs from U_{i}^{a}"));
        }
    }
    let cover_value = inst.cost(&r.cover).map_err(|e| e.to_string())?;
    if cover_value != r.cover_value {
        return Err(format!("report cover value {} but the cover costs {}", render(&r.cover_value), render(&cover_value)));
    }
    if let Some(full) = &r.full_scan_value {
        if full != &r.cover_value {
            return Err(format!("full-scan minimum {} differs from the j* cover value", render(full)));
        }
    }
    if r.partition.assignment.len() != inst.n() {
        return Err("partition size differs from n".into());
    }
    let blocks = r.partition.blocks(inst.k);
    if let Some(i) = (0..inst.k).find(|&i| !blocks[i].is_subset_of(r.cover[i])) {
        return Err(format!("block {i} is not inside its cover set"));
    }
    let value = r.partition.cost(inst).map_err(|e| e.to_string())?;
    if value != r.value {
        return Err(format!("report value {} but partition costs {}", render(&r.value), render(&value)));
    }
    if chain_obj != Some(&r.lp_value) {
        return Err(format!("report LP value {} differs from the chain objective", render(&r.lp_value)));
    }
    Ok(format!("j* = {}, value {}", r.jstar, render(&r.value)))
}

fn brute_consistency(inst: &Instance, b: &BruteResult, art: &Artifacts, alloc_obj: Option<&Rat>) -> Outcome {
    let value = b.partition.cost(inst).map_err(|e| e.to_string())?;
    if value != b.value {
        return Err(format!("brute value {} but partition costs {}", render(&b.value), render(&value)));
    }
    let lp = art.lp_optimum.as_ref().or(alloc_obj);
    if let Some(lp) = lp {
        if lp > &b.value {
            return Err(format!("LP value {} above integral optimum {}", render(lp), render(&b.value)));
        }
    }
    if let Some(r) = &art.rounding {
        if r.value < b.value {
            return Err(format!("rounded value {} below the optimum {}", render(&r.value), render(&b.value)));
        }
    }
    Ok(format!("optimum {} ≥ LP value", render(&b.value)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::SubmodularFn;
    use crate::instances::{gen_coverage, gen_facility_location, gen_lower_bound, CoverageParams, FacilityParams};
    use crate::rational::{int, rat};
    use crate::subset::GroundSet;
    use proptest::prelude::*;

    /// Plain recursion over assignments, kept apart from the odometer.
    fn naive_opt(inst: &Instance) -> Rat {
        fn rec(inst: &Instance, e: usize, blocks: &mut Vec<Subset>) -> Rat {
            if e == inst.n() {
                return inst.cost(blocks).unwrap();
            }
            (0..inst.k)
                .map(|i| {
                    blocks[i] = blocks[i].insert(e);
                    let v = rec(inst, e + 1, blocks);
                    blocks[i] = blocks[i].remove(e);
                    v
                })
                .min()
                .unwrap()
        }
        rec(inst, 0, &mut vec![Subset::EMPTY; inst.k])
    }

    #[test]
    fn brute_single_element() {
        let fs = [5, 2, 7]
            .iter()
            .map(|&c| SubmodularFn::facility_location(int(0), vec![int(c)]).unwrap())
            .collect();
        let inst = Instance::new(GroundSet::new(1).unwrap(), fs).unwrap();
        let b = brute_force_opt(&inst).unwrap();
        assert_eq!(b.value, int(2));
        assert_eq!(b.partition.assignment, vec![1]);
    }

    #[test]
    fn brute_modular_is_separable() {
        let inst = gen_facility_location(&FacilityParams {
            n: 7,
            k: 3,
            opening: (0, 0),
            assignment: (1, 9),
            seed: 11,
        })
        .unwrap();
        let want = (0..7)
            .map(|e| {
                inst.functions
                    .iter()
                    .map(|f| f.eval(Subset::singleton(e)).unwrap())
                    .min()
                    .unwrap()
            })
            .fold(Rat::zero(), |a, b| a + b);
        assert_eq!(brute_force_opt(&inst).unwrap().value, want);
    }

    #[test]
    fn brute_tie_break_is_lexicographic() {
        let f = SubmodularFn::facility_location(int(0), vec![int(1); 3]).unwrap();
        let inst = Instance::new(GroundSet::new(3).unwrap(), vec![f.clone(), f]).unwrap();
        assert_eq!(brute_force_opt(&inst).unwrap().partition.assignment, vec![0, 0, 0]);
    }

    #[test]
    fn brute_budget_guard() {
        let inst = gen_lower_bound(3, 2, 0).unwrap();
        match brute_force_opt_with_budget(&inst, 1000) {
            Err(Error::Capacity { required, .. }) => assert_eq!(required, "14348907"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn brute_rational_path() {
        // Weights with a huge common denominator force the exact fallback.
        let big = rat(1, i64::MAX / 4);
        let f = SubmodularFn::facility_location(rat(1, 3), vec![big.clone(), int(1)]).unwrap();
        let g = SubmodularFn::facility_location(int(0), vec![int(2), rat(1, 7)]).unwrap();
        let inst = Instance::new(GroundSet::new(2).unwrap(), vec![f, g]).unwrap();
        assert!(matches!(Tables::build(&inst.functions).unwrap(), Tables::Exact(_)));
        assert_eq!(brute_force_opt(&inst).unwrap().value, naive_opt(&inst));
    }

    #[test]
    fn checker_examples() {
        let cov = gen_coverage(&CoverageParams {
            n: 6,
            k: 2,
            universe: 8,
            density: 0.4,
            unit_weights: false,
            seed: 2,
        })
        .unwrap();
        for f in &cov.functions {
            assert!(check_submodular(f).unwrap());
            assert!(check_monotone(f).unwrap());
        }
        // Superadditive pair.
        let t = SubmodularFn::explicit_table(2, vec![int(0), int(1), int(1), int(3)]).unwrap();
        assert!(!check_submodular(&t).unwrap());
        assert!(check_monotone(&t).unwrap());
        // Negative marginal.
        let t = SubmodularFn::explicit_table(2, vec![int(0), int(2), int(1), int(1)]).unwrap();
        assert!(!check_monotone(&t).unwrap());
        assert!(check_submodular(&t).unwrap());
    }

    proptest! {
        #[test]
        fn brute_matches_naive(n in 1usize..6, k in 2usize..4, seed in 0u64..500, cov in any::<bool>()) {
            let inst = if cov {
                gen_coverage(&CoverageParams { n, k, universe: 5, density: 0.4, unit_weights: false, seed }).unwrap()
            } else {
                gen_facility_location(&FacilityParams { n, k, opening: (0, 6), assignment: (0, 6), seed }).unwrap()
            };
            let b = brute_force_opt(&inst).unwrap();
            prop_assert_eq!(&b.value, &naive_opt(&inst));
            prop_assert_eq!(b.partition.cost(&inst).unwrap(), b.value);
        }

        #[test]
        fn local_and_pairwise_checks_agree(n in 1usize..5, raw in prop::collection::vec(0i64..6, 16)) {
            let mut values: Vec<Rat> = raw[..1 << n].iter().map(|&v| int(v)).collect();
            values[0] = int(0);
            let f = SubmodularFn::explicit_table(n, values).unwrap();
            prop_assert_eq!(check_submodular(&f).unwrap(), check_submodular_pairwise(&f).unwrap());
        }
    }
}
