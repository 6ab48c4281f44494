//! Monotone submodular cost functions and MSCA instances.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::LowerBoundFamily;
use crate::rational::{int, serde_rat, serde_rat_vec, Rat};
use crate::subset::{GroundSet, Subset};

/// Largest coverage universe; covered sets are stored as `u128` masks.
pub const MAX_UNIVERSE: usize = 128;

/// Largest ground set that may be tabulated eagerly.
pub const MAX_TABLE_ELEMENTS: usize = 20;

/// A set function on `{0..n-1}` with `f(∅) = 0`, evaluated exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmodularFn {
    n: usize,
    kind: FnKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FnKind {
    /// `2^n` values indexed by subset mask.
    ExplicitTable(Vec<Rat>),
    /// `f(S) = w(∪_{e∈S} A_e)`.
    Coverage {
        universe: usize,
        weights: Vec<Rat>,
        covers: Vec<u128>,
    },
    /// `f(S) = q·[S ≠ ∅] + Σ_{e∈S} c(e)`.
    FacilityLocation { opening: Rat, costs: Vec<Rat> },
    /// One function `f_i` of the lower-bound family.
    LowerBound {
        family: Arc<LowerBoundFamily>,
        index: usize,
    },
}

impl SubmodularFn {
    pub fn explicit_table(n: usize, values: Vec<Rat>) -> Result<Self> {
        check_n(n)?;
        if n > MAX_TABLE_ELEMENTS {
            return Err(Error::capacity("explicit table size", n, MAX_TABLE_ELEMENTS));
        }
        if values.len() != 1 << n {
            return Err(Error::Invalid(format!(
                "explicit table needs {} values, got {}",
                1u64 << n,
                values.len()
            )));
        }
        if !values[0].is_zero() {
            return Err(Error::Invalid("explicit table must have f(∅) = 0".into()));
        }
        if let Some(m) = values.iter().position(|v| v.is_negative()) {
            return Err(Error::Invalid(format!(
                "explicit table value at mask {m} is negative"
            )));
        }
        Ok(SubmodularFn {
            n,
            kind: FnKind::ExplicitTable(values),
        })
    }

    /// `covers[e]` lists the universe items covered by element `e`.
    pub fn coverage(n: usize, weights: Vec<Rat>, covers: &[Vec<usize>]) -> Result<Self> {
        check_n(n)?;
        let universe = weights.len();
        if universe > MAX_UNIVERSE {
            return Err(Error::capacity("coverage universe", universe, MAX_UNIVERSE));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::Invalid("coverage weights must be nonnegative".into()));
        }
        if covers.len() != n {
            return Err(Error::Invalid(format!(
                "coverage needs {n} covered sets, got {}",
                covers.len()
            )));
        }
        let mut masks = Vec::with_capacity(n);
        for items in covers {
            let mut m = 0u128;
            for &u in items {
                if u >= universe {
                    return Err(Error::Invalid(format!(
                        "covered item {u} outside universe of size {universe}"
                    )));
                }
                m |= 1 << u;
            }
            masks.push(m);
        }
        Ok(SubmodularFn {
            n,
            kind: FnKind::Coverage {
                universe,
                weights,
                covers: masks,
            },
        })
    }

    pub fn facility_location(opening: Rat, costs: Vec<Rat>) -> Result<Self> {
        let n = costs.len();
        check_n(n)?;
        if opening.is_negative() || costs.iter().any(|c| c.is_negative()) {
            return Err(Error::Invalid("facility costs must be nonnegative".into()));
        }
        Ok(SubmodularFn {
            n,
            kind: FnKind::FacilityLocation { opening, costs },
        })
    }

    pub fn lower_bound(family: Arc<LowerBoundFamily>, index: usize) -> Result<Self> {
        if index >= family.k() {
            return Err(Error::Invalid(format!(
                "lower-bound function index {index} out of range for k = {}",
                family.k()
            )));
        }
        Ok(SubmodularFn {
            n: family.n(),
            kind: FnKind::LowerBound { family, index },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &FnKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            FnKind::ExplicitTable(_) => "explicit_table",
            FnKind::Coverage { .. } => "coverage",
            FnKind::FacilityLocation { .. } => "facility_location",
            FnKind::LowerBound { .. } => "lower_bound",
        }
    }

    fn check_subset(&self, s: Subset) -> Result<()> {
        if s.is_subset_of(Subset::full(self.n)) {
            Ok(())
        } else {
            Err(Error::contract(format!(
                "subset {s} outside a ground set of size {}",
                self.n
            )))
        }
    }

    pub fn eval(&self, s: Subset) -> Result<Rat> {
        self.check_subset(s)?;
        Ok(self.value(s))
    }

    /// Unchecked evaluation; callers guarantee `s` lies in the ground set.
    pub(crate) fn value(&self, s: Subset) -> Rat {
        match &self.kind {
            FnKind::ExplicitTable(values) => values[s.mask() as usize].clone(),
            FnKind::Coverage {
                weights, covers, ..
            } => {
                let covered = s.elements().fold(0u128, |m, e| m | covers[e]);
                let mut total = Rat::zero();
                let mut bits = covered;
                while bits != 0 {
                    let u = bits.trailing_zeros() as usize;
                    total += &weights[u];
                    bits &= bits - 1;
                }
                total
            }
            FnKind::FacilityLocation { opening, costs } => {
                if s.is_empty() {
                    return Rat::zero();
                }
                s.elements().fold(opening.clone(), |acc, e| acc + &costs[e])
            }
            FnKind::LowerBound { family, index } => int(family.value(*index, s) as i64),
        }
    }

    pub fn marginal(&self, s: Subset, e: usize) -> Result<Rat> {
        self.check_subset(s)?;
        if e >= self.n {
            return Err(Error::contract(format!(
                "element {e} outside a ground set of size {}",
                self.n
            )));
        }
        if s.contains(e) {
            return Err(Error::contract(format!("element {e} already in {s}")));
        }
        Ok(self.value(s.insert(e)) - self.value(s))
    }

    /// Tabulates the function into an [`FnKind::ExplicitTable`].
    pub fn materialize(&self) -> Result<SubmodularFn> {
        if self.n > MAX_TABLE_ELEMENTS {
            return Err(Error::capacity("materialized table size", self.n, MAX_TABLE_ELEMENTS));
        }
        let values = Subset::all(self.n).map(|s| self.value(s)).collect();
        Ok(SubmodularFn {
            n: self.n,
            kind: FnKind::ExplicitTable(values),
        })
    }

    /// All `2^n` values in mask order.
    pub fn table(&self) -> Result<Vec<Rat>> {
        if self.n > MAX_TABLE_ELEMENTS {
            return Err(Error::capacity("table size", self.n, MAX_TABLE_ELEMENTS));
        }
        Ok(match &self.kind {
            FnKind::ExplicitTable(v) => v.clone(),
            _ => Subset::all(self.n).map(|s| self.value(s)).collect(),
        })
    }
}

fn check_n(n: usize) -> Result<()> {
    GroundSet::new(n).map(|_| ())
}

/// The MSCA input: `k` functions over one ground set.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub ground: GroundSet,
    pub k: usize,
    pub functions: Vec<SubmodularFn>,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl Instance {
    pub fn new(ground: GroundSet, functions: Vec<SubmodularFn>) -> Result<Self> {
        let k = functions.len();
        if k < 2 {
            return Err(Error::Invalid(format!("need k >= 2 functions, got {k}")));
        }
        if let Some((i, f)) = functions.iter().enumerate().find(|(_, f)| f.n != ground.n) {
            return Err(Error::Invalid(format!(
                "function {i} has ground size {}, instance has {}",
                f.n, ground.n
            )));
        }
        Ok(Instance {
            ground,
            k,
            functions,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn n(&self) -> usize {
        self.ground.n
    }

    /// `Σ_i f_i(blocks[i])`.
    pub fn cost(&self, blocks: &[Subset]) -> Result<Rat> {
        if blocks.len() != self.k {
            return Err(Error::contract(format!(
                "expected {} blocks, got {}",
                self.k,
                blocks.len()
            )));
        }
        let mut total = Rat::zero();
        for (f, &b) in self.functions.iter().zip(blocks) {
            total += f.eval(b)?;
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&InstanceDoc::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(s)?;
        doc.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    n: usize,
    k: usize,
    #[serde(default)]
    metadata: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    functions: Vec<FnDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum FnDoc {
    ExplicitTable {
        #[serde(with = "serde_rat_vec")]
        values: Vec<Rat>,
    },
    Coverage {
        universe: usize,
        #[serde(with = "serde_rat_vec")]
        weights: Vec<Rat>,
        covers: Vec<Vec<usize>>,
    },
    FacilityLocation {
        #[serde(with = "serde_rat")]
        opening: Rat,
        #[serde(with = "serde_rat_vec")]
        costs: Vec<Rat>,
    },
    LowerBound {
        k: usize,
        p: usize,
        i: usize,
        #[serde(default)]
        pad: usize,
    },
}

impl From<&Instance> for InstanceDoc {
    fn from(inst: &Instance) -> Self {
        let functions = inst
            .functions
            .iter()
            .map(|f| match &f.kind {
                FnKind::ExplicitTable(v) => FnDoc::ExplicitTable { values: v.clone() },
                FnKind::Coverage {
                    universe,
                    weights,
                    covers,
                } => FnDoc::Coverage {
                    universe: *universe,
                    weights: weights.clone(),
                    covers: covers
                        .iter()
                        .map(|&m| (0..*universe).filter(|&u| m >> u & 1 == 1).collect())
                        .collect(),
                },
                FnKind::FacilityLocation { opening, costs } => FnDoc::FacilityLocation {
                    opening: opening.clone(),
                    costs: costs.clone(),
                },
                FnKind::LowerBound { family, index } => FnDoc::LowerBound {
                    k: family.k(),
                    p: family.p(),
                    i: *index,
                    pad: family.pad(),
                },
            })
            .collect();
        InstanceDoc {
            n: inst.ground.n,
            k: inst.k,
            metadata: inst.metadata.clone(),
            labels: inst.ground.labels.clone(),
            functions,
        }
    }
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        let mut ground = GroundSet::new(doc.n)?;
        if let Some(labels) = &doc.labels {
            if labels.len() != doc.n {
                return Err(Error::Invalid("label count differs from n".into()));
            }
        }
        ground.labels = doc.labels;
        if doc.functions.len() != doc.k {
            return Err(Error::Invalid(format!(
                "k = {} but {} functions given",
                doc.k,
                doc.functions.len()
            )));
        }
        // Lower-bound functions sharing parameters share one family table.
        let mut families: BTreeMap<(usize, usize, usize), Arc<LowerBoundFamily>> = BTreeMap::new();
        let mut functions = Vec::with_capacity(doc.k);
        for f in doc.functions {
            let f = match f {
                FnDoc::ExplicitTable { values } => SubmodularFn::explicit_table(doc.n, values)?,
                FnDoc::Coverage {
                    universe,
                    weights,
                    covers,
                } => {
                    if weights.len() != universe {
                        return Err(Error::Invalid(format!(
                            "coverage universe {universe} but {} weights",
                            weights.len()
                        )));
                    }
                    SubmodularFn::coverage(doc.n, weights, &covers)?
                }
                FnDoc::FacilityLocation { opening, costs } => {
                    SubmodularFn::facility_location(opening, costs)?
                }
                FnDoc::LowerBound { k, p, i, pad } => {
                    let family = match families.get(&(k, p, pad)) {
                        Some(f) => f.clone(),
                        None => {
                            let f = Arc::new(LowerBoundFamily::new(k, p, pad)?);
                            families.insert((k, p, pad), f.clone());
                            f
                        }
                    };
                    SubmodularFn::lower_bound(family, i)?
                }
            };
            functions.push(f);
        }
        let mut inst = Instance::new(ground, functions)?;
        inst.metadata = doc.metadata;
        Ok(inst)
    }
}
