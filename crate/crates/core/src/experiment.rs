//! Gap experiments: batches of full pipeline runs rendered as CSV.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::Instance;
use crate::instances::{gen_coverage, gen_facility_location, gen_lower_bound, CoverageParams, FacilityParams, LowerBoundFamily};
use crate::pipeline::{run_pipeline, PipelineRun};
use crate::rational::{render, to_decimal, Rat};
use crate::verification::{verify_lemma_suite, VerificationReport, BRUTE_BUDGET};

/// Significant digits in the `_dec` columns.
pub const DECIMAL_DIGITS: u32 = 20;

/// Largest gap-family ground set the `gap` suite will include.
const GAP_MAX_N: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Lower-bound family for every `(k, p)` that fits.
    Gap,
    /// Random coverage and facility-location instances, `n ∈ [4, 10]`.
    Random,
    /// Random `k = 2` instances, `n ≤ 8`.
    K2,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gap" => Ok(Suite::Gap),
            "random" => Ok(Suite::Random),
            "k2" => Ok(Suite::K2),
            _ => Err(Error::Parse(format!("unknown suite {s:?} (expected gap, random or k2)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub seed: u64,
    /// Instance count for the random suites; ignored by `gap`.
    pub trials: usize,
    pub kmax: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentInstance {
    pub id: String,
    pub family: &'static str,
    pub p: Option<usize>,
    pub instance: Instance,
}

/// The suite's instances in row order.
pub fn suite_instances(cfg: &ExperimentConfig) -> Result<Vec<ExperimentInstance>> {
    if cfg.kmax < 2 {
        return Err(Error::Invalid(format!("kmax must be at least 2, got {}", cfg.kmax)));
    }
    let mut out = Vec::new();
    match cfg.suite {
        Suite::Gap => {
            for k in 2..=cfg.kmax {
                for p in 1.. {
                    // n = C(pk, k-1) grows with p; stop at the first that is too big.
                    match LowerBoundFamily::new(k, p, 0) {
                        Ok(f) if f.n() <= GAP_MAX_N => {}
                        _ => break,
                    }
                    out.push(ExperimentInstance {
                        id: format!("gap-k{k}-p{p}"),
                        family: "lowerbound",
                        p: Some(p),
                        instance: gen_lower_bound(k, p, 0)?,
                    });
                }
            }
        }
        Suite::Random | Suite::K2 => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let prefix = if cfg.suite == Suite::K2 { "k2" } else { "random" };
            for t in 0..cfg.trials {
                let (n, k) = match cfg.suite {
                    Suite::K2 => (rng.gen_range(2..=8), 2),
                    _ => (rng.gen_range(4..=10), rng.gen_range(2..=cfg.kmax)),
                };
                let seed = rng.gen::<u64>();
                let (family, instance) = if t % 2 == 0 {
                    let universe = rng.gen_range(n..=2 * n);
                    let p = CoverageParams {
                        n,
                        k,
                        universe,
                        density: 0.35,
                        unit_weights: false,
                        seed,
                    };
                    ("coverage", gen_coverage(&p)?)
                } else {
                    let p = FacilityParams {
                        n,
                        k,
                        opening: (0, 10),
                        assignment: (0, 10),
                        seed,
                    };
                    ("facility", gen_facility_location(&p)?)
                };
                out.push(ExperimentInstance {
                    id: format!("{prefix}-{t:04}"),
                    family,
                    p: None,
                    instance,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ExperimentRow {
    pub instance_id: String,
    pub family: &'static str,
    pub n: usize,
    pub k: usize,
    pub p: Option<usize>,
    pub run: PipelineRun,
    pub report: VerificationReport,
}

impl ExperimentRow {
    pub fn lp_value(&self) -> &Rat {
        &self.run.lp.objective
    }

    pub fn round_value(&self) -> &Rat {
        &self.run.rounding.value
    }

    pub fn brute_value(&self) -> Option<&Rat> {
        self.run.brute.as_ref().map(|b| &b.value)
    }

    pub fn k_half_bound(&self) -> Rat {
        Rat::new(BigInt::from(self.k), BigInt::from(2))
    }

    pub fn ratio_round_lp(&self) -> Option<Rat> {
        self.run.rounding.ratio()
    }

    pub fn ratio_brute_lp(&self) -> Option<Rat> {
        let lp = self.lp_value();
        self.brute_value().filter(|_| !num_traits::Zero::is_zero(lp)).map(|b| b / lp)
    }
}

pub fn run_instance(x: &ExperimentInstance) -> Result<ExperimentRow> {
    let run = run_pipeline(&x.instance, Some(BRUTE_BUDGET))?;
    let report = verify_lemma_suite(&x.instance, &run.artifacts());
    Ok(ExperimentRow {
        instance_id: x.id.clone(),
        family: x.family,
        n: x.instance.n(),
        k: x.instance.k,
        p: x.p,
        run,
        report,
    })
}

/// Runs every instance of the suite in parallel; rows keep suite order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    suite_instances(cfg)?.par_iter().map(run_instance).collect()
}

const RAT_COLUMNS: [&str; 6] = [
    "lp_value",
    "round_value",
    "brute_value",
    "ratio_round_lp",
    "ratio_brute_lp",
    "k_half_bound",
];

/// CSV with a header row; every rational gets an exact column and a
/// `_dec` column. Missing values are empty cells.
pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from("instance_id,family,n,k,p");
    for c in RAT_COLUMNS {
        let _ = write!(out, ",{c},{c}_dec");
    }
    out.push_str(",lemma_suite\n");
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            r.instance_id,
            r.family,
            r.n,
            r.k,
            r.p.map(|p| p.to_string()).unwrap_or_default()
        );
        let values = [
            Some(r.lp_value().clone()),
            Some(r.round_value().clone()),
            r.brute_value().cloned(),
            r.ratio_round_lp(),
            r.ratio_brute_lp(),
            Some(r.k_half_bound()),
        ];
        for v in &values {
            match v {
                Some(v) => {
                    let _ = write!(out, ",{},{}", render(v), to_decimal(v, DECIMAL_DIGITS));
                }
                None => out.push_str(",,"),
            }
        }
        let verdict = if r.report.all_pass() {
            "pass".to_string()
        } else {
            let names: Vec<_> = r.report.failures().iter().map(|c| c.name.as_str()).collect();
            format!("fail:{}", names.join(";"))
        };
        let _ = writeln!(out, ",{verdict}");
    }
    out
}
