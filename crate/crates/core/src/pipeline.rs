//! LP → chains → rounding, optionally with the exhaustive optimum.

use crate::chains::{uncross, ChainAllocation};
use crate::error::Result;
use crate::function::Instance;
use crate::lp_relaxation::{solve_lp, LpSolution};
use crate::rounding::{round, RoundingOutcome};
use crate::verification::{assignment_count, brute_force_opt_with_budget, Artifacts, BruteResult};

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub lp: LpSolution,
    pub chain: ChainAllocation,
    pub rounding: RoundingOutcome,
    pub brute: Option<BruteResult>,
}

impl PipelineRun {
    pub fn artifacts(&self) -> Artifacts {
        Artifacts {
            allocation: self.lp.allocation.clone(),
            claimed_objective: Some(self.lp.objective.clone()),
            lp_optimum: Some(self.lp.objective.clone()),
            chain: Some(self.chain.clone()),
            rounding: Some(self.rounding.clone()),
            brute: self.brute.clone(),
        }
    }
}

/// Runs the full pipeline. The brute-force optimum is computed only when a
/// budget is given and `k^n` fits in it.
pub fn run_pipeline(inst: &Instance, brute_budget: Option<u64>) -> Result<PipelineRun> {
    let lp = solve_lp(inst)?;
    let chain = uncross(inst, &lp.allocation)?;
    let rounding = round(inst, &chain)?;
    let brute = match brute_budget {
        Some(b) if assignment_count(inst.k, inst.n()) <= b as u128 => {
            Some(brute_force_opt_with_budget(inst, b)?)
        }
        _ => None,
    };
    Ok(PipelineRun {
        lp,
        chain,
        rounding,
        brute,
    })
}
