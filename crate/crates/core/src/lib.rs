//! Exact tools for monotone minimum submodular cost allocation: the LP
//! relaxation, its chain form, the deterministic `k/2` rounding, and the
//! oracles used to check all of it.

pub mod chains;
pub mod error;
pub mod experiment;
pub mod function;
pub mod instances;
pub mod lovasz;
pub mod lp_relaxation;
pub mod pipeline;
pub mod rational;
pub mod rounding;
pub mod subset;
pub mod verification;

pub use error::{Error, Result};
pub use function::{Instance, SubmodularFn};
pub use rational::Rat;
pub use subset::{GroundSet, Subset};
