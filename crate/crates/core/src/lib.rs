//! Feasibility analysis of Sybil attacks on shard-based permissionless
//! blockchains: closed-form and hybrid analytic success probabilities for
//! consensus-veto (BCP) and output-takeover (GFT) attacks, a Monte Carlo
//! epoch simulator that validates the analytics, and sweep harnesses that
//! reproduce the parameter studies.

pub mod analytics;
pub mod exactmath;
pub mod experiments;
pub mod pow;
pub mod protocol;
pub mod rng;
pub mod sampling;
pub mod sim;
pub mod stats;

pub use analytics::{attack_probability, selection_pmf, Attack, AttackProbability, McConfig};
pub use protocol::{ConsensusThresholdSpec, ProtocolParams};
pub use sim::{run_epoch, run_trials, SimulationReport};
