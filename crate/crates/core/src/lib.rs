//! Collaborative fraud-detection platform: organizations incrementally improve
//! a shared online linear classifier; accepted improvements are gated by metric
//! criteria, sealed as proof-of-work blocks, and rewarded by a difficulty-adaptive
//! incentive. Training data stays off-chain; only metrics and model hashes are
//! recorded.

pub mod canonical;
pub mod cli;
pub mod contracts;
pub mod ingest;
pub mod learner;
pub mod ledger;
pub mod metrics;
pub mod sampling;
pub mod service;
pub mod simnet;

pub use contracts::{Account, ContractEvent, ContractState, Role};
pub use learner::LinearModel;
pub use ledger::{Block, Chain, Entry};
pub use metrics::{ConfusionMatrix, MetricsReport};
pub use sampling::Dataset;
pub use simnet::{ContributionOutcome, ScenarioReport, SimConfig, SimState};
