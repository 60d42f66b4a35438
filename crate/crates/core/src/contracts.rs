//! The main-contract and model-contract state machines: role enforcement,
//! update gating, incentive computation, the price/γ schedule, and account
//! balances.
//!
//! An update is accepted only when its false-negative rate strictly improves
//! on the global best while precision, recall, and Fβ stay within ε of their
//! running means over the accepted history. Accepted updates pay
//! `price + [(ΔR)(ΔP)(ΔFβ)]² / (γ · (FNR_best − FNR_current))`, after which
//! the price grows by the incentive and γ by a fixed step, so each accepted
//! update pays strictly more than the one before. State is a pure fold over
//! the event log, which makes journal replay an exact reconstruction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::{is_hex_digest, sha256_hex};
use crate::ledger::Entry;
use crate::metrics::MetricsReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContractError {
    #[error("caller is not authorized for this operation")]
    NotAuthorized,
    #[error("an account with this name already exists")]
    DuplicateName,
    #[error("unknown account")]
    UnknownAccount,
    #[error("the update gate did not accept these metrics")]
    GateNotPassed,
    #[error("false-negative rate did not improve")]
    ZeroImprovement,
    #[error("metrics report has undefined fields")]
    IncompleteMetrics,
    #[error("model hash is not a 64-char lowercase hex digest")]
    MalformedHash,
    #[error("replay mismatch at event {index}: {detail}")]
    ReplayMismatch { index: usize, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Regulator,
    Contributor,
    User,
}

/// A registered participant. The id is SHA-256 of the registration name and
/// the network salt, so identities stay opaque on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Account {
    pub id: String,
    pub role: Role,
    pub balance: f64,
}

/// Economic constants fixed at genesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractParams {
    pub initial_price: f64,
    pub initial_gamma: f64,
    pub gamma_step: f64,
    pub base_incentive: f64,
    pub epsilon: f64,
}

impl Default for ContractParams {
    fn default() -> Self {
        ContractParams {
            initial_price: 100.0,
            initial_gamma: 0.001,
            gamma_step: 0.002,
            base_incentive: 1.0,
            epsilon: 0.02,
        }
    }
}

/// Why the gate skipped an update: the first failing condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    Undefined,
    Fnr,
    Precision,
    Recall,
    Fbeta,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::Undefined => "undefined",
            SkipReason::Fnr => "fnr",
            SkipReason::Precision => "precision",
            SkipReason::Recall => "recall",
            SkipReason::Fbeta => "fbeta",
        }
    }
}

/// Gate verdict for one candidate report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateDecision {
    Accept,
    Skip(SkipReason),
}

impl GateDecision {
    pub fn is_accept(self) -> bool {
        matches!(self, GateDecision::Accept)
    }
}

/// Broadcast when a better model replaces the current one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdatedModelEvent {
    pub model_hash: String,
    pub metrics: MetricsReport,
}

/// One record in the contract event journal. Replaying these in order
/// reconstructs the full state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ContractEvent {
    Genesis {
        regulator_id: String,
        metrics: MetricsReport,
        model_hash: String,
    },
    Registered {
        id: String,
        role: Role,
    },
    Updated {
        entry: Entry,
    },
    BaseRewarded {
        contributor_id: String,
        amount: f64,
    },
}

/// Contract state: the global bests, accepted history, model pointer,
/// price/γ schedule, and all account balances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractState {
    pub params: ContractParams,
    pub salt: String,
    pub best: MetricsReport,
    pub history: Vec<MetricsReport>,
    pub current_model_hash: String,
    pub price: f64,
    pub gamma: f64,
    pub accepted_updates: u64,
    pub accounts: BTreeMap<String, Account>,
}

/// Deterministic account id from a registration name and the network salt.
pub fn account_id(name: &str, salt: &str) -> String {
    sha256_hex(format!("{name}{salt}").as_bytes())
}

impl ContractState {
    /// Bootstraps the contract at genesis: the regulator account is created
    /// and the genesis metrics seed both the global best and the history.
    pub fn genesis(
        params: ContractParams,
        salt: &str,
        regulator_name: &str,
        genesis_metrics: MetricsReport,
        genesis_model_hash: &str,
    ) -> Result<(ContractState, Account, ContractEvent), ContractError> {
        if !genesis_metrics.is_complete() {
            return Err(ContractError::IncompleteMetrics);
        }
        if !is_hex_digest(genesis_model_hash) {
            return Err(ContractError::MalformedHash);
        }
        let regulator = Account {
            id: account_id(regulator_name, salt),
            role: Role::Regulator,
            balance: 0.0,
        };
        let mut accounts = BTreeMap::new();
        accounts.insert(regulator.id.clone(), regulator.clone());
        let event = ContractEvent::Genesis {
            regulator_id: regulator.id.clone(),
            metrics: genesis_metrics,
            model_hash: genesis_model_hash.to_string(),
        };
        let state = ContractState {
            params,
            salt: salt.to_string(),
            best: genesis_metrics,
            history: vec![genesis_metrics],
            current_model_hash: genesis_model_hash.to_string(),
            price: params.initial_price,
            gamma: params.initial_gamma,
            accepted_updates: 0,
            accounts,
        };
        Ok((state, regulator, event))
    }

    pub fn account(&self, id: &str) -> Option<&Account> {
        self.accounts.get(id)
    }

    pub fn regulator(&self) -> &Account {
        self.accounts
            .values()
            .find(|a| a.role == Role::Regulator)
            .expect("genesis created the regulator")
    }

    fn require_role(&self, id: &str, role: Role) -> Result<&Account, ContractError> {
        let account = self.accounts.get(id).ok_or(ContractError::UnknownAccount)?;
        if account.role != role {
            return Err(ContractError::NotAuthorized);
        }
        Ok(account)
    }

    /// Arithmetic mean of one metric over the accepted history (which
    /// includes the genesis seed).
    pub fn history_mean<F: Fn(&MetricsReport) -> f64>(&self, field: F) -> f64 {
        let sum: f64 = self.history.iter().map(&field).sum();
        sum / self.history.len() as f64
    }
}

/// Registers a new contributor or user. Only the regulator may register
/// accounts, and the single regulator itself is created at genesis.
pub fn register_account(
    state: &mut ContractState,
    name: &str,
    role: Role,
    caller_id: &str,
) -> Result<(Account, ContractEvent), ContractError> {
    state.require_role(caller_id, Role::Regulator)?;
    if role == Role::Regulator {
        return Err(ContractError::NotAuthorized);
    }
    let id = account_id(name, &state.salt);
    if state.accounts.contains_key(&id) {
        return Err(ContractError::DuplicateName);
    }
    let account = Account {
        id: id.clone(),
        role,
        balance: 0.0,
    };
    state.accounts.insert(id.clone(), account.clone());
    Ok((account, ContractEvent::Registered { id, role }))
}

/// The update gate: accept iff the false-negative rate strictly improves on
/// the best AND precision, recall, and Fβ each sit within ε below their
/// running historical means. Skips name the first failing condition.
pub fn compare_result(current: &MetricsReport, state: &ContractState) -> GateDecision {
    if !current.is_complete() {
        return GateDecision::Skip(SkipReason::Undefined);
    }
    // is_complete keeps NaN out, so >= is the exact complement of <.
    if current.fnr >= state.best.fnr {
        return GateDecision::Skip(SkipReason::Fnr);
    }
    let eps = state.params.epsilon;
    if current.precision < state.history_mean(|m| m.precision) - eps {
        return GateDecision::Skip(SkipReason::Precision);
    }
    if current.recall < state.history_mean(|m| m.recall) - eps {
        return GateDecision::Skip(SkipReason::Recall);
    }
    if current.fbeta < state.history_mean(|m| m.fbeta) - eps {
        return GateDecision::Skip(SkipReason::Fbeta);
    }
    GateDecision::Accept
}

/// The incentive for an accepted update:
/// `price + [(R−R_B)·(P−P_B)·(Fβ−Fβ_B)]² / (γ · (FNR_B − FNR))`.
/// The squared numerator and the positive improvement in the denominator
/// keep the result at or above the current price.
pub fn calculate_incentive(current: &MetricsReport, state: &ContractState) -> Result<f64, ContractError> {
    let improvement = state.best.fnr - current.fnr;
    if improvement <= 0.0 {
        return Err(ContractError::ZeroImprovement);
    }
    let delta = (current.recall - state.best.recall)
        * (current.precision - state.best.precision)
        * (current.fbeta - state.best.fbeta);
    Ok(state.price + (delta * delta) / (state.gamma * improvement))
}

/// Outcome of an accepted update: the block entry and the broadcast event.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome {
    pub entry: Entry,
    pub event: UpdatedModelEvent,
    pub journal_event: ContractEvent,
    pub incentive: f64,
}

/// Applies an accepted model update: bests and history advance, the model
/// pointer moves, the contributor is paid, the price grows by the incentive,
/// and γ steps up.
pub fn apply_model_update(
    state: &mut ContractState,
    current: &MetricsReport,
    new_model_hash: &str,
    contributor_id: &str,
) -> Result<UpdateOutcome, ContractError> {
    state.require_role(contributor_id, Role::Contributor)?;
    if !is_hex_digest(new_model_hash) {
        return Err(ContractError::MalformedHash);
    }
    if !compare_result(current, state).is_accept() {
        return Err(ContractError::GateNotPassed);
    }
    let incentive = calculate_incentive(current, state)?;
    let account = state
        .accounts
        .get_mut(contributor_id)
        .expect("role check resolved the account");
    account.balance += incentive;
    state.price += incentive;
    state.gamma += state.params.gamma_step;
    state.best = *current;
    state.history.push(*current);
    state.current_model_hash = new_model_hash.to_string();
    state.accepted_updates += 1;
    let entry = Entry {
        contributor_id: contributor_id.to_string(),
        metrics: *current,
        model_hash: new_model_hash.to_string(),
        incentive_paid: incentive,
    };
    Ok(UpdateOutcome {
        event: UpdatedModelEvent {
            model_hash: new_model_hash.to_string(),
            metrics: *current,
        },
        journal_event: ContractEvent::Updated { entry: entry.clone() },
        entry,
        incentive,
    })
}

/// Pays the base incentive for a contribution that passed preparation but
/// did not improve the model. Nothing else changes.
pub fn reward_base(
    state: &mut ContractState,
    contributor_id: &str,
) -> Result<(f64, ContractEvent), ContractError> {
    state.require_role(contributor_id, Role::Contributor)?;
    let amount = state.params.base_incentive;
    state
        .accounts
        .get_mut(contributor_id)
        .expect("role check resolved the account")
        .balance += amount;
    Ok((
        amount,
        ContractEvent::BaseRewarded {
            contributor_id: contributor_id.to_string(),
            amount,
        },
    ))
}

/// Rebuilds the state by folding the event journal from genesis. Recorded
/// incentives are recomputed against the reconstructed state and must match
/// bit-exactly; any divergence is a replay mismatch.
pub fn replay(
    params: ContractParams,
    salt: &str,
    events: &[ContractEvent],
) -> Result<ContractState, ContractError> {
    let mut iter = events.iter().enumerate();
    let mut state = match iter.next() {
        Some((_, ContractEvent::Genesis { regulator_id, metrics, model_hash })) => {
            if !is_hex_digest(model_hash) {
                return Err(ContractError::MalformedHash);
            }
            let regulator = Account {
                id: regulator_id.clone(),
                role: Role::Regulator,
                balance: 0.0,
            };
            let mut accounts = BTreeMap::new();
            accounts.insert(regulator.id.clone(), regulator);
            ContractState {
                params,
                salt: salt.to_string(),
                best: *metrics,
                history: vec![*metrics],
                current_model_hash: model_hash.clone(),
                price: params.initial_price,
                gamma: params.initial_gamma,
                accepted_updates: 0,
                accounts,
            }
        }
        _ => {
            return Err(ContractError::ReplayMismatch {
                index: 0,
                detail: "journal must start with the genesis event".into(),
            })
        }
    };
    for (index, event) in iter {
        match event {
            ContractEvent::Genesis { .. } => {
                return Err(ContractError::ReplayMismatch {
                    index,
                    detail: "duplicate genesis".into(),
                })
            }
            ContractEvent::Registered { id, role } => {
                if state.accounts.contains_key(id) {
                    return Err(ContractError::ReplayMismatch {
                        index,
                        detail: "duplicate account".into(),
                    });
                }
                state.accounts.insert(
                    id.clone(),
                    Account {
                        id: id.clone(),
                        role: *role,
                        balance: 0.0,
                    },
                );
            }
            ContractEvent::Updated { entry } => {
                let outcome = apply_model_update(
                    &mut state,
                    &entry.metrics,
                    &entry.model_hash,
                    &entry.contributor_id,
                )
                .map_err(|e| ContractError::ReplayMismatch {
                    index,
                    detail: e.to_string(),
                })?;
                if outcome.incentive.to_bits() != entry.incentive_paid.to_bits() {
                    return Err(ContractError::ReplayMismatch {
                        index,
                        detail: format!(
                            "recomputed incentive {} != recorded {}",
                            outcome.incentive, entry.incentive_paid
                        ),
                    });
                }
            }
            ContractEvent::BaseRewarded { contributor_id, amount } => {
                let (paid, _) = reward_base(&mut state, contributor_id).map_err(|e| {
                    ContractError::ReplayMismatch {
                        index,
                        detail: e.to_string(),
                    }
                })?;
                if paid.to_bits() != amount.to_bits() {
                    return Err(ContractError::ReplayMismatch {
                        index,
                        detail: "base reward amount drifted".into(),
                    });
                }
            }
        }
    }
    Ok(state)
}
