//! C ABI for the ledgerlearn core: opaque simulation handles, status codes,
//! and UTF-8 JSON strings for structured results.
//!
//! Every function returns an [`LlnStatus`]; `lln_last_error_message` gives
//! the detail for the most recent failure on the calling thread. Strings
//! handed out by this library must be released with `lln_string_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};

use ledgerlearn::canonical::to_canonical_json;
use ledgerlearn::contracts::Role;
use ledgerlearn::ingest::{generate_csv, GeneratorParams};
use ledgerlearn::ledger::verify_chain;
use ledgerlearn::simnet::{
    contribute, persist, query, run_scenario, SimConfig, SimState,
};

/// Status codes returned by every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    IoError = 4,
    NotAuthorized = 5,
    UnknownAccount = 6,
    /// The dataset was rejected by the preparation pipeline.
    Rejected = 7,
    Internal = 8,
}

/// Account roles, mirrored for C callers.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlnRole {
    Regulator = 0,
    Contributor = 1,
    User = 2,
}

/// Opaque simulation handle.
pub struct LlnSim {
    state: SimState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: LlnStatus, message: &str) -> LlnStatus {
    set_error(message);
    status
}

fn sim_error_status(err: &ledgerlearn::simnet::SimError) -> LlnStatus {
    use ledgerlearn::simnet::SimError;
    match err {
        SimError::NotAuthorized => LlnStatus::NotAuthorized,
        SimError::UnknownAccount => LlnStatus::UnknownAccount,
        SimError::Persistence(_) => LlnStatus::IoError,
        _ => LlnStatus::Internal,
    }
}

unsafe fn required_str<'a>(ptr: *const c_char) -> Result<&'a str, LlnStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(LlnStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        LlnStatus::InvalidUtf8
    })
}

fn hand_out(s: String, out: *mut *mut c_char) -> LlnStatus {
    if out.is_null() {
        return fail(LlnStatus::NullPointer, "null output pointer");
    }
    match CString::new(s) {
        Ok(cstring) => {
            unsafe { *out = cstring.into_raw() };
            LlnStatus::Ok
        }
        Err(_) => fail(LlnStatus::Internal, "output contained an interior NUL"),
    }
}

fn parse_config(config_json: Option<&str>) -> Result<SimConfig, LlnStatus> {
    match config_json {
        None | Some("") => Ok(SimConfig::default()),
        Some(text) => serde_json::from_str(text).map_err(|e| {
            set_error(&format!("config json: {e}"));
            LlnStatus::InvalidArgument
        }),
    }
}

/// Detail message for the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lln_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Frees a string handed out by this library.
#[no_mangle]
pub unsafe extern "C" fn lln_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Generates a synthetic transaction CSV; identical inputs give identical
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn lln_generate_csv(
    rows: u64,
    fraud_rate: f64,
    seed: u64,
    noise: f64,
    out_csv: *mut *mut c_char,
) -> LlnStatus {
    let params = GeneratorParams::new(rows as usize, fraud_rate, seed).with_noise(noise);
    match generate_csv(params) {
        Ok(csv) => hand_out(csv, out_csv),
        Err(e) => fail(LlnStatus::InvalidArgument, &e.to_string()),
    }
}

/// Runs a deterministic scenario and returns a live handle plus the report
/// as JSON (pass NULL to skip the report). `config_json` is a JSON object
/// matching the simulation config; NULL or empty uses the defaults.
#[no_mangle]
pub unsafe extern "C" fn lln_sim_scenario(
    config_json: *const c_char,
    contributions: u32,
    out_sim: *mut *mut LlnSim,
    out_report_json: *mut *mut c_char,
) -> LlnStatus {
    if out_sim.is_null() {
        return fail(LlnStatus::NullPointer, "null output pointer");
    }
    let config_text = if config_json.is_null() {
        None
    } else {
        match required_str(config_json) {
            Ok(s) => Some(s),
            Err(status) => return status,
        }
    };
    let cfg = match parse_config(config_text) {
        Ok(cfg) => cfg,
        Err(status) => return status,
    };
    match run_scenario(&cfg, contributions) {
        Ok((state, report)) => {
            *out_sim = Box::into_raw(Box::new(LlnSim { state }));
            if out_report_json.is_null() {
                LlnStatus::Ok
            } else {
                hand_out(to_canonical_json(&report), out_report_json)
            }
        }
        Err(e) => fail(sim_error_status(&e), &e.to_string()),
    }
}

/// Loads a simulation state previously saved to a data directory; the load
/// replays the journals and re-verifies the chain.
#[no_mangle]
pub unsafe extern "C" fn lln_sim_load(data_dir: *const c_char, out_sim: *mut *mut LlnSim) -> LlnStatus {
    if out_sim.is_null() {
        return fail(LlnStatus::NullPointer, "null output pointer");
    }
    let dir = match required_str(data_dir) {
        Ok(s) => PathBuf::from(s),
        Err(status) => return status,
    };
    match persist::load_state(&dir) {
        Ok(state) => {
            *out_sim = Box::into_raw(Box::new(LlnSim { state }));
            LlnStatus::Ok
        }
        Err(e) => fail(sim_error_status(&e), &e.to_string()),
    }
}

/// Saves the simulation state under a data directory.
#[no_mangle]
pub unsafe extern "C" fn lln_sim_save(sim: *mut LlnSim, data_dir: *const c_char) -> LlnStatus {
    let Some(sim) = sim.as_mut() else {
        return fail(LlnStatus::NullPointer, "null sim handle");
    };
    let dir = match required_str(data_dir) {
        Ok(s) => PathBuf::from(s),
        Err(status) => return status,
    };
    match persist::save_state(&sim.state, Path::new(&dir)) {
        Ok(()) => LlnStatus::Ok,
        Err(e) => fail(sim_error_status(&e), &e.to_string()),
    }
}

/// Destroys a simulation handle.
#[no_mangle]
pub unsafe extern "C" fn lln_sim_free(sim: *mut LlnSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Registers an account through the regulator; returns its 64-hex id.
#[no_mangle]
pub unsafe extern "C" fn lln_sim_register(
    sim: *mut LlnSim,
    name: *const c_char,
    role: LlnRole,
    out_id: *mut *mut c_char,
) -> LlnStatus {
    let Some(sim) = sim.as_mut() else {
        return fail(LlnStatus::NullPointer, "null sim handle");
    };
    let name = match required_str(name) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let role = match role {
        LlnRole::Contributor => Role::Contributor,
        LlnRole::User => Role::User,
        LlnRole::Regulator => {
            return fail(LlnStatus::NotAuthorized, "the regulator is created at genesis")
        }
    };
    match sim.state.register(name, role) {
        Ok(id) => hand_out(id, out_id),
        Err(e) => fail(sim_error_status(&e), &e.to_string()),
    }
}

/// Submits a dataset (CSV bytes) as a contributor; the outcome is returned
/// as JSON. A dataset the pipeline rejects yields `Rejected` and the reason
/// is still written to the outcome JSON.
#[no_mangle]
pub unsafe extern "C" fn lln_sim_contribute(
    sim: *mut LlnSim,
    contributor_id: *const c_char,
    csv: *const u8,
    csv_len: usize,
    out_outcome_json: *mut *mut c_char,
) -> LlnStatus {
    let Some(sim) = sim.as_mut() else {
        return fail(LlnStatus::NullPointer, "null sim handle");
    };
    let contributor = match required_str(contributor_id) {
        Ok(s) => s.to_string(),
        Err(status) => return status,
    };
    if csv.is_null() {
        return fail(LlnStatus::NullPointer, "null csv pointer");
    }
    let bytes = std::slice::from_raw_parts(csv, csv_len);
    match contribute(&mut sim.state, &contributor, bytes) {
        Ok(outcome) => {
            let rejected =
                matches!(outcome, ledgerlearn::simnet::ContributionOutcome::Rejected { .. });
            let status = hand_out(to_canonical_json(&outcome), out_outcome_json);
            if status != LlnStatus::Ok {
                return status;
            }
            if rejected {
                fail(LlnStatus::Rejected, "dataset rejected by the pipeline")
            } else {
                LlnStatus::Ok
            }
        }
        Err(e) => fail(sim_error_status(&e), &e.to_string()),
    }
}

/// Predicts one feature row with the current best model. The serving model
/// hash is returned when `out_model_hash` is non-NULL.
#[no_mangle]
pub unsafe extern "C" fn lln_sim_query(
    sim: *mut LlnSim,
    caller_id: *const c_char,
    row: *const f64,
    row_len: usize,
    out_prediction: *mut u8,
    out_model_hash: *mut *mut c_char,
) -> LlnStatus {
    let Some(sim) = sim.as_mut() else {
        return fail(LlnStatus::NullPointer, "null sim handle");
    };
    let caller = match required_str(caller_id) {
        Ok(s) => s.to_string(),
        Err(status) => return status,
    };
    if row.is_null() || out_prediction.is_null() {
        return fail(LlnStatus::NullPointer, "null row or output pointer");
    }
    let features = std::slice::from_raw_parts(row, row_len);
    match query(&mut sim.state, &caller, features) {
        Ok((prediction, hash)) => {
            *out_prediction = prediction;
            if out_model_hash.is_null() {
                LlnStatus::Ok
            } else {
                hand_out(hash, out_model_hash)
            }
        }
        Err(ledgerlearn::simnet::SimError::Learner(
            ledgerlearn::learner::LearnerError::ArityMismatch,
        )) => fail(LlnStatus::InvalidArgument, "feature row has wrong arity"),
        Err(e) => fail(sim_error_status(&e), &e.to_string()),
    }
}

/// Verifies the chain; writes -1 for a valid chain, otherwise the index of
/// the first invalid block.
#[no_mangle]
pub unsafe extern "C" fn lln_sim_chain_verify(sim: *const LlnSim, out_first_invalid: *mut i64) -> LlnStatus {
    let Some(sim) = sim.as_ref() else {
        return fail(LlnStatus::NullPointer, "null sim handle");
    };
    if out_first_invalid.is_null() {
        return fail(LlnStatus::NullPointer, "null output pointer");
    }
    *out_first_invalid = match verify_chain(&sim.state.chain) {
        Ok(()) => -1,
        Err(fault) => fault.index as i64,
    };
    LlnStatus::Ok
}

/// Counters and chain facts as JSON.
#[no_mangle]
pub unsafe extern "C" fn lln_sim_stats_json(sim: *const LlnSim, out_json: *mut *mut c_char) -> LlnStatus {
    let Some(sim) = sim.as_ref() else {
        return fail(LlnStatus::NullPointer, "null sim handle");
    };
    let stats = serde_json::json!({
        "total_contributions": sim.state.contributions_total,
        "model_updates": sim.state.contract.accepted_updates,
        "queries_served": sim.state.queries_served,
        "chain_length": sim.state.chain.blocks.len(),
        "current_model_hash": sim.state.contract.current_model_hash,
        "price": sim.state.contract.price,
        "gamma": sim.state.contract.gamma,
    });
    hand_out(to_canonical_json(&stats), out_json)
}
