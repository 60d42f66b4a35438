//! JSON-over-HTTP node interface around a single live simulation state.
//!
//! A single writer thread owns the state and consumes commands in FIFO
//! order, so concurrent uploads queue rather than race. Read endpoints serve
//! immutable snapshots published by the writer after every command. Bearer
//! tokens are account ids; role gates mirror the contract's modifier matrix.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use tokio::sync::{mpsc, oneshot, watch};

use crate::contracts::Role;
use crate::learner::LearnerError;
use crate::ledger::{verify_chain, Block, Chain};
use crate::metrics::MetricsReport;
use crate::simnet::{contribute, query, ContributionOutcome, SimError, SimState};

/// Immutable view published by the writer after every state change.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub blocks: Vec<Block>,
    pub difficulty: u8,
    pub current_model_hash: String,
    pub best: MetricsReport,
    pub accounts: BTreeMap<String, (Role, f64)>,
    pub total_contributions: u64,
    pub model_updates: u64,
    pub queries_served: u64,
}

impl Snapshot {
    fn capture(state: &SimState) -> Snapshot {
        Snapshot {
            blocks: state.chain.blocks.clone(),
            difficulty: state.chain.difficulty,
            current_model_hash: state.contract.current_model_hash.clone(),
            best: state.contract.best,
            accounts: state
                .contract
                .accounts
                .values()
                .map(|a| (a.id.clone(), (a.role, a.balance)))
                .collect(),
            total_contributions: state.contributions_total,
            model_updates: state.contract.accepted_updates,
            queries_served: state.queries_served,
        }
    }
}

enum Command {
    Contribute {
        caller: String,
        csv: Vec<u8>,
        reply: oneshot::Sender<Result<ContributionOutcome, SimError>>,
    },
    Query {
        caller: String,
        row: Vec<f64>,
        reply: oneshot::Sender<Result<(u8, String), SimError>>,
    },
}

/// Shared handle the handlers use: the command queue and the latest snapshot.
#[derive(Clone)]
pub struct ServiceCtx {
    commands: mpsc::Sender<Command>,
    snapshot: watch::Receiver<Arc<Snapshot>>,
}

impl ServiceCtx {
    fn latest(&self) -> Arc<Snapshot> {
        self.snapshot.borrow().clone()
    }
}

/// Builds the router and starts the writer thread that owns the state.
pub fn build(state: SimState) -> Router {
    build_with_persistence(state, None)
}

/// As [`build`]; when a data directory is given, the writer saves the state
/// there after every command.
pub fn build_with_persistence(state: SimState, data_dir: Option<std::path::PathBuf>) -> Router {
    let (tx, mut rx) = mpsc::channel::<Command>(64);
    let (snap_tx, snap_rx) = watch::channel(Arc::new(Snapshot::capture(&state)));

    std::thread::spawn(move || {
        let mut state = state;
        let persist = |state: &SimState| {
            if let Some(dir) = &data_dir {
                if let Err(err) = crate::simnet::persist::save_state(state, dir) {
                    eprintln!("state save failed: {err}");
                }
            }
        };
        while let Some(command) = rx.blocking_recv() {
            match command {
                Command::Contribute { caller, csv, reply } => {
                    let outcome = contribute(&mut state, &caller, &csv);
                    persist(&state);
                    let _ = snap_tx.send(Arc::new(Snapshot::capture(&state)));
                    let _ = reply.send(outcome);
                }
                Command::Query { caller, row, reply } => {
                    let result = query(&mut state, &caller, &row);
                    persist(&state);
                    let _ = snap_tx.send(Arc::new(Snapshot::capture(&state)));
                    let _ = reply.send(result);
                }
            }
        }
    });

    let ctx = ServiceCtx {
        commands: tx,
        snapshot: snap_rx,
    };
    Router::new()
        .route("/contribute", post(contribute_handler))
        .route("/query", post(query_handler))
        .route("/chain", get(chain_handler))
        .route("/chain/verify", get(chain_verify_handler))
        .route("/model", get(model_handler))
        .route("/accounts/{id}", get(account_handler))
        .route("/stats", get(stats_handler))
        .layer(DefaultBodyLimit::max(64 * 1024 * 1024))
        .with_state(ctx)
}

/// Binds a listener and serves the state; returns the bound address and the
/// server task handle.
pub async fn serve_on(
    state: SimState,
    addr: SocketAddr,
) -> std::io::Result<(SocketAddr, tokio::task::JoinHandle<std::io::Result<()>>)> {
    serve_on_with_persistence(state, addr, None).await
}

pub async fn serve_on_with_persistence(
    state: SimState,
    addr: SocketAddr,
    data_dir: Option<std::path::PathBuf>,
) -> std::io::Result<(SocketAddr, tokio::task::JoinHandle<std::io::Result<()>>)> {
    let router = build_with_persistence(state, data_dir);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let bound = listener.local_addr()?;
    let handle = tokio::spawn(async move { axum::serve(listener, router).await });
    Ok((bound, handle))
}

fn error_body(status: StatusCode, message: &str) -> Response {
    (status, Json(json!({ "error": message }))).into_response()
}

/// Resolves the bearer token to a registered account.
fn authorize(
    snapshot: &Snapshot,
    headers: &HeaderMap,
) -> Result<(String, Role), (StatusCode, &'static str)> {
    let token = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::trim)
        .ok_or((StatusCode::UNAUTHORIZED, "missing bearer token"))?;
    match snapshot.accounts.get(token) {
        Some((role, _)) => Ok((token.to_string(), *role)),
        None => Err((StatusCode::UNAUTHORIZED, "unknown token")),
    }
}

async fn contribute_handler(
    State(ctx): State<ServiceCtx>,
    headers: HeaderMap,
    mut multipart: Multipart,
) -> Response {
    let (caller, role) = match authorize(&ctx.latest(), &headers) {
        Ok(auth) => auth,
        Err((status, msg)) => return error_body(status, msg),
    };
    if role != Role::Contributor {
        return error_body(StatusCode::FORBIDDEN, "only contributors may add data");
    }
    let mut csv: Option<Vec<u8>> = None;
    while let Ok(Some(field)) = multipart.next_field().await {
        if field.name() == Some("dataset") {
            match field.bytes().await {
                Ok(bytes) => csv = Some(bytes.to_vec()),
                Err(_) => return error_body(StatusCode::UNPROCESSABLE_ENTITY, "unreadable upload"),
            }
        }
    }
    let Some(csv) = csv else {
        return error_body(StatusCode::UNPROCESSABLE_ENTITY, "multipart field `dataset` missing");
    };
    let (reply, rx) = oneshot::channel();
    if ctx
        .commands
        .send(Command::Contribute { caller, csv, reply })
        .await
        .is_err()
    {
        return error_body(StatusCode::INTERNAL_SERVER_ERROR, "writer unavailable");
    }
    match rx.await {
        Ok(Ok(outcome @ ContributionOutcome::Rejected { .. })) => {
            (StatusCode::UNPROCESSABLE_ENTITY, Json(outcome)).into_response()
        }
        Ok(Ok(outcome)) => (StatusCode::OK, Json(outcome)).into_response(),
        Ok(Err(err)) => sim_error_response(err),
        Err(_) => error_body(StatusCode::INTERNAL_SERVER_ERROR, "writer dropped the request"),
    }
}

async fn query_handler(
    State(ctx): State<ServiceCtx>,
    headers: HeaderMap,
    body: Result<Json<Vec<f64>>, axum::extract::rejection::JsonRejection>,
) -> Response {
    let (caller, _role) = match authorize(&ctx.latest(), &headers) {
        Ok(auth) => auth,
        Err((status, msg)) => return error_body(status, msg),
    };
    let Ok(Json(row)) = body else {
        return error_body(StatusCode::BAD_REQUEST, "body must be a JSON array of numbers");
    };
    let (reply, rx) = oneshot::channel();
    if ctx
        .commands
        .send(Command::Query { caller, row, reply })
        .await
        .is_err()
    {
        return error_body(StatusCode::INTERNAL_SERVER_ERROR, "writer unavailable");
    }
    match rx.await {
        Ok(Ok((prediction, model_hash))) => (
            StatusCode::OK,
            Json(json!({ "prediction": prediction, "model_hash": model_hash })),
        )
            .into_response(),
        Ok(Err(err)) => sim_error_response(err),
        Err(_) => error_body(StatusCode::INTERNAL_SERVER_ERROR, "writer dropped the request"),
    }
}

fn sim_error_response(err: SimError) -> Response {
    match err {
        SimError::NotAuthorized => error_body(StatusCode::FORBIDDEN, "wrong role"),
        SimError::UnknownAccount => error_body(StatusCode::UNAUTHORIZED, "unknown token"),
        SimError::Learner(LearnerError::ArityMismatch) => {
            error_body(StatusCode::BAD_REQUEST, "feature row has wrong arity")
        }
        other => error_body(StatusCode::INTERNAL_SERVER_ERROR, &other.to_string()),
    }
}

async fn chain_handler(State(ctx): State<ServiceCtx>, headers: HeaderMap) -> Response {
    let snapshot = ctx.latest();
    if let Err((status, msg)) = authorize(&snapshot, &headers) {
        return error_body(status, msg);
    }
    (StatusCode::OK, Json(json!({ "blocks": snapshot.blocks, "difficulty": snapshot.difficulty })))
        .into_response()
}

async fn chain_verify_handler(State(ctx): State<ServiceCtx>, headers: HeaderMap) -> Response {
    let snapshot = ctx.latest();
    if let Err((status, msg)) = authorize(&snapshot, &headers) {
        return error_body(status, msg);
    }
    let chain = Chain {
        blocks: snapshot.blocks.clone(),
        difficulty: snapshot.difficulty,
    };
    let body = match verify_chain(&chain) {
        Ok(()) => json!({ "ok": true, "length": chain.blocks.len() }),
        Err(fault) => json!({ "ok": false, "first_invalid_index": fault.index }),
    };
    (StatusCode::OK, Json(body)).into_response()
}

async fn model_handler(State(ctx): State<ServiceCtx>, headers: HeaderMap) -> Response {
    let snapshot = ctx.latest();
    if let Err((status, msg)) = authorize(&snapshot, &headers) {
        return error_body(status, msg);
    }
    (
        StatusCode::OK,
        Json(json!({ "model_hash": snapshot.current_model_hash, "best": snapshot.best })),
    )
        .into_response()
}

#[derive(Serialize)]
struct AccountView {
    id: String,
    role: Role,
    balance: f64,
}

async fn account_handler(
    State(ctx): State<ServiceCtx>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Response {
    let snapshot = ctx.latest();
    if let Err((status, msg)) = authorize(&snapshot, &headers) {
        return error_body(status, msg);
    }
    match snapshot.accounts.get(&id) {
        Some((role, balance)) => (
            StatusCode::OK,
            Json(AccountView {
                id,
                role: *role,
                balance: *balance,
            }),
        )
            .into_response(),
        None => error_body(StatusCode::NOT_FOUND, "no such account"),
    }
}

async fn stats_handler(State(ctx): State<ServiceCtx>, headers: HeaderMap) -> Response {
    let snapshot = ctx.latest();
    if let Err((status, msg)) = authorize(&snapshot, &headers) {
        return error_body(status, msg);
    }
    (
        StatusCode::OK,
        Json(json!({
            "total_contributions": snapshot.total_contributions,
            "model_updates": snapshot.model_updates,
            "queries_served": snapshot.queries_served,
        })),
    )
        .into_response()
}
