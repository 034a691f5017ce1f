//! HTTP JSON service for the interactive relaxation loop: upload an instance,
//! get its baseline schedule and bottleneck indicators, request relaxation
//! proposals, augment them with manual capacity edits, accept or reject.
//!
//! Documents live in a data directory, addressed by a hash of their content.
//! Writes to one id are serialized; solves run on blocking threads.

pub mod error;
pub mod store;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rcpsp_relax::format::to_json;
use rcpsp_relax::harness::Combo;
use rcpsp_relax::indicators::{rank_resources, Indicator, RankedResource};
use rcpsp_relax::model::{
    validate, weighted_tardiness, Capacity, JobId, ProblemInstance, ResourceId, Schedule, TardinessReport, Time,
};
use rcpsp_relax::proposal::{account, default_target, RelaxError, RelaxationProposal};
use rcpsp_relax::solver::{solve_heuristic, solve_heuristic_with, HeuristicOptions, SolveError, SolveLimits};
use serde::{Deserialize, Serialize};

pub use error::ServiceError;
pub use store::Store;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub limits: SolveLimits,
}

pub struct AppState {
    pub store: Store,
    pub limits: SolveLimits,
    baselines: RwLock<HashMap<String, Arc<Baseline>>>,
}

impl AppState {
    pub fn new(config: &ServiceConfig) -> std::io::Result<Self> {
        Ok(AppState {
            store: Store::open(&config.data_dir)?,
            limits: config.limits.clone(),
            baselines: RwLock::new(HashMap::new()),
        })
    }
}

/// Solved schedule of a stored instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub instance: String,
    pub schedule: Schedule,
    pub objective: u64,
    pub tardiness: TardinessReport,
    pub limits: SolveLimits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pending,
    Accepted,
    Rejected,
}

/// One capacity change at a single period.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityEdit {
    pub k: ResourceId,
    pub t: Time,
    pub delta: Capacity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposalRecord {
    pub id: String,
    pub base_instance: String,
    /// Proposal this one was augmented from.
    pub parent: Option<String>,
    #[serde(flatten)]
    pub combo: Combo,
    pub limits: SolveLimits,
    /// Manual edits applied on top of the algorithm's result, oldest first.
    pub capacity_edits: Vec<CapacityEdit>,
    pub status: Status,
    pub accepted_instance: Option<String>,
    pub proposal: RelaxationProposal,
}

#[derive(Debug, Deserialize)]
pub struct ProposalRequest {
    #[serde(flatten)]
    pub combo: Combo,
    pub target: Option<JobId>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentRequest {
    pub capacity_edits: Vec<CapacityEdit>,
}

#[derive(Debug, Deserialize)]
pub struct IndicatorQuery {
    pub indicator: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct IndicatorResponse {
    pub indicator: Indicator,
    pub ranking: Vec<RankedResource>,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/instances", post(create_instance))
        .route("/api/instances/{id}", get(get_instance))
        .route("/api/instances/{id}/schedule", get(get_schedule))
        .route("/api/instances/{id}/indicators", get(get_indicators))
        .route("/api/instances/{id}/proposals", post(create_proposal))
        .route("/api/proposals/{id}", get(get_proposal))
        .route("/api/proposals/{id}/augment", post(augment_proposal))
        .route("/api/proposals/{id}/accept", post(accept_proposal))
        .route("/api/proposals/{id}/reject", post(reject_proposal))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(&config)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ServiceError::Internal(e.to_string()))?
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(ServiceError::invalid)
}

fn relax_error(e: RelaxError) -> ServiceError {
    match e {
        RelaxError::InfeasibleBaseline(report) => {
            ServiceError::Unprocessable { message: "baseline schedule is infeasible".into(), violations: Some(report) }
        }
        other => ServiceError::invalid(other),
    }
}

fn solve_error(e: SolveError) -> ServiceError {
    match e {
        SolveError::Infeasible => ServiceError::invalid("no feasible schedule found within the horizon"),
        other => ServiceError::invalid(other),
    }
}

fn baseline(state: &AppState, id: &str) -> Result<(ProblemInstance, Arc<Baseline>), ServiceError> {
    let instance = state.store.get_instance(id)?;
    let limits_json = serde_json::to_string(&state.limits).map_err(|e| ServiceError::Internal(e.to_string()))?;
    let key = store::content_id(format!("{id}\n{limits_json}").as_bytes());
    if let Some(b) = state.baselines.read().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok((instance, b.clone()));
    }
    let lock = state.store.lock(&key);
    let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
    let cached = match state.store.get_doc::<Baseline>("schedules", &key)? {
        Some(b) => b,
        None => {
            let solution = solve_heuristic(&instance, &state.limits, None).map_err(solve_error)?;
            let b = Baseline {
                instance: id.to_string(),
                objective: solution.objective,
                tardiness: weighted_tardiness(&instance, &solution.schedule),
                schedule: solution.schedule,
                limits: state.limits.clone(),
            };
            state.store.put_doc("schedules", &key, &b)?;
            b
        }
    };
    let cached = Arc::new(cached);
    state.baselines.write().unwrap_or_else(|e| e.into_inner()).insert(key, cached.clone());
    Ok((instance, cached))
}

fn json_text(status: StatusCode, text: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], text).into_response()
}

async fn create_instance(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ServiceError> {
    let id = blocking(move || {
        let text = std::str::from_utf8(&body).map_err(ServiceError::invalid)?;
        let instance = rcpsp_relax::format::from_json(text).map_err(ServiceError::invalid)?;
        state.store.put_instance(&instance)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(serde_json::json!({ "id": id }))).into_response())
}

async fn get_instance(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let instance = blocking(move || state.store.get_instance(&id)).await?;
    Ok(json_text(StatusCode::OK, to_json(&instance)))
}

async fn get_schedule(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Baseline>, ServiceError> {
    let (_, b) = blocking(move || baseline(&state, &id)).await?;
    Ok(Json((*b).clone()))
}

async fn get_indicators(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<IndicatorQuery>,
) -> Result<Json<IndicatorResponse>, ServiceError> {
    let indicator: Indicator = match query.indicator {
        Some(name) => name.parse().map_err(ServiceError::invalid)?,
        None => Indicator::Mrur,
    };
    blocking(move || {
        let (instance, b) = baseline(&state, &id)?;
        let ranking = rank_resources(&instance, &b.schedule, indicator, state.limits.parallelism);
        Ok(Json(IndicatorResponse { indicator, ranking }))
    })
    .await
}

fn proposal_id(parts: &impl Serialize) -> Result<String, ServiceError> {
    let bytes = serde_json::to_vec(parts).map_err(|e| ServiceError::Internal(e.to_string()))?;
    Ok(store::content_id(&bytes))
}

/// Loads an existing record with `id` or creates and stores one.
fn get_or_create(
    state: &AppState,
    id: String,
    create: impl FnOnce(String) -> Result<ProposalRecord, ServiceError>,
) -> Result<ProposalRecord, ServiceError> {
    let lock = state.store.lock(&id);
    let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(existing) = state.store.get_doc::<ProposalRecord>("proposals", &id)? {
        return Ok(existing);
    }
    let record = create(id)?;
    state.store.put_doc("proposals", &record.id, &record)?;
    Ok(record)
}

async fn create_proposal(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<(StatusCode, Json<ProposalRecord>), ServiceError> {
    let request: ProposalRequest = parse_json(&body)?;
    let record = blocking(move || {
        let (instance, b) = baseline(&state, &id)?;
        let target = match request.target {
            Some(t) if t.0 >= 1 && (t.0 as usize) <= instance.num_jobs() => t.index(),
            Some(t) => return Err(relax_error(RelaxError::NotAProject(t))),
            None => default_target(&instance, &b.schedule).ok_or_else(|| relax_error(RelaxError::NoTarget))?,
        };
        let pid = proposal_id(&(&id, &request.combo, JobId::from_index(target), &state.limits))?;
        get_or_create(&state, pid, |pid| {
            let run = request.combo.run(&instance, &b.schedule, target, &state.limits).map_err(relax_error)?;
            Ok(ProposalRecord {
                id: pid,
                base_instance: id.clone(),
                parent: None,
                combo: request.combo,
                limits: state.limits.clone(),
                capacity_edits: Vec::new(),
                status: Status::Pending,
                accepted_instance: None,
                proposal: run.last,
            })
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(record)))
}

async fn get_proposal(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<ProposalRecord>, ServiceError> {
    blocking(move || {
        state.store.get_doc("proposals", &id)?.map(Json).ok_or_else(|| ServiceError::NotFound(format!("proposal `{id}`")))
    })
    .await
}

fn load_proposal(state: &AppState, id: &str) -> Result<ProposalRecord, ServiceError> {
    state.store.get_doc("proposals", id)?.ok_or_else(|| ServiceError::NotFound(format!("proposal `{id}`")))
}

/// Applies the edits over the parent's instance, re-solves and re-accounts
/// against the base instance.
fn augment(state: &AppState, parent: &ProposalRecord, edits: &[CapacityEdit], id: String) -> Result<ProposalRecord, ServiceError> {
    let mut instance = parent.proposal.instance.clone();
    for edit in edits {
        let k = edit.k.0 as usize;
        if k == 0 || k > instance.num_resources() {
            return Err(ServiceError::invalid(format!("unknown resource {}", edit.k)));
        }
        instance = instance.with_capacity_delta(k - 1, edit.t, edit.t + 1, edit.delta).map_err(ServiceError::invalid)?;
    }
    let (original, b) = baseline(state, &parent.base_instance)?;
    let target = parent.proposal.target.index();
    let report = validate(&instance, &parent.proposal.schedule).map_err(ServiceError::invalid)?;
    let solution = if report.is_feasible() {
        let options = HeuristicOptions { warm_start: Some(&parent.proposal.schedule), protect: Some(target) };
        solve_heuristic_with(&instance, &parent.limits, &options)
    } else {
        solve_heuristic(&instance, &parent.limits, None)
    };
    let solution = solution.map_err(|e| match e {
        SolveError::Infeasible => ServiceError::Unprocessable {
            message: "no feasible schedule after the capacity edits".into(),
            violations: Some(report.clone()),
        },
        other => solve_error(other),
    })?;
    let proposal = account(&original, &b.schedule, &instance, &solution.schedule, target, parent.proposal.iteration + 1)
        .map_err(relax_error)?;
    let mut capacity_edits = parent.capacity_edits.clone();
    capacity_edits.extend_from_slice(edits);
    Ok(ProposalRecord {
        id,
        base_instance: parent.base_instance.clone(),
        parent: Some(parent.id.clone()),
        combo: parent.combo,
        limits: parent.limits.clone(),
        capacity_edits,
        status: Status::Pending,
        accepted_instance: None,
        proposal,
    })
}

async fn augment_proposal(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<(StatusCode, Json<ProposalRecord>), ServiceError> {
    let request: AugmentRequest = parse_json(&body)?;
    let record = blocking(move || {
        let parent = load_proposal(&state, &id)?;
        let new_id = proposal_id(&(&parent.id, &request.capacity_edits))?;
        get_or_create(&state, new_id, |new_id| augment(&state, &parent, &request.capacity_edits, new_id))
    })
    .await?;
    Ok((StatusCode::CREATED, Json(record)))
}

fn transition(state: &AppState, id: &str, to: Status) -> Result<ProposalRecord, ServiceError> {
    let lock = state.store.lock(id);
    let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
    let mut record = load_proposal(state, id)?;
    if record.status != Status::Pending {
        return Err(ServiceError::Conflict(format!("proposal `{id}` is already {:?}", record.status).to_lowercase()));
    }
    if to == Status::Accepted {
        record.accepted_instance = Some(state.store.put_instance(&record.proposal.instance)?);
    }
    record.status = to;
    state.store.put_doc("proposals", id, &record)?;
    Ok(record)
}

async fn accept_proposal(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<serde_json::Value>, ServiceError> {
    let record = blocking(move || transition(&state, &id, Status::Accepted)).await?;
    Ok(Json(serde_json::json!({ "new_instance_id": record.accepted_instance })))
}

async fn reject_proposal(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<ProposalRecord>, ServiceError> {
    blocking(move || transition(&state, &id, Status::Rejected)).await.map(Json)
}
