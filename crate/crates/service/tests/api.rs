use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rcpsp_relax::format::{from_json, to_json};
use rcpsp_relax::model::samples::{tiny1, tiny2};
use rcpsp_relax::model::{objective, Schedule};
use rcpsp_relax::solver::SolveLimits;
use rcpsp_relax::ssira::{run_ssira, IntervalKey, SsiraParams};
use rcpsp_relax_service::{router, AppState, ProposalRecord, ServiceConfig, Status};
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

struct Client {
    app: Router,
    _dir: Option<TempDir>,
}

fn config(dir: &std::path::Path) -> ServiceConfig {
    ServiceConfig { data_dir: dir.to_path_buf(), limits: SolveLimits::default().with_seed(7) }
}

impl Client {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let state = AppState::new(&config(dir.path())).unwrap();
        Client { app: router(Arc::new(state)), _dir: Some(dir) }
    }

    async fn call(&self, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Value) {
        let request = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(body.map(Body::from).unwrap_or_else(Body::empty))
            .unwrap();
        let response = self.app.clone().oneshot(request).await.unwrap();
        let status = response.status();
        let bytes = response.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
        (status, value)
    }

    async fn get(&self, uri: &str) -> (StatusCode, Value) {
        self.call(Method::GET, uri, None).await
    }

    async fn post(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, uri, Some(body.to_string())).await
    }

    async fn upload(&self, text: String) -> String {
        let (status, body) = self.call(Method::POST, "/api/instances", Some(text)).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["id"].as_str().unwrap().to_string()
    }

    async fn propose(&self, id: &str, body: Value) -> ProposalRecord {
        let (status, body) = self.post(&format!("/api/instances/{id}/proposals"), body).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        serde_json::from_value(body).unwrap()
    }
}

fn ssira_request() -> Value {
    json!({ "algorithm": "ssira", "params": { "key": "t", "intervals": 2, "iterations": 1 } })
}

#[tokio::test]
async fn upload_solve_and_inspect() {
    let client = Client::new();
    let id = client.upload(to_json(&tiny1())).await;
    assert_eq!(client.upload(to_json(&tiny1())).await, id);

    let (status, body) = client.get(&format!("/api/instances/{id}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(from_json(&body.to_string()).unwrap(), tiny1());

    let (status, body) = client.get(&format!("/api/instances/{id}/schedule")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["objective"], 2);
    assert_eq!(body["tardiness"]["per_project"]["3"], 2);
    let (_, again) = client.get(&format!("/api/instances/{id}/schedule")).await;
    assert_eq!(again, body);

    let (status, body) = client.get(&format!("/api/instances/{id}/indicators?indicator=auau")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["indicator"], "auau");
    assert_eq!(body["ranking"].as_array().unwrap().len(), 1);
    assert_eq!(body["ranking"][0]["resource"], 1);

    let (status, _) = client.get(&format!("/api/instances/{id}/indicators?indicator=bogus")).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn unknown_ids_and_bad_bodies() {
    let client = Client::new();
    for uri in ["/api/instances/0123456789abcdef", "/api/instances/nope/schedule", "/api/proposals/0123456789abcdef"] {
        assert_eq!(client.get(uri).await.0, StatusCode::NOT_FOUND, "{uri}");
    }
    assert_eq!(client.post("/api/proposals/0123456789abcdef/accept", json!({})).await.0, StatusCode::NOT_FOUND);

    let (status, _) = client.call(Method::POST, "/api/instances", Some("{\"jobs\": 3}".into())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    // A cyclic precedence is a structural error.
    let mut doc: Value = serde_json::from_str(&to_json(&tiny1())).unwrap();
    doc["precedences"].as_array_mut().unwrap().push(json!([3, 1]));
    let (status, _) = client.call(Method::POST, "/api/instances", Some(doc.to_string())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let id = client.upload(to_json(&tiny1())).await;
    let bad = json!({ "algorithm": "ssira", "params": { "key": "t", "intervals": 0, "iterations": 1 } });
    assert_eq!(client.post(&format!("/api/instances/{id}/proposals"), bad).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    let bad = json!({ "algorithm": "nope", "params": {} });
    assert_eq!(client.post(&format!("/api/instances/{id}/proposals"), bad).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    let mut not_project = ssira_request();
    not_project["target"] = json!(1);
    assert_eq!(client.post(&format!("/api/instances/{id}/proposals"), not_project).await.0, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn ssira_proposal_improves_and_replays() {
    let client = Client::new();
    let id = client.upload(to_json(&tiny1())).await;
    let record = client.propose(&id, ssira_request()).await;
    assert_eq!(record.status, Status::Pending);
    assert_eq!(record.base_instance, id);
    assert_eq!(record.proposal.metrics.delta_tardiness, 2);
    assert_eq!(objective(&record.proposal.instance, &record.proposal.schedule), 0);
    assert_eq!(record.proposal.changes.additions.len(), 1);
    assert!(record.proposal.changes.migrations.is_empty());

    // Same request, same document.
    assert_eq!(client.propose(&id, ssira_request()).await, record);
    let (status, body) = client.get(&format!("/api/proposals/{}", record.id)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_value::<ProposalRecord>(body).unwrap(), record);

    // Replaying the algorithm on the base instance reproduces the schedule.
    let (_, baseline) = client.get(&format!("/api/instances/{id}/schedule")).await;
    let baseline: Schedule = serde_json::from_value(baseline["schedule"].clone()).unwrap();
    let params = SsiraParams { key: IntervalKey::Start, intervals: 2, iterations: 1 };
    let replay = run_ssira(&tiny1(), &baseline, &params, 2, &record.limits).unwrap();
    assert_eq!(replay.last.schedule, record.proposal.schedule);
    assert_eq!(replay.last.instance, record.proposal.instance);
}

#[tokio::test]
async fn iira_and_migration_proposals() {
    let client = Client::new();
    let id = client.upload(to_json(&tiny1())).await;
    let body = json!({
        "algorithm": "iira",
        "params": { "indicator": "mrur", "kernel": "uniform0", "granularity": 2, "periods": 1, "iterations": 1, "delta": 1 },
        "target": 3
    });
    let record = client.propose(&id, body).await;
    // The gain depends on which optimal baseline the solver returned.
    assert!(record.proposal.metrics.delta_tardiness > 0);
    assert_eq!(record.proposal.target.0, 3);

    let id2 = client.upload(to_json(&tiny2())).await;
    let record = client.propose(&id2, ssira_request()).await;
    assert!(record.proposal.changes.additions.is_empty());
    assert_eq!(record.proposal.changes.migrations.len(), 1);
}

#[tokio::test]
async fn status_transitions() {
    let client = Client::new();
    let id = client.upload(to_json(&tiny1())).await;
    let record = client.propose(&id, ssira_request()).await;
    let (status, body) = client.post(&format!("/api/proposals/{}/reject", record.id), json!({})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "rejected");
    let (status, _) = client.post(&format!("/api/proposals/{}/accept", record.id), json!({})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = client.post(&format!("/api/proposals/{}/reject", record.id), json!({})).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn augment_and_accept_session() {
    let client = Client::new();
    let id = client.upload(to_json(&tiny1())).await;
    let record = client.propose(&id, ssira_request()).await;

    // Capacity of R1 is 2 or 3 everywhere; -4 would go negative.
    let negative = json!({ "capacity_edits": [{ "k": 1, "t": 0, "delta": -4 }] });
    let (status, _) = client.post(&format!("/api/proposals/{}/augment", record.id), negative).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let unknown = json!({ "capacity_edits": [{ "k": 9, "t": 0, "delta": 1 }] });
    let (status, _) = client.post(&format!("/api/proposals/{}/augment", record.id), unknown).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let edit = json!({ "capacity_edits": [{ "k": 1, "t": 4, "delta": 1 }] });
    let (status, body) = client.post(&format!("/api/proposals/{}/augment", record.id), edit).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    let augmented: ProposalRecord = serde_json::from_value(body).unwrap();
    assert_ne!(augmented.id, record.id);
    assert_eq!(augmented.parent.as_deref(), Some(record.id.as_str()));
    assert_eq!(augmented.base_instance, id);
    assert_eq!(augmented.capacity_edits.len(), 1);
    assert!(augmented.proposal.metrics.delta_tardiness >= 2);

    let (status, body) = client.post(&format!("/api/proposals/{}/accept", augmented.id), json!({})).await;
    assert_eq!(status, StatusCode::OK);
    let new_id = body["new_instance_id"].as_str().unwrap().to_string();
    let (_, instance) = client.get(&format!("/api/instances/{new_id}")).await;
    assert_eq!(from_json(&instance.to_string()).unwrap(), augmented.proposal.instance);
    let (_, schedule) = client.get(&format!("/api/instances/{new_id}/schedule")).await;
    assert_eq!(schedule["tardiness"]["total"], 0);
}

#[tokio::test]
async fn augment_that_removes_needed_capacity_is_rejected() {
    let client = Client::new();
    let id = client.upload(to_json(&tiny1())).await;
    let record = client.propose(&id, ssira_request()).await;
    // Take back the added unit at t=0 and more: the base instance is no
    // longer below the edited one, so the change cannot be accounted.
    let edit = json!({ "capacity_edits": [{ "k": 1, "t": 0, "delta": -2 }] });
    let (status, body) = client.post(&format!("/api/proposals/{}/augment", record.id), edit).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
    assert!(body["error"].is_string());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_agree() {
    let client = Arc::new(Client::new());
    let id = client.upload(to_json(&tiny1())).await;
    let tasks: Vec<_> = (0..8)
        .map(|_| {
            let client = client.clone();
            let id = id.clone();
            tokio::spawn(async move { client.propose(&id, ssira_request()).await })
        })
        .collect();
    let mut records = Vec::new();
    for t in tasks {
        records.push(t.await.unwrap());
    }
    assert!(records.windows(2).all(|w| w[0] == w[1]));
    // Only one of several concurrent accepts wins.
    let pid = records[0].id.clone();
    let tasks: Vec<_> = (0..4)
        .map(|_| {
            let client = client.clone();
            let pid = pid.clone();
            tokio::spawn(async move { client.post(&format!("/api/proposals/{pid}/accept"), json!({})).await.0 })
        })
        .collect();
    let mut statuses = Vec::new();
    for t in tasks {
        statuses.push(t.await.unwrap());
    }
    assert_eq!(statuses.iter().filter(|&&s| s == StatusCode::OK).count(), 1);
    assert_eq!(statuses.iter().filter(|&&s| s == StatusCode::CONFLICT).count(), 3);
}

#[tokio::test]
async fn documents_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let first = Client { app: router(Arc::new(AppState::new(&config(dir.path())).unwrap())), _dir: None };
    let id = first.upload(to_json(&tiny1())).await;
    let record = first.propose(&id, ssira_request()).await;
    let second = Client { app: router(Arc::new(AppState::new(&config(dir.path())).unwrap())), _dir: None };
    let (status, body) = second.get(&format!("/api/proposals/{}", record.id)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_value::<ProposalRecord>(body).unwrap(), record);
}
