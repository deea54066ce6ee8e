use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use vlc_core::document::SceneDocument;
use vlc_core::fixtures;
use vlc_core::scale::ScaleConfig;
use vlc_service::{router, AppState};

async fn call(app: &Router, method: &str, uri: &str, body: Option<Vec<u8>>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, Body::from))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, "POST", uri, Some(serde_json::to_vec(&body).unwrap())).await
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, "GET", uri, None).await
}

fn scene_of(name: &str) -> Value {
    fixtures::by_name(name).unwrap().document().to_value()
}

async fn open(app: &Router, name: &str) -> (String, Value) {
    let (status, body) = post(app, "/api/sessions", json!({ "scene": scene_of(name), "path": "main" })).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    (body["session_id"].as_str().unwrap().to_string(), body["report"].clone())
}

fn hash_of(scene: &Value) -> String {
    SceneDocument::from_slice(&serde_json::to_vec(scene).unwrap()).unwrap().hash()
}

fn app() -> Router {
    router(AppState::new(ScaleConfig::default()))
}

#[tokio::test]
async fn create_then_read_report_and_scene() {
    let app = app();
    let (id, created) = open(&app, "old_parkland").await;
    assert_eq!(created["report"]["overall_class"], 4);
    let (status, report) = get(&app, &format!("/api/sessions/{id}/report")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(report, created);
    let (status, scene) = get(&app, &format!("/api/sessions/{id}/scene")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(scene, scene_of("old_parkland"));
    assert_eq!(hash_of(&scene), report["provenance"]["scene_hash"]);
}

#[tokio::test]
async fn unknown_sessions_are_404() {
    let app = app();
    for uri in ["/api/sessions/nope/report", "/api/sessions/nope/scene", "/api/sessions/nope"] {
        assert_eq!(get(&app, uri).await.0, StatusCode::NOT_FOUND);
    }
    assert_eq!(post(&app, "/api/sessions/nope/undo", json!(null)).await.0, StatusCode::NOT_FOUND);
    assert_eq!(post(&app, "/api/sessions/nope/manipulate", json!({})).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn bad_uploads_are_rejected() {
    let app = app();
    let (status, _) = call(&app, "POST", "/api/sessions", Some(b"{not json".to_vec())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let mut scene = scene_of("empty_corridor");
    scene.as_object_mut().unwrap().remove("units");
    let (status, body) = post(&app, "/api/sessions", json!({ "scene": scene, "path": "main" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["pointer"], "/scene/units");

    let (status, _) = post(&app, "/api/sessions", json!({ "scene": scene_of("empty_corridor"), "path": "side" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let mut scene = scene_of("empty_corridor");
    scene["walls"][0]["footprint"] = json!([{"x":0,"y":1},{"x":3,"y":3},{"x":3,"y":1},{"x":0,"y":2.5}]);
    let (status, body) = post(&app, "/api/sessions", json!({ "scene": scene, "path": "main" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("wall `wl0`"), "{body}");

    let (status, body) = post(
        &app,
        "/api/sessions",
        json!({ "scene": scene_of("empty_corridor"), "path": "main", "config": { "clutter_cap": "high" } }),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["pointer"], "/config/clutter_cap");
}

#[tokio::test]
async fn manipulate_undo_round_trip() {
    let app = app();
    let (id, created) = open(&app, "old_parkland").await;
    let original_hash = created["provenance"]["scene_hash"].clone();
    let (status, _) = post(&app, &format!("/api/sessions/{id}/undo"), json!(null)).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, r1) = post(&app, &format!("/api/sessions/{id}/manipulate"), json!({ "target_class": 3, "seed": 42 })).await;
    assert_eq!(status, StatusCode::OK, "{r1}");
    let mean = r1["after"]["aggregate_mean"].as_f64().unwrap();
    assert!((2.75..=3.25).contains(&mean), "{mean}");
    let (_, report) = get(&app, &format!("/api/sessions/{id}/report")).await;
    assert_eq!(report["report"], r1["after"]);
    let (_, scene) = get(&app, &format!("/api/sessions/{id}/scene")).await;
    assert_eq!(scene, r1["scene"]);
    assert_eq!(hash_of(&scene), report["provenance"]["scene_hash"]);

    let (status, r2) =
        post(&app, &format!("/api/sessions/{id}/manipulate"), json!({ "target_class": 2, "seed": 1, "budget": 200 })).await;
    assert_eq!(status, StatusCode::OK, "{r2}");

    for _ in 0..2 {
        assert_eq!(post(&app, &format!("/api/sessions/{id}/undo"), json!(null)).await.0, StatusCode::OK);
    }
    let (_, report) = get(&app, &format!("/api/sessions/{id}/report")).await;
    assert_eq!(report["provenance"]["scene_hash"], original_hash);
    assert_eq!(report, created);
    assert_eq!(post(&app, &format!("/api/sessions/{id}/undo"), json!(null)).await.0, StatusCode::CONFLICT);
}

#[tokio::test]
async fn infeasible_and_malformed_requests() {
    let app = app();
    let (id, _) = open(&app, "l_corridor").await;
    let uri = format!("/api/sessions/{id}/manipulate");
    assert_eq!(post(&app, &uri, json!({ "target_class": 9 })).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, body) = post(&app, &uri, json!({ "target_class": 3, "colour": "red" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
    // A rejected request leaves the session idle.
    assert_eq!(get(&app, &format!("/api/sessions/{id}")).await.1["busy"], false);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn concurrent_manipulation_conflicts() {
    let app = app();
    let (id, created) = open(&app, "old_parkland").await;
    let uri = format!("/api/sessions/{id}/manipulate");
    let long = {
        let (app, uri) = (app.clone(), uri.clone());
        tokio::spawn(async move { post(&app, &uri, json!({ "target_class": 1, "seed": 5, "budget": 3000 })).await })
    };
    let deadline = Instant::now() + Duration::from_secs(30);
    loop {
        let (_, info) = get(&app, &format!("/api/sessions/{id}")).await;
        if info["busy"] == true {
            break;
        }
        assert!(Instant::now() < deadline, "run never started");
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    let (status, _) = post(&app, &uri, json!({ "target_class": 3 })).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(post(&app, &format!("/api/sessions/{id}/undo"), json!(null)).await.0, StatusCode::CONFLICT);
    // Reads during the run see the pre-run state.
    assert_eq!(get(&app, &format!("/api/sessions/{id}/report")).await.1, created);

    let (status, _) = long.await.unwrap();
    assert_eq!(status, StatusCode::OK);
    let (_, info) = get(&app, &format!("/api/sessions/{id}")).await;
    assert_eq!(info["busy"], false);
    assert_eq!(info["history_depth"], 2);
}

#[tokio::test]
async fn large_budgets_go_asynchronous() {
    let app = router(AppState::with_limits(ScaleConfig::default(), Duration::from_secs(60), 10));
    let (id, _) = open(&app, "zigzag").await;
    let (status, body) = post(&app, &format!("/api/sessions/{id}/manipulate"), json!({ "target_class": 3, "budget": 64 })).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let poll = body["poll"].as_str().unwrap().to_string();
    let deadline = Instant::now() + Duration::from_secs(60);
    let done = loop {
        let (status, job) = get(&app, &poll).await;
        assert_eq!(status, StatusCode::OK);
        if job["status"] == "done" {
            break job;
        }
        assert_eq!(job["status"], "running");
        assert!(Instant::now() < deadline);
        tokio::time::sleep(Duration::from_millis(10)).await;
    };
    let (_, report) = get(&app, &format!("/api/sessions/{id}/report")).await;
    assert_eq!(report["report"], done["result"]["after"]);
}

#[tokio::test]
async fn segment_request_mirrors_the_lobby_scenario() {
    let app = app();
    let (id, created) = open(&app, "new_parkland").await;
    assert_eq!(created["report"]["overall_class"], 2);
    let (status, r) = post(
        &app,
        &format!("/api/sessions/{id}/manipulate"),
        json!({ "target_class": 3, "segments": [1], "segment_target": 4, "attributes": ["clutter"], "seed": 7 }),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{r}");
    let seg = r["after"]["segments"][1]["attributes"].as_array().unwrap();
    assert_eq!(seg.iter().find(|a| a["attribute"] == "clutter").unwrap()["class"], 4);
    let mean = r["after"]["aggregate_mean"].as_f64().unwrap();
    assert!((2.75..=3.25).contains(&mean), "{mean}");
}

#[tokio::test]
async fn sessions_are_isolated_and_expire() {
    let state = AppState::with_limits(ScaleConfig::default(), Duration::from_secs(1), 20_000);
    let app = router(state.clone());
    let (a, _) = open(&app, "l_corridor").await;
    let (b, _) = open(&app, "l_corridor").await;
    let (status, _) = post(&app, &format!("/api/sessions/{a}/manipulate"), json!({ "target_class": 4, "budget": 200 })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(get(&app, &format!("/api/sessions/{b}/scene")).await.1, scene_of("l_corridor"));

    assert_eq!(state.evict_expired(Instant::now()), 0);
    assert_eq!(state.evict_expired(Instant::now() + Duration::from_secs(5)), 2);
    assert_eq!(get(&app, &format!("/api/sessions/{a}/report")).await.0, StatusCode::NOT_FOUND);
}
