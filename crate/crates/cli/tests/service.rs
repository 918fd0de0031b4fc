use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};
use std::time::Instant;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use qconstrain_cli::service::router;

async fn call(method: &str, uri: &str, body: Option<String>) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = router().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn post(uri: &str, body: Value) -> (StatusCode, Value) {
    let (s, b) = call("POST", uri, Some(body.to_string())).await;
    (s, serde_json::from_str(&b).unwrap())
}

#[tokio::test]
async fn health_is_exact() {
    let (s, b) = call("GET", "/health", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(b, r#"{"status":"ok"}"#);
}

#[tokio::test]
async fn models_lists_registry() {
    let (s, b) = call("GET", "/models", None).await;
    assert_eq!(s, StatusCode::OK);
    let v: Value = serde_json::from_str(&b).unwrap();
    assert_eq!(v["schema_version"], 1);
    let ids: Vec<&str> = v["models"].as_array().unwrap().iter().map(|m| m["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["example1-ode", "example1-operator", "example2-ode", "example2-operator", "free-spin"]);
    assert_eq!(v["models"][0]["needs_partner"], true);
    assert_eq!(v["models"][3]["default_engine"], "metric");
}

#[tokio::test]
async fn field_30x30_counts_and_budget() {
    // warm the blocking pool
    post("/field", json!({"model": "example2-ode"})).await;
    let start = Instant::now();
    let (s, v) = post("/field", json!({"model": "example2-ode", "grid": {"theta_count": 30, "phi_count": 30}})).await;
    let elapsed = start.elapsed();
    assert_eq!(s, StatusCode::OK);
    let samples = v["samples"].as_array().unwrap().len();
    let masked = v["singular_mask"].as_array().unwrap().len();
    assert_eq!(samples + masked, 900);
    assert!(elapsed.as_millis() < 200, "took {elapsed:?}");
    for s in v["samples"].as_array().unwrap() {
        assert!(s["theta_dot"].is_f64() && s["phi_dot"].is_f64());
    }
}

#[tokio::test]
async fn field_masks_singular_node() {
    // odd count puts a row on the equator; phi = 0 there has D = 0
    let (s, v) = post("/field", json!({"model": "example2-ode", "grid": {"theta_count": 5, "phi_count": 4}})).await;
    assert_eq!(s, StatusCode::OK);
    let mask = v["singular_mask"].as_array().unwrap();
    assert!(mask.iter().any(|n| n["theta_index"] == 2 && n["phi_index"] == 0));
    assert_eq!(v["samples"].as_array().unwrap().len() + mask.len(), 20);
}

#[tokio::test]
async fn field_partner_rules() {
    let (s, v) = post("/field", json!({"model": "example1-ode"})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "InvalidInput");
    let (s, _) =
        post("/field", json!({"model": "example1-ode", "partner": {"theta": FRAC_PI_2, "phi": FRAC_PI_2}})).await;
    assert_eq!(s, StatusCode::OK);
    let (s, _) = post("/field", json!({"model": "example2-ode", "partner": {"theta": 1.0, "phi": 0.0}})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn error_statuses() {
    let (s, b) = call("POST", "/field", Some("{not json".into())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(b.contains("MalformedJson"));

    let (s, v) = post("/field", json!({"model": "nope"})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["code"], "UnknownModel");

    let (s, v) = post("/field", json!({"model": "example2-ode", "colour": 1})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "InvalidInput");

    let (s, v) = post("/field", json!({"model": "example2-ode", "schema_version": 2})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "InvalidInput");

    let (s, _) = post("/field", json!({"model": "example2-ode", "grid": {"theta_count": 1000, "phi_count": 3}})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn symplectic_single_spin_is_422() {
    let (s, v) = post(
        "/trajectory",
        json!({"model": "example2-operator", "engine": "symplectic", "initial": [0.3, 0.2], "t_end": 1.0}),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "SingularConstraintMatrix");
}

#[tokio::test]
async fn trajectory_conserves_sigma_x() {
    let (s, v) = post("/trajectory", json!({"model": "example2-ode", "initial": [0.3, 0.2], "t_end": 20.0})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["status"], "complete");
    let expected = 0.3_f64.sin() * 0.2_f64.cos();
    let last = v["constraint_values"].as_array().unwrap().last().unwrap()[0].as_f64().unwrap();
    assert!((last - expected).abs() < 1e-6);
    assert_eq!(v["columns"], json!(["t", "theta", "phi", "sigma_x", "energy"]));
}

#[tokio::test]
async fn trajectory_rejects_paths_and_large_runs() {
    let (s, _) = post("/trajectory", json!({"model": "example2-ode", "initial": [0.3, 0.2], "out": "x.csv"})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = post("/trajectory", json!({"model": "example2-ode", "initial": [0.3, 0.2], "t_end": 1e9})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, v) = post("/trajectory", json!({"model": "example2-ode", "initial": [0.0, 0.2]})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "ChartSingularity");
}

#[tokio::test]
async fn trajectory_failure_returns_partial() {
    let (s, v) =
        post("/trajectory", json!({"model": "example2-ode", "initial": [0.3, 0.2], "t_end": 20.0, "max_steps": 3}))
            .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["code"], "StepLimit");
    assert_eq!(v["partial"]["status"], "partial");
    assert!(!v["partial"]["times"].as_array().unwrap().is_empty());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_do_not_interfere() {
    let field = json!({"model": "example1-ode", "partner": {"theta": FRAC_PI_6, "phi": 0.0}});
    let traj = json!({"model": "example1-operator", "initial": [1.0, 0.5, 2.0, 1.5], "t_end": 2.0});
    let (_, f0) = post("/field", field.clone()).await;
    let (_, t0) = post("/trajectory", traj.clone()).await;
    let mut handles = Vec::new();
    for i in 0..8 {
        let (f, t) = (field.clone(), traj.clone());
        handles.push(tokio::spawn(async move {
            if i % 2 == 0 {
                (0, post("/field", f).await.1)
            } else {
                (1, post("/trajectory", t).await.1)
            }
        }));
    }
    for h in handles {
        let (kind, v) = h.await.unwrap();
        assert_eq!(v, if kind == 0 { f0.clone() } else { t0.clone() });
    }
}
