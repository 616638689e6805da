use axum::body::Body;
use axum::http::{Request, StatusCode};
use base64::Engine;
use http_body_util::BodyExt;
use tower::ServiceExt;

use cog_core::catalog::Catalog;
use cog_core::eval::{oracle_answers, Answer, ScoreReport};
use cog_core::generate::{EpisodeGenerator, GenerationConfig};
use cog_core::io::EpisodeRecord;
use cog_core::render::{rasterize_frame, Image};
use cog_core::response::ResponseValue;
use cog_server::{router, AppState, EpisodePage, TaskList, PAGE_LIMIT};

async fn call(method: &str, uri: &str, body: &str) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = router(AppState::new(5)).oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn page(body: &str) -> EpisodePage {
    let (status, bytes) = call("POST", "/v1/episodes", body).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&bytes));
    serde_json::from_slice(&bytes).unwrap()
}

#[tokio::test]
async fn healthz() {
    let (status, body) = call("GET", "/v1/healthz", "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"ok");
}

#[tokio::test]
async fn task_listing_has_chance_levels() {
    let (status, body) = call("GET", "/v1/tasks", "").await;
    assert_eq!(status, StatusCode::OK);
    let list: TaskList = serde_json::from_slice(&body).unwrap();
    assert_eq!(list.tasks.len(), 44);
    let exist = list.tasks.iter().find(|t| t.name == "Exist").unwrap();
    assert_eq!(exist.chance_level, 0.5);
    let get = list.tasks.iter().find(|t| t.name == "GetColor").unwrap();
    assert_eq!(get.chance_level, 1.0 / 19.0);
}

#[tokio::test]
async fn identical_requests_identical_bodies() {
    let body = r#"{"tasks":["GoColor","Exist"],"count":6,"start_index":3}"#;
    let a = call("POST", "/v1/episodes", body).await;
    let b = call("POST", "/v1/episodes", body).await;
    assert_eq!(a.0, StatusCode::OK);
    assert_eq!(a, b);
}

#[tokio::test]
async fn pages_concatenate() {
    let whole = page(r#"{"tasks":["CompareColor","GetShape","GoColorOf"],"count":10}"#).await;
    let first = page(r#"{"tasks":["CompareColor","GetShape","GoColorOf"],"count":5}"#).await;
    let second = page(r#"{"tasks":["CompareColor","GetShape","GoColorOf"],"count":5,"start_index":5}"#).await;
    assert_eq!(first.next_start_index, 5);
    let joined: Vec<EpisodeRecord> = first.episodes.into_iter().chain(second.episodes).collect();
    assert_eq!(joined, whole.episodes);
}

#[tokio::test]
async fn page_matches_library_generation() {
    let p = page(r#"{"tasks":["ExistShapeOf"],"count":3,"start_index":40}"#).await;
    let g = EpisodeGenerator::new(Catalog::builtin(), GenerationConfig::canonical(5)).unwrap();
    for (i, rec) in p.episodes.iter().enumerate() {
        let ep = g.generate("ExistShapeOf", 40 + i as u64).unwrap();
        assert_eq!(rec, &EpisodeRecord::from_episode(&ep));
    }
}

#[tokio::test]
async fn base64_images_decode_to_renders() {
    let p = page(r#"{"tasks":["Go"],"count":2,"encoding":"base64-png"}"#).await;
    for rec in &p.episodes {
        assert_eq!(rec.images_base64.len(), rec.frames.len());
        for (frame, b64) in rec.frames.iter().zip(&rec.images_base64) {
            let png = base64::engine::general_purpose::STANDARD.decode(b64).unwrap();
            let img = Image::from_png(&png).unwrap();
            assert_eq!(img, rasterize_frame(frame, 112));
        }
    }
}

#[tokio::test]
async fn oracle_answers_score_perfectly() {
    let config = GenerationConfig::hard(77);
    let body = serde_json::json!({"config": config, "tasks": "all", "count": 4}).to_string();
    let p = page(&body).await;
    let g = EpisodeGenerator::new(Catalog::builtin(), config).unwrap();
    let episodes: Vec<_> = p
        .episodes
        .iter()
        .map(|r| r.clone().into_episode(Catalog::builtin(), config).unwrap())
        .collect();
    assert_eq!(episodes[0], g.generate(&p.tasks[0], 0).unwrap());
    let answers = oracle_answers(&episodes);
    let invalid = episodes
        .iter()
        .flat_map(|e| &e.targets)
        .filter(|t| t.is_invalid())
        .count() as u64;

    let req = serde_json::json!({"config": config, "answers": answers}).to_string();
    let (status, bytes) = call("POST", "/v1/score", &req).await;
    assert_eq!(status, StatusCode::OK);
    let report: ScoreReport = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(report.overall.accuracy, Some(1.0));
    assert_eq!(report.overall.skipped, invalid);
    assert_eq!(report.overall.missing, 0);
    assert_eq!(report.tasks.len(), 44);
}

#[tokio::test]
async fn wrong_answers_lower_accuracy() {
    let answers = vec![Answer {
        episode: "Exist/0".into(),
        frame: 0,
        response: ResponseValue::Verbal("maybe".into()),
    }];
    let req = serde_json::json!({"answers": answers}).to_string();
    let (status, bytes) = call("POST", "/v1/score", &req).await;
    assert_eq!(status, StatusCode::OK);
    let report: ScoreReport = serde_json::from_slice(&bytes).unwrap();
    assert!(report.overall.accuracy.unwrap() < 1.0);
}

#[tokio::test]
async fn error_statuses() {
    let (s, _) = call("POST", "/v1/episodes", "{not json").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call("POST", "/v1/episodes", r#"{"count":1,"surprise":true}"#).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, body) = call("POST", "/v1/episodes", r#"{"tasks":["NoSuchTask"],"count":1}"#).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(String::from_utf8_lossy(&body).contains("NoSuchTask"));
    let too_many = format!(r#"{{"tasks":"all","count":{}}}"#, PAGE_LIMIT / 44 + 1);
    let (s, _) = call("POST", "/v1/episodes", &too_many).await;
    assert_eq!(s, StatusCode::PAYLOAD_TOO_LARGE);
    let bad_config = serde_json::json!({
        "config": {"frames": 0, "max_memory": 1, "max_distractors": 1, "canvas": 112, "seed": 1},
        "count": 1
    });
    let (s, _) = call("POST", "/v1/episodes", &bad_config.to_string()).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(
        "POST",
        "/v1/score",
        r#"{"answers":[{"episode":"Nope/1","frame":0,"response":{"type":"invalid"}}]}"#,
    )
    .await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(
        "POST",
        "/v1/score",
        r#"{"answers":[{"episode":"no-index","frame":0,"response":{"type":"invalid"}}]}"#,
    )
    .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call("GET", "/v1/nothing", "").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}
