#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde_json::{json, Value};
use xshuffle_cli::{router, AppState, SeedPolicy, ServiceConfig, SessionStore};
use xshuffle_core::imagecore::{read_image, ImageFormat};
use xshuffle_core::{Dataset, Image, Split};

pub struct Server {
    pub addr: SocketAddr,
    pub state: Arc<AppState>,
    pub client: reqwest::Client,
    handle: tokio::task::JoinHandle<()>,
}

impl Server {
    pub async fn start(data_dir: &Path, timeout_ms: u64) -> Server {
        let mut config = ServiceConfig::new(data_dir);
        config.seed_policy = SeedPolicy::Fixed(5);
        config.confirmation_timeout_ms = timeout_ms;
        config.validate().unwrap();
        let state = Arc::new(AppState {
            store: SessionStore::open(data_dir).unwrap(),
            dataset: Dataset::synthetic(Split::Test, 600, 3),
            config,
        });
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let app = router(Arc::clone(&state));
        let handle = tokio::spawn(async move {
            axum::serve(listener, app).await.unwrap();
        });
        Server {
            addr,
            state,
            client: reqwest::Client::new(),
            handle,
        }
    }

    pub fn stop(self) -> Arc<AppState> {
        self.handle.abort();
        self.state
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }

    pub async fn post(&self, path: &str, body: Value) -> (u16, Value) {
        let r = self.client.post(self.url(path)).json(&body).send().await.unwrap();
        let status = r.status().as_u16();
        (status, r.json().await.unwrap_or(Value::Null))
    }

    pub async fn get(&self, path: &str) -> (u16, Value) {
        let r = self.client.get(self.url(path)).send().await.unwrap();
        let status = r.status().as_u16();
        (status, r.json().await.unwrap_or(Value::Null))
    }

    pub async fn get_text(&self, path: &str) -> (u16, String) {
        let r = self.client.get(self.url(path)).send().await.unwrap();
        (r.status().as_u16(), r.text().await.unwrap())
    }

    pub async fn create(&self, agent: &str) -> String {
        let (status, body) = self.post("/sessions", json!({ "agent_id": agent })).await;
        assert_eq!(status, 201, "{body}");
        body["session_id"].as_str().unwrap().to_string()
    }
}

pub fn decode_png(b64: &str) -> Image {
    read_image(&BASE64.decode(b64).unwrap(), ImageFormat::Png).unwrap()
}

/// What a scripted participant observed over a full session.
#[derive(Debug, Default)]
pub struct RunLog {
    pub submits: usize,
    /// Completed test trials at each rest screen.
    pub rests_after: Vec<usize>,
    pub practice_feedback: usize,
    pub test_feedback_leaks: usize,
    pub rest_progress: Vec<(u64, u64)>,
    pub images_checked: usize,
}

/// Drives a session through every trial with explicit continues, answering
/// each trial with `choose(trial_index)`. `check_image` sees each stimulus.
pub async fn run_session(
    server: &Server,
    id: &str,
    practice: usize,
    mut check_image: impl FnMut(usize, &Image) -> bool,
) -> RunLog {
    let mut log = RunLog::default();
    let (status, body) = server.post(&format!("/sessions/{id}/continue"), json!({})).await;
    assert_eq!((status, body["state"].as_str()), (200, Some("in_trial")));
    loop {
        let (status, cur) = server.get(&format!("/sessions/{id}/current")).await;
        assert_eq!(status, 200);
        match cur["state"].as_str().unwrap() {
            "in_trial" => {
                let index = cur["trial_index"].as_u64().unwrap() as usize;
                let img = decode_png(cur["image"].as_str().unwrap());
                if check_image(index, &img) {
                    log.images_checked += 1;
                }
                assert_eq!(cur["options"].as_array().unwrap().len(), 5);
                let body = json!({
                    "choice_index": index % 5,
                    "confidence": 1 + index % 5,
                    "reaction_time_ms": 500 + index,
                });
                let (status, ack) = server.post(&format!("/sessions/{id}/response"), body).await;
                assert_eq!(status, 200, "{ack}");
                log.submits += 1;
                match (cur["phase"].as_str().unwrap(), ack["correct"].is_boolean()) {
                    ("practice", true) => log.practice_feedback += 1,
                    ("test", true) => log.test_feedback_leaks += 1,
                    _ => {}
                }
                let (status, next) = server.post(&format!("/sessions/{id}/continue"), json!({})).await;
                assert_eq!(status, 200, "{next}");
                if next["state"] == "rest" {
                    log.rests_after.push(log.submits - practice);
                    let (_, rest) = server.get(&format!("/sessions/{id}/current")).await;
                    assert_eq!(rest["rest"], true);
                    log.rest_progress.push((
                        rest["progress"]["completed"].as_u64().unwrap(),
                        rest["progress"]["total"].as_u64().unwrap(),
                    ));
                }
            }
            "rest" => {
                let (status, _) = server.post(&format!("/sessions/{id}/continue"), json!({})).await;
                assert_eq!(status, 200);
            }
            "done" => break,
            other => panic!("unexpected state {other}"),
        }
    }
    log
}
