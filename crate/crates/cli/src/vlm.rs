//! Remote vision-language scorer. Speaks the chat-completions JSON dialect
//! over HTTP: each query ships one rendered PPM frame (base64 data URL) and
//! one text prompt, and expects the reply text to contain the JSON the core
//! parsers understand. Failures degrade gracefully: frontier scores fall
//! back to 0.5 and presence to 0.0 rather than aborting an episode.

use std::collections::BTreeMap;
use std::time::Duration;

use anyhow::{Context, Result};
use base64::Engine;
use serde_json::{json, Value};

use frontis_core::frontier::FrontierProposal;
use frontis_core::raster::render_raster;
use frontis_core::scoring::{
    build_frontier_prompt, build_presence_prompt, parse_frontier_response,
    parse_presence_response, MarkedFrontierSet, SemanticScorer,
};
use frontis_core::sim::Observation;
use frontis_core::CameraModel;

#[derive(Debug, Clone)]
pub struct VlmConfig {
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token; empty disables auth.
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
}

impl Default for VlmConfig {
    fn default() -> Self {
        VlmConfig {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "default".into(),
            api_key_env: "VLM_API_KEY".into(),
            timeout_secs: 30,
            max_retries: 2,
        }
    }
}

/// Transport abstraction so episode code can run against a stub.
pub trait ChatClient {
    fn complete(&mut self, prompt: &str, image_ppm: &[u8]) -> Result<String>;
}

pub struct HttpChatClient {
    cfg: VlmConfig,
    client: reqwest::blocking::Client,
}

impl HttpChatClient {
    pub fn new(cfg: VlmConfig) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .context("building HTTP client")?;
        Ok(HttpChatClient { cfg, client })
    }

    fn request_once(&self, prompt: &str, image_ppm: &[u8]) -> Result<String> {
        let data_url = format!(
            "data:image/x-portable-pixmap;base64,{}",
            base64::engine::general_purpose::STANDARD.encode(image_ppm)
        );
        let body = json!({
            "model": self.cfg.model,
            "messages": [{
                "role": "user",
                "content": [
                    {"type": "text", "text": prompt},
                    {"type": "image_url", "image_url": {"url": data_url}},
                ],
            }],
        });
        let mut req = self.client.post(&self.cfg.endpoint).json(&body);
        if !self.cfg.api_key_env.is_empty() {
            if let Ok(key) = std::env::var(&self.cfg.api_key_env) {
                req = req.bearer_auth(key);
            }
        }
        let resp = req.send().context("sending request")?;
        let status = resp.status();
        if !status.is_success() {
            anyhow::bail!("endpoint returned {status}");
        }
        let value: Value = resp.json().context("decoding response body")?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .context("response has no message content")
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&mut self, prompt: &str, image_ppm: &[u8]) -> Result<String> {
        let mut last_err = None;
        for _ in 0..=self.cfg.max_retries {
            match self.request_once(prompt, image_ppm) {
                Ok(text) => return Ok(text),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.expect("at least one attempt"))
    }
}

/// [`SemanticScorer`] backed by a [`ChatClient`].
pub struct VlmScorer<C: ChatClient> {
    client: C,
    camera: CameraModel,
    pub queries: u64,
}

impl<C: ChatClient> VlmScorer<C> {
    pub fn new(client: C, camera: CameraModel) -> Self {
        VlmScorer { client, camera, queries: 0 }
    }
}

impl<C: ChatClient> SemanticScorer for VlmScorer<C> {
    fn score_frontiers(
        &mut self,
        obs: &Observation,
        _proposals: &[FrontierProposal],
        marks: &MarkedFrontierSet,
        goal: &str,
    ) -> BTreeMap<char, f64> {
        let labels: Vec<char> = marks.marks.iter().map(|m| m.label).collect();
        if labels.is_empty() {
            return BTreeMap::new();
        }
        let image = render_raster(obs, &self.camera, marks).to_ppm();
        let prompt = build_frontier_prompt(&labels, goal);
        self.queries += 1;
        let parsed = self
            .client
            .complete(&prompt, &image)
            .ok()
            .and_then(|reply| parse_frontier_response(&reply, &labels).ok());
        match parsed {
            Some(map) => map.into_iter().map(|(l, (p, _))| (l, p)).collect(),
            None => labels.into_iter().map(|l| (l, 0.5)).collect(),
        }
    }

    fn verify_presence(&mut self, obs: &Observation, goal: &str) -> f64 {
        let image = render_raster(obs, &self.camera, &MarkedFrontierSet::default()).to_ppm();
        let prompt = build_presence_prompt(goal);
        self.queries += 1;
        match self.client.complete(&prompt, &image) {
            Ok(reply) => parse_presence_response(&reply),
            Err(_) => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use frontis_core::geom::{Pose, Vec3};
    use std::io::{Read, Write};
    use std::net::TcpListener;

    fn flat_obs(camera: &CameraModel) -> Observation {
        Observation {
            depths: vec![1.0; camera.width as usize],
            instance_ids: vec![None; camera.width as usize],
            camera_pose: Pose::new(Vec3::ZERO, 0.0),
            step_index: 0,
        }
    }

    /// One-shot chat-completions stub; returns `reply` as the message text
    /// and hands back the request body for inspection.
    fn serve_once(reply: &'static str) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = Vec::new();
            let mut chunk = [0u8; 4096];
            let body_start;
            loop {
                let n = stream.read(&mut chunk).unwrap();
                buf.extend_from_slice(&chunk[..n]);
                if let Some(pos) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
                    body_start = pos + 4;
                    break;
                }
            }
            let headers = String::from_utf8_lossy(&buf[..body_start]).to_string();
            let content_length: usize = headers
                .lines()
                .find_map(|l| l.to_ascii_lowercase().strip_prefix("content-length:").map(|v| v.trim().parse().unwrap()))
                .unwrap();
            while buf.len() - body_start < content_length {
                let n = stream.read(&mut chunk).unwrap();
                buf.extend_from_slice(&chunk[..n]);
            }
            let request = String::from_utf8_lossy(&buf).to_string();
            let body = serde_json::to_string(&json!({
                "choices": [{"message": {"role": "assistant", "content": reply}}]
            }))
            .unwrap();
            let response = format!(
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
                body.len(),
                body
            );
            stream.write_all(response.as_bytes()).unwrap();
            request
        });
        (format!("http://{addr}/v1/chat/completions"), handle)
    }

    #[test]
    fn scorer_round_trips_through_http() {
        let (endpoint, server) = serve_once(r#"{"A": [0.8, "open doorway"]}"#);
        let cfg = VlmConfig { endpoint, max_retries: 0, ..VlmConfig::default() };
        let camera = CameraModel::default();
        let client = HttpChatClient::new(cfg).unwrap();
        let mut scorer = VlmScorer::new(client, camera.clone());

        let proposals = vec![FrontierProposal {
            centroid: Vec3::new(0.0, 0.0, 2.0),
            cells: vec![],
            gain_raw: 0.9,
            pixel_centroid: Some((64.0, 48.0)),
            observed_at_step: 0,
        }];
        let marks = frontis_core::scoring::assign_labels(&proposals);
        let obs = flat_obs(&camera);
        let scores = scorer.score_frontiers(&obs, &proposals, &marks, "bed");
        assert_eq!(scores[&'A'], 0.8);
        assert_eq!(scorer.queries, 1);

        let request = server.join().unwrap();
        // the request carried the prompt and a PPM data URL
        assert!(request.contains("labeled frontiers A"));
        assert!(request.contains("data:image/x-portable-pixmap;base64,"));
    }

    #[test]
    fn presence_query_parses_probability() {
        let (endpoint, server) = serve_once(r#"{"probability": 0.92, "reason": "in view"}"#);
        let cfg = VlmConfig { endpoint, max_retries: 0, ..VlmConfig::default() };
        let camera = CameraModel::default();
        let mut scorer = VlmScorer::new(HttpChatClient::new(cfg).unwrap(), camera.clone());
        let p = scorer.verify_presence(&flat_obs(&camera), "sofa");
        assert_eq!(p, 0.92);
        let request = server.join().unwrap();
        assert!(request.contains("sofa is in the camera field of view"));
    }

    #[test]
    fn unreachable_endpoint_degrades_to_defaults() {
        let cfg = VlmConfig {
            endpoint: "http://127.0.0.1:1/v1/chat/completions".into(),
            timeout_secs: 1,
            max_retries: 0,
            ..VlmConfig::default()
        };
        let camera = CameraModel::default();
        let mut scorer = VlmScorer::new(HttpChatClient::new(cfg).unwrap(), camera.clone());
        let proposals = vec![FrontierProposal {
            centroid: Vec3::new(0.0, 0.0, 2.0),
            cells: vec![],
            gain_raw: 0.9,
            pixel_centroid: Some((64.0, 48.0)),
            observed_at_step: 0,
        }];
        let marks = frontis_core::scoring::assign_labels(&proposals);
        let obs = flat_obs(&camera);
        let scores = scorer.score_frontiers(&obs, &proposals, &marks, "bed");
        assert_eq!(scores[&'A'], 0.5);
        assert_eq!(scorer.verify_presence(&obs, "bed"), 0.0);
    }
}
