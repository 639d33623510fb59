//! Client for an embedding service speaking
//! `POST {"sentences": [...]}` → `{"vectors": [[...], ...]}`.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EmbeddingError, EmbeddingSeries};
use crate::corpus::SentenceSequence;

/// Environment variable consulted for the default endpoint.
pub const ENDPOINT_ENV: &str = "SEMADEV_EMBED_ENDPOINT";

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("{endpoint} unreachable after {attempts} attempt(s): {reason}")]
    Unreachable {
        endpoint: String,
        attempts: u32,
        reason: String,
    },
    #[error("embedding service returned HTTP {0}")]
    HttpStatus(u16),
    #[error("protocol error: {0}")]
    ProtocolError(String),
    #[error("no sentences to embed")]
    EmptyInput,
    #[error("no endpoint configured (pass --endpoint or set {ENDPOINT_ENV})")]
    NoEndpoint,
    #[error(transparent)]
    Invalid(#[from] EmbeddingError),
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub batch_size: usize,
    /// Retries after the first failed attempt of a batch.
    pub retries: u32,
    /// Delay before the first retry; doubled for each further one.
    pub backoff: Duration,
    pub timeout: Duration,
    pub bearer_token: Option<String>,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            batch_size: 64,
            retries: 3,
            backoff: Duration::from_millis(250),
            timeout: Duration::from_secs(120),
            bearer_token: None,
        }
    }

    /// Uses `explicit` when given, otherwise [`ENDPOINT_ENV`].
    pub fn resolve(explicit: Option<&str>) -> Result<Self, RemoteError> {
        match explicit {
            Some(e) => Ok(Self::new(e)),
            None => std::env::var(ENDPOINT_ENV)
                .ok()
                .filter(|e| !e.trim().is_empty())
                .map(Self::new)
                .ok_or(RemoteError::NoEndpoint),
        }
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    sentences: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// Embeds every sentence, preserving order. Batches are sent sequentially;
/// callers embed several documents concurrently by calling this from
/// multiple threads.
pub fn fetch_remote(
    cfg: &RemoteConfig,
    sentences: &SentenceSequence,
) -> Result<EmbeddingSeries, RemoteError> {
    if sentences.is_empty() {
        return Err(RemoteError::EmptyInput);
    }
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(cfg.timeout))
        .http_status_as_error(false)
        .build()
        .into();

    let mut data: Vec<f32> = Vec::new();
    let mut dim: Option<usize> = None;
    for batch in sentences.sentences.chunks(cfg.batch_size.max(1)) {
        let vectors = post_with_retry(&agent, cfg, batch)?;
        if vectors.len() != batch.len() {
            return Err(RemoteError::ProtocolError(format!(
                "sent {} sentences, received {} vectors",
                batch.len(),
                vectors.len()
            )));
        }
        for v in vectors {
            let d = *dim.get_or_insert(v.len());
            if v.len() != d {
                return Err(RemoteError::ProtocolError(format!(
                    "vector dimension {} differs from {}",
                    v.len(),
                    d
                )));
            }
            data.extend(v.into_iter().map(|x| x as f32));
        }
    }
    let dim = dim.unwrap_or(0);
    Ok(EmbeddingSeries::from_flat(
        data,
        dim,
        sentences.source_id.clone(),
    )?)
}

fn post_with_retry(
    agent: &ureq::Agent,
    cfg: &RemoteConfig,
    batch: &[String],
) -> Result<Vec<Vec<f64>>, RemoteError> {
    let mut delay = cfg.backoff;
    let mut attempt = 0u32;
    loop {
        attempt += 1;
        let outcome = post_once(agent, cfg, batch);
        let retryable = match &outcome {
            Ok(_) => false,
            Err(RemoteError::Unreachable { .. }) => true,
            Err(RemoteError::HttpStatus(code)) => *code >= 500 || *code == 429,
            Err(_) => false,
        };
        if !retryable || attempt > cfg.retries {
            return match outcome {
                Err(RemoteError::Unreachable {
                    endpoint, reason, ..
                }) => Err(RemoteError::Unreachable {
                    endpoint,
                    attempts: attempt,
                    reason,
                }),
                other => other,
            };
        }
        std::thread::sleep(delay);
        delay = delay.saturating_mul(2);
    }
}

fn post_once(
    agent: &ureq::Agent,
    cfg: &RemoteConfig,
    batch: &[String],
) -> Result<Vec<Vec<f64>>, RemoteError> {
    let mut req = agent
        .post(&cfg.endpoint)
        .header("Content-Type", "application/json");
    if let Some(token) = &cfg.bearer_token {
        req = req.header("Authorization", &format!("Bearer {token}"));
    }
    let mut resp = req
        .send_json(EmbedRequest { sentences: batch })
        .map_err(|e| RemoteError::Unreachable {
            endpoint: cfg.endpoint.clone(),
            attempts: 1,
            reason: e.to_string(),
        })?;
    let status = resp.status().as_u16();
    if !(200..300).contains(&status) {
        return Err(RemoteError::HttpStatus(status));
    }
    let body: EmbedResponse = resp
        .body_mut()
        .read_json()
        .map_err(|e| RemoteError::ProtocolError(format!("bad response body: {e}")))?;
    Ok(body.vectors)
}
