//! Dense page and query vectors.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::tokenize::tokenize;
use super::{EmbedTransport, RetrievalConfig, RetrievalError};
use crate::hashing::fnv1a64;

/// Embedding backend resolved from a [`RetrievalConfig`].
pub enum Embedder {
    Hashing {
        dim: usize,
        seed: u64,
    },
    Http {
        client: reqwest::blocking::Client,
        url: String,
        dim: usize,
    },
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

impl Embedder {
    pub fn from_config(cfg: &RetrievalConfig) -> Result<Embedder, RetrievalError> {
        match cfg.embed_transport {
            EmbedTransport::HashingFallback => Ok(Embedder::Hashing {
                dim: cfg.embed_dim,
                seed: cfg.embed_seed,
            }),
            EmbedTransport::Http => {
                let url = cfg
                    .embed_endpoint
                    .clone()
                    .ok_or_else(|| RetrievalError::EmbedServiceUnavailable("no embed_endpoint configured".into()))?;
                let client = reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs(30))
                    .build()
                    .map_err(|e| RetrievalError::EmbedServiceUnavailable(e.to_string()))?;
                Ok(Embedder::Http {
                    client,
                    url,
                    dim: cfg.embed_dim,
                })
            }
        }
    }

    pub fn hashing(dim: usize, seed: u64) -> Embedder {
        Embedder::Hashing { dim, seed }
    }

    /// One vector per text, each L2-normalized; empty texts map to the zero
    /// vector.
    pub fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, RetrievalError> {
        match self {
            Embedder::Hashing { dim, seed } => Ok(texts.iter().map(|t| hashing_embed(t, *dim, *seed)).collect()),
            Embedder::Http { client, url, dim } => {
                let resp = client
                    .post(url)
                    .json(&EmbedRequest { texts })
                    .send()
                    .and_then(|r| r.error_for_status())
                    .map_err(|e| RetrievalError::EmbedServiceUnavailable(e.to_string()))?;
                let body: EmbedResponse = resp
                    .json()
                    .map_err(|e| RetrievalError::EmbedServiceUnavailable(format!("bad response: {e}")))?;
                if body.vectors.len() != texts.len() || body.vectors.iter().any(|v| v.len() != *dim) {
                    return Err(RetrievalError::EmbedServiceUnavailable(format!(
                        "expected {} vectors of dimension {dim}",
                        texts.len()
                    )));
                }
                Ok(body.vectors.into_iter().map(l2_normalize).collect())
            }
        }
    }

    pub fn embed(&self, text: &str) -> Result<Vec<f64>, RetrievalError> {
        Ok(self.embed_batch(&[text])?.remove(0))
    }
}

fn l2_normalize(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Signed feature hashing of token counts into `dim` buckets.
pub fn hashing_embed(text: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut v = vec![0f64; dim];
    for tok in tokenize(text) {
        let h = fnv1a64(seed, tok.as_bytes());
        let bucket = (h % dim as u64) as usize;
        let sign = if (h >> 63) == 1 { -1.0 } else { 1.0 };
        v[bucket] += sign;
    }
    l2_normalize(v)
}

/// Dot product of unit vectors; 0 when either side is the zero vector.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>();
    let nb = b.iter().map(|x| x * x).sum::<f64>();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}
