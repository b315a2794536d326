//! OCR engine adapters and reading-order assembly.
//!
//! Real engines are reached only through a line-delimited wire format: one
//! JSON record `{text, bbox: [x0, y0, x1, y1], conf}` per token. The
//! subprocess transport passes the image path as the last argument and reads
//! records from stdout; the HTTP transport posts the image bytes and reads the
//! records from the response body. The mock transport replays the page's
//! sidecar text with seeded noise.

mod mock;
mod order;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::RasterImage;

pub use mock::{assess_legibility, mock_tokens, Legibility, SKEW_SUB_PER_DEG};
pub use order::{assign_reading_order, LINE_OVERLAP};

#[derive(Debug, Error)]
pub enum OcrError {
    #[error("OCR engine unavailable: {0}")]
    EngineUnavailable(String),
    #[error("OCR protocol error at line {line}: {message}; raw payload: {raw:?}")]
    ProtocolError { line: usize, message: String, raw: String },
    #[error("OCR engine timed out after {0:?}")]
    Timeout(Duration),
    #[error("invalid OCR config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrToken {
    pub text: String,
    /// `[x0, y0, x1, y1]` in pixels.
    pub bbox: [f64; 4],
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageText {
    pub page_index: usize,
    /// Tokens in reading order.
    pub tokens: Vec<OcrToken>,
    /// Tokens joined by single spaces, lines separated by `\n`.
    pub full_text: String,
    pub engine_id: String,
}

impl PageText {
    pub fn from_lines(page_index: usize, engine_id: &str, lines: Vec<Vec<OcrToken>>) -> PageText {
        let full_text = lines
            .iter()
            .map(|l| l.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n");
        PageText {
            page_index,
            tokens: lines.into_iter().flatten().collect(),
            full_text,
            engine_id: engine_id.to_string(),
        }
    }

    /// Serializes the tokens in the wire format.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            let rec = WireRecord {
                text: t.text.clone(),
                bbox: t.bbox,
                conf: t.confidence,
            };
            out.push_str(&serde_json::to_string(&rec).expect("plain record"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OcrTransport {
    Subprocess,
    Http,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockNoise {
    pub char_sub_rate: f64,
    pub token_drop_rate: f64,
    pub seed: u64,
    /// Let orientation and skew of the image degrade the mock output.
    pub emulate_legibility: bool,
}

impl Default for MockNoise {
    fn default() -> Self {
        MockNoise {
            char_sub_rate: 0.0,
            token_drop_rate: 0.0,
            seed: 0,
            emulate_legibility: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcrEngineConfig {
    pub engine_id: String,
    pub transport: OcrTransport,
    /// Command line for `subprocess` (split on whitespace), URL for `http`.
    pub endpoint_or_command: String,
    pub languages: Vec<String>,
    pub mock_noise: MockNoise,
    pub timeout_secs: u64,
}

impl Default for OcrEngineConfig {
    fn default() -> Self {
        OcrEngineConfig {
            engine_id: "mock".into(),
            transport: OcrTransport::Mock,
            endpoint_or_command: String::new(),
            languages: vec!["en".into(), "id".into(), "zh-Hans".into(), "zh-Hant".into()],
            mock_noise: MockNoise::default(),
            timeout_secs: 60,
        }
    }
}

impl OcrEngineConfig {
    pub fn validate(&self) -> Result<(), OcrError> {
        let n = &self.mock_noise;
        for (name, v) in [
            ("char_sub_rate", n.char_sub_rate),
            ("token_drop_rate", n.token_drop_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(OcrError::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.engine_id.is_empty() {
            return Err(OcrError::InvalidConfig("engine_id is empty".into()));
        }
        if self.transport != OcrTransport::Mock && self.endpoint_or_command.trim().is_empty() {
            return Err(OcrError::InvalidConfig("endpoint_or_command is empty".into()));
        }
        if self.timeout_secs == 0 {
            return Err(OcrError::InvalidConfig("timeout_secs must be positive".into()));
        }
        Ok(())
    }
}

/// One page to transcribe.
#[derive(Debug, Clone)]
pub struct OcrRequest<'a> {
    pub page_index: usize,
    /// Image sent to the engine (possibly a preprocessed copy).
    pub image_path: &'a Path,
    /// Sidecar text for the mock engine; defaults to `image_path` with a
    /// `.txt` extension.
    pub sidecar_path: Option<&'a Path>,
}

#[derive(Deserialize, Serialize)]
struct WireRecord {
    text: String,
    bbox: [f64; 4],
    conf: f64,
}

/// Parses line-delimited wire records. A payload that is a single JSON array
/// of records is accepted too.
pub fn parse_wire(payload: &str) -> Result<Vec<OcrToken>, OcrError> {
    let trimmed = payload.trim_start();
    if trimmed.starts_with('[') {
        let recs: Vec<WireRecord> = serde_json::from_str(trimmed).map_err(|e| OcrError::ProtocolError {
            line: e.line(),
            message: e.to_string(),
            raw: payload.to_string(),
        })?;
        return recs
            .into_iter()
            .enumerate()
            .map(|(i, r)| check(r, i + 1, payload))
            .collect();
    }
    let mut out = Vec::new();
    for (i, line) in payload.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: WireRecord = serde_json::from_str(line).map_err(|e| OcrError::ProtocolError {
            line: i + 1,
            message: e.to_string(),
            raw: line.to_string(),
        })?;
        out.push(check(rec, i + 1, line)?);
    }
    Ok(out)
}

fn check(r: WireRecord, line: usize, raw: &str) -> Result<OcrToken, OcrError> {
    let [x0, y0, x1, y1] = r.bbox;
    let bad = |message: &str| OcrError::ProtocolError {
        line,
        message: message.to_string(),
        raw: raw.to_string(),
    };
    if !(x0 < x1 && y0 < y1) {
        return Err(bad("degenerate bbox"));
    }
    if !(0.0..=1.0).contains(&r.conf) {
        return Err(bad("confidence outside [0, 1]"));
    }
    Ok(OcrToken {
        text: r.text,
        bbox: r.bbox,
        confidence: r.conf,
    })
}

/// An OCR adapter bound to one engine configuration.
///
/// Subprocess engines run one request at a time; HTTP and mock engines accept
/// concurrent calls.
pub struct OcrEngine {
    cfg: OcrEngineConfig,
    subprocess_gate: Mutex<()>,
    http: Option<reqwest::blocking::Client>,
}

impl OcrEngine {
    pub fn new(cfg: OcrEngineConfig) -> Result<Self, OcrError> {
        cfg.validate()?;
        let http = match cfg.transport {
            OcrTransport::Http => Some(
                reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs(cfg.timeout_secs))
                    .build()
                    .map_err(|e| OcrError::EngineUnavailable(e.to_string()))?,
            ),
            _ => None,
        };
        Ok(OcrEngine {
            cfg,
            subprocess_gate: Mutex::new(()),
            http,
        })
    }

    pub fn config(&self) -> &OcrEngineConfig {
        &self.cfg
    }

    pub fn transcribe_page(&self, req: &OcrRequest<'_>) -> Result<PageText, OcrError> {
        let tokens = match self.cfg.transport {
            OcrTransport::Mock => self.run_mock(req)?,
            OcrTransport::Subprocess => self.run_subprocess(req.image_path)?,
            OcrTransport::Http => self.run_http(req.image_path)?,
        };
        Ok(PageText::from_lines(
            req.page_index,
            &self.cfg.engine_id,
            assign_reading_order(&tokens),
        ))
    }

    fn run_mock(&self, req: &OcrRequest<'_>) -> Result<Vec<OcrToken>, OcrError> {
        let sidecar: PathBuf = req
            .sidecar_path
            .map(Path::to_path_buf)
            .unwrap_or_else(|| req.image_path.with_extension("txt"));
        let text = mock::read_sidecar(&sidecar)?;
        let noise = &self.cfg.mock_noise;
        let legibility = if noise.emulate_legibility {
            let img = RasterImage::load_png(req.image_path)
                .map_err(|e| OcrError::EngineUnavailable(format!("mock image {}: {e}", req.image_path.display())))?;
            assess_legibility(&img)
        } else {
            Legibility::CLEAN
        };
        Ok(mock_tokens(&text, req.page_index, noise, legibility))
    }

    fn run_subprocess(&self, image: &Path) -> Result<Vec<OcrToken>, OcrError> {
        let _gate = self.subprocess_gate.lock().unwrap_or_else(|p| p.into_inner());
        let mut parts = self.cfg.endpoint_or_command.split_whitespace();
        let program = parts.next().expect("validated non-empty");
        let mut child = Command::new(program)
            .args(parts)
            .arg(image)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| OcrError::EngineUnavailable(format!("{program}: {e}")))?;
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = std::thread::spawn(move || {
            let mut s = String::new();
            stdout.read_to_string(&mut s).map(|_| s)
        });

        let limit = Duration::from_secs(self.cfg.timeout_secs);
        let start = Instant::now();
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if start.elapsed() >= limit => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(OcrError::Timeout(limit));
                }
                Ok(None) => std::thread::sleep(Duration::from_millis(5)),
                Err(e) => return Err(OcrError::EngineUnavailable(e.to_string())),
            }
        };
        let out = reader
            .join()
            .map_err(|_| OcrError::EngineUnavailable("stdout reader panicked".into()))?
            .map_err(|e| OcrError::EngineUnavailable(e.to_string()))?;
        if !status.success() {
            return Err(OcrError::EngineUnavailable(format!("{program} exited with {status}")));
        }
        parse_wire(&out)
    }

    fn run_http(&self, image: &Path) -> Result<Vec<OcrToken>, OcrError> {
        let bytes =
            std::fs::read(image).map_err(|e| OcrError::EngineUnavailable(format!("{}: {e}", image.display())))?;
        let client = self.http.as_ref().expect("http client built for http transport");
        let resp = client
            .post(&self.cfg.endpoint_or_command)
            .header(reqwest::header::CONTENT_TYPE, "image/png")
            .body(bytes)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    OcrError::Timeout(Duration::from_secs(self.cfg.timeout_secs))
                } else {
                    OcrError::EngineUnavailable(e.to_string())
                }
            })?;
        let status = resp.status();
        let body = resp.text().map_err(|e| OcrError::EngineUnavailable(e.to_string()))?;
        if !status.is_success() {
            return Err(OcrError::EngineUnavailable(format!("HTTP {status}: {body}")));
        }
        parse_wire(&body)
    }
}
