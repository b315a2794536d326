mod common;

use std::path::Path;
use std::sync::{Arc, Mutex};

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use pagewise_core::docmodel::field_by_name;
use pagewise_core::extract::{
    parse_structured_output, ExtractError, MockVlmConfig, VlmClient, VlmEndpointConfig, VlmImage, VlmTransport,
};
use pagewise_core::prompting::{build_prompt, PromptVariant};
use pagewise_core::{DocType, FieldSpec, Language};
use serde_json::{json, Value};

fn dividend() -> FieldSpec {
    field_by_name(DocType::FinancialStatement, "Dividend").unwrap()
}

fn pages(dir: &Path, texts: &[String]) -> Vec<VlmImage> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let path = dir.join(format!("page_{i:03}.png"));
            std::fs::write(&path, [0x89, b'P', b'N', b'G', i as u8]).unwrap();
            std::fs::write(path.with_extension("txt"), t).unwrap();
            VlmImage {
                page_index: i,
                path,
                sidecar_path: None,
            }
        })
        .collect()
}

fn mock_client(cap: usize, seed: u64) -> VlmClient {
    VlmClient::new(VlmEndpointConfig {
        mock: MockVlmConfig {
            context_cap_pages: cap,
            seed,
        },
        max_images_per_call: 64,
        ..Default::default()
    })
    .unwrap()
}

fn filler(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| format!("Notes to the accounts\nProperty, plant and equipment note {i}"))
        .collect()
}

#[test]
fn mock_finds_value_on_visible_page() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = filler(2);
    texts[1] = "Statement of cash flows\nDividend paid (2023): 1,200,000\nDividend paid (2022): 950,000".into();
    let imgs = pages(dir.path(), &texts);
    let prompt = build_prompt(&dividend(), Language::English, PromptVariant::Full).render();
    let resp = mock_client(8, 0).call_vlm(&prompt, &imgs).unwrap();
    let parsed = parse_structured_output(&resp.text, &dividend()).unwrap();
    let by_year: Vec<_> = parsed
        .iter()
        .map(|p| (p.year.as_deref().unwrap(), p.value.as_str()))
        .collect();
    assert_eq!(by_year, [("2023", "1,200,000"), ("2022", "950,000")]);
    assert_eq!(resp.pages_sent, [0, 1]);
}

#[test]
fn mock_context_cap_hides_late_pages() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = filler(50);
    texts[40] = "Dividend paid (2023): 3,000,000".into();
    let imgs = pages(dir.path(), &texts);
    let prompt = build_prompt(&dividend(), Language::English, PromptVariant::Full).render();
    let resp = mock_client(8, 0).call_vlm(&prompt, &imgs).unwrap();
    let parsed = parse_structured_output(&resp.text, &dividend()).unwrap();
    assert_eq!(parsed.len(), 1);
    assert_eq!(parsed[0].value, "");
    assert_eq!(parsed[0].remarks, "not found");
}

#[test]
fn mock_respects_exclusions_in_the_full_prompt_only() {
    let dir = tempfile::tempdir().unwrap();
    let imgs = pages(
        dir.path(),
        &["Dividends declared (2023): 5,000,000\nDividend paid (2023): 1,000,000".to_string()],
    );
    let full = build_prompt(&dividend(), Language::English, PromptVariant::Full).render();
    let minimal = build_prompt(&dividend(), Language::English, PromptVariant::Minimal).render();
    let client = mock_client(8, 0);
    let pick = |prompt: &str| {
        let resp = client.call_vlm(prompt, &imgs).unwrap();
        parse_structured_output(&resp.text, &dividend()).unwrap()[0]
            .value
            .clone()
    };
    assert_eq!(pick(&full), "1,000,000");
    assert_eq!(pick(&minimal), "5,000,000");
}

#[test]
fn mock_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = filler(3);
    texts[2] = "Dividend paid (2023): 42".into();
    let imgs = pages(dir.path(), &texts);
    let prompt = build_prompt(&dividend(), Language::English, PromptVariant::Full).render();
    for seed in 0..5 {
        let a = mock_client(8, seed).call_vlm(&prompt, &imgs).unwrap();
        let b = mock_client(8, seed).call_vlm(&prompt, &imgs).unwrap();
        assert_eq!(a.text, b.text);
        assert_eq!(parse_structured_output(&a.text, &dividend()).unwrap()[0].value, "42");
    }
}

#[test]
fn images_truncate_to_the_per_call_limit() {
    let dir = tempfile::tempdir().unwrap();
    let imgs = pages(dir.path(), &filler(12));
    let client = VlmClient::new(VlmEndpointConfig::default()).unwrap();
    let resp = client
        .call_vlm("Extract the dividend from the given document.", &imgs)
        .unwrap();
    assert_eq!(resp.pages_sent, (0..8).collect::<Vec<_>>());
}

#[test]
fn parse_examples() {
    let spec = dividend();
    let fenced = "```json\n{\"dividend\": \"1,200,000\"}\n```";
    let v = parse_structured_output(fenced, &spec).unwrap();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].value, "1,200,000");

    let list = r#"[{"dividend":"100","year":"2022"},{"dividend":"120","year":"2023"}]"#;
    let v = parse_structured_output(list, &spec).unwrap();
    assert_eq!(v.len(), 2);
    assert_eq!((v[1].value.as_str(), v[1].year.as_deref()), ("120", Some("2023")));

    let blank = r#"Here you go: {"dividend": "", "remarks": "no dividend paid this year"}"#;
    let v = parse_structured_output(blank, &spec).unwrap();
    assert_eq!(
        (v[0].value.as_str(), v[0].remarks.as_str()),
        ("", "no dividend paid this year")
    );

    let prose = "The company paid a dividend of 1.2 million.";
    match parse_structured_output(prose, &spec) {
        Err(ExtractError::ParseError { raw, .. }) => assert_eq!(raw, prose),
        other => panic!("expected parse error, got {other:?}"),
    }
    assert!(matches!(
        parse_structured_output(r#"{"dividend": "1", "notes": "x"}"#, &spec),
        Err(ExtractError::KeyMismatch { .. })
    ));
    // `year` is only allowed for multi-year fields.
    let name = field_by_name(DocType::FinancialStatement, "Company Name").unwrap();
    assert!(parse_structured_output(r#"{"company_name": "A", "year": "2023"}"#, &name).is_err());
}

#[derive(Clone, Default)]
struct Captured {
    bodies: Arc<Mutex<Vec<Value>>>,
    auth: Arc<Mutex<Vec<String>>>,
    failures_left: Arc<Mutex<u32>>,
}

async fn chat(State(c): State<Captured>, headers: HeaderMap, Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    c.bodies.lock().unwrap().push(body);
    if let Some(a) = headers.get("authorization") {
        c.auth.lock().unwrap().push(a.to_str().unwrap().to_string());
    }
    let mut left = c.failures_left.lock().unwrap();
    if *left > 0 {
        *left -= 1;
        return (StatusCode::SERVICE_UNAVAILABLE, Json(json!({})));
    }
    (
        StatusCode::OK,
        Json(json!({
            "choices": [{"message": {"content": "{\"dividend\": \"7\", \"year\": \"2023\"}"}}],
            "usage": {"prompt_tokens": 11, "completion_tokens": 5}
        })),
    )
}

#[test]
fn http_transport_body_auth_and_retries() {
    let captured = Captured::default();
    *captured.failures_left.lock().unwrap() = 2;
    let url = common::serve(Router::new().route("/v1/chat", post(chat)).with_state(captured.clone()));
    let dir = tempfile::tempdir().unwrap();
    let imgs = pages(dir.path(), &filler(3));

    let var = "PAGEWISE_EXTRACT_TEST_TOKEN";
    std::env::set_var(var, "secret");
    let client = VlmClient::new(VlmEndpointConfig {
        transport: VlmTransport::Http,
        base_url: format!("{url}/v1/chat"),
        model_id: "test-model".into(),
        auth_env_var: Some(var.into()),
        max_images_per_call: 2,
        retries: 2,
        ..Default::default()
    })
    .unwrap();
    let resp = client.call_vlm("PROMPT", &imgs).unwrap();
    assert_eq!(resp.text, "{\"dividend\": \"7\", \"year\": \"2023\"}");
    assert_eq!(resp.pages_sent, [0, 1]);
    assert_eq!(resp.token_usage.unwrap().completion_tokens, 5);

    let bodies = captured.bodies.lock().unwrap();
    assert_eq!(bodies.len(), 3, "two 503s then success");
    let body = &bodies[2];
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["max_tokens"], 1024);
    let content = body["messages"][0]["content"].as_array().unwrap();
    assert_eq!(content.len(), 3);
    assert_eq!(content[0], json!({"type": "text", "text": "PROMPT"}));
    assert_eq!(content[1]["type"], "image");
    use base64::Engine;
    let decoded = base64::engine::general_purpose::STANDARD
        .decode(content[2]["data"].as_str().unwrap())
        .unwrap();
    assert_eq!(decoded, std::fs::read(&imgs[1].path).unwrap());
    assert!(captured.auth.lock().unwrap().iter().all(|a| a == "Bearer secret"));
}

#[test]
fn http_gives_up_after_retries() {
    let captured = Captured::default();
    *captured.failures_left.lock().unwrap() = 10;
    let url = common::serve(Router::new().route("/chat", post(chat)).with_state(captured.clone()));
    let client = VlmClient::new(VlmEndpointConfig {
        transport: VlmTransport::Http,
        base_url: format!("{url}/chat"),
        retries: 1,
        ..Default::default()
    })
    .unwrap();
    assert!(matches!(
        client.call_vlm("p", &[]),
        Err(ExtractError::EndpointUnavailable(_))
    ));
    assert_eq!(captured.bodies.lock().unwrap().len(), 2);
}

#[test]
fn http_auth_missing_is_reported_before_sending() {
    let captured = Captured::default();
    let url = common::serve(Router::new().route("/chat", post(chat)).with_state(captured.clone()));
    let client = VlmClient::new(VlmEndpointConfig {
        transport: VlmTransport::Http,
        base_url: format!("{url}/chat"),
        auth_env_var: Some("PAGEWISE_EXTRACT_TEST_UNSET".into()),
        ..Default::default()
    })
    .unwrap();
    assert!(matches!(client.call_vlm("p", &[]), Err(ExtractError::AuthMissing(_))));
    assert!(captured.bodies.lock().unwrap().is_empty());
}
