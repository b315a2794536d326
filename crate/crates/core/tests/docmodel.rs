use std::collections::HashSet;

use chrono::{TimeZone, Utc};
use pagewise_core::docmodel::{builtin_schema, builtin_schema_named, record_id};
use pagewise_core::{DocType, ExtractionRecord, ReviewDecision, ReviewStatus, RunVariant, ValueType};

#[test]
fn schema_sizes_give_the_item_count() {
    let fs = builtin_schema(DocType::FinancialStatement);
    let ps = builtin_schema(DocType::Payslip);
    assert_eq!((fs.len(), ps.len()), (7, 5));
    // 81 statements and 39 payslips, one item per document and field.
    assert_eq!(81 * fs.len() + 39 * ps.len(), 762);
    for spec in fs.iter().chain(&ps) {
        assert!(!spec.output_key.is_empty() && spec.output_key == spec.output_key.to_lowercase());
        if spec.multi_year {
            assert_eq!(spec.value_type, ValueType::Numeric, "{}", spec.name);
        }
    }
    assert_eq!(builtin_schema_named("payslip").unwrap(), ps);
    assert!(builtin_schema_named("invoice").is_err());
}

#[test]
fn record_ids_are_stable_and_distinct() {
    let a = record_id("doc-1", "Revenue", RunVariant::Full, "mock", "vlm", 0);
    assert_eq!(a, record_id("doc-1", "Revenue", RunVariant::Full, "mock", "vlm", 0));
    let mut seen = HashSet::new();
    for v in RunVariant::ALL {
        for field in ["Revenue", "Dividend"] {
            for element in 0..3 {
                assert!(seen.insert(record_id("doc-1", field, v, "mock", "vlm", element)));
            }
        }
    }
    assert_eq!(seen.len(), 30);
}

#[test]
fn records_and_decisions_round_trip_as_json() {
    let rec = ExtractionRecord {
        record_id: "r1".into(),
        doc_id: "fs-001".into(),
        field_name: "Net Profit".into(),
        raw_value: "4,250,000".into(),
        typed_value: "4250000".into(),
        remarks: String::new(),
        year: Some("2023".into()),
        source_pages: vec![14, 15],
        variant: RunVariant::NoPrompt,
        ocr_id: "mock".into(),
        model_id: "mock-vlm".into(),
        created_at: Utc.with_ymd_and_hms(2024, 5, 1, 12, 0, 0).unwrap(),
    };
    let line = serde_json::to_string(&rec).unwrap();
    assert!(line.contains("\"variant\":\"no_prompt\""), "{line}");
    assert_eq!(serde_json::from_str::<ExtractionRecord>(&line).unwrap(), rec);

    let confirm = ReviewDecision {
        record_id: "r1".into(),
        status: ReviewStatus::Confirmed,
        corrected_value: None,
        analyst_note: None,
        decided_at: Utc.with_ymd_and_hms(2024, 5, 2, 0, 0, 0).unwrap(),
    };
    assert!(confirm.validate().is_ok());
    assert_eq!(
        serde_json::to_string(&confirm).unwrap(),
        r#"{"record_id":"r1","status":"confirmed","decided_at":"2024-05-02T00:00:00Z"}"#
    );
    let bad = ReviewDecision {
        status: ReviewStatus::Corrected,
        ..confirm
    };
    assert!(bad.validate().is_err());
}
