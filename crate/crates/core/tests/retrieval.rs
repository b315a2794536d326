mod common;

use std::collections::HashMap;

use axum::routing::post;
use axum::{Json, Router};
use pagewise_core::docmodel::field_by_name;
use pagewise_core::ocr::{OcrToken, PageText};
use pagewise_core::retrieval::{
    bm25_scores, build_index_from_texts, build_page_index, build_query, cosine, fuse_and_select, hashing_embed,
    min_max, select_all, tokenize, DocumentRetriever, EmbedTransport, Embedder, FieldQuery, RetrievalConfig,
    RetrievalError,
};
use pagewise_core::{DocType, Language};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// OCR output for a page whose lines are given as plain strings.
fn page(index: usize, lines: &[&str]) -> PageText {
    let tokens = lines
        .iter()
        .enumerate()
        .map(|(row, line)| {
            line.split(' ')
                .enumerate()
                .map(|(col, w)| OcrToken {
                    text: w.to_string(),
                    bbox: [
                        col as f64 * 50.0,
                        row as f64 * 30.0,
                        col as f64 * 50.0 + 40.0,
                        row as f64 * 30.0 + 20.0,
                    ],
                    confidence: 1.0,
                })
                .collect()
        })
        .collect();
    PageText::from_lines(index, "mock", tokens)
}

fn cfg() -> RetrievalConfig {
    RetrievalConfig::default()
}

fn query(terms: &[&str]) -> FieldQuery {
    FieldQuery {
        field_name: "test".into(),
        terms: terms.iter().map(|t| t.to_string()).collect(),
        raw_text: terms.join(" "),
    }
}

/// Okapi BM25 written out term by term from whitespace-split pages.
fn bm25_oracle(pages: &[Vec<&str>], terms: &[&str], k1: f64, b: f64) -> Vec<f64> {
    let n = pages.len() as f64;
    let total: usize = pages.iter().map(Vec::len).sum();
    let mut avg = total as f64 / n;
    if avg == 0.0 {
        avg = 1.0;
    }
    pages
        .iter()
        .map(|page| {
            let mut score = 0.0;
            for t in terms {
                let df = pages.iter().filter(|p| p.contains(t)).count() as f64;
                let tf = page.iter().filter(|w| *w == t).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * page.len() as f64 / avg));
            }
            score
        })
        .collect()
}

#[test]
fn tokenizer_examples() {
    assert_eq!(tokenize("Net Profit: 1,234"), ["net", "profit", "1", "234"]);
    assert_eq!(tokenize("营业收入"), ["营业", "业收", "收入"]);
    assert!(tokenize("").is_empty());
    assert_eq!(tokenize("股"), ["股"]);
    // Full-width forms fold to ASCII under compatibility normalization.
    assert_eq!(tokenize("ＮＥＴ　１２"), ["net", "12"]);
    assert_eq!(
        tokenize("Laba bersih 2023 净利润"),
        ["laba", "bersih", "2023", "净利", "利润"]
    );
}

#[test]
fn index_statistics_match_hand_count() {
    let idx = build_index_from_texts(["a b a", "b c", "c c c d"]);
    assert_eq!(idx.page_count(), 3);
    let lens: Vec<_> = idx.pages.iter().map(|p| p.length).collect();
    assert_eq!(lens, [3, 2, 4]);
    assert!((idx.avg_len - 3.0).abs() < 1e-12);
    let df = |t: &str| idx.doc_freq.get(t).copied().unwrap_or(0);
    assert_eq!((df("a"), df("b"), df("c"), df("d"), df("e")), (1, 2, 2, 1, 0));
    assert_eq!(idx.pages[2].term_freq["c"], 3);

    let empty = build_index_from_texts(["", "  "]);
    assert_eq!(empty.avg_len, 0.0);
    let scores = bm25_scores(&empty, &query(&["x"]), &cfg());
    assert_eq!(scores, [0.0, 0.0]);

    let single = build_index_from_texts(["x y x"]);
    assert!(single.doc_freq.values().all(|&d| d <= 1));
}

#[test]
fn page_index_from_ocr_output() {
    let pages = vec![page(0, &["Net profit 10"]), page(1, &["Revenue 20"])];
    let idx = build_page_index(&pages);
    assert_eq!(idx.doc_freq["profit"], 1);
    assert_eq!(idx.pages[1].length, 2);
}

#[test]
fn dividend_query_terms() {
    let spec = field_by_name(DocType::FinancialStatement, "Dividend").unwrap();
    let en = build_query(&spec, Language::English).unwrap();
    for t in ["dividend", "paid", "financial", "statement"] {
        assert!(en.terms.contains(&t.to_string()), "{t} missing from {:?}", en.terms);
    }
    let mut dedup = en.terms.clone();
    dedup.dedup();
    assert_eq!(dedup.len(), en.terms.len());
    let id = build_query(&spec, Language::Indonesian).unwrap();
    assert!(en.terms.iter().all(|t| id.terms.contains(t)));
    assert!(id.terms.contains(&"dividen".to_string()));

    let mut bare = spec.clone();
    bare.keywords.clear();
    bare.doc_cues.clear();
    bare.lang_keywords.clear();
    assert!(matches!(
        build_query(&bare, Language::English),
        Err(RetrievalError::EmptyQuery(_))
    ));
}

#[test]
fn bm25_on_toy_corpus_matches_oracle() {
    let texts = [
        "net profit for the year",
        "profit profit and loss",
        "statement of cash flows",
    ];
    let idx = build_index_from_texts(texts);
    let q = ["profit", "cash"];
    let got = bm25_scores(&idx, &query(&q), &cfg());
    let pages: Vec<Vec<&str>> = texts.iter().map(|t| t.split_whitespace().collect()).collect();
    let want = bm25_oracle(&pages, &q, 1.2, 0.75);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9, "{got:?} vs {want:?}");
    }
    assert_eq!(bm25_scores(&idx, &query(&["absent"]), &cfg()), [0.0; 3]);
}

#[test]
fn repeated_term_raises_only_that_page() {
    let before = build_index_from_texts(["revenue total", "revenue grew", "other text"]);
    let after = build_index_from_texts(["revenue revenue total", "revenue grew", "other text"]);
    let q = query(&["revenue"]);
    let (a, b) = (bm25_scores(&before, &q, &cfg()), bm25_scores(&after, &q, &cfg()));
    assert!(b[0] > a[0]);
    // Page 2 holds no query term either way.
    assert_eq!((a[2], b[2]), (0.0, 0.0));
}

#[test]
fn hashing_embeddings() {
    let a = hashing_embed("net profit for the year", 256, 0);
    assert!((cosine(&a, &a) - 1.0).abs() < 1e-12);
    assert!((a.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    let empty = hashing_embed("", 256, 0);
    assert!(empty.iter().all(|&x| x == 0.0));
    assert_eq!(cosine(&empty, &a), 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..100 {
        let words = |rng: &mut ChaCha8Rng, prefix: &str| -> String {
            (0..rng.random_range(3..12))
                .map(|_| format!("{prefix}{}", rng.random_range(0..10_000)))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let (x, y) = (words(&mut rng, "p"), words(&mut rng, "q"));
        let c = cosine(&hashing_embed(&x, 256, 0), &hashing_embed(&y, 256, 0));
        assert!(c.abs() < 0.3, "{x} / {y}: {c}");
    }
}

#[test]
fn fusion_degenerates_at_alpha_extremes() {
    let lex = [0.3, 2.0, 1.1, 0.0];
    let sem = [0.9, -0.2, 0.1, 0.5];
    let mut c = cfg();
    c.min_fused_score = 0.0;
    c.alpha = 1.0;
    assert_eq!(fuse_and_select(&lex, &sem, &c).selected, [1, 2, 0, 3]);
    c.alpha = 0.0;
    assert_eq!(fuse_and_select(&lex, &sem, &c).selected, [0, 3, 2, 1]);
}

#[test]
fn fusion_worked_example() {
    let set = fuse_and_select(&[2.0, 0.0, 1.0], &[0.1, 0.9, 0.5], &cfg());
    // lex_norm = [1, 0, 0.5], sem_norm = [0, 1, 0.5] → every page fuses to 0.5.
    let fused: Vec<_> = set.scores.iter().map(|s| s.fused).collect();
    for f in &fused {
        assert!((f - 0.5).abs() < 1e-12, "{fused:?}");
    }
    assert_eq!(set.selected, [0, 1, 2]);
    assert!(set.scores.iter().all(|s| s.selected));
}

#[test]
fn selection_falls_back_to_argmax() {
    let mut c = cfg();
    c.min_fused_score = 2.0;
    let set = fuse_and_select(&[0.0, 3.0, 1.0], &[0.0, 0.0, 0.0], &c);
    assert_eq!(set.selected, [1]);
}

#[test]
fn bypass_selects_every_page_in_order() {
    let set = select_all(5);
    assert_eq!(set.selected, [0, 1, 2, 3, 4]);
    assert!(set.scores.iter().all(|s| s.selected));
}

#[test]
fn retriever_finds_the_planted_page() {
    let mut pages: Vec<PageText> = (0..12)
        .map(|i| page(i, &["Notes to the accounts", "Property plant equipment"]))
        .collect();
    pages[7] = page(7, &["Statement of cash flows", "Dividend paid (2023): 1,200,000"]);
    let c = cfg();
    let emb = Embedder::from_config(&c).unwrap();
    let r = DocumentRetriever::new(&pages, Language::English, &emb, &c).unwrap();
    let spec = field_by_name(DocType::FinancialStatement, "Dividend").unwrap();
    let set = r.rank(&spec).unwrap();
    assert_eq!(set.selected[0], 7);
    assert!(set.selected.len() <= c.top_k);
}

#[test]
fn http_embedding_transport() {
    let url = common::serve(Router::new().route(
        "/embed",
        post(|Json(body): Json<HashMap<String, Vec<String>>>| async move {
            let vectors: Vec<Vec<f64>> = body["texts"]
                .iter()
                .map(|t| vec![t.len() as f64, 1.0, 0.0, 0.0])
                .collect();
            Json(serde_json::json!({ "vectors": vectors }))
        }),
    ));
    let mut c = cfg();
    c.embed_transport = EmbedTransport::Http;
    c.embed_dim = 4;
    c.embed_endpoint = Some(format!("{url}/embed"));
    let emb = Embedder::from_config(&c).unwrap();
    let v = emb.embed_batch(&["abc", ""]).unwrap();
    assert_eq!(v.len(), 2);
    assert!((v[0].iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(v[1], [0.0, 1.0, 0.0, 0.0]);

    c.embed_dim = 8;
    let wrong_dim = Embedder::from_config(&c).unwrap();
    assert!(matches!(
        wrong_dim.embed("x"),
        Err(RetrievalError::EmbedServiceUnavailable(_))
    ));
    c.embed_endpoint = Some("http://127.0.0.1:9/embed".into());
    let down = Embedder::from_config(&c).unwrap();
    assert!(matches!(
        down.embed("x"),
        Err(RetrievalError::EmbedServiceUnavailable(_))
    ));
}

proptest! {
    #[test]
    fn bm25_matches_oracle(
        pages in prop::collection::vec(prop::collection::vec(0usize..20, 0..15), 1..=5),
        q in prop::collection::btree_set(0usize..20, 1..6),
        k1 in 0.5f64..2.0,
        b in 0.0f64..=1.0,
    ) {
        let words: Vec<String> = (0..20).map(|i| format!("w{i}")).collect();
        let texts: Vec<String> = pages.iter().map(|p| p.iter().map(|&i| words[i].as_str()).collect::<Vec<_>>().join(" ")).collect();
        let idx = build_index_from_texts(texts.iter().map(String::as_str));
        let terms: Vec<&str> = q.iter().map(|&i| words[i].as_str()).collect();
        let mut c = cfg();
        c.k1 = k1;
        c.b = b;
        let got = bm25_scores(&idx, &query(&terms), &c);
        let split: Vec<Vec<&str>> = texts.iter().map(|t| t.split_whitespace().collect()).collect();
        let want = bm25_oracle(&split, &terms, k1, b);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-9);
            prop_assert!(*g >= 0.0);
        }
    }

    #[test]
    fn fusion_invariants(
        lex in prop::collection::vec(0.0f64..50.0, 1..20),
        seed in any::<u64>(),
        alpha in 0.0f64..=1.0,
        top_k in 1usize..10,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sem: Vec<f64> = lex.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
        let mut c = cfg();
        c.alpha = alpha;
        c.top_k = top_k;
        let set = fuse_and_select(&lex, &sem, &c);
        prop_assert!(!set.selected.is_empty() && set.selected.len() <= top_k);
        prop_assert!(set.scores.iter().all(|s| (0.0..=1.0).contains(&s.fused)));
        for pair in set.selected.windows(2) {
            let (a, b) = (&set.scores[pair[0]], &set.scores[pair[1]]);
            prop_assert!(a.fused > b.fused || (a.fused == b.fused && pair[0] < pair[1]));
        }
        prop_assert_eq!(&set, &fuse_and_select(&lex, &sem, &c));

        // Raising one page's lexical score never lowers its fused score.
        let i = (seed as usize) % lex.len();
        let mut raised = lex.clone();
        raised[i] += 1.0;
        let after = fuse_and_select(&raised, &sem, &c);
        prop_assert!(after.scores[i].fused >= set.scores[i].fused - 1e-12);
    }

    #[test]
    fn min_max_is_bounded(v in prop::collection::vec(-1e6f64..1e6, 1..30)) {
        prop_assert!(min_max(&v).iter().all(|x| (0.0..=1.0).contains(x)));
    }
}
