//! Lexical/semantic score fusion and page selection.

use serde::{Deserialize, Serialize};

use super::RetrievalConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageScore {
    pub page_index: usize,
    pub lex: f64,
    pub sem: f64,
    pub fused: f64,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageScoreSet {
    /// One entry per page, in page order.
    pub scores: Vec<PageScore>,
    /// Selected page indices, fused score descending, ties by index.
    pub selected: Vec<usize>,
}

/// Min-max scaling to [0, 1]; a constant vector maps to all 0.5.
pub fn min_max(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.5; v.len()];
    }
    v.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

/// Fuses `alpha · lex + (1 − alpha) · sem` after per-document min-max
/// scaling, keeps pages scoring at least `min_fused_score` up to `top_k`, and
/// falls back to the single best page when nothing passes.
pub fn fuse_and_select(lex: &[f64], sem: &[f64], cfg: &RetrievalConfig) -> PageScoreSet {
    assert_eq!(lex.len(), sem.len(), "lex and sem must cover the same pages");
    let ln = min_max(lex);
    let sn = min_max(sem);
    let fused: Vec<f64> = ln
        .iter()
        .zip(&sn)
        .map(|(l, s)| (cfg.alpha * l + (1.0 - cfg.alpha) * s).clamp(0.0, 1.0))
        .collect();

    let mut order: Vec<usize> = (0..fused.len()).collect();
    order.sort_by(|&a, &b| fused[b].total_cmp(&fused[a]).then(a.cmp(&b)));
    let mut selected: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| fused[i] >= cfg.min_fused_score)
        .take(cfg.top_k)
        .collect();
    if selected.is_empty() {
        selected.extend(order.first());
    }

    let scores = (0..fused.len())
        .map(|i| PageScore {
            page_index: i,
            lex: lex[i],
            sem: sem[i],
            fused: fused[i],
            selected: selected.contains(&i),
        })
        .collect();
    PageScoreSet { scores, selected }
}

/// Retrieval switched off: every page is selected, in index order.
pub fn select_all(page_count: usize) -> PageScoreSet {
    PageScoreSet {
        scores: (0..page_count)
            .map(|i| PageScore {
                page_index: i,
                lex: 0.0,
                sem: 0.0,
                fused: 0.0,
                selected: true,
            })
            .collect(),
        selected: (0..page_count).collect(),
    }
}
