//! Reading-order assembly from token bounding boxes.

use std::cmp::Ordering;

use super::OcrToken;

/// Vertical overlap, as a fraction of the smaller height, that puts two boxes
/// on the same line.
pub const LINE_OVERLAP: f64 = 0.5;

fn cmp_f(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Total order used before clustering so the result does not depend on input
/// order.
fn canonical(a: &OcrToken, b: &OcrToken) -> Ordering {
    cmp_f(a.bbox[1], b.bbox[1])
        .then(cmp_f(a.bbox[0], b.bbox[0]))
        .then(cmp_f(a.bbox[3], b.bbox[3]))
        .then(cmp_f(a.bbox[2], b.bbox[2]))
        .then_with(|| a.text.cmp(&b.text))
        .then(cmp_f(a.confidence, b.confidence))
}

fn overlaps(line_top: f64, line_bottom: f64, t: &OcrToken) -> bool {
    let inter = line_bottom.min(t.bbox[3]) - line_top.max(t.bbox[1]);
    let smaller = (line_bottom - line_top).min(t.bbox[3] - t.bbox[1]);
    smaller > 0.0 && inter >= LINE_OVERLAP * smaller
}

/// Groups tokens into lines and orders them: lines by top edge, tokens within
/// a line by left edge.
///
/// Tokens are visited top to bottom; a token joins the first open line whose
/// vertical extent overlaps it by at least half of the smaller height.
pub fn assign_reading_order(tokens: &[OcrToken]) -> Vec<Vec<OcrToken>> {
    let mut sorted = tokens.to_vec();
    sorted.sort_by(canonical);

    // (top, bottom, members)
    let mut lines: Vec<(f64, f64, Vec<OcrToken>)> = Vec::new();
    for t in sorted {
        match lines.iter_mut().find(|(top, bottom, _)| overlaps(*top, *bottom, &t)) {
            Some((top, bottom, members)) => {
                *top = top.min(t.bbox[1]);
                *bottom = bottom.max(t.bbox[3]);
                members.push(t);
            }
            None => lines.push((t.bbox[1], t.bbox[3], vec![t])),
        }
    }
    lines.sort_by(|a, b| cmp_f(a.0, b.0));
    lines
        .into_iter()
        .map(|(_, _, mut members)| {
            members.sort_by(|a, b| cmp_f(a.bbox[0], b.bbox[0]).then_with(|| canonical(a, b)));
            members
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(text: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> OcrToken {
        OcrToken {
            text: text.into(),
            bbox: [x0, y0, x1, y1],
            confidence: 0.9,
        }
    }

    #[test]
    fn empty_input() {
        assert!(assign_reading_order(&[]).is_empty());
    }

    #[test]
    fn side_by_side_left_first() {
        let lines = assign_reading_order(&[tok("b", 50.0, 0.0, 90.0, 10.0), tok("a", 0.0, 1.0, 40.0, 11.0)]);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0][0].text, "a");
    }

    #[test]
    fn small_overlap_splits_lines() {
        // 3 px of a 10 px box overlap: below half, so two lines.
        let lines = assign_reading_order(&[tok("x", 0.0, 0.0, 10.0, 10.0), tok("y", 20.0, 7.0, 30.0, 17.0)]);
        assert_eq!(lines.len(), 2);
    }
}
