//! Per-model count of concepts mastered above a probability threshold.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data::ResponseMatrix;
use crate::mcf::MasteryMatrix;

pub const DEFAULT_MASTERY_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptCountRow {
    pub model_id: String,
    pub mastered_count: usize,
    pub total: usize,
    /// Mean mastery probability over concepts.
    pub mean_score: f64,
    /// Mean fractional response score over observed items, when responses
    /// were attached.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_score: Option<f64>,
    /// Mean binarized (≥ 0.5) response over observed items.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptCountReport {
    pub threshold: f64,
    pub rows: Vec<ConceptCountRow>,
}

/// Counts, per model, concepts whose mastery probability is strictly above
/// `threshold`. Rows are sorted by count (descending), then mean score
/// (descending), then model id.
pub fn concept_counts(mastery: &MasteryMatrix, threshold: f64) -> ConceptCountReport {
    let k = mastery.n_concepts();
    let mut rows: Vec<ConceptCountRow> = mastery
        .prob
        .outer_iter()
        .zip(&mastery.model_ids)
        .map(|(row, id)| ConceptCountRow {
            model_id: id.clone(),
            mastered_count: row.iter().filter(|&&p| p > threshold).count(),
            total: k,
            mean_score: if k > 0 { row.sum() / k as f64 } else { 0.0 },
            response_score: None,
            response_accuracy: None,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.mastered_count
            .cmp(&a.mastered_count)
            .then_with(|| b.mean_score.partial_cmp(&a.mean_score).unwrap_or(Ordering::Equal))
            .then_with(|| a.model_id.cmp(&b.model_id))
    });
    ConceptCountReport { threshold, rows }
}

impl ConceptCountReport {
    /// Attaches observed response statistics for models present in `responses`.
    pub fn with_responses(mut self, responses: &ResponseMatrix) -> Self {
        for row in &mut self.rows {
            let Some(j) = responses.model_ids.iter().position(|m| m == &row.model_id) else {
                continue;
            };
            let (mut n, mut sum, mut correct) = (0usize, 0.0, 0usize);
            for i in 0..responses.n_items() {
                if responses.w[[i, j]] > 0.0 {
                    n += 1;
                    sum += responses.x[[i, j]];
                    correct += (responses.x[[i, j]] >= 0.5) as usize;
                }
            }
            if n > 0 {
                row.response_score = Some(sum / n as f64);
                row.response_accuracy = Some(correct as f64 / n as f64);
            }
        }
        self
    }

    /// Plain-text table with columns `Con`, `Model` and a score column.
    /// The score column shows the mean response score when available and
    /// the mean mastery probability otherwise; the header says which.
    pub fn render_table(&self) -> String {
        let has_resp = self.rows.iter().any(|r| r.response_score.is_some());
        let score_header = if has_resp { "Acc(mean X)" } else { "Mean F" };
        let cells: Vec<[String; 3]> = self
            .rows
            .iter()
            .map(|r| {
                let score = if has_resp { r.response_score.unwrap_or(f64::NAN) } else { r.mean_score };
                [format!("{}/{}", r.mastered_count, r.total), r.model_id.clone(), format!("{score:.2}")]
            })
            .collect();
        let header = ["Con".to_string(), "Model".to_string(), score_header.to_string()];
        let mut widths = header.clone().map(|h| h.chars().count());
        for c in &cells {
            for (w, s) in widths.iter_mut().zip(c) {
                *w = (*w).max(s.chars().count());
            }
        }
        let line = |c: &[String; 3]| {
            format!(
                "{:<w0$}  {:<w1$}  {:>w2$}\n",
                c[0],
                c[1],
                c[2],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2]
            )
        };
        let mut out = format!("# mastery probability > {}\n", self.threshold);
        out.push_str(&line(&header));
        for c in &cells {
            out.push_str(&line(c));
        }
        out
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("model_id,mastered_count,total,mean_score,response_score,response_accuracy\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.model_id,
                r.mastered_count,
                r.total,
                r.mean_score,
                opt(r.response_score),
                opt(r.response_accuracy)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcf::Normalization;
    use ndarray::Array2;

    fn mm(prob: Array2<f64>) -> MasteryMatrix {
        MasteryMatrix::from_raw(prob, Normalization::Clip)
    }

    #[test]
    fn saturation_and_boundary() {
        let r = concept_counts(&mm(Array2::ones((1, 70))), 0.9);
        assert_eq!((r.rows[0].mastered_count, r.rows[0].total), (70, 70));
        let r = concept_counts(&mm(Array2::from_elem((1, 70), 0.9)), 0.9);
        assert_eq!(r.rows[0].mastered_count, 0);
    }

    #[test]
    fn sorted_descending_with_ties_by_mean_then_id() {
        let prob = ndarray::array![[0.95, 0.1], [0.95, 0.95], [0.91, 0.5], [0.91, 0.5]];
        let m = mm(prob).with_ids(vec!["d".into(), "a".into(), "c".into(), "b".into()], vec!["k1".into(), "k2".into()]).unwrap();
        let r = concept_counts(&m, 0.9);
        let order: Vec<&str> = r.rows.iter().map(|r| r.model_id.as_str()).collect();
        assert_eq!(order, ["a", "b", "c", "d"]);
        let table = r.render_table();
        assert!(table.contains("2/2  a"));
    }
}
