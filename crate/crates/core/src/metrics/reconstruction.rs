//! Accuracy, AUC and RMSE of a reconstructed response matrix.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::rank::average_ranks;

pub const DEFAULT_BINARIZE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub accuracy: f64,
    /// Absent when every scored label is identical.
    pub auc: Option<f64>,
    pub rmse: f64,
    pub n_cells: usize,
    pub binarize_threshold: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// AUC via the rank-sum statistic; tied scores share ranks, which credits
/// each tied positive/negative pair with 0.5.
pub fn auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), labels.len());
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// O(n²) AUC over every positive/negative pair.
pub fn auc_pairwise(scores: &[f64], labels: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), labels.len());
    let pos: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| l).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| !l).map(|(s, _)| *s).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut credit = 0.0;
    for &p in &pos {
        for &n in &neg {
            if p > n {
                credit += 1.0;
            } else if p == n {
                credit += 0.5;
            }
        }
    }
    Some(credit / (pos.len() as f64 * neg.len() as f64))
}

/// Scores `x_hat` against `x` on the cells with positive weight.
///
/// Labels are `x ≥ threshold`; predictions are binarized the same way for
/// accuracy. RMSE compares raw values.
pub fn reconstruction_metrics(
    x_hat: ArrayView2<f64>,
    x: ArrayView2<f64>,
    w: ArrayView2<f64>,
    binarize_threshold: f64,
) -> Result<ReconstructionReport> {
    if x_hat.dim() != x.dim() || w.dim() != x.dim() {
        return Err(Error::Dimension(format!(
            "X̂ is {:?}, X is {:?}, W is {:?}",
            x_hat.dim(),
            x.dim(),
            w.dim()
        )));
    }
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    let mut hits = 0usize;
    let mut sq = 0.0;
    for ((&p, &obs), &wt) in x_hat.iter().zip(x.iter()).zip(w.iter()) {
        if wt <= 0.0 {
            continue;
        }
        let label = obs >= binarize_threshold;
        if (p >= binarize_threshold) == label {
            hits += 1;
        }
        sq += (p - obs) * (p - obs);
        scores.push(p);
        labels.push(label);
    }
    let n = scores.len();
    if n == 0 {
        return Err(Error::NothingObserved);
    }
    let mut warnings = Vec::new();
    let auc = auc(&scores, &labels);
    if auc.is_none() {
        let msg = "all scored labels are identical; AUC is undefined".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(ReconstructionReport {
        accuracy: hits as f64 / n as f64,
        auc,
        rmse: (sq / n as f64).sqrt(),
        n_cells: n,
        binarize_threshold,
        warnings,
    })
}
