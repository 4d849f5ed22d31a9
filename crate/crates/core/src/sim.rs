//! Synthetic items, models and concepts drawn from the Gamma/Bernoulli
//! generative process, for planted-truth validation of the solver.
//!
//! Latent vectors `eᵢ`, `uⱼ`, `vₖ` have independent Gamma entries. A
//! response is Bernoulli with probability `σ(eᵢᵀuⱼ)` and a Q-matrix entry is
//! derived from `σ(eᵢᵀvₖ)`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::bank::{save_bank_json, Concept, ConceptCatalog, Item, ItemBank};
use crate::data::{LabeledMatrix, ResponseMatrix};
use crate::error::{Error, Result};
use crate::mcf::io::{check_version, from_rows, rows, write_json};
use crate::mcf::{FactorSet, GammaPrior, MasteryMatrix};
use crate::metrics::spearman;

pub const TRUTH_FORMAT_VERSION: u64 = 1;
const MAX_ROW_RESAMPLES: usize = 1000;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let ez = z.exp();
        ez / (1.0 + ez)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ResponseMode {
    /// One Bernoulli draw per cell.
    Bernoulli,
    /// Mean of `repeats` Bernoulli draws per cell.
    Mean { repeats: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QMode {
    /// `q = 1` iff `σ(eᵢᵀvₖ) ≥ q_threshold`.
    #[default]
    Threshold,
    /// `q ~ Bernoulli(σ(eᵢᵀvₖ))`.
    Sampled,
}

impl fmt::Display for QMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QMode::Threshold => "threshold",
            QMode::Sampled => "sampled",
        })
    }
}

impl FromStr for QMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "threshold" => Ok(QMode::Threshold),
            "sampled" => Ok(QMode::Sampled),
            other => Err(format!("unknown Q mode {other:?} (expected threshold or sampled)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub items: usize,
    pub models: usize,
    pub concepts: usize,
    pub true_skills: usize,
    pub prior_e: GammaPrior,
    pub prior_u: GammaPrior,
    pub prior_v: GammaPrior,
    pub seed: u64,
    pub q_mode: QMode,
    pub q_threshold: f64,
    pub response_mode: ResponseMode,
}

/// 210 items × 30 models × 70 concepts with five planted skills. Model
/// proficiencies sit near a shared scale (`U` concentrated around 1) and the
/// Q threshold tags roughly a quarter of item–concept pairs. Non-negative
/// factors keep every `σ(eᵢᵀvₖ)` at or above 0.5, so thresholds at or below
/// 0.5 tag every pair.
impl Default for SimConfig {
    fn default() -> Self {
        Self {
            items: 210,
            models: 30,
            concepts: 70,
            true_skills: 5,
            prior_e: GammaPrior::new(2.0, 4.0),
            prior_u: GammaPrior::new(20.0, 20.0),
            prior_v: GammaPrior::new(1.0, 1.0),
            seed: 7,
            q_mode: QMode::Threshold,
            q_threshold: 0.965,
            response_mode: ResponseMode::Mean { repeats: 10 },
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("items", self.items),
            ("models", self.models),
            ("concepts", self.concepts),
            ("true_skills", self.true_skills),
        ] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if !(self.q_threshold > 0.0 && self.q_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "q_threshold must lie in (0, 1), got {}",
                self.q_threshold
            )));
        }
        if let ResponseMode::Mean { repeats: 0 } = self.response_mode {
            return Err(Error::InvalidConfig("mean response mode needs repeats >= 1".into()));
        }
        self.prior_e.validate("E")?;
        self.prior_u.validate("U")?;
        self.prior_v.validate("V")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub config: SimConfig,
    pub truth: FactorSet,
    /// Items × models scores in [0, 1].
    pub x: Array2<f64>,
    /// Items × concepts, binary, no empty rows.
    pub q: Array2<f64>,
    /// `σ(EU)`, items × models.
    pub p_response: Array2<f64>,
    /// `σ(UᵀV)`, models × concepts.
    pub p_mastery: Array2<f64>,
}

fn draw_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, prior: &GammaPrior) -> Array2<f64> {
    let dist = prior.distribution();
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(dist))
}

/// Draws one synthetic data set. Deterministic in `config` (seed included).
pub fn simulate(config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let (m, n, k, t) = (config.items, config.models, config.concepts, config.true_skills);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let u = draw_matrix(&mut rng, t, n, &config.prior_u);
    let v = draw_matrix(&mut rng, t, k, &config.prior_v);

    let e_dist = config.prior_e.distribution();
    let mut e = Array2::zeros((m, t));
    let mut q = Array2::zeros((m, k));
    for i in 0..m {
        let mut accepted = false;
        for _ in 0..MAX_ROW_RESAMPLES {
            let row: Vec<f64> = (0..t).map(|_| rng.sample(e_dist)).collect();
            let q_row: Vec<f64> = (0..k)
                .map(|c| {
                    let z: f64 = row.iter().enumerate().map(|(s, es)| es * v[[s, c]]).sum();
                    let p = sigmoid(z);
                    let hit = match config.q_mode {
                        QMode::Threshold => p >= config.q_threshold,
                        QMode::Sampled => rng.random::<f64>() < p,
                    };
                    hit as u8 as f64
                })
                .collect();
            if q_row.iter().any(|&x| x > 0.0) {
                e.row_mut(i).assign(&ndarray::Array1::from(row));
                q.row_mut(i).assign(&ndarray::Array1::from(q_row));
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::Simulation(format!(
                "item {i} tagged no concept after {MAX_ROW_RESAMPLES} draws; lower q_threshold (now {})",
                config.q_threshold
            )));
        }
    }

    let p_response = e.dot(&u).mapv(sigmoid);
    let x = match config.response_mode {
        ResponseMode::Bernoulli => p_response.mapv(|p| (rng.random::<f64>() < p) as u8 as f64),
        ResponseMode::Mean { repeats } => p_response.mapv(|p| {
            let hits = (0..repeats).filter(|_| rng.random::<f64>() < p).count();
            hits as f64 / repeats as f64
        }),
    };
    let p_mastery = u.t().dot(&v).mapv(sigmoid);
    Ok(SimOutput {
        config: config.clone(),
        truth: FactorSet { e, u, v },
        x,
        q,
        p_response,
        p_mastery,
    })
}

pub fn item_ids(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("item_{i:04}")).collect()
}

pub fn model_ids(n: usize) -> Vec<String> {
    (0..n).map(|j| format!("model_{j:03}")).collect()
}

pub fn concept_ids(k: usize) -> Vec<String> {
    (0..k).map(|c| format!("concept_{c:03}")).collect()
}

impl SimOutput {
    pub fn response_matrix(&self) -> ResponseMatrix {
        ResponseMatrix::complete(self.x.clone(), item_ids(self.x.nrows()), model_ids(self.x.ncols()))
            .expect("simulated scores lie in [0, 1]")
    }

    pub fn qmatrix_labeled(&self) -> LabeledMatrix {
        LabeledMatrix {
            row_ids: item_ids(self.q.nrows()),
            col_ids: concept_ids(self.q.ncols()),
            values: self.q.clone(),
        }
    }

    /// Item bank with synthetic ids whose tags reproduce `q`.
    pub fn bank_stub(&self) -> ItemBank {
        let concepts = concept_ids(self.q.ncols());
        let catalog = ConceptCatalog::new(
            concepts
                .iter()
                .map(|c| Concept {
                    id: c.clone(),
                    label: format!("synthetic {c}"),
                })
                .collect(),
        )
        .expect("synthetic catalog is valid");
        let items = item_ids(self.q.nrows())
            .into_iter()
            .enumerate()
            .map(|(i, id)| {
                let tags = (0..self.q.ncols()).filter(|&c| self.q[[i, c]] > 0.0).map(|c| concepts[c].clone());
                Item::new(id, format!("synthetic item {i}"), "A", tags)
            })
            .collect();
        ItemBank::new(catalog, items).expect("simulated Q has no empty rows")
    }

    /// Writes `items.json`, `X.csv`, `W.csv`, `Q.csv` and `truth.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        save_bank_json(&self.bank_stub(), &dir.join("items.json"))?;
        self.response_matrix().save_csv(&dir.join("X.csv"), &dir.join("W.csv"))?;
        self.qmatrix_labeled().write_csv(&dir.join("Q.csv"), "item_id")?;
        write_json(
            &TruthFile {
                format_version: TRUTH_FORMAT_VERSION,
                config: self.config.clone(),
                e: rows(&self.truth.e),
                u: rows(&self.truth.u),
                v: rows(&self.truth.v),
                p_response: rows(&self.p_response),
                p_mastery: rows(&self.p_mastery),
            },
            &dir.join("truth.json"),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct TruthFile {
    format_version: u64,
    config: SimConfig,
    e: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    p_response: Vec<Vec<f64>>,
    p_mastery: Vec<Vec<f64>>,
}

/// Planted truth as read back from `truth.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub config: SimConfig,
    pub factors: FactorSet,
    pub p_response: Array2<f64>,
    pub p_mastery: Array2<f64>,
}

pub fn load_truth(path: &Path) -> Result<Truth> {
    let ctx = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let f: TruthFile = serde_json::from_str(&text).map_err(|e| Error::parse(&ctx, e))?;
    check_version(f.format_version, TRUTH_FORMAT_VERSION, &ctx)?;
    Ok(Truth {
        config: f.config,
        factors: FactorSet {
            e: from_rows(&f.e, &ctx)?,
            u: from_rows(&f.u, &ctx)?,
            v: from_rows(&f.v, &ctx)?,
        },
        p_response: from_rows(&f.p_response, &ctx)?,
        p_mastery: from_rows(&f.p_mastery, &ctx)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryScore {
    /// Spearman correlation per model; `None` where a row is constant.
    pub per_model: Vec<Option<f64>>,
    /// Mean over the defined per-model correlations.
    pub overall: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Rank agreement between fitted mastery probabilities and the planted
/// `σ(uⱼᵀvₖ)`, row by row.
pub fn recovery_score(fitted: &MasteryMatrix, p_mastery: &Array2<f64>) -> Result<RecoveryScore> {
    if fitted.prob.dim() != p_mastery.dim() {
        return Err(Error::Dimension(format!(
            "fitted mastery is {:?} but planted mastery is {:?}",
            fitted.prob.dim(),
            p_mastery.dim()
        )));
    }
    let mut warnings = Vec::new();
    let per_model: Vec<Option<f64>> = fitted
        .prob
        .outer_iter()
        .zip(p_mastery.outer_iter())
        .enumerate()
        .map(|(j, (a, b))| {
            let r = spearman(&a.to_vec(), &b.to_vec());
            if r.is_none() {
                let msg = format!("model row {j} is constant; its rank correlation is undefined");
                log::warn!("{msg}");
                warnings.push(msg);
            }
            r
        })
        .collect();
    let defined: Vec<f64> = per_model.iter().flatten().copied().collect();
    let overall = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(RecoveryScore {
        per_model,
        overall,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcf::Normalization;

    fn small() -> SimConfig {
        SimConfig {
            items: 40,
            models: 6,
            concepts: 8,
            true_skills: 3,
            ..SimConfig::default()
        }
    }

    #[test]
    fn sigmoid_at_zero_is_half() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = simulate(&small()).unwrap();
        let b = simulate(&small()).unwrap();
        assert_eq!(a, b);
        let c = simulate(&SimConfig { seed: 8, ..small() }).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn mean_mode_lands_on_the_tenths_grid() {
        let out = simulate(&small()).unwrap();
        for &x in &out.x {
            let scaled = x * 10.0;
            assert!((scaled - scaled.round()).abs() < 1e-9, "{x}");
        }
    }

    #[test]
    fn q_is_binary_without_empty_rows() {
        for mode in [QMode::Threshold, QMode::Sampled] {
            let out = simulate(&SimConfig { q_mode: mode, ..small() }).unwrap();
            assert!(out.q.iter().all(|&v| v == 0.0 || v == 1.0));
            assert!(out.q.outer_iter().all(|r| r.sum() >= 1.0));
            assert!(out.p_mastery.iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }

    #[test]
    fn impossible_threshold_errors() {
        let cfg = SimConfig {
            q_threshold: 1.0 - 1e-15,
            prior_e: GammaPrior::new(1.0, 1000.0),
            ..small()
        };
        assert!(matches!(simulate(&cfg), Err(Error::Simulation(_))));
        assert!(simulate(&SimConfig { items: 0, ..small() }).is_err());
    }

    #[test]
    fn recovery_of_truth_is_perfect_and_reversal_is_minus_one() {
        let out = simulate(&small()).unwrap();
        let truth = MasteryMatrix::from_raw(out.p_mastery.clone(), Normalization::Clip);
        assert!((recovery_score(&truth, &out.p_mastery).unwrap().overall.unwrap() - 1.0).abs() < 1e-12);

        let target = ndarray::array![[0.1, 0.2, 0.3, 0.4]];
        let rev = MasteryMatrix::from_raw(ndarray::array![[0.4, 0.3, 0.2, 0.1]], Normalization::Clip);
        let score = recovery_score(&rev, &target).unwrap();
        assert!((score.per_model[0].unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_rows_are_excluded() {
        let fitted = MasteryMatrix::from_raw(ndarray::array![[0.5, 0.5], [0.1, 0.2]], Normalization::Clip);
        let truth = ndarray::array![[0.1, 0.2], [0.3, 0.4]];
        let s = recovery_score(&fitted, &truth).unwrap();
        assert_eq!(s.per_model[0], None);
        assert!((s.overall.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(s.warnings.len(), 1);
    }
}
