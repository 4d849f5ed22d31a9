//! Response logs and their aggregation into the item × model response matrix.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::bank::ItemBank;
use crate::data::grading::Grader;
use crate::data::matrix_io::LabeledMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_REPEATS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub item_id: String,
    pub attempt_index: usize,
    pub raw_output: String,
}

/// All attempts of one model. Sampling settings used during collection
/// (temperature, token cap) are carried in `metadata` and never interpreted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResponseLog {
    pub model_id: String,
    pub entries: Vec<Attempt>,
    pub metadata: BTreeMap<String, String>,
}

impl ResponseLog {
    pub fn new(model_id: impl Into<String>) -> Self {
        Self {
            model_id: model_id.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, item_id: impl Into<String>, attempt_index: usize, raw_output: impl Into<String>) {
        self.entries.push(Attempt {
            item_id: item_id.into(),
            attempt_index,
            raw_output: raw_output.into(),
        });
    }

    pub fn validate(&self, repeats: usize) -> Result<()> {
        let mut seen = BTreeSet::new();
        for a in &self.entries {
            if a.attempt_index >= repeats {
                return Err(Error::Validation(format!(
                    "model {:?}, item {:?}: attempt {} is out of range for {repeats} repeats",
                    self.model_id, a.item_id, a.attempt_index
                )));
            }
            if !seen.insert((a.item_id.as_str(), a.attempt_index)) {
                return Err(Error::Validation(format!(
                    "model {:?}: duplicate attempt {} for item {:?}",
                    self.model_id, a.attempt_index, a.item_id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct AttemptLine {
    model: String,
    item: String,
    attempt: usize,
    output: String,
}

/// Reads one JSONL file of attempts. A file may hold several models; the
/// logs come back in order of first appearance.
pub fn read_logs_jsonl(path: &Path) -> Result<Vec<ResponseLog>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_logs_jsonl(&text, &path.display().to_string())
}

pub fn parse_logs_jsonl(text: &str, ctx: &str) -> Result<Vec<ResponseLog>> {
    let mut logs: Vec<ResponseLog> = Vec::new();
    let mut by_model: HashMap<String, usize> = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: AttemptLine =
            serde_json::from_str(line).map_err(|e| Error::parse(format!("{ctx}:{}", n + 1), e))?;
        let idx = *by_model.entry(rec.model.clone()).or_insert_with(|| {
            logs.push(ResponseLog::new(rec.model.clone()));
            logs.len() - 1
        });
        logs[idx].push(rec.item, rec.attempt, rec.output);
    }
    Ok(logs)
}

pub fn write_logs_jsonl(logs: &[ResponseLog], path: &Path) -> Result<()> {
    let mut out = String::new();
    for log in logs {
        for a in &log.entries {
            let line = AttemptLine {
                model: log.model_id.clone(),
                item: a.item_id.clone(),
                attempt: a.attempt_index,
                output: a.raw_output.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("attempt serializes"));
            out.push('\n');
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Item × model scores `x` with observation weights `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    pub x: Array2<f64>,
    pub w: Array2<f64>,
    pub item_ids: Vec<String>,
    pub model_ids: Vec<String>,
}

impl ResponseMatrix {
    pub fn new(x: Array2<f64>, w: Array2<f64>, item_ids: Vec<String>, model_ids: Vec<String>) -> Result<Self> {
        let dim = (item_ids.len(), model_ids.len());
        if x.dim() != dim || w.dim() != dim {
            return Err(Error::Dimension(format!(
                "X is {:?} and W is {:?} but ids give {dim:?}",
                x.dim(),
                w.dim()
            )));
        }
        for ((i, j), &v) in x.indexed_iter() {
            let wv = w[[i, j]];
            if !(0.0..=1.0).contains(&v) || !(0.0..=1.0).contains(&wv) {
                return Err(Error::Validation(format!(
                    "cell ({}, {}) has X={v}, W={wv}; both must lie in [0, 1]",
                    item_ids[i], model_ids[j]
                )));
            }
        }
        Ok(Self {
            x,
            w,
            item_ids,
            model_ids,
        })
    }

    /// Fully observed matrix (W all ones).
    pub fn complete(x: Array2<f64>, item_ids: Vec<String>, model_ids: Vec<String>) -> Result<Self> {
        let w = Array2::ones(x.dim());
        Self::new(x, w, item_ids, model_ids)
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn n_models(&self) -> usize {
        self.model_ids.len()
    }

    pub fn scores(&self) -> LabeledMatrix {
        LabeledMatrix {
            row_ids: self.item_ids.clone(),
            col_ids: self.model_ids.clone(),
            values: self.x.clone(),
        }
    }

    pub fn weights(&self) -> LabeledMatrix {
        LabeledMatrix {
            row_ids: self.item_ids.clone(),
            col_ids: self.model_ids.clone(),
            values: self.w.clone(),
        }
    }

    pub fn save_csv(&self, x_path: &Path, w_path: &Path) -> Result<()> {
        self.scores().write_csv(x_path, "item_id")?;
        self.weights().write_csv(w_path, "item_id")
    }

    /// Loads X and, when given, W. Without a weights file W is all ones.
    pub fn load_csv(x_path: &Path, w_path: Option<&Path>) -> Result<Self> {
        let x = LabeledMatrix::read_csv(x_path)?;
        let w = match w_path {
            Some(p) => {
                let w = LabeledMatrix::read_csv(p)?;
                if w.row_ids != x.row_ids || w.col_ids != x.col_ids {
                    return Err(Error::Dimension(format!(
                        "{} is {:?} with ids that differ from {} ({:?})",
                        p.display(),
                        w.values.dim(),
                        x_path.display(),
                        x.values.dim()
                    )));
                }
                w.values
            }
            None => Array2::ones(x.values.dim()),
        };
        Self::new(x.values, w, x.row_ids, x.col_ids)
    }
}

/// Outcome of [`aggregate`]: the matrix plus every grading warning.
#[derive(Debug, Clone)]
pub struct Aggregated {
    pub matrix: ResponseMatrix,
    pub warnings: Vec<String>,
}

/// Grades every attempt and averages per (item, model) cell.
///
/// `X[i][j]` is the fraction of graded attempts that are correct and
/// `W[i][j] = min(graded / repeats, 1)`; cells without attempts get 0 for both.
/// Models appear in the order of `logs`.
pub fn aggregate(
    logs: &[ResponseLog],
    bank: &ItemBank,
    grader: &dyn Grader,
    repeats: usize,
) -> Result<Aggregated> {
    if logs.is_empty() {
        return Err(Error::Validation("no response logs".into()));
    }
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    let index = bank.item_index();
    let unknown: BTreeSet<&str> = logs
        .iter()
        .flat_map(|l| l.entries.iter())
        .map(|a| a.item_id.as_str())
        .filter(|id| !index.contains_key(id))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::Validation(format!(
            "unknown item id(s): {}",
            unknown.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let mut models = BTreeSet::new();
    for log in logs {
        if !models.insert(log.model_id.as_str()) {
            return Err(Error::Validation(format!("model {:?} appears in more than one log", log.model_id)));
        }
        log.validate(repeats)?;
    }

    let (m, n) = (bank.len(), logs.len());
    let mut correct = Array2::<f64>::zeros((m, n));
    let mut graded = Array2::<f64>::zeros((m, n));
    let mut warnings = Vec::new();
    for (j, log) in logs.iter().enumerate() {
        for a in &log.entries {
            let i = index[a.item_id.as_str()];
            let grade = grader.grade(&a.raw_output, &bank.items()[i].answer_key);
            if let Some(w) = grade.warning {
                warnings.push(format!("{}/{}#{}: {w}", log.model_id, a.item_id, a.attempt_index));
            }
            correct[[i, j]] += grade.score as f64;
            graded[[i, j]] += 1.0;
        }
    }
    let x = ndarray::Zip::from(&correct)
        .and(&graded)
        .map_collect(|&c, &g| if g > 0.0 { c / g } else { 0.0 });
    let w = graded.mapv(|g| (g / repeats as f64).min(1.0));
    let matrix = ResponseMatrix::new(
        x,
        w,
        bank.item_ids(),
        logs.iter().map(|l| l.model_id.clone()).collect(),
    )?;
    Ok(Aggregated { matrix, warnings })
}

/// Thresholds scores to {0, 1}; values equal to the threshold become 1.
pub fn binarize(x: &Array2<f64>, threshold: f64) -> Array2<f64> {
    x.mapv(|v| if v >= threshold { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::bank::{Concept, ConceptCatalog, Item};
    use crate::data::grading::ChoiceLetter;

    fn bank() -> ItemBank {
        let catalog = ConceptCatalog::new(vec![Concept {
            id: "F1".into(),
            label: "one".into(),
        }])
        .unwrap();
        ItemBank::new(
            catalog,
            vec![Item::new("q1", "p", "B", ["F1"]), Item::new("q2", "p", "C", ["F1"])],
        )
        .unwrap()
    }

    #[test]
    fn seven_of_ten_correct() {
        let mut log = ResponseLog::new("m");
        for a in 0..10 {
            log.push("q1", a, if a < 7 { "B" } else { "A" });
        }
        let agg = aggregate(&[log], &bank(), &ChoiceLetter, 10).unwrap();
        assert_eq!(agg.matrix.x[[0, 0]], 0.7);
        assert_eq!(agg.matrix.w[[0, 0]], 1.0);
        // q2 never attempted
        assert_eq!(agg.matrix.x[[1, 0]], 0.0);
        assert_eq!(agg.matrix.w[[1, 0]], 0.0);
    }

    #[test]
    fn partial_coverage() {
        let mut log = ResponseLog::new("m");
        for a in [0, 2, 4, 6, 8] {
            log.push("q2", a, "答案：C");
        }
        let agg = aggregate(&[log], &bank(), &ChoiceLetter, 10).unwrap();
        assert_eq!(agg.matrix.x[[1, 0]], 1.0);
        assert_eq!(agg.matrix.w[[1, 0]], 0.5);
    }

    #[test]
    fn errors() {
        assert!(aggregate(&[], &bank(), &ChoiceLetter, 10).is_err());

        let mut log = ResponseLog::new("m");
        log.push("zz", 0, "B");
        log.push("yy", 0, "B");
        let msg = aggregate(&[log], &bank(), &ChoiceLetter, 10).unwrap_err().to_string();
        assert!(msg.contains("yy, zz"), "{msg}");

        let mut log = ResponseLog::new("m");
        log.push("q1", 0, "B");
        log.push("q1", 0, "C");
        assert!(aggregate(&[log], &bank(), &ChoiceLetter, 10).is_err());

        let mut log = ResponseLog::new("m");
        log.push("q1", 10, "B");
        assert!(aggregate(&[log], &bank(), &ChoiceLetter, 10).is_err());
    }

    #[test]
    fn jsonl_groups_by_model() {
        let text = r#"{"model":"a","item":"q1","attempt":0,"output":"B"}
{"model":"b","item":"q1","attempt":0,"output":"C"}

{"model":"a","item":"q1","attempt":1,"output":"B"}
"#;
        let logs = parse_logs_jsonl(text, "t").unwrap();
        assert_eq!(logs.len(), 2);
        assert_eq!(logs[0].entries.len(), 2);
        assert!(parse_logs_jsonl("{\"model\":1}", "bad.jsonl").unwrap_err().to_string().contains("bad.jsonl:1"));
    }

    #[test]
    fn binarize_ties_round_up() {
        let x = ndarray::array![[0.5, 0.49, 0.9]];
        assert_eq!(binarize(&x, 0.5), ndarray::array![[1.0, 0.0, 1.0]]);
    }
}
