//! On-disk forms of factors, mastery matrices and fit bundles.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::LabeledMatrix;
use crate::error::{Error, Result};
use crate::mcf::config::McfConfig;
use crate::mcf::mastery::{MasteryMatrix, Normalization};
use crate::mcf::solver::{FactorSet, FitResult};

pub const MASTERY_FORMAT_VERSION: u64 = 1;
pub const FIT_FORMAT_VERSION: u64 = 1;

pub fn skill_ids(t: usize) -> Vec<String> {
    (0..t).map(|s| format!("skill_{s:02}")).collect()
}

pub(crate) fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.outer_iter().map(|r| r.to_vec()).collect()
}

pub(crate) fn from_rows(rows: &[Vec<f64>], ctx: &str) -> Result<Array2<f64>> {
    let n = rows.len();
    let k = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != k) {
        return Err(Error::parse(ctx, "ragged matrix rows"));
    }
    Array2::from_shape_vec((n, k), rows.concat()).map_err(|e| Error::parse(ctx, e))
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub(crate) fn check_version(found: u64, supported: u64, ctx: &str) -> Result<()> {
    if found != supported {
        return Err(Error::FormatVersion {
            context: ctx.to_string(),
            found,
            supported,
        });
    }
    Ok(())
}

/// Writes `E.csv`, `U.csv` and `V.csv` into `dir`.
pub fn save_factors(
    factors: &FactorSet,
    item_ids: &[String],
    model_ids: &[String],
    concept_ids: &[String],
    dir: &Path,
) -> Result<()> {
    let skills = skill_ids(factors.skills());
    LabeledMatrix::new(item_ids.to_vec(), skills.clone(), factors.e.clone())?.write_csv(&dir.join("E.csv"), "item_id")?;
    LabeledMatrix::new(skills.clone(), model_ids.to_vec(), factors.u.clone())?.write_csv(&dir.join("U.csv"), "skill")?;
    LabeledMatrix::new(skills, concept_ids.to_vec(), factors.v.clone())?.write_csv(&dir.join("V.csv"), "skill")
}

pub fn load_factors(dir: &Path) -> Result<FactorSet> {
    let e = LabeledMatrix::read_csv(&dir.join("E.csv"))?.values;
    let u = LabeledMatrix::read_csv(&dir.join("U.csv"))?.values;
    let v = LabeledMatrix::read_csv(&dir.join("V.csv"))?.values;
    if u.nrows() != e.ncols() || v.nrows() != e.ncols() {
        return Err(Error::Dimension(format!(
            "factor files in {} disagree on skill count: E {:?}, U {:?}, V {:?}",
            dir.display(),
            e.dim(),
            u.dim(),
            v.dim()
        )));
    }
    Ok(FactorSet { e, u, v })
}

#[derive(Serialize, Deserialize)]
struct MasteryFile {
    format_version: u64,
    normalization: String,
    model_ids: Vec<String>,
    concept_ids: Vec<String>,
    f_raw: Vec<Vec<f64>>,
    f_prob: Vec<Vec<f64>>,
}

pub fn save_mastery_json(m: &MasteryMatrix, path: &Path) -> Result<()> {
    write_json(
        &MasteryFile {
            format_version: MASTERY_FORMAT_VERSION,
            normalization: m.normalization.to_string(),
            model_ids: m.model_ids.clone(),
            concept_ids: m.concept_ids.clone(),
            f_raw: rows(&m.raw),
            f_prob: rows(&m.prob),
        },
        path,
    )
}

pub fn load_mastery_json(path: &Path) -> Result<MasteryMatrix> {
    let ctx = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: MasteryFile = serde_json::from_str(&text).map_err(|e| Error::parse(&ctx, e))?;
    check_version(file.format_version, MASTERY_FORMAT_VERSION, &ctx)?;
    let normalization: Normalization = file.normalization.parse()?;
    let raw = from_rows(&file.f_raw, &ctx)?;
    let prob = from_rows(&file.f_prob, &ctx)?;
    if raw.dim() != prob.dim() || raw.dim() != (file.model_ids.len(), file.concept_ids.len()) {
        return Err(Error::Dimension(format!(
            "{ctx}: f_raw {:?}, f_prob {:?}, {} models, {} concepts",
            raw.dim(),
            prob.dim(),
            file.model_ids.len(),
            file.concept_ids.len()
        )));
    }
    if prob.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Validation(format!("{ctx}: f_prob entries must lie in [0, 1]")));
    }
    Ok(MasteryMatrix {
        model_ids: file.model_ids,
        concept_ids: file.concept_ids,
        raw,
        prob,
        normalization,
        warnings: Vec::new(),
    })
}

/// Writes `mastery_raw.csv` and `mastery_prob.csv` (models × concepts).
pub fn save_mastery_csv(m: &MasteryMatrix, dir: &Path) -> Result<()> {
    LabeledMatrix::new(m.model_ids.clone(), m.concept_ids.clone(), m.raw.clone())?
        .write_csv(&dir.join("mastery_raw.csv"), "model_id")?;
    LabeledMatrix::new(m.model_ids.clone(), m.concept_ids.clone(), m.prob.clone())?
        .write_csv(&dir.join("mastery_prob.csv"), "model_id")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClippingDiagnostics {
    pub clipped_cells: usize,
    pub total_cells: usize,
}

/// Everything about a fit except the factor matrices themselves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitBundle {
    pub format_version: u64,
    pub config: McfConfig,
    pub seed: u64,
    pub starts: usize,
    pub iterations_run: usize,
    pub converged: bool,
    pub final_objective: f64,
    pub objective_trace: Vec<f64>,
    pub clipping: ClippingDiagnostics,
    pub normalization: Normalization,
}

impl FitBundle {
    pub fn new(config: &McfConfig, starts: usize, fit: &FitResult, clipping: ClippingDiagnostics, normalization: Normalization) -> Self {
        Self {
            format_version: FIT_FORMAT_VERSION,
            config: config.clone(),
            seed: fit.seed,
            starts,
            iterations_run: fit.iterations_run,
            converged: fit.converged,
            final_objective: fit.final_objective(),
            objective_trace: fit.objective_trace.clone(),
            clipping,
            normalization,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(self, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ctx = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let b: FitBundle = serde_json::from_str(&text).map_err(|e| Error::parse(&ctx, e))?;
        check_version(b.format_version, FIT_FORMAT_VERSION, &ctx)?;
        Ok(b)
    }
}

pub fn save_trace_csv(trace: &[f64], path: &Path) -> Result<()> {
    let mut out = String::from("iteration,objective\n");
    for (i, v) in trace.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn mastery_json_rejects_unknown_tag_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let m = MasteryMatrix::from_raw(array![[0.2, 0.95]], Normalization::Clip);
        let p = dir.path().join("m.json");
        save_mastery_json(&m, &p).unwrap();
        let back = load_mastery_json(&p).unwrap();
        assert_eq!(back.raw, m.raw);
        assert_eq!(back.prob, m.prob);

        let text = fs::read_to_string(&p).unwrap();
        fs::write(&p, text.replace("\"clip\"", "\"softmax\"")).unwrap();
        assert!(load_mastery_json(&p).unwrap_err().to_string().contains("softmax"));

        fs::write(&p, fs::read_to_string(&p).unwrap().replace("\"format_version\": 1", "\"format_version\": 9")).unwrap();
        assert!(matches!(load_mastery_json(&p), Err(Error::FormatVersion { found: 9, .. })));
    }

    #[test]
    fn factor_csvs_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = FactorSet {
            e: array![[0.1, 0.2], [0.3, 1.0 / 7.0]],
            u: array![[1.5], [0.25]],
            v: array![[0.0, 2.0, 3.0], [1.0, 1e-300, 0.5]],
        };
        let ids = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        save_factors(&f, &ids("q", 2), &ids("m", 1), &ids("c", 3), dir.path()).unwrap();
        assert_eq!(load_factors(dir.path()).unwrap(), f);
    }
}
