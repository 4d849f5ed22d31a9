//! Model × concept mastery `F = UᵀV` and its mapping onto [0, 1].

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcf::solver::FactorSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `min(F, 1)`
    #[default]
    Clip,
    /// `(F − min) / (max − min)` over the whole matrix.
    MinmaxGlobal,
    /// Min–max rescaling within each concept column.
    MinmaxPerConcept,
}

impl Normalization {
    pub const ALL: [Normalization; 3] = [
        Normalization::Clip,
        Normalization::MinmaxGlobal,
        Normalization::MinmaxPerConcept,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Clip => "clip",
            Normalization::MinmaxGlobal => "minmax_global",
            Normalization::MinmaxPerConcept => "minmax_per_concept",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Normalization::ALL
            .into_iter()
            .find(|n| n.as_str() == s || n.as_str().replace('_', "-") == s)
            .ok_or_else(|| Error::Validation(format!("unknown normalization tag {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasteryMatrix {
    pub model_ids: Vec<String>,
    pub concept_ids: Vec<String>,
    /// `UᵀV`, models × concepts.
    pub raw: Array2<f64>,
    /// `raw` mapped into [0, 1] by `normalization`.
    pub prob: Array2<f64>,
    pub normalization: Normalization,
    pub warnings: Vec<String>,
}

impl MasteryMatrix {
    /// Wraps a raw mastery matrix, deriving the probabilities.
    pub fn from_raw(raw: Array2<f64>, normalization: Normalization) -> Self {
        let (n, k) = raw.dim();
        let mut warnings = Vec::new();
        let prob = normalize(&raw, normalization, &mut warnings);
        for w in &warnings {
            log::warn!("{w}");
        }
        Self {
            model_ids: (0..n).map(|j| format!("model_{j:03}")).collect(),
            concept_ids: (0..k).map(|c| format!("concept_{c:03}")).collect(),
            raw,
            prob,
            normalization,
            warnings,
        }
    }

    pub fn with_ids(mut self, model_ids: Vec<String>, concept_ids: Vec<String>) -> Result<Self> {
        if model_ids.len() != self.raw.nrows() || concept_ids.len() != self.raw.ncols() {
            return Err(Error::Dimension(format!(
                "mastery matrix is {:?} but got {} model ids and {} concept ids",
                self.raw.dim(),
                model_ids.len(),
                concept_ids.len()
            )));
        }
        self.model_ids = model_ids;
        self.concept_ids = concept_ids;
        Ok(self)
    }

    pub fn n_models(&self) -> usize {
        self.raw.nrows()
    }

    pub fn n_concepts(&self) -> usize {
        self.raw.ncols()
    }
}

/// `F = UᵀV` with probabilities under `normalization`.
pub fn mastery(factors: &FactorSet, normalization: Normalization) -> MasteryMatrix {
    MasteryMatrix::from_raw(factors.u.t().dot(&factors.v), normalization)
}

fn minmax(values: &mut [f64], lo: f64, hi: f64) {
    let span = hi - lo;
    for v in values {
        *v = if span > 0.0 { ((*v - lo) / span).clamp(0.0, 1.0) } else { 0.0 };
    }
}

fn bounds<'a>(it: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn normalize(raw: &Array2<f64>, mode: Normalization, warnings: &mut Vec<String>) -> Array2<f64> {
    match mode {
        Normalization::Clip => raw.mapv(|v| v.clamp(0.0, 1.0)),
        Normalization::MinmaxGlobal => {
            let mut out = raw.clone();
            let (lo, hi) = bounds(raw.iter());
            if !(hi > lo) && !raw.is_empty() {
                warnings.push("mastery matrix is constant; minmax_global maps every entry to 0".into());
            }
            minmax(out.as_slice_mut().expect("standard layout"), lo, hi);
            out
        }
        Normalization::MinmaxPerConcept => {
            let mut out = raw.clone();
            for (k, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
                let (lo, hi) = bounds(col.iter());
                if !(hi > lo) {
                    warnings.push(format!("concept column {k} is constant; minmax_per_concept maps it to 0"));
                }
                let mut vals = col.to_vec();
                minmax(&mut vals, lo, hi);
                col.iter_mut().zip(vals).for_each(|(c, v)| *c = v);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_skill_product() {
        let f = FactorSet {
            e: array![[1.0]],
            u: array![[1.0]],
            v: array![[0.9]],
        };
        let m = mastery(&f, Normalization::Clip);
        assert_eq!(m.raw[[0, 0]], 0.9);
        assert_eq!(m.prob[[0, 0]], 0.9);
    }

    #[test]
    fn clip_bound() {
        let m = MasteryMatrix::from_raw(array![[1.4, 0.2]], Normalization::Clip);
        assert_eq!(m.prob, array![[1.0, 0.2]]);
    }

    #[test]
    fn minmax_modes() {
        let raw = array![[0.0, 2.0], [1.0, 4.0]];
        let g = MasteryMatrix::from_raw(raw.clone(), Normalization::MinmaxGlobal);
        assert_eq!(g.prob, array![[0.0, 0.5], [0.25, 1.0]]);
        let c = MasteryMatrix::from_raw(raw, Normalization::MinmaxPerConcept);
        assert_eq!(c.prob, array![[0.0, 0.0], [1.0, 1.0]]);
    }

    #[test]
    fn constant_matrix_maps_to_zero_with_warning() {
        let m = MasteryMatrix::from_raw(Array2::from_elem((2, 3), 0.7), Normalization::MinmaxGlobal);
        assert!(m.prob.iter().all(|&v| v == 0.0));
        assert_eq!(m.warnings.len(), 1);
        let m = MasteryMatrix::from_raw(Array2::from_elem((2, 3), 0.7), Normalization::MinmaxPerConcept);
        assert!(m.prob.iter().all(|&v| v == 0.0));
        assert_eq!(m.warnings.len(), 3);
    }

    #[test]
    fn tags_parse() {
        for n in Normalization::ALL {
            assert_eq!(n.as_str().parse::<Normalization>().unwrap(), n);
        }
        assert!("softmax".parse::<Normalization>().is_err());
    }
}
