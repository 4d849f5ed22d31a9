//! Heatmap rendering and per-run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::matrix_io::format_value;
use crate::data::LabeledMatrix;
use crate::error::{Error, Result};
use crate::mcf::MasteryMatrix;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Model × concept grid of mastery probabilities with a fixed color scale.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub model_ids: Vec<String>,
    pub concept_ids: Vec<String>,
    pub values: Array2<f64>,
    pub scale: (f64, f64),
}

/// Color at the low end of the scale.
const LOW_RGB: [f64; 3] = [247.0, 251.0, 255.0];
/// Color at the high end of the scale.
const HIGH_RGB: [f64; 3] = [8.0, 48.0, 107.0];
const CELL: usize = 14;
const LEFT: usize = 160;
const TOP: usize = 120;

impl HeatmapGrid {
    pub fn from_mastery(m: &MasteryMatrix) -> Result<Self> {
        Self::new(m.model_ids.clone(), m.concept_ids.clone(), m.prob.clone(), (0.0, 1.0))
    }

    pub fn new(model_ids: Vec<String>, concept_ids: Vec<String>, values: Array2<f64>, scale: (f64, f64)) -> Result<Self> {
        if values.dim() != (model_ids.len(), concept_ids.len()) {
            return Err(Error::Dimension(format!(
                "heatmap values are {:?} but ids give {}×{}",
                values.dim(),
                model_ids.len(),
                concept_ids.len()
            )));
        }
        if !(scale.0 < scale.1) {
            return Err(Error::InvalidConfig(format!("color scale {scale:?} is empty")));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Validation(format!("heatmap value {v} outside [0, 1]")));
        }
        Ok(Self {
            model_ids,
            concept_ids,
            values,
            scale,
        })
    }

    /// Fill color for `value`: linear in RGB between the two scale ends,
    /// saturating outside the bounds.
    pub fn color(&self, value: f64) -> String {
        let t = ((value - self.scale.0) / (self.scale.1 - self.scale.0)).clamp(0.0, 1.0);
        let c: Vec<u8> = (0..3)
            .map(|i| (LOW_RGB[i] + t * (HIGH_RGB[i] - LOW_RGB[i])).round() as u8)
            .collect();
        format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
    }

    pub fn to_labeled(&self) -> LabeledMatrix {
        LabeledMatrix {
            row_ids: self.model_ids.clone(),
            col_ids: self.concept_ids.clone(),
            values: self.values.clone(),
        }
    }

    /// Models as rows, concepts as columns. Each cell carries its model,
    /// concept and exact value as `data-*` attributes.
    pub fn to_svg(&self) -> String {
        let (n, k) = self.values.dim();
        let width = LEFT + k * CELL + 20;
        let height = TOP + n * CELL + 20;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" data-scale-min="{}" data-scale-max="{}">"#,
            format_value(self.scale.0),
            format_value(self.scale.1)
        );
        let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="10">"#);
        for (j, id) in self.model_ids.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                LEFT - 4,
                TOP + j * CELL + CELL - 3,
                escape(id)
            );
        }
        for (c, id) in self.concept_ids.iter().enumerate() {
            let x = LEFT + c * CELL + CELL - 3;
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{}" transform="rotate(-90 {x} {})">{}</text>"#,
                TOP - 4,
                TOP - 4,
                escape(id)
            );
        }
        let _ = writeln!(s, "</g>");
        for j in 0..n {
            for c in 0..k {
                let v = self.values[[j, c]];
                let _ = writeln!(
                    s,
                    r#"<rect class="cell" x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}" data-model="{}" data-concept="{}" data-value="{}"/>"#,
                    LEFT + c * CELL,
                    TOP + j * CELL,
                    self.color(v),
                    escape(&self.model_ids[j]),
                    escape(&self.concept_ids[c]),
                    format_value(v)
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Record of one command invocation, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn start(command: &str, config: &impl Serialize, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            config: serde_json::to_value(config).expect("config serializes"),
            inputs: Vec::new(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: chrono::Utc::now().to_rfc3339(),
            finished_at: None,
            notes: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(InputDigest {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn finish(mut self, out_dir: &Path) -> Result<()> {
        self.finished_at = Some(chrono::Utc::now().to_rfc3339());
        crate::mcf::io::write_json(&self, &out_dir.join(MANIFEST_FILE))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn grid() -> HeatmapGrid {
        HeatmapGrid::new(
            vec!["m<1>".into(), "m2".into()],
            vec!["c1".into(), "c2".into(), "c3".into()],
            array![[0.0, 0.5, 1.0], [0.25, 0.75, 0.125]],
            (0.0, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn color_ends_and_saturation() {
        let g = grid();
        assert_eq!(g.color(0.0), "#f7fbff");
        assert_eq!(g.color(1.0), "#08306b");
        assert_eq!(g.color(2.0), g.color(1.0));
        assert_eq!(g.color(0.3), g.color(0.3));
    }

    #[test]
    fn svg_embeds_every_value() {
        let g = grid();
        let svg = g.to_svg();
        assert_eq!(svg.matches(r#"class="cell""#).count(), 6);
        assert!(svg.contains(r#"data-model="m&lt;1&gt;" data-concept="c2" data-value="0.5""#));
        assert!(svg.contains(r#"data-value="0.125""#));
    }

    #[test]
    fn rejects_out_of_range() {
        let r = HeatmapGrid::new(vec!["a".into()], vec!["b".into()], array![[1.5]], (0.0, 1.0));
        assert!(matches!(r, Err(Error::Validation(_))));
    }
}
