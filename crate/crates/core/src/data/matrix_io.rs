//! CSV I/O for matrices with row and column id headers.
//!
//! Layout: the header row holds a corner label followed by the column ids;
//! each following row holds a row id followed by the decimal cell values.
//! Values are written with the shortest representation that parses back to
//! the same `f64`.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub values: Array2<f64>,
}

impl LabeledMatrix {
    pub fn new(row_ids: Vec<String>, col_ids: Vec<String>, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (row_ids.len(), col_ids.len()) {
            return Err(Error::Dimension(format!(
                "matrix is {:?} but has {} row ids and {} column ids",
                values.dim(),
                row_ids.len(),
                col_ids.len()
            )));
        }
        Ok(Self {
            row_ids,
            col_ids,
            values,
        })
    }

    pub fn to_csv_string(&self, corner: &str) -> String {
        let mut out = String::new();
        out.push_str(&csv_field(corner));
        for c in &self.col_ids {
            out.push(',');
            out.push_str(&csv_field(c));
        }
        out.push('\n');
        for (r, id) in self.row_ids.iter().enumerate() {
            out.push_str(&csv_field(id));
            for v in self.values.row(r) {
                out.push(',');
                out.push_str(&format_value(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path, corner: &str) -> Result<()> {
        fs::write(path, self.to_csv_string(corner)).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let ctx = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, &ctx)
    }

    pub fn parse_csv(text: &str, ctx: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| Error::parse(ctx, e))?.clone();
        if header.is_empty() {
            return Err(Error::parse(ctx, "missing header row"));
        }
        let col_ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut row_ids = Vec::new();
        let mut data = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(ctx, e))?;
            if rec.len() != col_ids.len() + 1 {
                return Err(Error::parse(
                    ctx,
                    format!("row {} has {} fields, expected {}", line + 2, rec.len(), col_ids.len() + 1),
                ));
            }
            row_ids.push(rec[0].to_string());
            for field in rec.iter().skip(1) {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(ctx, format!("row {}: {field:?} is not a number", line + 2)))?;
                data.push(v);
            }
        }
        let values = Array2::from_shape_vec((row_ids.len(), col_ids.len()), data)
            .map_err(|e| Error::parse(ctx, e))?;
        Self::new(row_ids, col_ids, values)
    }
}

pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        // folds -0.0
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
