//! Krippendorff's alpha for nominal labels and for label sets.
//!
//! Uses the coincidence-matrix form: each unit with `m ≥ 2` codings
//! contributes `1 / (m − 1)` for every ordered pair of its codings, and
//! `α = 1 − (n − 1) Σ o_ck δ_ck / Σ n_c n_k δ_ck`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One coder's label for one unit: a single category, or a set of them.
pub type Label = BTreeSet<String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    /// 0 when labels are equal, 1 otherwise.
    #[default]
    Nominal,
    /// `1 − |A ∩ B| / |A ∪ B|`
    Jaccard,
}

impl Distance {
    pub fn between(self, a: &Label, b: &Label) -> f64 {
        match self {
            Distance::Nominal => (a != b) as u8 as f64,
            Distance::Jaccard => {
                let union = a.union(b).count();
                if union == 0 {
                    return 0.0;
                }
                1.0 - a.intersection(b).count() as f64 / union as f64
            }
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distance::Nominal => "nominal",
            Distance::Jaccard => "jaccard",
        })
    }
}

impl FromStr for Distance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "nominal" => Ok(Distance::Nominal),
            "jaccard" => Ok(Distance::Jaccard),
            other => Err(format!("unknown distance {other:?} (expected nominal or jaccard)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub krippendorff_alpha: f64,
    /// Units with at least two codings.
    pub n_units: usize,
    pub n_coders: usize,
    pub n_values: usize,
    pub distance: Distance,
}

/// `annotations[u][c]` is coder `c`'s label for unit `u`, `None` when missing.
pub fn krippendorff_alpha(annotations: &[Vec<Option<Label>>], distance: Distance) -> Result<AgreementReport> {
    let n_coders = annotations.iter().map(Vec::len).max().unwrap_or(0);
    if n_coders < 2 {
        return Err(Error::Precondition("Krippendorff's alpha needs at least two coders".into()));
    }

    // Disagreement only depends on the (|A ∩ B|, |A ∪ B|) sizes of a pair of
    // labels, so pairs are tallied per size signature with integer counts.
    // Sums then run in an order that ignores category names, which makes the
    // result exactly invariant under relabeling.
    let signature = |a: &Label, b: &Label| (a.intersection(b).count(), a.union(b).count());
    let delta = |(inter, union): (usize, usize)| match distance {
        Distance::Nominal => (inter != union) as u8 as f64,
        Distance::Jaccard if union == 0 => 0.0,
        Distance::Jaccard => 1.0 - inter as f64 / union as f64,
    };

    // per unit size m: signature -> ordered pairs of distinct codings
    let mut observed_pairs: BTreeMap<usize, BTreeMap<(usize, usize), u64>> = BTreeMap::new();
    let mut value_counts: BTreeMap<&Label, u64> = BTreeMap::new();
    let mut n_units = 0;
    for unit in annotations {
        let coded: Vec<&Label> = unit.iter().flatten().collect();
        let m = coded.len();
        if m < 2 {
            continue;
        }
        n_units += 1;
        let tally = observed_pairs.entry(m).or_default();
        for (a, la) in coded.iter().enumerate() {
            *value_counts.entry(*la).or_default() += 1;
            for (b, lb) in coded.iter().enumerate() {
                if a != b {
                    *tally.entry(signature(la, lb)).or_default() += 1;
                }
            }
        }
    }
    if n_units == 0 {
        return Err(Error::Precondition("no unit has two or more codings".into()));
    }

    let mut expected_pairs: BTreeMap<(usize, usize), u128> = BTreeMap::new();
    for (la, &na) in &value_counts {
        for (lb, &nb) in &value_counts {
            *expected_pairs.entry(signature(la, lb)).or_default() += na as u128 * nb as u128;
        }
    }
    let n = value_counts.values().sum::<u64>() as f64;
    let observed: f64 = observed_pairs
        .iter()
        .map(|(&m, tally)| tally.iter().map(|(&sig, &c)| c as f64 * delta(sig)).sum::<f64>() / (m as f64 - 1.0))
        .sum();
    let expected: f64 = expected_pairs.iter().map(|(&sig, &c)| c as f64 * delta(sig)).sum();
    let v = value_counts.len();
    if expected == 0.0 {
        return Err(Error::Degenerate(
            "expected disagreement is zero (a single value across all pairable codings); alpha is undefined".into(),
        ));
    }
    Ok(AgreementReport {
        krippendorff_alpha: 1.0 - (n - 1.0) * observed / expected,
        n_units,
        n_coders,
        n_values: v,
        distance,
    })
}

/// Shorthand for single-label data.
pub fn nominal_units<S: AsRef<str>>(rows: &[Vec<Option<S>>]) -> Vec<Vec<Option<Label>>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|c| c.as_ref().map(|s| BTreeSet::from([s.as_ref().to_string()])))
                .collect()
        })
        .collect()
}

/// Reads an annotation CSV: header `unit,<coder>,<coder>,…`; one row per
/// unit; empty cells are missing codings; `;` separates labels of a set.
pub fn read_annotations_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<Option<Label>>>)> {
    let ctx = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(&ctx, e))?;
    let header = rdr.headers().map_err(|e| Error::parse(&ctx, e))?.clone();
    if header.len() < 3 {
        return Err(Error::parse(&ctx, "expected a unit column and at least two coder columns"));
    }
    let mut units = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(&ctx, e))?;
        let row = rec
            .iter()
            .skip(1)
            .map(|cell| {
                let set: Label = cell.split(';').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
                (!set.is_empty()).then_some(set)
            })
            .collect();
        units.push(row);
    }
    Ok((header.iter().skip(1).map(String::from).collect(), units))
}
