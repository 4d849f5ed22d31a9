//! Concept catalog, items and the item bank, plus the Q-matrix derived from them.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BANK_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    pub label: String,
}

/// Ordered list of concepts. The position of a concept is its index `k`
/// in every matrix that has a concept axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptCatalog {
    concepts: Vec<Concept>,
    index: HashMap<String, usize>,
}

impl ConceptCatalog {
    pub fn new(concepts: Vec<Concept>) -> Result<Self> {
        if concepts.is_empty() {
            return Err(Error::Validation("catalog has no concepts".into()));
        }
        let mut index = HashMap::with_capacity(concepts.len());
        for (k, c) in concepts.iter().enumerate() {
            if c.id.trim().is_empty() {
                return Err(Error::Validation(format!("concept #{k} has an empty id")));
            }
            if index.insert(c.id.clone(), k).is_some() {
                return Err(Error::Validation(format!("duplicate concept id {:?}", c.id)));
            }
        }
        Ok(Self { concepts, index })
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn ids(&self) -> Vec<String> {
        self.concepts.iter().map(|c| c.id.clone()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub prompt: String,
    pub answer_key: String,
    pub concepts: BTreeSet<String>,
}

impl Item {
    /// Builds an item with its answer key normalized.
    pub fn new<I, S>(id: impl Into<String>, prompt: impl Into<String>, answer_key: &str, concepts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            id: id.into(),
            prompt: prompt.into(),
            answer_key: normalize_answer(answer_key),
            concepts: concepts.into_iter().map(Into::into).collect(),
        }
    }
}

/// Maps full-width ASCII variants to ASCII, trims and uppercases.
pub fn normalize_answer(raw: &str) -> String {
    raw.chars()
        .map(|c| match c as u32 {
            0xFF01..=0xFF5E => char::from_u32(c as u32 - 0xFEE0).unwrap_or(c),
            0x3000 => ' ',
            _ => c,
        })
        .collect::<String>()
        .trim()
        .to_uppercase()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemBank {
    items: Vec<Item>,
    catalog: ConceptCatalog,
}

impl ItemBank {
    pub fn new(catalog: ConceptCatalog, items: Vec<Item>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Validation("no items".into()));
        }
        let mut seen = HashSet::with_capacity(items.len());
        for item in &items {
            if item.id.trim().is_empty() {
                return Err(Error::Validation("item with empty id".into()));
            }
            if !seen.insert(item.id.as_str()) {
                return Err(Error::Validation(format!("duplicate item id {:?}", item.id)));
            }
            if item.answer_key.is_empty() {
                return Err(Error::Validation(format!("item {:?} has an empty answer key", item.id)));
            }
            if item.concepts.is_empty() {
                return Err(Error::Validation(format!("item {:?} has no concept tags", item.id)));
            }
            let unknown: Vec<&str> = item
                .concepts
                .iter()
                .filter(|c| catalog.index_of(c).is_none())
                .map(String::as_str)
                .collect();
            if !unknown.is_empty() {
                return Err(Error::Validation(format!(
                    "item {:?} is tagged with unknown concept(s) {}",
                    item.id,
                    unknown.join(", ")
                )));
            }
        }
        Ok(Self { items, catalog })
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn catalog(&self) -> &ConceptCatalog {
        &self.catalog
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn item_ids(&self) -> Vec<String> {
        self.items.iter().map(|i| i.id.clone()).collect()
    }

    pub fn item_index(&self) -> HashMap<&str, usize> {
        self.items.iter().enumerate().map(|(i, it)| (it.id.as_str(), i)).collect()
    }

    /// Concepts that no item is tagged with.
    pub fn orphan_concepts(&self) -> Vec<String> {
        let tagged: HashSet<&str> = self
            .items
            .iter()
            .flat_map(|i| i.concepts.iter().map(String::as_str))
            .collect();
        self.catalog
            .concepts()
            .iter()
            .filter(|c| !tagged.contains(c.id.as_str()))
            .map(|c| c.id.clone())
            .collect()
    }

    /// Binary M×K matrix with entry (i, k) = 1 iff item i is tagged with concept k.
    pub fn qmatrix(&self) -> Array2<f64> {
        let mut q = Array2::zeros((self.items.len(), self.catalog.len()));
        for (i, item) in self.items.iter().enumerate() {
            for tag in &item.concepts {
                // validated at construction
                let k = self.catalog.index_of(tag).expect("tag in catalog");
                q[[i, k]] = 1.0;
            }
        }
        q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BankFormat {
    Json,
    Csv,
}

#[derive(Serialize, Deserialize)]
struct BankFile {
    format_version: u64,
    concepts: Vec<Concept>,
    items: Vec<ItemRecord>,
}

#[derive(Serialize, Deserialize)]
struct ItemRecord {
    id: String,
    prompt: String,
    answer_key: String,
    concepts: Vec<String>,
}

/// Loads an item bank. For CSV the concept catalog is read from a
/// `concepts.csv` next to the items file.
pub fn load_item_bank(path: &Path, format: BankFormat) -> Result<ItemBank> {
    match format {
        BankFormat::Json => load_bank_json(path),
        BankFormat::Csv => {
            let concepts = path.with_file_name("concepts.csv");
            load_bank_csv(path, &concepts)
        }
    }
}

fn load_bank_json(path: &Path) -> Result<ItemBank> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: BankFile =
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?;
    if file.format_version != BANK_FORMAT_VERSION {
        return Err(Error::FormatVersion {
            context: path.display().to_string(),
            found: file.format_version,
            supported: BANK_FORMAT_VERSION,
        });
    }
    let catalog = ConceptCatalog::new(file.concepts)?;
    let items = file
        .items
        .into_iter()
        .map(|r| Item::new(r.id, r.prompt, &r.answer_key, r.concepts))
        .collect();
    ItemBank::new(catalog, items)
}

pub fn load_bank_csv(items_path: &Path, concepts_path: &Path) -> Result<ItemBank> {
    let ctx = |p: &Path| p.display().to_string();
    let mut concepts = Vec::new();
    let mut rdr = csv::Reader::from_path(concepts_path).map_err(|e| Error::parse(ctx(concepts_path), e))?;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(ctx(concepts_path), e))?;
        if rec.len() != 2 {
            return Err(Error::parse(ctx(concepts_path), format!("expected 2 fields, got {}", rec.len())));
        }
        concepts.push(Concept {
            id: rec[0].to_string(),
            label: rec[1].to_string(),
        });
    }
    let catalog = ConceptCatalog::new(concepts)?;

    let mut items = Vec::new();
    let mut rdr = csv::Reader::from_path(items_path).map_err(|e| Error::parse(ctx(items_path), e))?;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(ctx(items_path), e))?;
        if rec.len() != 4 {
            return Err(Error::parse(ctx(items_path), format!("expected 4 fields, got {}", rec.len())));
        }
        let tags = rec[3].split(';').map(str::trim).filter(|t| !t.is_empty());
        items.push(Item::new(&rec[0], &rec[1], &rec[2], tags));
    }
    ItemBank::new(catalog, items)
}

pub fn save_bank_json(bank: &ItemBank, path: &Path) -> Result<()> {
    let file = BankFile {
        format_version: BANK_FORMAT_VERSION,
        concepts: bank.catalog.concepts().to_vec(),
        items: bank
            .items
            .iter()
            .map(|i| ItemRecord {
                id: i.id.clone(),
                prompt: i.prompt.clone(),
                answer_key: i.answer_key.clone(),
                concepts: i.concepts.iter().cloned().collect(),
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&file).expect("bank serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn save_bank_csv(bank: &ItemBank, items_path: &Path, concepts_path: &Path) -> Result<()> {
    let io = |p: &Path, e: csv::Error| Error::parse(p.display().to_string(), e);
    let mut w = csv::Writer::from_path(concepts_path).map_err(|e| io(concepts_path, e))?;
    w.write_record(["id", "label"]).map_err(|e| io(concepts_path, e))?;
    for c in bank.catalog.concepts() {
        w.write_record([&c.id, &c.label]).map_err(|e| io(concepts_path, e))?;
    }
    w.flush().map_err(|e| Error::io(concepts_path, e))?;

    let mut w = csv::Writer::from_path(items_path).map_err(|e| io(items_path, e))?;
    w.write_record(["id", "prompt", "answer_key", "concepts"])
        .map_err(|e| io(items_path, e))?;
    for i in &bank.items {
        let tags = i.concepts.iter().cloned().collect::<Vec<_>>().join(";");
        w.write_record([&i.id, &i.prompt, &i.answer_key, &tags])
            .map_err(|e| io(items_path, e))?;
    }
    w.flush().map_err(|e| Error::io(items_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog(k: usize) -> ConceptCatalog {
        ConceptCatalog::new(
            (1..=k)
                .map(|i| Concept {
                    id: format!("F{i}"),
                    label: format!("concept {i}"),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn qmatrix_single_and_multi_tag_rows() {
        let bank = ItemBank::new(
            catalog(5),
            vec![Item::new("q1", "p", "B", ["F3"]), Item::new("q2", "p", "A", ["F1", "F4"])],
        )
        .unwrap();
        let q = bank.qmatrix();
        assert_eq!(q.row(0).to_vec(), vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(q.row(1).to_vec(), vec![1.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(bank.orphan_concepts(), vec!["F2".to_string(), "F5".to_string()]);
    }

    #[test]
    fn paper_scale_bank_has_three_items_per_concept() {
        let items = (0..210)
            .map(|i| Item::new(format!("q{i:03}"), "p", "A", [format!("F{}", i / 3 + 1)]))
            .collect();
        let bank = ItemBank::new(catalog(70), items).unwrap();
        let q = bank.qmatrix();
        assert_eq!(q.dim(), (210, 70));
        // independent count straight from the tags
        let mut counts = vec![0usize; 70];
        for item in bank.items() {
            for t in &item.concepts {
                counts[t[1..].parse::<usize>().unwrap() - 1] += 1;
            }
        }
        assert!(counts.iter().all(|&c| c == 3));
        for k in 0..70 {
            assert_eq!(q.column(k).sum(), 3.0);
        }
        assert_eq!(bank.qmatrix(), q);
    }

    #[test]
    fn validation_errors_name_the_offender() {
        let err = ItemBank::new(catalog(3), vec![]).unwrap_err();
        assert!(err.to_string().contains("no items"));

        let err = ItemBank::new(catalog(3), vec![Item::new("q1", "p", "A", ["F99"])]).unwrap_err();
        assert!(err.to_string().contains("F99"));

        let err = ItemBank::new(
            catalog(3),
            vec![Item::new("q1", "p", "A", ["F1"]), Item::new("q1", "p", "B", ["F2"])],
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate item id \"q1\""));

        let err = ItemBank::new(catalog(3), vec![Item::new("q7", "p", "  ", ["F1"])]).unwrap_err();
        assert!(err.to_string().contains("q7"));
    }

    #[test]
    fn answer_normalization() {
        assert_eq!(normalize_answer(" ｂ "), "B");
        assert_eq!(normalize_answer("a,c"), "A,C");
    }
}
