//! Corpus ingestion: documents, LLM-extracted leader passages, the six
//! (leader type x characteristic) analysis slices, and the firm-year panel.

use crate::llm::{ExtractedPassage, LlmClient, LlmError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate doc_id '{id}' on line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("missing field '{field}' on line {line}")]
    MissingField { field: String, line: usize },
    #[error("document on line {line} has empty text")]
    EmptyText { line: usize },
    #[error("morale_rating {value} out of range 1..=5 on line {line}")]
    MoraleOutOfRange { value: i64, line: usize },
    #[error("missing column '{0}' in panel file")]
    MissingColumn(String),
    #[error("duplicate panel key ({firm_id}, {year}) on line {line}")]
    DuplicateKey {
        firm_id: String,
        year: i32,
        line: usize,
    },
    #[error("non-positive employees {value} on line {line}; log(employees) must be finite")]
    NonPositiveEmployees { value: i64, line: usize },
    #[error("passage '{passage_id}' references unknown document '{doc_id}'")]
    UnknownDocument {
        passage_id: String,
        doc_id: String,
    },
    #[error(transparent)]
    Llm(#[from] LlmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderType {
    Top,
    NonTop,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Characteristic {
    Behavior,
    Attitude,
    Ability,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassageFlag {
    ImplicitExtraction,
    ChangeMeaning,
    IsPast,
}

impl fmt::Display for LeaderType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeaderType::Top => write!(f, "top"),
            LeaderType::NonTop => write!(f, "non_top"),
            LeaderType::Unknown => write!(f, "unknown"),
        }
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Characteristic::Behavior => write!(f, "behavior"),
            Characteristic::Attitude => write!(f, "attitude"),
            Characteristic::Ability => write!(f, "ability"),
            Characteristic::Other => write!(f, "other"),
        }
    }
}

/// One raw review document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    pub firm_id: String,
    pub year: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morale_rating: Option<u8>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

/// A leader-related snippet extracted from a document, tagged along the two
/// classification dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderPassage {
    pub passage_id: String,
    pub source_doc_id: String,
    pub text: String,
    pub leader_type: LeaderType,
    pub characteristic: Characteristic,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub flags: BTreeSet<PassageFlag>,
}

impl LeaderPassage {
    /// Passages tagged unknown/other stay on disk but are excluded from the
    /// six analysis slices.
    pub fn in_analysis_scope(&self) -> bool {
        self.leader_type != LeaderType::Unknown && self.characteristic != Characteristic::Other
    }
}

/// Key of one of the six analysis slices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SliceKey {
    pub leader_type: LeaderType,
    pub characteristic: Characteristic,
}

impl SliceKey {
    pub fn all() -> [SliceKey; 6] {
        let mut keys = Vec::with_capacity(6);
        for lt in [LeaderType::Top, LeaderType::NonTop] {
            for ch in [
                Characteristic::Behavior,
                Characteristic::Attitude,
                Characteristic::Ability,
            ] {
                keys.push(SliceKey {
                    leader_type: lt,
                    characteristic: ch,
                });
            }
        }
        keys.try_into().unwrap()
    }

    /// Parses `"top:behavior"`-style labels.
    pub fn parse(s: &str) -> Option<SliceKey> {
        let (lt, ch) = s.split_once(':')?;
        let leader_type = match lt {
            "top" => LeaderType::Top,
            "non_top" => LeaderType::NonTop,
            _ => return None,
        };
        let characteristic = match ch {
            "behavior" => Characteristic::Behavior,
            "attitude" => Characteristic::Attitude,
            "ability" => Characteristic::Ability,
            _ => return None,
        };
        Some(SliceKey {
            leader_type,
            characteristic,
        })
    }
}

impl fmt::Display for SliceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.leader_type, self.characteristic)
    }
}

/// Passages of one analysis slice, in stable insertion order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSlice {
    pub key: SliceKey,
    pub passages: Vec<LeaderPassage>,
}

/// Result of partitioning passages into the six slices.
#[derive(Debug, Clone)]
pub struct SliceSet {
    pub slices: BTreeMap<SliceKey, CorpusSlice>,
    /// Passage ids excluded because of unknown/other tags.
    pub excluded: Vec<String>,
}

impl SliceSet {
    pub fn total_sliced(&self) -> usize {
        self.slices.values().map(|s| s.passages.len()).sum()
    }
}

/// One firm-year observation of the external outcome panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub firm_id: String,
    pub year: i32,
    pub industry: String,
    /// Return on assets: net income divided by total assets (supplied
    /// pre-computed; dimensionless).
    pub roa: f64,
    /// Average employee morale on the 1-5 review scale.
    pub morale: f64,
    pub employees: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn validate_document(doc: &Document, line: usize) -> Result<(), CorpusError> {
    if doc.text.trim().is_empty() {
        return Err(CorpusError::EmptyText { line });
    }
    if let Some(m) = doc.morale_rating {
        if !(1..=5).contains(&m) {
            return Err(CorpusError::MoraleOutOfRange {
                value: m as i64,
                line,
            });
        }
    }
    Ok(())
}

/// Loads documents from JSON Lines or CSV, validating ids and fields.
/// Records come back in file order.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<Document>, CorpusError> {
    match format {
        CorpusFormat::Jsonl => load_corpus_jsonl(path),
        CorpusFormat::Csv => load_corpus_csv(path),
    }
}

fn load_corpus_jsonl(path: &Path) -> Result<Vec<Document>, CorpusError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| {
            let msg = e.to_string();
            if let Some(field) = msg.strip_prefix("missing field `") {
                let field = field.split('`').next().unwrap_or("").to_string();
                CorpusError::MissingField {
                    field,
                    line: line_no,
                }
            } else {
                CorpusError::Parse {
                    line: line_no,
                    message: msg,
                }
            }
        })?;
        validate_document(&doc, line_no)?;
        if !seen.insert(doc.doc_id.clone()) {
            return Err(CorpusError::DuplicateId {
                id: doc.doc_id,
                line: line_no,
            });
        }
        docs.push(doc);
    }
    Ok(docs)
}

fn load_corpus_csv(path: &Path) -> Result<Vec<Document>, CorpusError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CorpusError::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    for required in ["doc_id", "text", "firm_id", "year"] {
        if !headers.iter().any(|h| h == required) {
            return Err(CorpusError::MissingField {
                field: required.to_string(),
                line: 1,
            });
        }
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (id_col, text_col, firm_col, year_col) = (
        col("doc_id").unwrap(),
        col("text").unwrap(),
        col("firm_id").unwrap(),
        col("year").unwrap(),
    );
    let morale_col = col("morale_rating");

    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, record) in reader.records().enumerate() {
        let line_no = idx + 2; // header is line 1
        let record = record.map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let field = |c: usize| record.get(c).unwrap_or("").to_string();
        let year: i32 = field(year_col).parse().map_err(|_| CorpusError::Parse {
            line: line_no,
            message: format!("invalid year '{}'", field(year_col)),
        })?;
        let morale_rating = match morale_col {
            Some(c) if !field(c).is_empty() => {
                Some(field(c).parse::<u8>().map_err(|_| CorpusError::Parse {
                    line: line_no,
                    message: format!("invalid morale_rating '{}'", field(c)),
                })?)
            }
            _ => None,
        };
        let mut metadata = BTreeMap::new();
        for (c, h) in headers.iter().enumerate() {
            if ["doc_id", "text", "firm_id", "year", "morale_rating"].contains(&h) {
                continue;
            }
            let v = field(c);
            if !v.is_empty() {
                metadata.insert(h.to_string(), v);
            }
        }
        let doc = Document {
            doc_id: field(id_col),
            text: field(text_col),
            firm_id: field(firm_col),
            year,
            morale_rating,
            metadata,
        };
        validate_document(&doc, line_no)?;
        if !seen.insert(doc.doc_id.clone()) {
            return Err(CorpusError::DuplicateId {
                id: doc.doc_id,
                line: line_no,
            });
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// Writes documents as JSON Lines (the primary corpus format).
pub fn save_corpus(path: &Path, docs: &[Document]) -> Result<(), CorpusError> {
    let mut out = Vec::new();
    for doc in docs {
        serde_json::to_writer(&mut out, doc).expect("document serialization cannot fail");
        out.push(b'\n');
    }
    crate::store::atomic_write(path, &out).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    })
}

/// Extracts leader-related passages from one document via the LLM client.
///
/// Passage ids are `<doc_id>#<index>` in response order. An empty response
/// (document mentions no leader) is a valid result.
pub fn extract_leader_passages(
    doc: &Document,
    client: &LlmClient,
) -> Result<Vec<LeaderPassage>, CorpusError> {
    let mut meta = format!("firm_id: {}; year: {}", doc.firm_id, doc.year);
    if let Some(cat) = doc.metadata.get("category") {
        meta.push_str(&format!("; review category: {}", cat));
    }
    meta.push_str("; note: the reviewer is not necessarily a leader");
    let extracted = client.extract(&doc.text, &meta)?;
    Ok(extracted
        .into_iter()
        .enumerate()
        .map(|(i, p)| passage_from_extracted(doc, i, p))
        .collect())
}

fn passage_from_extracted(doc: &Document, index: usize, p: ExtractedPassage) -> LeaderPassage {
    let mut flags = BTreeSet::new();
    if p.implicit_extraction {
        flags.insert(PassageFlag::ImplicitExtraction);
    }
    if p.change_meaning {
        flags.insert(PassageFlag::ChangeMeaning);
    }
    if p.is_past {
        flags.insert(PassageFlag::IsPast);
    }
    LeaderPassage {
        passage_id: format!("{}#{}", doc.doc_id, index),
        source_doc_id: doc.doc_id.clone(),
        text: p.text,
        leader_type: p.leader_type,
        characteristic: p.characteristic,
        flags,
    }
}

/// Partitions passages into the six analysis slices. Unknown/other passages
/// land in the exclusion list; every slice key is present even when empty.
pub fn slice_corpus(passages: &[LeaderPassage]) -> SliceSet {
    let mut slices: BTreeMap<SliceKey, CorpusSlice> = SliceKey::all()
        .into_iter()
        .map(|key| (key, CorpusSlice {
            key,
            passages: Vec::new(),
        }))
        .collect();
    let mut excluded = Vec::new();
    for p in passages {
        if p.in_analysis_scope() {
            let key = SliceKey {
                leader_type: p.leader_type,
                characteristic: p.characteristic,
            };
            slices
                .get_mut(&key)
                .expect("all analysis keys pre-populated")
                .passages
                .push(p.clone());
        } else {
            excluded.push(p.passage_id.clone());
        }
    }
    SliceSet { slices, excluded }
}

/// Loads the firm-year panel CSV. Columns: firm_id, year, industry, roa,
/// morale, employees.
pub fn load_panel(path: &Path) -> Result<Vec<PanelRow>, CorpusError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CorpusError::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut cols = BTreeMap::new();
    for required in ["firm_id", "year", "industry", "roa", "morale", "employees"] {
        match headers.iter().position(|h| h == required) {
            Some(c) => {
                cols.insert(required, c);
            }
            None => return Err(CorpusError::MissingColumn(required.to_string())),
        }
    }
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, record) in reader.records().enumerate() {
        let line_no = idx + 2;
        let record = record.map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let field = |name: &str| record.get(cols[name]).unwrap_or("").to_string();
        let parse_f64 = |name: &str| -> Result<f64, CorpusError> {
            field(name).parse().map_err(|_| CorpusError::Parse {
                line: line_no,
                message: format!("invalid {} '{}'", name, field(name)),
            })
        };
        let year: i32 = field("year").parse().map_err(|_| CorpusError::Parse {
            line: line_no,
            message: format!("invalid year '{}'", field("year")),
        })?;
        let employees: i64 = field("employees").parse().map_err(|_| CorpusError::Parse {
            line: line_no,
            message: format!("invalid employees '{}'", field("employees")),
        })?;
        if employees < 1 {
            return Err(CorpusError::NonPositiveEmployees {
                value: employees,
                line: line_no,
            });
        }
        let row = PanelRow {
            firm_id: field("firm_id"),
            year,
            industry: field("industry"),
            roa: parse_f64("roa")?,
            morale: parse_f64("morale")?,
            employees: employees as u64,
        };
        if !seen.insert((row.firm_id.clone(), row.year)) {
            return Err(CorpusError::DuplicateKey {
                firm_id: row.firm_id,
                year: row.year,
                line: line_no,
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Writes passages as JSON Lines, one `LeaderPassage` per line.
pub fn save_passages(path: &Path, passages: &[LeaderPassage]) -> Result<(), CorpusError> {
    let mut out = Vec::new();
    for p in passages {
        serde_json::to_writer(&mut out, p).expect("passage serialization cannot fail");
        out.push(b'\n');
    }
    crate::store::atomic_write(path, &out).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    })
}

pub fn load_passages(path: &Path) -> Result<Vec<LeaderPassage>, CorpusError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut passages = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let p: LeaderPassage = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if !seen.insert(p.passage_id.clone()) {
            return Err(CorpusError::DuplicateId {
                id: p.passage_id,
                line: line_no,
            });
        }
        passages.push(p);
    }
    Ok(passages)
}

/// Maps every passage id to its (firm_id, year) via the source document.
pub fn passage_firm_years(
    passages: &[LeaderPassage],
    docs: &[Document],
) -> Result<BTreeMap<String, (String, i32)>, CorpusError> {
    let by_id: BTreeMap<&str, &Document> =
        docs.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let mut map = BTreeMap::new();
    for p in passages {
        let doc = by_id
            .get(p.source_doc_id.as_str())
            .ok_or_else(|| CorpusError::UnknownDocument {
                passage_id: p.passage_id.clone(),
                doc_id: p.source_doc_id.clone(),
            })?;
        map.insert(p.passage_id.clone(), (doc.firm_id.clone(), doc.year));
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn jsonl_corpus_loads_in_file_order() {
        let f = write_tmp(concat!(
            "{\"doc_id\":\"a\",\"text\":\"first\",\"firm_id\":\"f1\",\"year\":2020}\n",
            "{\"doc_id\":\"b\",\"text\":\"second\",\"firm_id\":\"f1\",\"year\":2021,\"morale_rating\":4}\n",
            "{\"doc_id\":\"c\",\"text\":\"third\",\"firm_id\":\"f2\",\"year\":2020}\n",
        ));
        let docs = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(docs.len(), 3);
        assert_eq!(docs[0].doc_id, "a");
        assert_eq!(docs[1].morale_rating, Some(4));
        assert_eq!(docs[2].doc_id, "c");
    }

    #[test]
    fn duplicate_doc_id_cites_line() {
        let f = write_tmp(concat!(
            "{\"doc_id\":\"a\",\"text\":\"x\",\"firm_id\":\"f\",\"year\":2020}\n",
            "{\"doc_id\":\"a\",\"text\":\"y\",\"firm_id\":\"f\",\"year\":2020}\n",
        ));
        match load_corpus(f.path(), CorpusFormat::Jsonl) {
            Err(CorpusError::DuplicateId { id, line }) => {
                assert_eq!(id, "a");
                assert_eq!(line, 2);
            }
            other => panic!("expected duplicate-id error, got {:?}", other),
        }
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let f = write_tmp("");
        let docs = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert!(docs.is_empty());
    }

    #[test]
    fn missing_field_named() {
        let f = write_tmp("{\"doc_id\":\"a\",\"firm_id\":\"f\",\"year\":2020}\n");
        match load_corpus(f.path(), CorpusFormat::Jsonl) {
            Err(CorpusError::MissingField { field, line }) => {
                assert_eq!(field, "text");
                assert_eq!(line, 1);
            }
            other => panic!("expected missing-field error, got {:?}", other),
        }
    }

    #[test]
    fn csv_corpus_collects_extra_columns_as_metadata() {
        let f = write_tmp(
            "doc_id,text,firm_id,year,morale_rating,category\n\
             a,hello,f1,2020,3,culture\n",
        );
        let docs = load_corpus(f.path(), CorpusFormat::Csv).unwrap();
        assert_eq!(docs[0].metadata.get("category").unwrap(), "culture");
        assert_eq!(docs[0].morale_rating, Some(3));
    }

    fn passage(id: &str, lt: LeaderType, ch: Characteristic) -> LeaderPassage {
        LeaderPassage {
            passage_id: id.to_string(),
            source_doc_id: "d".to_string(),
            text: "t".to_string(),
            leader_type: lt,
            characteristic: ch,
            flags: BTreeSet::new(),
        }
    }

    #[test]
    fn slicing_counts_and_excludes() {
        let passages = vec![
            passage("p1", LeaderType::Top, Characteristic::Behavior),
            passage("p2", LeaderType::Top, Characteristic::Behavior),
            passage("p3", LeaderType::NonTop, Characteristic::Ability),
            passage("p4", LeaderType::Unknown, Characteristic::Behavior),
            passage("p5", LeaderType::Top, Characteristic::Other),
        ];
        let set = slice_corpus(&passages);
        assert_eq!(set.slices.len(), 6);
        let tb = SliceKey {
            leader_type: LeaderType::Top,
            characteristic: Characteristic::Behavior,
        };
        assert_eq!(set.slices[&tb].passages.len(), 2);
        let na = SliceKey {
            leader_type: LeaderType::NonTop,
            characteristic: Characteristic::Ability,
        };
        assert_eq!(set.slices[&na].passages.len(), 1);
        assert_eq!(set.excluded, vec!["p4".to_string(), "p5".to_string()]);
        // Partition property: slices + exclusions account for everything.
        assert_eq!(set.total_sliced() + set.excluded.len(), passages.len());
    }

    #[test]
    fn panel_rows_validated() {
        let f = write_tmp(
            "firm_id,year,industry,roa,morale,employees\n\
             f1,2020,services,0.05,3.4,120\n\
             f2,2020,retail,-0.01,2.9,45\n",
        );
        let rows = load_panel(f.path()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].employees, 120);
    }

    #[test]
    fn panel_zero_employees_rejected() {
        let f = write_tmp(
            "firm_id,year,industry,roa,morale,employees\nf1,2020,services,0.05,3.4,0\n",
        );
        assert!(matches!(
            load_panel(f.path()),
            Err(CorpusError::NonPositiveEmployees { value: 0, .. })
        ));
    }

    #[test]
    fn panel_duplicate_key_rejected() {
        let f = write_tmp(
            "firm_id,year,industry,roa,morale,employees\n\
             f1,2020,services,0.05,3.4,10\n\
             f1,2020,services,0.06,3.5,11\n",
        );
        assert!(matches!(
            load_panel(f.path()),
            Err(CorpusError::DuplicateKey { .. })
        ));
    }

    #[test]
    fn panel_missing_column_named() {
        let f = write_tmp("firm_id,year,industry,roa,employees\nf1,2020,s,0.05,10\n");
        match load_panel(f.path()) {
            Err(CorpusError::MissingColumn(c)) => assert_eq!(c, "morale"),
            other => panic!("expected missing-column error, got {:?}", other),
        }
    }

    #[test]
    fn corpus_roundtrip() {
        let docs = vec![Document {
            doc_id: "a".into(),
            text: "some review text".into(),
            firm_id: "f1".into(),
            year: 2021,
            morale_rating: Some(5),
            metadata: BTreeMap::from([("category".to_string(), "culture".to_string())]),
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        save_corpus(&path, &docs).unwrap();
        let back = load_corpus(&path, CorpusFormat::Jsonl).unwrap();
        assert_eq!(docs, back);
    }
}
