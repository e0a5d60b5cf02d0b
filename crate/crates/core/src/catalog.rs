//! Line-oriented catalog files: one JSON object per line, exact values only.
//!
//! Every line carries the same leading fields in a fixed order:
//! `schema_version, kind, n, K, m, w, S, classes, probabilities,
//! z_expectations, order, audit, extras`. Fields that do not apply to a
//! record kind are omitted. Probability maps list the nonzero entries only;
//! the zeros are restored from the residue classes when reading.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::AuditSummary;
use crate::bitspace::{BitString, SearchParams};
use crate::codes::{Amplitude, LogicalCode};
use crate::exactnum::Rational;
use crate::sweep::{DedupKey, FlaggedRecord, HitRecord};
use crate::zfeas::ProbabilityTable;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("writing record {index}: {source}")]
    Write { index: usize, source: std::io::Error },
    #[error("reading line {line}: {source}")]
    Read { line: usize, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: schema version {found}, expected {SCHEMA_VERSION}")]
    Schema { line: usize, found: u32 },
    #[error("{path}: {source}")]
    Open { path: String, source: std::io::Error },
}

/// A built code with an optional stored verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeRecord {
    pub label: String,
    pub code: LogicalCode,
    pub order: Option<u32>,
    pub audit: Option<AuditSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CatalogRecord {
    Hit(HitRecord),
    Code(CodeRecord),
    Flagged(FlaggedRecord),
}

impl CatalogRecord {
    pub fn kind(&self) -> Kind {
        match self {
            CatalogRecord::Hit(_) => Kind::Hit,
            CatalogRecord::Code(_) => Kind::Code,
            CatalogRecord::Flagged(_) => Kind::Flagged,
        }
    }

    /// `(n, K, m, w, S)` for hits and codes; flagged records have none.
    pub fn dedup_key(&self) -> Option<DedupKey> {
        match self {
            CatalogRecord::Hit(h) => Some(h.dedup_key()),
            CatalogRecord::Code(c) => Some((
                c.code.n(),
                c.code.k(),
                c.code.m(),
                c.code.weights().to_vec(),
                c.code.residues().to_vec(),
            )),
            CatalogRecord::Flagged(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Hit,
    Code,
    Flagged,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalingKey {
    w: Vec<u32>,
    #[serde(rename = "S")]
    s: Vec<u32>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Extras {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    states: Option<Vec<BTreeMap<BitString, Amplitude>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scaling_key: Option<ScalingKey>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stage: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

/// Wire layout; field order is the file format.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    schema_version: u32,
    kind: Kind,
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    m: u32,
    w: Vec<u32>,
    #[serde(rename = "S")]
    s: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probabilities: Option<Vec<BTreeMap<BitString, Rational>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    z_expectations: Option<Vec<Vec<Rational>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    audit: Option<AuditSummary>,
    #[serde(default)]
    extras: Extras,
}

impl Line {
    fn header(kind: Kind, params: &SearchParams) -> Line {
        Line {
            schema_version: SCHEMA_VERSION,
            kind,
            n: params.n(),
            k: params.k(),
            m: params.m(),
            w: params.weights().to_vec(),
            s: params.residues().to_vec(),
            classes: None,
            probabilities: None,
            z_expectations: None,
            order: None,
            audit: None,
            extras: Extras::default(),
        }
    }

    fn from_record(record: &CatalogRecord) -> Line {
        match record {
            CatalogRecord::Hit(h) => {
                let nonzero = h
                    .probabilities
                    .blocks()
                    .iter()
                    .map(|b| b.iter().filter(|(_, p)| !p.is_zero()).map(|(x, p)| (*x, p.clone())).collect())
                    .collect();
                let (w, s) = h.scaling_key.clone();
                Line {
                    classes: Some(h.class_sizes.clone()),
                    probabilities: Some(nonzero),
                    z_expectations: Some(h.z_expectations.clone()),
                    order: Some(h.order),
                    audit: Some(h.audit.clone()),
                    extras: Extras {
                        scaling_key: Some(ScalingKey { w, s }),
                        ..Extras::default()
                    },
                    ..Line::header(Kind::Hit, &h.params)
                }
            }
            CatalogRecord::Code(c) => Line {
                schema_version: SCHEMA_VERSION,
                kind: Kind::Code,
                n: c.code.n(),
                k: c.code.k(),
                m: c.code.m(),
                w: c.code.weights().to_vec(),
                s: c.code.residues().to_vec(),
                classes: None,
                probabilities: None,
                z_expectations: None,
                order: c.order,
                audit: c.audit.clone(),
                extras: Extras {
                    label: Some(c.label.clone()),
                    states: Some(c.code.states().to_vec()),
                    ..Extras::default()
                },
            },
            CatalogRecord::Flagged(f) => Line {
                extras: Extras {
                    stage: Some(f.stage.clone()),
                    reason: Some(f.reason.clone()),
                    ..Extras::default()
                },
                ..Line::header(Kind::Flagged, &f.params)
            },
        }
    }

    fn into_record(self) -> Result<CatalogRecord, String> {
        if self.n != self.w.len() || self.k != self.s.len() {
            return Err(format!(
                "n = {} and K = {} disagree with |w| = {} and |S| = {}",
                self.n,
                self.k,
                self.w.len(),
                self.s.len()
            ));
        }
        match self.kind {
            Kind::Hit => {
                let params = SearchParams::new(self.m, self.w, self.s).map_err(|e| e.to_string())?;
                let class_sizes = self.classes.ok_or("hit without classes")?;
                let stored = self.probabilities.ok_or("hit without probabilities")?;
                let classes = params.classes();
                let actual: Vec<usize> = classes.iter().map(|c| c.len()).collect();
                if actual != class_sizes {
                    return Err(format!("class sizes {class_sizes:?} differ from {actual:?}"));
                }
                if stored.len() != classes.len() {
                    return Err(format!("{} probability blocks for K = {}", stored.len(), classes.len()));
                }
                let mut blocks = Vec::with_capacity(classes.len());
                for (j, (block, class)) in stored.into_iter().zip(&classes).enumerate() {
                    if let Some(x) = block.keys().find(|x| !class.contains(x)) {
                        return Err(format!("{x} is not in the residue class of block {j}"));
                    }
                    let mut full = block;
                    for x in &class.members {
                        full.entry(*x).or_insert_with(Rational::zero);
                    }
                    blocks.push(full);
                }
                let scaling = self.extras.scaling_key.ok_or("hit without scaling_key")?;
                if self.extras.label.is_some() || self.extras.states.is_some() || self.extras.stage.is_some() {
                    return Err("hit carries extras of another kind".into());
                }
                Ok(CatalogRecord::Hit(HitRecord {
                    params,
                    class_sizes,
                    probabilities: ProbabilityTable::from_blocks(blocks),
                    z_expectations: self.z_expectations.ok_or("hit without z_expectations")?,
                    order: self.order.ok_or("hit without order")?,
                    audit: self.audit.ok_or("hit without audit")?,
                    scaling_key: (scaling.w, scaling.s),
                }))
            }
            Kind::Code => {
                if self.classes.is_some() || self.probabilities.is_some() || self.z_expectations.is_some() {
                    return Err("code records carry states, not probabilities".into());
                }
                let states = self.extras.states.ok_or("code without states")?;
                let code = LogicalCode::new(self.m, self.w, self.s, states).map_err(|e| e.to_string())?;
                Ok(CatalogRecord::Code(CodeRecord {
                    label: self.extras.label.unwrap_or_default(),
                    code,
                    order: self.order,
                    audit: self.audit,
                }))
            }
            Kind::Flagged => {
                let params = SearchParams::new(self.m, self.w, self.s).map_err(|e| e.to_string())?;
                Ok(CatalogRecord::Flagged(FlaggedRecord {
                    params,
                    stage: self.extras.stage.ok_or("flagged record without stage")?,
                    reason: self.extras.reason.ok_or("flagged record without reason")?,
                }))
            }
        }
    }
}

/// Renders one record as a single line without the trailing newline.
pub fn render_record(record: &CatalogRecord) -> String {
    serde_json::to_string(&Line::from_record(record)).expect("catalog lines always serialize")
}

/// Parses one line; `line` is only used in error messages.
pub fn parse_record(text: &str, line: usize) -> Result<CatalogRecord, CatalogError> {
    let parse = |message: String| CatalogError::Parse { line, message };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| parse(e.to_string()))?;
    match value.get("schema_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(CatalogError::Schema {
                line,
                found: u32::try_from(v).unwrap_or(u32::MAX),
            })
        }
        None => return Err(parse("missing schema_version".into())),
    }
    let wire: Line = serde_json::from_value(value).map_err(|e| parse(e.to_string()))?;
    wire.into_record().map_err(parse)
}

/// Writes one line per record and returns the count.
pub fn write_catalog<W: Write>(records: &[CatalogRecord], destination: W) -> Result<usize, CatalogError> {
    let mut out = BufWriter::new(destination);
    for (index, record) in records.iter().enumerate() {
        writeln!(out, "{}", render_record(record)).map_err(|source| CatalogError::Write { index, source })?;
    }
    out.flush().map_err(|source| CatalogError::Write {
        index: records.len().saturating_sub(1),
        source,
    })?;
    Ok(records.len())
}

pub fn write_catalog_file(records: &[CatalogRecord], path: &Path) -> Result<usize, CatalogError> {
    let file = File::create(path).map_err(|source| CatalogError::Open {
        path: path.display().to_string(),
        source,
    })?;
    write_catalog(records, file)
}

/// A parsed catalog; `duplicates` holds `(line, first line)` pairs that
/// share a dedup key.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Catalog {
    pub records: Vec<CatalogRecord>,
    pub duplicates: Vec<(usize, usize)>,
}

/// Strict reader: the first malformed line aborts. Blank lines are skipped.
/// Line numbers are 1-based.
pub fn read_catalog<R: BufRead>(source: R) -> Result<Catalog, CatalogError> {
    let mut catalog = Catalog::default();
    let mut seen = HashMap::new();
    for (i, text) in source.lines().enumerate() {
        let line = i + 1;
        let text = text.map_err(|source| CatalogError::Read { line, source })?;
        if text.trim().is_empty() {
            continue;
        }
        let record = parse_record(&text, line)?;
        if let Some(key) = record.dedup_key() {
            if let Some(&first) = seen.get(&key) {
                log::warn!("line {line}: duplicate of line {first}");
                catalog.duplicates.push((line, first));
            } else {
                seen.insert(key, line);
            }
        }
        catalog.records.push(record);
    }
    Ok(catalog)
}

pub fn read_catalog_file(path: &Path) -> Result<Catalog, CatalogError> {
    let file = File::open(path).map_err(|source| CatalogError::Open {
        path: path.display().to_string(),
        source,
    })?;
    read_catalog(BufReader::new(file))
}
