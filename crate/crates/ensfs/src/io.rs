//! Data files and their metadata sidecars.
//!
//! The data file is comma-separated with a header row; an empty cell is a
//! missing value. The sidecar is TOML:
//!
//! ```toml
//! target = "os_months"
//! censoring = "censored"
//!
//! [features.age]
//! kind = "numeric"
//! block = "p"
//!
//! [features.who]
//! kind = "ordinal"
//! block = "p"
//! levels = ["0", "1", "2"]
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ensfs_core::data::{Block, Cell, Dataset, FeatureKind, FeatureMeta, Target};
use ensfs_core::preprocess::scale::TransformParams;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, EnsfsError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub kind: FeatureKind,
    pub block: Block,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub target: String,
    pub censoring: String,
    #[serde(default)]
    pub features: BTreeMap<String, FeatureEntry>,
}

pub const DEFAULT_TARGET: &str = "os_months";
pub const DEFAULT_CENSORING: &str = "censored";

impl Metadata {
    pub fn of(ds: &Dataset) -> Self {
        Metadata {
            target: DEFAULT_TARGET.into(),
            censoring: DEFAULT_CENSORING.into(),
            features: ds
                .features
                .iter()
                .map(|f| {
                    let entry = FeatureEntry {
                        kind: f.kind,
                        block: f.block,
                        levels: f.levels.clone(),
                    };
                    (f.name.clone(), entry)
                })
                .collect(),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| EnsfsError::Parse {
        path: path.to_path_buf(),
        message: e.to_string().trim_end().to_string(),
    })
}

pub fn load_metadata(path: &Path) -> Result<Metadata> {
    parse_toml(path, &read_text(path)?)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim() {
        "1" | "true" | "TRUE" | "True" | "yes" => Some(true),
        "0" | "false" | "FALSE" | "False" | "no" => Some(false),
        _ => None,
    }
}

/// Reads a data file and its sidecar into a validated dataset.
pub fn load_dataset(data_path: &Path, meta_path: &Path) -> Result<Dataset> {
    let meta = load_metadata(meta_path)?;
    let text = read_text(data_path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| EnsfsError::SchemaMismatch(format!("column {name:?} declared in metadata is missing from the data")))
    };
    let target_col = find(&meta.target)?;
    let censor_col = find(&meta.censoring)?;

    let mut features = Vec::new();
    let mut positions = Vec::new();
    for (pos, name) in header.iter().enumerate() {
        if pos == target_col || pos == censor_col {
            continue;
        }
        let entry = meta
            .features
            .get(name)
            .ok_or_else(|| EnsfsError::SchemaMismatch(format!("column {name:?} has no metadata entry")))?;
        features.push(FeatureMeta {
            name: name.clone(),
            block: entry.block,
            kind: entry.kind,
            levels: entry.levels.clone(),
        });
        positions.push(pos);
    }
    if let Some(extra) = meta.features.keys().find(|k| !header.contains(k)) {
        return Err(EnsfsError::SchemaMismatch(format!("metadata feature {extra:?} is missing from the data")));
    }

    let mut cells = Vec::new();
    let mut target = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(EnsfsError::SchemaMismatch(format!(
                "row {row} has {} fields, header has {}",
                record.len(),
                header.len()
            )));
        }
        let mut out = Vec::with_capacity(features.len());
        for (f, &pos) in features.iter().zip(&positions) {
            let raw = &record[pos];
            let bad = || EnsfsError::InvalidLevel {
                row,
                column: f.name.clone(),
                value: raw.to_string(),
            };
            let cell = if raw.is_empty() {
                Cell::Missing
            } else if f.kind == FeatureKind::Numeric {
                match raw.trim().parse::<f64>() {
                    Ok(x) if x.is_finite() => Cell::Num(x),
                    _ => return Err(bad()),
                }
            } else {
                Cell::Level(f.level_index(raw).ok_or_else(bad)?)
            };
            out.push(cell);
        }
        let os_raw = &record[target_col];
        let os_months = os_raw.trim().parse::<f64>().map_err(|_| EnsfsError::InvalidLevel {
            row,
            column: meta.target.clone(),
            value: os_raw.to_string(),
        })?;
        let c_raw = &record[censor_col];
        let censored = parse_bool(c_raw).ok_or_else(|| EnsfsError::InvalidLevel {
            row,
            column: meta.censoring.clone(),
            value: c_raw.to_string(),
        })?;
        cells.push(out);
        target.push(Target { os_months, censored });
    }

    Dataset { features, cells, target }
        .validated()
        .map_err(|e| EnsfsError::SchemaMismatch(e.to_string()))
}

/// Writes the data file and sidecar; `load_dataset` reads back an equal dataset.
pub fn save_dataset(ds: &Dataset, data_path: &Path, meta_path: &Path) -> Result<()> {
    if let Some(v) = ds.validate().first() {
        return Err(EnsfsError::SchemaMismatch(v.to_string()));
    }
    for f in &ds.features {
        if f.name == DEFAULT_TARGET || f.name == DEFAULT_CENSORING {
            return Err(EnsfsError::SchemaMismatch(format!("feature name {:?} is reserved", f.name)));
        }
        if f.levels.iter().any(String::is_empty) {
            return Err(EnsfsError::SchemaMismatch(format!("{} has an empty level label", f.name)));
        }
    }
    let meta = Metadata::of(ds);
    let meta_text = toml::to_string(&meta).map_err(|e| EnsfsError::SchemaMismatch(e.to_string()))?;

    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header: Vec<&str> = ds.features.iter().map(|f| f.name.as_str()).collect();
    header.push(DEFAULT_TARGET);
    header.push(DEFAULT_CENSORING);
    writer.write_record(&header)?;
    for (row, t) in ds.cells.iter().zip(&ds.target) {
        let mut record: Vec<String> = row
            .iter()
            .zip(&ds.features)
            .map(|(cell, f)| match *cell {
                Cell::Missing => String::new(),
                Cell::Num(x) => format!("{x:?}"),
                Cell::Level(l) => f.levels[l].clone(),
            })
            .collect();
        record.push(format!("{:?}", t.os_months));
        record.push(if t.censored { "1" } else { "0" }.into());
        writer.write_record(&record)?;
    }
    let bytes = writer.into_inner().map_err(|e| EnsfsError::SchemaMismatch(e.to_string()))?;
    let data_text = String::from_utf8(bytes).map_err(|e| EnsfsError::SchemaMismatch(e.to_string()))?;

    write_text(data_path, &data_text)?;
    write_text(meta_path, &meta_text)
}

pub fn save_transform_params(params: &TransformParams, path: &Path) -> Result<()> {
    let text = toml::to_string(params).map_err(|e| EnsfsError::Config(e.to_string()))?;
    write_text(path, &text)
}

pub fn load_transform_params(path: &Path) -> Result<TransformParams> {
    parse_toml(path, &read_text(path)?)
}
