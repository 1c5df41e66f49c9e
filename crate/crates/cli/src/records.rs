use anyhow::{Context, Result};
use pprl_linkage::RawRecord;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Reads a record file: UTF-8, comma-separated, with the header
/// `first_name,last_name,birth_name,city,postcode,birth_year,birth_month,
/// birth_day`; empty strings mean missing.
pub fn read_records(path: &Path) -> Result<Vec<RawRecord>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for row in reader.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_records(path: &Path, records: &[RawRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("writing {}", path.display()))?;
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

/// One row of the ground-truth file: which record in set B (if any) is the
/// same entity as record `query_id` of set A.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthRow {
    pub query_id: u64,
    /// Empty when the query has no counterpart.
    pub db_id: Option<u64>,
}

pub fn read_truth(path: &Path) -> Result<Vec<Option<u64>>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows: Vec<TruthRow> = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    rows.sort_by_key(|r| r.query_id);
    Ok(rows.into_iter().map(|r| r.db_id).collect())
}

pub fn write_truth(path: &Path, truth: &[Option<u64>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for (i, db_id) in truth.iter().enumerate() {
        writer.serialize(TruthRow {
            query_id: i as u64,
            db_id: *db_id,
        })?;
    }
    writer.flush()?;
    Ok(())
}

/// One best-match result per query record: the winning index and the exact
/// score fraction, no threshold applied.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScoreRow {
    pub query_id: u64,
    pub index: u64,
    pub numerator: u64,
    pub denominator: u64,
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRow>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows: Vec<ScoreRow> = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    rows.sort_by_key(|r| r.query_id);
    Ok(rows)
}

pub fn write_scores(path: &Path, rows: &[ScoreRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
