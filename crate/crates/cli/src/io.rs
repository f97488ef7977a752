//! CSV input parsing and output formatting.

use std::path::Path;

use betagos::cgh::{CloneRecord, CloneSeries};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

fn input_err(path: &Path, line: Option<u64>, msg: impl Into<String>) -> CliError {
    CliError::Input { path: path.to_path_buf(), line, msg: msg.into() }
}

/// One value per row, in order. A non-numeric first row is taken as a
/// header, and the column named `column` is read if present; otherwise the
/// first column.
pub fn read_observations(path: &Path, column: &str) -> CliResult<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| input_err(path, None, e.to_string()))?;
    let mut out = Vec::new();
    let mut col = 0;
    for (i, rec) in rdr.records().enumerate() {
        let line = Some(i as u64 + 1);
        let rec = rec.map_err(|e| input_err(path, e.position().map(|p| p.line()).or(line), e.to_string()))?;
        let line = rec.position().map(|p| p.line()).or(line);
        let field = rec.get(col).unwrap_or("");
        if field.is_empty() && rec.len() <= 1 {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(v) => return Err(input_err(path, line, format!("non-finite observation {v}"))),
            Err(_) if i == 0 => {
                col = rec.iter().position(|h| h.eq_ignore_ascii_case(column)).unwrap_or(0);
            }
            Err(_) => return Err(input_err(path, line, format!("cannot parse `{field}` as a number"))),
        }
    }
    if out.is_empty() {
        return Err(input_err(path, None, "no observations"));
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct CloneRow {
    #[serde(default)]
    sample_id: Option<String>,
    clone_id: String,
    chromosome: String,
    kb_start: f64,
    kb_end: f64,
    log2_ratio: f64,
}

/// Read clone tables. A `sample_id` column splits one file into several
/// samples; otherwise each file is one sample named after its stem.
pub fn read_clone_samples(paths: &[impl AsRef<Path>]) -> CliResult<Vec<(String, CloneSeries)>> {
    let mut samples: Vec<(String, Vec<CloneRecord>)> = Vec::new();
    for path in paths {
        let path = path.as_ref();
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| input_err(path, None, e.to_string()))?;
        for row in rdr.deserialize::<CloneRow>() {
            let row = row.map_err(|e| input_err(path, e.position().map(|p| p.line()), e.to_string()))?;
            let id = row.sample_id.filter(|s| !s.is_empty()).unwrap_or_else(|| stem.clone());
            let rec = CloneRecord {
                clone_id: row.clone_id,
                chromosome: row.chromosome,
                kb_start: row.kb_start,
                kb_end: row.kb_end,
                log2_ratio: row.log2_ratio,
            };
            match samples.iter_mut().find(|(s, _)| *s == id) {
                Some((_, recs)) => recs.push(rec),
                None => samples.push((id, vec![rec])),
            }
        }
    }
    if samples.is_empty() {
        return Err(CliError::Usage("no clone records in the input".into()));
    }
    samples
        .into_iter()
        .map(|(id, recs)| {
            let series = CloneSeries::new(recs).map_err(|e| CliError::Usage(format!("sample {id}: {e}")))?;
            Ok((id, series))
        })
        .collect()
}

/// Serialise rows to CSV bytes with a header from the row type.
pub fn csv_bytes<S: Serialize>(rows: impl IntoIterator<Item = S>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Other(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Other(e.to_string()))
}

/// CSV with an explicit header and string records.
pub fn csv_table(header: &[String], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Other(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Other(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Other(e.to_string()))
}
