//! Loader for binary-response CSV data such as the Statlog heart data.
//!
//! The file must have a header row. One named column holds the response,
//! coded `0/1` or `1/2` (the latter is remapped to `0/1`). Every other column
//! is a numeric covariate. Covariates are standardized to mean 0 and sample
//! standard deviation 1, and an intercept column of ones is placed first in
//! the design, so coefficient 1 is the intercept.

use std::path::Path;

use serde::Serialize;

use crate::models::logistic::LogisticPosterior;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Standardization {
    pub column: String,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeartData {
    /// Column names of the design, starting with `intercept`.
    pub columns: Vec<String>,
    /// Standardized rows including the leading intercept.
    pub rows: Vec<Vec<f64>>,
    pub response: Vec<f64>,
    pub transform: Vec<Standardization>,
    /// Non-fatal notes, e.g. response recoding.
    pub warnings: Vec<String>,
}

impl HeartData {
    pub fn n_obs(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn posterior(&self, prior_sd: f64) -> Result<LogisticPosterior> {
        LogisticPosterior::new(&self.rows, &self.response, prior_sd)
    }
}

pub fn load_heart_dataset(path: impl AsRef<Path>, response_column: &str) -> Result<HeartData> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Dataset(format!("cannot open {}: {e}", path.display())))?;
    parse_heart_csv(file, response_column)
}

pub fn parse_heart_csv<R: std::io::Read>(reader: R, response_column: &str) -> Result<HeartData> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Dataset("file is empty or has no header".into()));
    }
    let target = header
        .iter()
        .position(|h| h == response_column)
        .ok_or_else(|| Error::Dataset(format!("response column `{response_column}` not found in header")))?;
    if header.len() < 2 {
        return Err(Error::Dataset("need at least one covariate column".into()));
    }

    let mut raw_rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_response: Vec<f64> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        // Line numbers count the header as line 1.
        let line = i + 2;
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::Dataset(format!(
                "line {line}: expected {} columns, found {}",
                header.len(),
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(header.len() - 1);
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Dataset(format!("line {line}: column `{}` is not a number: `{field}`", header[j])))?;
            if j == target {
                raw_response.push(v);
            } else {
                row.push(v);
            }
        }
        raw_rows.push(row);
    }
    if raw_rows.is_empty() {
        return Err(Error::Dataset("file has a header but no data rows".into()));
    }

    let mut warnings = Vec::new();
    let response = recode_response(&raw_response, &mut warnings)?;

    let names: Vec<String> = header.iter().enumerate().filter(|(j, _)| *j != target).map(|(_, h)| h.clone()).collect();
    let n = raw_rows.len() as f64;
    let mut transform = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate() {
        let mean = raw_rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = raw_rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let sd = var.sqrt();
        if !(sd > 0.0) {
            return Err(Error::Dataset(format!("covariate `{name}` is constant and cannot be standardized")));
        }
        transform.push(Standardization { column: name.clone(), mean, sd });
    }
    let rows = raw_rows
        .iter()
        .map(|r| {
            std::iter::once(1.0)
                .chain(r.iter().zip(&transform).map(|(v, t)| (v - t.mean) / t.sd))
                .collect()
        })
        .collect();
    let columns = std::iter::once("intercept".to_string()).chain(names).collect();
    Ok(HeartData { columns, rows, response, transform, warnings })
}

fn recode_response(raw: &[f64], warnings: &mut Vec<String>) -> Result<Vec<f64>> {
    let is = |allowed: [f64; 2]| raw.iter().all(|y| allowed.contains(y));
    if is([0.0, 1.0]) {
        return Ok(raw.to_vec());
    }
    if is([1.0, 2.0]) {
        warnings.push("response coded 1/2; remapped 1 -> 0 (absent) and 2 -> 1 (present)".into());
        return Ok(raw.iter().map(|y| y - 1.0).collect());
    }
    let (i, bad) = raw
        .iter()
        .enumerate()
        .find(|(_, y)| **y != 0.0 && **y != 1.0 && **y != 2.0)
        .map(|(i, y)| (i, *y))
        .unwrap_or_else(|| {
            let i = raw.iter().position(|y| *y == 0.0).unwrap_or(0);
            (i, raw[i])
        });
    Err(Error::Dataset(format!("line {}: response {bad} is not binary (mixed or unknown coding)", i + 2)))
}
