//! Core right-censored survival data types, the past-event set, the
//! concordance index and CSV ingestion.
//!
//! The on-disk format is a UTF-8 CSV with header `time,status,x1,...,xd`,
//! one subject per row. `status` is 1 when the failure was observed and 0
//! when the subject is right-censored. Missing values are not supported;
//! impute upstream.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// One subject: covariate vector, observed time `Y = min(T, C)` and the
/// event indicator (`true` = failure observed, `false` = censored).
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalRecord {
    covariates: Vec<f64>,
    time: f64,
    event: bool,
}

impl SurvivalRecord {
    pub fn new(covariates: Vec<f64>, time: f64, event: bool) -> Result<Self> {
        if !time.is_finite() || time < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "time must be finite and non-negative, got {time}"
            )));
        }
        if covariates.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "covariates contain a non-finite value".into(),
            ));
        }
        Ok(Self {
            covariates,
            time,
            event,
        })
    }

    pub fn covariates(&self) -> &[f64] {
        &self.covariates
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn event(&self) -> bool {
        self.event
    }
}

/// An ordered collection of records with fixed covariate dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    records: Vec<SurvivalRecord>,
    dim: usize,
}

impl SurvivalDataset {
    pub fn new(records: Vec<SurvivalRecord>) -> Result<Self> {
        let dim = match records.first() {
            Some(r) => r.covariates.len(),
            None => return Err(Error::EmptyDataset),
        };
        for r in &records {
            if r.covariates.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.covariates.len(),
                });
            }
        }
        Ok(Self { records, dim })
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn records(&self) -> &[SurvivalRecord] {
        &self.records
    }

    pub fn record(&self, i: usize) -> &SurvivalRecord {
        &self.records[i]
    }

    pub fn time(&self, i: usize) -> f64 {
        self.records[i].time
    }

    pub fn event(&self, i: usize) -> bool {
        self.records[i].event
    }

    pub fn covariate(&self, i: usize, j: usize) -> f64 {
        self.records[i].covariates[j]
    }

    /// Copy of covariate column `j` in subject order.
    pub fn feature_column(&self, j: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.covariates[j]).collect()
    }

    /// Sub-dataset containing the given subjects, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<SurvivalDataset> {
        let records = indices.iter().map(|&i| self.records[i].clone()).collect();
        SurvivalDataset::new(records)
    }
}

/// Concordance index together with the number of comparable pairs |ε|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcordanceResult {
    pub c_index: f64,
    /// Pairs (i, j) with Yᵢ < Yⱼ and δᵢ = 1.
    pub comparable_pairs: u64,
    /// Comparable pairs with f(xᵢ) < f(xⱼ).
    pub concordant_pairs: u64,
}

/// Past event set P(t): subjects whose failure occurred strictly before `t`.
/// Censored subjects are never included; an empty set is a valid result.
pub fn past_event_set(dataset: &SurvivalDataset, t: f64) -> Vec<usize> {
    dataset
        .records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.event && r.time < t)
        .map(|(i, _)| i)
        .collect()
}

/// Concordance index of a score vector against the dataset.
///
/// Counts pairs with Yᵢ < Yⱼ and δᵢ = 1; a pair is concordant when
/// scoreᵢ < scoreⱼ, strictly, so tied scores count as discordant and tied
/// times form no pair.
pub fn c_index(scores: &[f64], dataset: &SurvivalDataset) -> Result<ConcordanceResult> {
    let n = dataset.n();
    if scores.len() != n {
        return Err(Error::ScoreLength {
            expected: n,
            found: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidConfig("scores contain a non-finite value".into()));
    }
    let mut comparable = 0u64;
    let mut concordant = 0u64;
    for i in 0..n {
        if !dataset.event(i) {
            continue;
        }
        let yi = dataset.time(i);
        for j in 0..n {
            if dataset.time(j) > yi {
                comparable += 1;
                if scores[i] < scores[j] {
                    concordant += 1;
                }
            }
        }
    }
    if comparable == 0 {
        return Err(Error::NoComparablePairs);
    }
    Ok(ConcordanceResult {
        c_index: concordant as f64 / comparable as f64,
        comparable_pairs: comparable,
        concordant_pairs: concordant,
    })
}

/// Number of comparable pairs |ε| without scoring anything. Used to detect
/// degenerate evaluation sets up front.
pub fn comparable_pairs(dataset: &SurvivalDataset) -> u64 {
    let n = dataset.n();
    let mut count = 0u64;
    for i in 0..n {
        if !dataset.event(i) {
            continue;
        }
        let yi = dataset.time(i);
        count += (0..n).filter(|&j| dataset.time(j) > yi).count() as u64;
    }
    count
}

/// Sort by ascending time; ties broken by event-before-censored, then by
/// original index. Returns the sorted dataset and the permutation `order`
/// with `sorted[r] = original[order[r]]`.
pub fn sort_by_time(dataset: &SurvivalDataset) -> (SurvivalDataset, Vec<usize>) {
    let mut order: Vec<usize> = (0..dataset.n()).collect();
    order.sort_by(|&a, &b| {
        dataset
            .time(a)
            .partial_cmp(&dataset.time(b))
            .expect("times are finite")
            .then_with(|| dataset.event(b).cmp(&dataset.event(a)))
            .then_with(|| a.cmp(&b))
    });
    let records = order.iter().map(|&i| dataset.records[i].clone()).collect();
    let sorted = SurvivalDataset {
        records,
        dim: dataset.dim,
    };
    (sorted, order)
}

/// Load a dataset from the standard CSV format.
pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<SurvivalDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("cannot open {}: {e}", path.as_ref().display()),
            )),
            _ => Error::Header(e.to_string()),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Header(e.to_string()))?
        .clone();
    let dim = validate_header(&headers)?;

    let column_name = |c: usize| -> String {
        match c {
            0 => "time".to_string(),
            1 => "status".to_string(),
            c => format!("x{}", c - 1),
        }
    };

    let mut records = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let row_no = idx + 1; // 1-based data row
        let row = row.map_err(|e| Error::Cell {
            row: row_no,
            column: "-".into(),
            message: e.to_string(),
        })?;
        if row.len() != dim + 2 {
            return Err(Error::Cell {
                row: row_no,
                column: "-".into(),
                message: format!("expected {} fields, found {}", dim + 2, row.len()),
            });
        }
        let parse = |c: usize| -> Result<f64> {
            let raw = row.get(c).unwrap();
            let v: f64 = raw.trim().parse().map_err(|_| Error::Cell {
                row: row_no,
                column: column_name(c),
                message: format!("cannot parse {raw:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Cell {
                    row: row_no,
                    column: column_name(c),
                    message: format!("non-finite value {raw:?}"),
                });
            }
            Ok(v)
        };

        let time = parse(0)?;
        if time < 0.0 {
            return Err(Error::Cell {
                row: row_no,
                column: "time".into(),
                message: format!("negative time {time}"),
            });
        }
        let status = parse(1)?;
        let event = if status == 0.0 {
            false
        } else if status == 1.0 {
            true
        } else {
            return Err(Error::Cell {
                row: row_no,
                column: "status".into(),
                message: format!("status must be 0 or 1, got {status}"),
            });
        };
        let mut covariates = Vec::with_capacity(dim);
        for c in 2..dim + 2 {
            covariates.push(parse(c)?);
        }
        records.push(SurvivalRecord {
            covariates,
            time,
            event,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(SurvivalDataset { records, dim })
}

/// Write a dataset in the standard CSV format.
pub fn write_csv<P: AsRef<Path>>(dataset: &SurvivalDataset, path: P) -> Result<()> {
    let mut out = String::new();
    out.push_str("time,status");
    for j in 1..=dataset.dim() {
        let _ = write!(out, ",x{j}");
    }
    out.push('\n');
    for r in dataset.records() {
        let _ = write!(out, "{},{}", r.time(), u8::from(r.event()));
        for v in r.covariates() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn validate_header(headers: &csv::StringRecord) -> Result<usize> {
    if headers.len() < 3 {
        return Err(Error::Header(
            "expected header time,status,x1,...,xd with at least one feature".into(),
        ));
    }
    if headers.get(0) != Some("time") {
        return Err(Error::Header(format!(
            "first column must be 'time', found {:?}",
            headers.get(0).unwrap_or("")
        )));
    }
    if headers.get(1) != Some("status") {
        return Err(Error::Header(format!(
            "second column must be 'status', found {:?}",
            headers.get(1).unwrap_or("")
        )));
    }
    let dim = headers.len() - 2;
    for j in 1..=dim {
        let expected = format!("x{j}");
        if headers.get(j + 1) != Some(expected.as_str()) {
            return Err(Error::Header(format!(
                "column {} must be {:?}, found {:?}",
                j + 2,
                expected,
                headers.get(j + 1).unwrap_or("")
            )));
        }
    }
    Ok(dim)
}
