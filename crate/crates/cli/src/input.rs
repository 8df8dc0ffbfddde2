//! CSV ingestion: one file per arm, or one file with an arm column.

use std::path::{Path, PathBuf};

use dynborrow::data::{ControlSample, Covariates, OutcomeKind, Source};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub struct Table {
    pub path: PathBuf,
    pub headers: Vec<String>,
    pub rows: Vec<csv::StringRecord>,
    pub sha256: String,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let sha256 = format!("{:x}", Sha256::digest(&bytes));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes.as_slice());
    let headers = rdr.headers()?.iter().map(str::to_string).collect();
    let rows = rdr.records().collect::<Result<Vec<_>, _>>()?;
    Ok(Table {
        path: path.to_path_buf(),
        headers,
        rows,
        sha256,
    })
}

impl Table {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Input(format!(
                "{}: missing column `{name}` (available: {})",
                self.path.display(),
                self.headers.join(", ")
            ))
        })
    }

    fn number(&self, row: usize, col: usize) -> Result<f64> {
        let cell = self.rows[row].get(col).unwrap_or("");
        let at = || format!("{} row {}, column `{}`", self.path.display(), row + 2, self.headers[col]);
        if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
            return Err(CliError::Input(format!(
                "{}: missing value (missing values are rejected, not imputed)",
                at()
            )));
        }
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(CliError::Input(format!("{}: non-numeric value `{cell}`", at()))),
        }
    }
}

/// Raw numeric columns of one arm before the outcome kind is settled.
pub struct Arm {
    pub source: Source,
    pub outcomes: Vec<f64>,
    pub covariates: Option<Covariates>,
}

/// Pulls the outcome and covariate columns, optionally keeping only rows
/// whose `filter` column equals the given label.
pub fn extract(
    table: &Table,
    source: Source,
    filter: Option<(&str, &str)>,
    outcome: &str,
    covariates: &[String],
) -> Result<Arm> {
    let y = table.column(outcome)?;
    let xs = covariates
        .iter()
        .map(|c| table.column(c))
        .collect::<Result<Vec<_>>>()?;
    let keep = match filter {
        Some((col, label)) => {
            let a = table.column(col)?;
            (0..table.rows.len())
                .filter(|&i| table.rows[i].get(a) == Some(label))
                .collect::<Vec<_>>()
        }
        None => (0..table.rows.len()).collect(),
    };
    let outcomes = keep.iter().map(|&i| table.number(i, y)).collect::<Result<Vec<_>>>()?;
    let covariates = if xs.is_empty() {
        None
    } else {
        let mut values = Vec::with_capacity(keep.len() * xs.len());
        for &i in &keep {
            for &j in &xs {
                values.push(table.number(i, j)?);
            }
        }
        Some(Covariates::from_row_major(keep.len(), xs.len(), values)?)
    };
    Ok(Arm {
        source,
        outcomes,
        covariates,
    })
}

/// `None` means auto: binary when every outcome in every arm is 0 or 1.
pub fn settle_kind(requested: Option<OutcomeKind>, arms: &[&Arm]) -> OutcomeKind {
    requested.unwrap_or_else(|| {
        let binary = arms
            .iter()
            .flat_map(|a| &a.outcomes)
            .all(|v| *v == 0.0 || *v == 1.0);
        if binary {
            OutcomeKind::Binary
        } else {
            OutcomeKind::Continuous
        }
    })
}

pub fn into_sample(arm: Arm, kind: OutcomeKind) -> Result<ControlSample> {
    let n = arm.outcomes.len();
    let label = match arm.source {
        Source::Internal => "internal",
        Source::External => "external",
        Source::Treated => "treated",
    };
    let sample = ControlSample::new(arm.outcomes, kind, arm.source).map_err(|e| match e {
        dynborrow::Error::DegenerateSample { .. } => {
            CliError::Degenerate(format!("{label} arm has {n} usable rows, need at least 2"))
        }
        other => CliError::Input(format!("{label} arm: {other}")),
    })?;
    match arm.covariates {
        Some(x) => Ok(sample.with_covariates(x)?),
        None => Ok(sample),
    }
}
