//! CSV ingestion for funnel statistics and contingent-valuation surveys.
//!
//! Funnel schema:
//! `year,category,registered,submitted_to_court,convicted_persons,imprisoned_effective,synthetic_flag`
//!
//! Survey schema: `respondent_id,component,wtp,currency,protest_flag`
//!
//! Rows are validated in full; the first bad row aborts the load with its
//! line number.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::funnel::{CrimeCategory, FunnelRecord};
use crate::valuation::{Currency, NonUseKind, SurveyResponse};

pub const FUNNEL_COLUMNS: [&str; 7] = [
    "year",
    "category",
    "registered",
    "submitted_to_court",
    "convicted_persons",
    "imprisoned_effective",
    "synthetic_flag",
];

pub const SURVEY_COLUMNS: [&str; 5] = ["respondent_id", "component", "wtp", "currency", "protest_flag"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("{source_name}: missing column {column:?}")]
    MissingColumn { source_name: String, column: &'static str },
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: u64, message: String },
    #[error("{source_name}:{line}: {message}")]
    Invariant { source_name: String, line: u64, message: String },
    #[error("{source_name}:{line}: {message}")]
    Currency { source_name: String, line: u64, message: String },
    #[error("{source_name}: {message}")]
    Io { source_name: String, message: String },
}

impl IngestError {
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::MissingColumn { .. } => "MISSING_COLUMN",
            IngestError::Parse { .. } => "PARSE_ERROR",
            IngestError::Invariant { .. } => "INVARIANT_ERROR",
            IngestError::Currency { .. } => "CURRENCY_MISMATCH",
            IngestError::Io { .. } => "IO_ERROR",
        }
    }
}

/// Failure to open or load a file from disk.
#[derive(Debug)]
pub enum IngestOpenError {
    NotFound(PathBuf),
    Ingest(IngestError),
}

impl From<IngestError> for IngestOpenError {
    fn from(e: IngestError) -> Self {
        IngestOpenError::Ingest(e)
    }
}

pub fn read_file(path: &Path) -> Result<String, IngestOpenError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(IngestOpenError::NotFound(path.to_path_buf())),
        Err(e) => Err(IngestOpenError::Ingest(IngestError::Io {
            source_name: path.display().to_string(),
            message: e.to_string(),
        })),
    }
}

/// Reader over `text` with column positions resolved against `required`.
struct Table<'a> {
    source_name: &'a str,
    reader: csv::Reader<&'a [u8]>,
    index: Vec<usize>,
}

impl<'a> Table<'a> {
    fn open(text: &'a str, source_name: &'a str, required: &[&'static str]) -> Result<Self, IngestError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| IngestError::Parse { source_name: source_name.into(), line: 1, message: e.to_string() })?
            .clone();
        let index = required
            .iter()
            .map(|col| {
                headers
                    .iter()
                    .position(|h| h.eq_ignore_ascii_case(col))
                    .ok_or(IngestError::MissingColumn { source_name: source_name.into(), column: col })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Table { source_name, reader, index })
    }

    fn rows(&mut self) -> Vec<Result<Row<'_>, IngestError>> {
        let source_name = self.source_name;
        let index = &self.index;
        self.reader
            .records()
            .map(move |rec| {
                let rec = rec.map_err(|e| IngestError::Parse {
                    source_name: source_name.into(),
                    line: e.position().map_or(0, |p| p.line()),
                    message: e.to_string(),
                })?;
                let line = rec.position().map_or(0, |p| p.line());
                Ok(Row { source_name, line, rec, index })
            })
            .collect()
    }
}

struct Row<'a> {
    source_name: &'a str,
    line: u64,
    rec: csv::StringRecord,
    index: &'a [usize],
}

impl Row<'_> {
    fn raw(&self, col: usize) -> &str {
        self.rec.get(self.index[col]).unwrap_or("")
    }

    fn parse_err(&self, message: String) -> IngestError {
        IngestError::Parse { source_name: self.source_name.into(), line: self.line, message }
    }

    fn invariant_err(&self, message: String) -> IngestError {
        IngestError::Invariant { source_name: self.source_name.into(), line: self.line, message }
    }

    fn field<T: std::str::FromStr>(&self, col: usize, name: &str) -> Result<T, IngestError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(col);
        raw.parse().map_err(|e| self.parse_err(format!("{name}: cannot parse {raw:?}: {e}")))
    }

    fn flag(&self, col: usize, name: &str) -> Result<bool, IngestError> {
        match self.raw(col).to_ascii_lowercase().as_str() {
            "1" | "true" | "yes" | "y" => Ok(true),
            "0" | "false" | "no" | "n" | "" => Ok(false),
            other => Err(self.parse_err(format!("{name}: expected 0/1 or true/false, got {other:?}"))),
        }
    }
}

pub fn parse_funnel_csv(text: &str, source_name: &str) -> Result<Vec<FunnelRecord>, IngestError> {
    let mut table = Table::open(text, source_name, &FUNNEL_COLUMNS)?;
    let mut out = Vec::new();
    for row in table.rows() {
        let row = row?;
        let category: CrimeCategory =
            row.raw(1).parse().map_err(|e: crate::funnel::FunnelError| row.parse_err(e.to_string()))?;
        let record = FunnelRecord {
            year: row.field(0, "year")?,
            category,
            registered: row.field(2, "registered")?,
            submitted_to_court: row.field(3, "submitted_to_court")?,
            convicted_persons: row.field(4, "convicted_persons")?,
            imprisoned_effective: row.field(5, "imprisoned_effective")?,
            synthetic: row.flag(6, "synthetic_flag")?,
        };
        record.validate().map_err(|e| row.invariant_err(e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

pub fn ingest_funnel_csv(path: &Path) -> Result<Vec<FunnelRecord>, IngestOpenError> {
    let text = read_file(path)?;
    Ok(parse_funnel_csv(&text, &path.display().to_string())?)
}

/// Parses survey rows, requiring every row to be in `currency`.
pub fn parse_survey_csv(text: &str, source_name: &str, currency: Currency) -> Result<Vec<SurveyResponse>, IngestError> {
    let mut table = Table::open(text, source_name, &SURVEY_COLUMNS)?;
    let mut out = Vec::new();
    for row in table.rows() {
        let row = row?;
        let respondent_id = row.raw(0).to_string();
        if respondent_id.is_empty() {
            return Err(row.parse_err("respondent_id is empty".into()));
        }
        let component: NonUseKind =
            row.raw(1).parse().map_err(|e: crate::valuation::ValuationError| row.parse_err(e.to_string()))?;
        let wtp: f64 = row.field(2, "wtp")?;
        if !(wtp.is_finite() && wtp >= 0.0) {
            return Err(row.invariant_err(format!("wtp must be >= 0, got {wtp}")));
        }
        let row_currency: Currency =
            row.raw(3).parse().map_err(|e: crate::valuation::ValuationError| row.parse_err(e.to_string()))?;
        if row_currency != currency {
            return Err(IngestError::Currency {
                source_name: source_name.into(),
                line: row.line,
                message: format!("currency {row_currency} differs from the run currency {currency}"),
            });
        }
        out.push(SurveyResponse { respondent_id, component, wtp, protest_flag: row.flag(4, "protest_flag")? });
    }
    Ok(out)
}

pub fn ingest_survey_csv(path: &Path, currency: Currency) -> Result<Vec<SurveyResponse>, IngestOpenError> {
    let text = read_file(path)?;
    Ok(parse_survey_csv(&text, &path.display().to_string(), currency)?)
}
