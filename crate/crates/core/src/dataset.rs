//! Tabular samples: named input columns plus one target column.

use std::io::Read;
use std::path::Path;

use thiserror::Error;

use crate::expr::VarColumns;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("header: {0}")]
    Header(String),
    #[error("no column named `{0}`")]
    MissingColumn(String),
    #[error("line {line}, column `{column}`: cannot parse `{value}` as a number")]
    NonNumeric { line: u64, column: String, value: String },
    #[error("line {line}, column `{column}`: missing value")]
    Missing { line: u64, column: String },
    #[error("line {line}, column `{column}`: value is not finite")]
    NonFinite { line: u64, column: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow { line: u64, expected: usize, found: usize },
    #[error("column `{0}` length differs from the target")]
    LengthMismatch(String),
    #[error("need at least 2 rows, found {0}")]
    TooFewRows(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    target_name: String,
    target: Vec<f64>,
}

impl Dataset {
    pub fn new(
        variables: Vec<(String, Vec<f64>)>,
        target_name: impl Into<String>,
        target: Vec<f64>,
    ) -> Result<Dataset, DatasetError> {
        let target_name = target_name.into();
        if target.len() < 2 {
            return Err(DatasetError::TooFewRows(target.len()));
        }
        let mut names = Vec::with_capacity(variables.len());
        let mut columns = Vec::with_capacity(variables.len());
        for (name, col) in variables {
            if col.len() != target.len() {
                return Err(DatasetError::LengthMismatch(name));
            }
            if names.contains(&name) || name == target_name {
                return Err(DatasetError::Header(format!("duplicate column `{name}`")));
            }
            if let Some(r) = col.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::NonFinite { line: r as u64 + 2, column: name });
            }
            names.push(name);
            columns.push(col);
        }
        if let Some(r) = target.iter().position(|v| !v.is_finite()) {
            return Err(DatasetError::NonFinite { line: r as u64 + 2, column: target_name });
        }
        Ok(Dataset { names, columns, target_name, target })
    }

    /// Parses comma-separated UTF-8 text with a header row.
    ///
    /// `target` names the target column; `None` takes the last column.
    /// Line numbers in errors are 1-based file lines (the header is line 1).
    pub fn from_csv_reader<R: Read>(reader: R, target: Option<&str>) -> Result<Dataset, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| DatasetError::Csv { line: 1, message: e.to_string() })?
            .iter()
            .map(str::to_string)
            .collect();
        if header.len() < 2 {
            return Err(DatasetError::Header(
                "need at least one variable column and a target column".into(),
            ));
        }
        if let Some(empty) = header.iter().position(String::is_empty) {
            return Err(DatasetError::Header(format!("column {} has an empty name", empty + 1)));
        }
        let target_idx = match target {
            Some(t) => header
                .iter()
                .position(|h| h == t)
                .ok_or_else(|| DatasetError::MissingColumn(t.to_string()))?,
            None => header.len() - 1,
        };

        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
        for rec in rdr.records() {
            let rec = rec.map_err(|e| DatasetError::Csv {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if rec.len() != header.len() {
                return Err(DatasetError::RaggedRow { line, expected: header.len(), found: rec.len() });
            }
            for (j, cell) in rec.iter().enumerate() {
                if cell.is_empty() {
                    return Err(DatasetError::Missing { line, column: header[j].clone() });
                }
                let v: f64 = cell.parse().map_err(|_| DatasetError::NonNumeric {
                    line,
                    column: header[j].clone(),
                    value: cell.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(DatasetError::NonFinite { line, column: header[j].clone() });
                }
                cols[j].push(v);
            }
        }

        let target_col = std::mem::take(&mut cols[target_idx]);
        let target_name = header[target_idx].clone();
        let vars = header
            .into_iter()
            .zip(cols)
            .enumerate()
            .filter(|(j, _)| *j != target_idx)
            .map(|(_, nc)| nc)
            .collect::<Vec<_>>();
        if target_col.len() < 2 {
            return Err(DatasetError::TooFewRows(target_col.len()));
        }
        Dataset::new(vars, target_name, target_col)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, target: Option<&str>) -> Result<Dataset, DatasetError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_reader(std::io::BufReader::new(file), target)
    }

    pub fn rows(&self) -> usize {
        self.target.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|j| self.columns[j].as_slice())
    }

    pub fn median(&self, name: &str) -> Option<f64> {
        let mut v = self.column(name)?.to_vec();
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
    }

    pub fn range(&self, name: &str) -> Option<(f64, f64)> {
        let col = self.column(name)?;
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    /// Keeps only the named variable columns (in the given order).
    pub fn select(&self, vars: &[String]) -> Result<Dataset, DatasetError> {
        let cols = vars
            .iter()
            .map(|v| {
                self.column(v)
                    .map(|c| (v.clone(), c.to_vec()))
                    .ok_or_else(|| DatasetError::MissingColumn(v.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Dataset::new(cols, self.target_name.clone(), self.target.clone())
    }
}

impl VarColumns for Dataset {
    fn column(&self, name: &str) -> Option<&[f64]> {
        Dataset::column(self, name)
    }

    fn rows(&self) -> usize {
        self.target.len()
    }
}
