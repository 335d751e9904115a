use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How variables are laid out in an input table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    #[default]
    RowsAreVariables,
    ColsAreVariables,
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows" | "rows-are-variables" => Ok(Orientation::RowsAreVariables),
            "cols" | "cols-are-variables" => Ok(Orientation::ColsAreVariables),
            other => Err(Error::InvalidParameter(format!("unknown orientation `{other}`"))),
        }
    }
}

/// A `p × n` table of observations: one row per variable, one column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    p: usize,
    n: usize,
}

impl DataMatrix {
    /// Builds a matrix from row-major storage (`values[k * n + i]` is sample `i` of variable `k`).
    pub fn from_row_major(p: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if p < 2 || n < 2 {
            return Err(Error::Dimension(format!("need p >= 2 and n >= 2, got p={p}, n={n}")));
        }
        if values.len() != p * n {
            return Err(Error::LengthMismatch { left: values.len(), right: p * n });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { line: pos / n + 1, column: pos % n + 1 });
        }
        Ok(Self { values, p, n })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(p * n);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Ragged { line: k + 1, found: row.len(), expected: n });
            }
            values.extend_from_slice(row);
        }
        Self::from_row_major(p, n, values)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `c_n = p / n`.
    pub fn aspect_ratio(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.n {
            values.extend(self.rows().map(|row| row[i]));
        }
        Self { values, p: self.n, n: self.p }
    }

    /// Applies `f` to every entry of row `k`; used for transform-invariance checks.
    pub fn map_row(&self, k: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values = self.values.clone();
        for v in &mut values[k * self.n..(k + 1) * self.n] {
            *v = f(*v);
        }
        Self::from_row_major(self.p, self.n, values)
    }

    pub(crate) fn row_mut_unchecked(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k * self.n..(k + 1) * self.n]
    }
}

/// Reads a comma-separated numeric table. A first line that does not parse as
/// numbers is treated as a header and skipped.
pub fn load_data(path: impl AsRef<Path>, orientation: Orientation) -> Result<DataMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_csv(&text, orientation)
}

pub fn parse_csv(text: &str, orientation: Orientation) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::Parse { line, column: 0, message: e.to_string() })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, usize> = record
            .iter()
            .enumerate()
            .map(|(col, field)| field.parse::<f64>().map_err(|_| col))
            .collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if rows.is_empty() && width.is_none() && idx == 0 => {
                // header line
                width = Some(record.len());
                continue;
            }
            Err(col) => {
                return Err(Error::Parse {
                    line,
                    column: col + 1,
                    message: format!("`{}` is not a number", &record[col]),
                })
            }
        };
        let expected = *width.get_or_insert(row.len());
        if row.len() != expected {
            return Err(Error::Ragged { line, found: row.len(), expected });
        }
        if let Some(col) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { line, column: col + 1 });
        }
        rows.push(row);
    }

    let table = DataMatrix::from_rows(&rows)?;
    Ok(match orientation {
        Orientation::RowsAreVariables => table,
        Orientation::ColsAreVariables => table.transpose(),
    })
}
