use std::io::Read;
use std::ops::Range;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Daily simple returns, `days × assets`, with `NaN` outside an asset's
/// active range. Gaps inside the active range are forward-filled and recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<NaiveDate>,
    assets: Vec<String>,
    returns: DMatrix<f64>,
    filled: Vec<(usize, usize)>,
}

impl ReturnPanel {
    pub fn new(dates: Vec<NaiveDate>, assets: Vec<String>, mut returns: DMatrix<f64>) -> Result<Self> {
        if returns.nrows() != dates.len() || returns.ncols() != assets.len() {
            return Err(Error::dims(
                "return panel",
                format!("{}x{}", dates.len(), assets.len()),
                format!("{}x{}", returns.nrows(), returns.ncols()),
            ));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!("dates not strictly increasing at {}", w[1])));
        }
        if returns.iter().any(|v| v.is_infinite()) {
            return Err(Error::InvalidInput("infinite return".into()));
        }
        let mut filled = Vec::new();
        for a in 0..returns.ncols() {
            let col: Vec<f64> = returns.column(a).iter().copied().collect();
            let (Some(first), Some(last)) = (col.iter().position(|v| v.is_finite()), col.iter().rposition(|v| v.is_finite())) else {
                continue;
            };
            for d in first..=last {
                if !returns[(d, a)].is_finite() {
                    returns[(d, a)] = returns[(d - 1, a)];
                    filled.push((d, a));
                }
            }
        }
        if !filled.is_empty() {
            log::warn!("{} missing returns inside active ranges were forward-filled", filled.len());
        }
        Ok(Self { dates, assets, returns, filled })
    }

    /// Reads `date,asset_1,…,asset_N` CSV; empty cells are missing.
    pub fn from_csv_reader<R: Read>(reader: R, source: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::ingest(source, e))?.clone();
        if header.len() < 2 || !header[0].eq_ignore_ascii_case("date") {
            return Err(Error::ingest(source, "header must be `date,asset_1,...,asset_N`"));
        }
        let assets: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut dates = Vec::new();
        let mut values = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let line = row + 2;
            let rec = rec.map_err(|e| Error::ingest(source, format!("line {line}: {e}")))?;
            if rec.len() != assets.len() + 1 {
                return Err(Error::ingest(source, format!("line {line}: expected {} fields, found {}", assets.len() + 1, rec.len())));
            }
            let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
                .map_err(|e| Error::ingest(source, format!("line {line}, column date: {e}")))?;
            dates.push(date);
            for (c, cell) in rec.iter().enumerate().skip(1) {
                let v = if cell.is_empty() || cell.eq_ignore_ascii_case("nan") || cell.eq_ignore_ascii_case("na") {
                    f64::NAN
                } else {
                    cell.parse::<f64>()
                        .map_err(|e| Error::ingest(source, format!("line {line}, column {}: {e}", &header[c])))?
                };
                values.push(v);
            }
        }
        let returns = DMatrix::from_row_slice(dates.len(), assets.len(), &values);
        Self::new(dates, assets, returns).map_err(|e| Error::ingest(source, e))
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::ingest(path, e))?;
        Self::from_csv_reader(file, path)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn returns(&self) -> &DMatrix<f64> {
        &self.returns
    }

    pub fn days(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    /// `(day, asset)` cells that were forward-filled.
    pub fn filled(&self) -> &[(usize, usize)] {
        &self.filled
    }

    pub fn is_active_over(&self, asset: usize, days: &Range<usize>) -> bool {
        days.clone().all(|d| self.returns[(d, asset)].is_finite())
    }

    /// Day indices with `from ≤ date ≤ to`.
    pub fn day_range(&self, from: NaiveDate, to: NaiveDate) -> Result<Range<usize>> {
        if from > to {
            return Err(Error::Config(format!("empty date range {from}..{to}")));
        }
        let (Some(first), Some(last)) = (self.dates.first(), self.dates.last()) else {
            return Err(Error::Config("panel has no dates".into()));
        };
        if from < *first || to > *last {
            return Err(Error::Config(format!("date range {from}..{to} outside panel {first}..{last}")));
        }
        let start = self.dates.partition_point(|d| *d < from);
        let end = self.dates.partition_point(|d| *d <= to);
        if start >= end {
            return Err(Error::Config(format!("no trading days in {from}..{to}")));
        }
        Ok(start..end)
    }

    /// Column-wise standardization inside `days` (sample mean 0, sample
    /// variance 1). Columns that are not fully observed are `None`;
    /// constant columns are returned as zeros with `sd = 0`.
    pub fn standardized(&self, days: &Range<usize>) -> StandardizedWindow {
        let n = days.len();
        let mut data = DMatrix::zeros(n, self.n_assets());
        let mut means = vec![f64::NAN; self.n_assets()];
        let mut sds = vec![f64::NAN; self.n_assets()];
        let mut active = vec![false; self.n_assets()];
        for a in 0..self.n_assets() {
            if !self.is_active_over(a, days) || n < 2 {
                continue;
            }
            let col: Vec<f64> = days.clone().map(|d| self.returns[(d, a)]).collect();
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let sd = var.sqrt();
            active[a] = true;
            means[a] = mean;
            sds[a] = sd;
            if sd > 0.0 {
                for (p, v) in col.iter().enumerate() {
                    data[(p, a)] = (v - mean) / sd;
                }
            }
        }
        StandardizedWindow { data, means, sds, active }
    }

    /// Reorders assets so that new column `p` is old column `perm[p]`.
    pub fn permuted_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_assets() {
            return Err(Error::dims("asset permutation", self.n_assets(), perm.len()));
        }
        let returns = DMatrix::from_fn(self.days(), perm.len(), |d, p| self.returns[(d, perm[p])]);
        let assets = perm.iter().map(|&p| self.assets[p].clone()).collect();
        Self::new(self.dates.clone(), assets, returns)
    }
}

#[derive(Debug, Clone)]
pub struct StandardizedWindow {
    pub data: DMatrix<f64>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub active: Vec<bool>,
}
