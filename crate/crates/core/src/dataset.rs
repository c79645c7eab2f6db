//! Annual time-series ingestion, transforms and descriptive statistics.

use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::{Error, Result};

/// A named annual series on a gap-free integer-year index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    name: String,
    unit: String,
    values: Vec<f64>,
    time_index: Vec<i64>,
}

impl Series {
    pub fn new(
        name: impl Into<String>,
        unit: impl Into<String>,
        time_index: Vec<i64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let name = name.into();
        if values.len() != time_index.len() {
            return Err(Error::InvalidArgument(format!(
                "series '{name}': {} values but {} time points",
                values.len(),
                time_index.len()
            )));
        }
        if values.is_empty() {
            return Err(Error::InsufficientData(format!("series '{name}' is empty")));
        }
        for w in time_index.windows(2) {
            if w[1] != w[0] + 1 {
                return Err(Error::InvalidArgument(format!(
                    "series '{name}': time index must be consecutive years, found {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain {
                series: name,
                year: time_index[pos],
                message: "non-finite value".into(),
            });
        }
        Ok(Self {
            name,
            unit: unit.into(),
            values,
            time_index,
        })
    }

    /// Series indexed from `start_year` with consecutive years.
    pub fn from_values(name: impl Into<String>, start_year: i64, values: Vec<f64>) -> Result<Self> {
        let idx = (0..values.len() as i64).map(|i| start_year + i).collect();
        Self::new(name, "", idx, values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time_index(&self) -> &[i64] {
        &self.time_index
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Series sharing one time index, kept in caller-given column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    series: Vec<Series>,
}

impl Dataset {
    pub fn new(series: Vec<Series>) -> Result<Self> {
        let Some(first) = series.first() else {
            return Err(Error::InsufficientData("dataset has no series".into()));
        };
        let mut seen = HashSet::new();
        for s in &series {
            if !seen.insert(s.name.clone()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate series name '{}'",
                    s.name
                )));
            }
            if s.time_index != first.time_index {
                return Err(Error::InvalidArgument(format!(
                    "series '{}' does not share the time index of '{}'",
                    s.name, first.name
                )));
            }
        }
        Ok(Self { series })
    }

    /// Builds a dataset from a T×k matrix whose columns follow `names`.
    pub fn from_matrix(names: &[String], start_year: i64, data: &DMatrix<f64>) -> Result<Self> {
        if names.len() != data.ncols() {
            return Err(Error::InvalidArgument(format!(
                "{} names for {} columns",
                names.len(),
                data.ncols()
            )));
        }
        let series = names
            .iter()
            .enumerate()
            .map(|(j, n)| Series::from_values(n.clone(), start_year, data.column(j).iter().copied().collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(series)
    }

    pub fn series(&self) -> &[Series] {
        &self.series
    }

    /// Observation count T.
    pub fn n_obs(&self) -> usize {
        self.series[0].len()
    }

    /// Series count k.
    pub fn n_series(&self) -> usize {
        self.series.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.series.iter().map(|s| s.name.clone()).collect()
    }

    pub fn time_index(&self) -> &[i64] {
        &self.series[0].time_index
    }

    pub fn get(&self, name: &str) -> Result<&Series> {
        self.series
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no series named '{name}'")))
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.series
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no series named '{name}'")))
    }

    /// T×k data matrix in column order.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_obs(), self.n_series(), |i, j| self.series[j].values[i])
    }

    /// Dataset restricted to `keep`, in the order given.
    pub fn subset(&self, keep: &[String]) -> Result<Self> {
        let series = keep
            .iter()
            .map(|n| self.get(n).cloned())
            .collect::<Result<Vec<_>>>()?;
        Self::new(series)
    }

    /// Replaces the series named `name`.
    pub fn replace(&self, name: &str, series: Series) -> Result<Self> {
        let pos = self.position(name)?;
        let mut all = self.series.clone();
        all[pos] = series;
        Self::new(all)
    }

    pub fn map_series(&self, f: impl Fn(&Series) -> Result<Series>) -> Result<Self> {
        Self::new(self.series.iter().map(f).collect::<Result<Vec<_>>>()?)
    }

    pub fn require_multivariate(&self) -> Result<()> {
        if self.n_series() < 2 {
            return Err(Error::InvalidArgument(format!(
                "multivariate operation needs k >= 2 series, got {}",
                self.n_series()
            )));
        }
        Ok(())
    }

    /// Writes a wide CSV (year column first). Values use the shortest
    /// representation that parses back to the same bits.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = File::create(path)?;
        let mut header = vec!["year".to_string()];
        header.extend(self.names());
        writeln!(f, "{}", header.join(","))?;
        for (i, year) in self.time_index().iter().enumerate() {
            let mut row = vec![year.to_string()];
            row.extend(self.series.iter().map(|s| format!("{}", s.values[i])));
            writeln!(f, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Loads a wide CSV whose first column is the integer year.
///
/// `column_spec` maps output series names to CSV header names and fixes the
/// output column order. An empty spec loads every non-year column under its
/// header name.
pub fn load_csv(path: impl AsRef<Path>, column_spec: &[(String, String)]) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Ingestion {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::Ingestion {
            row: 0,
            column: String::new(),
            message: "file is empty".into(),
        });
    }

    let spec: Vec<(String, String)> = if column_spec.is_empty() {
        headers[1..].iter().map(|h| (h.clone(), h.clone())).collect()
    } else {
        column_spec.to_vec()
    };
    if spec.is_empty() {
        return Err(Error::Schema("no data columns after the year column".into()));
    }
    let mut positions = Vec::with_capacity(spec.len());
    for (_, col) in &spec {
        let pos = headers[1..]
            .iter()
            .position(|h| h == col)
            .ok_or_else(|| Error::Schema(format!("missing column '{col}'")))?;
        positions.push(pos + 1);
    }

    let mut years: Vec<i64> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); spec.len()];
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Ingestion {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        let year_cell = record.get(0).unwrap_or("");
        let year: i64 = year_cell.parse().map_err(|_| Error::Ingestion {
            row,
            column: headers[0].clone(),
            message: format!("cannot parse year '{year_cell}'"),
        })?;
        if !seen.insert(year) {
            return Err(Error::DuplicateYear(year));
        }
        years.push(year);
        for (j, &pos) in positions.iter().enumerate() {
            let cell = record.get(pos).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::Ingestion {
                    row,
                    column: spec[j].1.clone(),
                    message: "missing value".into(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Ingestion {
                row,
                column: spec[j].1.clone(),
                message: format!("cannot parse '{cell}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Ingestion {
                    row,
                    column: spec[j].1.clone(),
                    message: format!("non-finite value '{cell}'"),
                });
            }
            columns[j].push(v);
        }
    }
    if years.is_empty() {
        return Err(Error::Ingestion {
            row: 1,
            column: String::new(),
            message: "no data rows".into(),
        });
    }
    for (i, w) in years.windows(2).enumerate() {
        if w[1] != w[0] + 1 {
            return Err(Error::Ingestion {
                row: i + 3,
                column: headers[0].clone(),
                message: format!("years must increase by one, found {} after {}", w[1], w[0]),
            });
        }
    }

    let series = spec
        .iter()
        .zip(columns)
        .map(|((name, _), values)| Series::new(name.clone(), "", years.clone(), values))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(series)
}

/// Element-wise natural logarithm; the output name gets a `_log` suffix.
pub fn log_transform(s: &Series) -> Result<Series> {
    if let Some(pos) = s.values.iter().position(|&v| v <= 0.0) {
        return Err(Error::Domain {
            series: s.name.clone(),
            year: s.time_index[pos],
            message: format!("logarithm of nonpositive value {}", s.values[pos]),
        });
    }
    let unit = if s.unit.is_empty() {
        String::new()
    } else {
        format!("ln({})", s.unit)
    };
    Series::new(
        format!("{}_log", s.name),
        unit,
        s.time_index.clone(),
        s.values.iter().map(|v| v.ln()).collect(),
    )
}

/// `s(t) - s(t-1)`; the first year is dropped.
pub fn first_difference(s: &Series) -> Result<Series> {
    if s.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "first difference of '{}' needs at least 2 observations",
            s.name
        )));
    }
    Series::new(
        format!("{}_diff", s.name),
        s.unit.clone(),
        s.time_index[1..].to_vec(),
        s.values.windows(2).map(|w| w[1] - w[0]).collect(),
    )
}

/// First-differences every series in the dataset, keeping names.
pub fn difference_dataset(d: &Dataset) -> Result<Dataset> {
    d.map_series(|s| first_difference(s).map(|x| x.renamed(s.name.clone())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
    /// Sample standard deviation (divisor n - 1; zero when n = 1).
    pub sd: f64,
    pub n_obs: usize,
}

pub fn describe(s: &Series) -> Result<DescriptiveStats> {
    describe_values(&s.values)
}

pub fn describe_values(values: &[f64]) -> Result<DescriptiveStats> {
    let n = values.len();
    if n == 0 {
        return Err(Error::InsufficientData("cannot describe an empty series".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let sd = if n > 1 {
        (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(DescriptiveStats {
        mean,
        median,
        max: sorted[n - 1],
        min: sorted[0],
        sd,
        n_obs: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_fifty_rows_five_columns() {
        let mut text = String::from("year,RGDP,FDI,PRVT,TRADE,GOVCON\n");
        for y in 1970..2020 {
            let t = (y - 1970) as f64;
            text.push_str(&format!(
                "{y},{},{},{},{},{}\n",
                1e11 * (1.0 + 0.04 * t),
                0.5 + 0.01 * t,
                15.0 + t,
                10.0 + t,
                11.0
            ));
        }
        let f = write_tmp(&text);
        let d = load_csv(f.path(), &[]).unwrap();
        assert_eq!(d.n_obs(), 50);
        assert_eq!(d.n_series(), 5);
        assert_eq!(d.names(), vec!["RGDP", "FDI", "PRVT", "TRADE", "GOVCON"]);
        assert_eq!(d.time_index()[0], 1970);
    }

    #[test]
    fn column_spec_order_is_preserved() {
        let f = write_tmp("year,a,b,c\n2000,1,2,3\n2001,4,5,6\n");
        let spec = vec![("C".to_string(), "c".to_string()), ("A".to_string(), "a".to_string())];
        let d = load_csv(f.path(), &spec).unwrap();
        assert_eq!(d.names(), vec!["C", "A"]);
        assert_eq!(d.get("C").unwrap().values(), &[3.0, 6.0]);
    }

    #[test]
    fn empty_file_is_ingestion_error() {
        let f = write_tmp("");
        assert!(matches!(load_csv(f.path(), &[]), Err(Error::Ingestion { .. })));
        let f = write_tmp("year,a\n");
        assert!(matches!(load_csv(f.path(), &[]), Err(Error::Ingestion { .. })));
    }

    #[test]
    fn duplicate_year_rejected() {
        let f = write_tmp("year,a\n1974,1\n1975,2\n1975,3\n");
        assert_eq!(load_csv(f.path(), &[]), Err(Error::DuplicateYear(1975)));
    }

    #[test]
    fn missing_column_and_bad_cells() {
        let f = write_tmp("year,a\n2000,1\n");
        let spec = vec![("b".to_string(), "b".to_string())];
        assert!(matches!(load_csv(f.path(), &spec), Err(Error::Schema(_))));

        let f = write_tmp("year,a,b\n2000,1,2\n2001,,3\n");
        match load_csv(f.path(), &[]) {
            Err(Error::Ingestion { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "a");
            }
            other => panic!("unexpected {other:?}"),
        }

        let f = write_tmp("year,a\n2000,1\n2001,x\n");
        assert!(matches!(load_csv(f.path(), &[]), Err(Error::Ingestion { row: 3, .. })));

        let f = write_tmp("year,a\n2000,1\n2002,2\n");
        assert!(matches!(load_csv(f.path(), &[]), Err(Error::Ingestion { .. })));
    }

    #[test]
    fn log_of_e_is_one() {
        let s = Series::from_values("x", 2000, vec![std::f64::consts::E; 4]).unwrap();
        let l = log_transform(&s).unwrap();
        assert!(l.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert_eq!(l.name(), "x_log");
        assert_eq!(l.time_index(), s.time_index());
    }

    #[test]
    fn log_of_zero_names_the_year() {
        let s = Series::from_values("x", 2000, vec![1.0, 0.0, 2.0]).unwrap();
        match log_transform(&s) {
            Err(Error::Domain { year, .. }) => assert_eq!(year, 2001),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn first_difference_examples() {
        let s = Series::from_values("x", 2000, vec![1.0, 2.0, 3.0]).unwrap();
        let d = first_difference(&s).unwrap();
        assert_eq!(d.values(), &[1.0, 1.0]);
        assert_eq!(d.time_index(), &[2001, 2002]);

        let c = Series::from_values("c", 2000, vec![7.5; 6]).unwrap();
        assert!(first_difference(&c).unwrap().values().iter().all(|&v| v == 0.0));

        let one = Series::from_values("x", 2000, vec![5.0]).unwrap();
        assert!(matches!(first_difference(&one), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn describe_examples() {
        let c = describe_values(&[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(c.sd, 0.0);
        assert_eq!(c.mean, 4.0);
        assert_eq!(c.median, 4.0);

        let d = describe_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(d.mean, 2.5);
        assert_eq!(d.median, 2.5);
        assert!((d.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(d.n_obs, 4);

        assert!(describe_values(&[]).is_err());
    }

    #[test]
    fn series_rejects_gaps() {
        assert!(Series::new("x", "", vec![2000, 2002], vec![1.0, 2.0]).is_err());
        assert!(Series::new("x", "", vec![2000], vec![]).is_err());
    }

    #[test]
    fn dataset_rejects_misaligned_and_duplicate_names() {
        let a = Series::from_values("a", 2000, vec![1.0, 2.0]).unwrap();
        let b = Series::from_values("b", 2001, vec![1.0, 2.0]).unwrap();
        assert!(Dataset::new(vec![a.clone(), b]).is_err());
        assert!(Dataset::new(vec![a.clone(), a]).is_err());
    }
}
