//! Named multivariate time-series panel and its CSV representation.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Column carried as metadata only when it appears first in a CSV header.
pub const DATE_COLUMN: &str = "date";

/// A set of equally long, finite, uniquely named series.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    dates: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Input("dataset needs at least one column".into()));
        }
        let len = columns[0].1.len();
        if len == 0 {
            return Err(Error::Input("dataset columns must be non-empty".into()));
        }
        let mut seen = HashSet::new();
        for (name, values) in &columns {
            if !seen.insert(name.as_str()) {
                return Err(Error::Input(format!("duplicate column name '{name}'")));
            }
            if values.len() != len {
                return Err(Error::Input(format!(
                    "column '{name}' has length {} but expected {len}",
                    values.len()
                )));
            }
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::Input(format!(
                    "column '{name}' has a non-finite value at row {i}"
                )));
            }
        }
        let (names, columns) = columns.into_iter().unzip();
        Ok(Self {
            names,
            columns,
            dates: None,
        })
    }

    pub fn with_dates(mut self, dates: Vec<String>) -> Result<Self> {
        if dates.len() != self.len() {
            return Err(Error::Input(format!(
                "date column has length {} but dataset has {} rows",
                dates.len(),
                self.len()
            )));
        }
        self.dates = Some(dates);
        Ok(self)
    }

    /// Sample length T.
    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dates(&self) -> Option<&[String]> {
        self.dates.as_deref()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.columns[self.index_of(name)?])
    }

    pub fn column_at(&self, index: usize) -> &[f64] {
        &self.columns[index]
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    /// Appends a derived column, rejecting name clashes.
    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if self.has_column(&name) {
            return Err(Error::Input(format!("duplicate column name '{name}'")));
        }
        if values.len() != self.len() {
            return Err(Error::Input(format!(
                "column '{name}' has length {} but expected {}",
                values.len(),
                self.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!("column '{name}' has non-finite values")));
        }
        self.names.push(name);
        self.columns.push(values);
        Ok(())
    }

    /// Keeps only the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Dataset> {
        let cols = names
            .iter()
            .map(|n| Ok((n.clone(), self.column(n)?.to_vec())))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Dataset::new(cols)?;
        out.dates = self.dates.clone();
        Ok(out)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.is_empty() {
            return Err(Error::Input("csv has no header".into()));
        }
        let has_date = header[0] == DATE_COLUMN;
        let numeric_start = usize::from(has_date);
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len() - numeric_start];
        let mut dates = Vec::new();
        for (row_idx, record) in rdr.records().enumerate() {
            let record = record?;
            // data rows are numbered from 1, the header being row 0
            let row = row_idx + 1;
            if record.len() != header.len() {
                return Err(Error::CsvValue {
                    row,
                    column: String::new(),
                    reason: format!("expected {} fields, found {}", header.len(), record.len()),
                });
            }
            if has_date {
                dates.push(record[0].to_string());
            }
            for (j, col) in columns.iter_mut().enumerate() {
                let field = &record[j + numeric_start];
                let name = &header[j + numeric_start];
                if field.is_empty() {
                    return Err(Error::CsvValue {
                        row,
                        column: name.clone(),
                        reason: "missing value".into(),
                    });
                }
                let v: f64 = field.parse().map_err(|_| Error::CsvValue {
                    row,
                    column: name.clone(),
                    reason: format!("'{field}' is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::CsvValue {
                        row,
                        column: name.clone(),
                        reason: "non-finite value".into(),
                    });
                }
                col.push(v);
            }
        }
        let named = header[numeric_start..]
            .iter()
            .cloned()
            .zip(columns)
            .collect::<Vec<_>>();
        if named.is_empty() {
            return Err(Error::Input("csv has no numeric columns".into()));
        }
        let ds = Dataset::new(named)?;
        if has_date {
            ds.with_dates(dates)
        } else {
            Ok(ds)
        }
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    /// Writes the dataset as CSV. Values use Rust's shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, writer: W, header_comment: Option<&str>) -> Result<()> {
        let mut writer = writer;
        if let Some(comment) = header_comment {
            writeln!(writer, "# {comment}")?;
        }
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = Vec::new();
        if self.dates.is_some() {
            header.push(DATE_COLUMN);
        }
        header.extend(self.names.iter().map(String::as_str));
        wtr.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for t in 0..self.len() {
            record.clear();
            if let Some(dates) = &self.dates {
                record.push(dates[t].clone());
            }
            record.extend(self.columns.iter().map(|c| c[t].to_string()));
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_and_duplicate_columns() {
        let err = Dataset::new(vec![("a".into(), vec![1.0, 2.0]), ("b".into(), vec![1.0])]);
        assert!(err.is_err());
        let err = Dataset::new(vec![("a".into(), vec![1.0]), ("a".into(), vec![1.0])]);
        assert!(err.is_err());
        let err = Dataset::new(vec![("a".into(), vec![f64::NAN])]);
        assert!(err.is_err());
    }

    #[test]
    fn csv_with_date_column_roundtrips() {
        let text = "date,x,y\n2000Q1,1.5,2\n2000Q2,-0.25,3e-2\n";
        let ds = Dataset::read_csv(text.as_bytes()).unwrap();
        assert_eq!(ds.names(), &["x".to_string(), "y".to_string()]);
        assert_eq!(ds.column("y").unwrap(), &[2.0, 0.03]);
        assert_eq!(ds.dates().unwrap()[1], "2000Q2");

        let mut buf = Vec::new();
        ds.write_csv(&mut buf, Some("test")).unwrap();
        let back = Dataset::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn csv_missing_value_reports_location() {
        let text = "x,y\n1,2\n3,\n";
        match Dataset::read_csv(text.as_bytes()) {
            Err(Error::CsvValue { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "y");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_bad_number_is_rejected() {
        let text = "x\n1\nabc\n";
        assert!(matches!(
            Dataset::read_csv(text.as_bytes()),
            Err(Error::CsvValue { row: 2, .. })
        ));
    }
}
