use std::path::Path;

use crate::error::{Error, Result};

/// Feature matrix keyed by sample path; CSV layout `path,<feature names…>`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub paths: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn new(names: Vec<String>) -> Self {
        Self {
            names,
            paths: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, path: impl Into<String>, row: Vec<f64>) -> Result<()> {
        if row.len() != self.names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.names.len(),
                found: row.len(),
            });
        }
        self.paths.push(path.into());
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row_of(&self, path: &str) -> Option<&[f64]> {
        self.paths
            .iter()
            .position(|p| p == path)
            .map(|i| self.rows[i].as_slice())
    }

    /// Keeps only the given columns, in the given order.
    pub fn select(&self, columns: &[usize]) -> Self {
        Self {
            names: columns.iter().map(|&c| self.names[c].clone()).collect(),
            paths: self.paths.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| columns.iter().map(|&c| r[c]).collect())
                .collect(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        let mut header = vec!["path".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(|e| csv_err(path, e))?;
        for (p, row) in self.paths.iter().zip(&self.rows) {
            let mut rec = vec![p.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
        let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
        if header.get(0) != Some("path") {
            return Err(Error::Parse(format!(
                "{}: feature table must start with a `path` column",
                path.display()
            )));
        }
        let mut table = Self::new(header.iter().skip(1).map(str::to_string).collect());
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            let row = rec
                .iter()
                .skip(1)
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("{}: row {}: bad number {s:?}", path.display(), i + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            table.push(rec.get(0).unwrap_or_default(), row)?;
        }
        Ok(table)
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Parse(format!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = FeatureTable::new(vec!["a".into(), "b".into()]);
        t.push("x.png", vec![0.1, 1.0 / 3.0]).unwrap();
        t.push("y,z.png", vec![-2.5e-300, 7.0]).unwrap();
        let p = dir.path().join("f.csv");
        t.write_csv(&p).unwrap();
        assert_eq!(FeatureTable::read_csv(&p).unwrap(), t);
        assert_eq!(t.select(&[1]).rows[0], vec![1.0 / 3.0]);
        assert!(t.push("w", vec![1.0]).is_err());
    }
}
