//! Column-wise comparison of datasets from two runs.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::io::{Format, Table};
use crate::run::{FileKind, Manifest, MANIFEST_NAME};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColumnDeviation {
    pub column: String,
    /// Max |a − b| for numeric columns; for text columns 0 when every cell
    /// matches and infinity otherwise.
    pub max_abs_deviation: f64,
    pub numeric: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileComparison {
    pub name: String,
    pub rows: usize,
    pub columns: Vec<ColumnDeviation>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub tolerance: f64,
    pub files: Vec<FileComparison>,
    pub max_abs_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CompareError {
    #[error("schema mismatch in {name}: {detail}")]
    Schema { name: String, detail: String },
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

fn numeric(cell: &str) -> Option<f64> {
    cell.parse().ok()
}

pub fn compare_tables(name: &str, a: &Table, b: &Table) -> Result<FileComparison, CompareError> {
    let schema = |detail: String| CompareError::Schema {
        name: name.to_string(),
        detail,
    };
    if a.columns != b.columns {
        return Err(schema(format!("columns {:?} vs {:?}", a.columns, b.columns)));
    }
    if a.rows.len() != b.rows.len() {
        return Err(schema(format!("{} rows vs {} rows", a.rows.len(), b.rows.len())));
    }
    let columns = a
        .columns
        .iter()
        .enumerate()
        .map(|(c, column)| {
            let cells = || a.rows.iter().zip(&b.rows).map(move |(x, y)| (x[c].as_str(), y[c].as_str()));
            let is_numeric = cells().all(|(x, y)| {
                (x.is_empty() && y.is_empty()) || (numeric(x).is_some() && numeric(y).is_some())
            }) && cells().any(|(x, _)| !x.is_empty());
            let max_abs_deviation = if is_numeric {
                cells()
                    .filter(|(x, _)| !x.is_empty())
                    .map(|(x, y)| (numeric(x).unwrap() - numeric(y).unwrap()).abs())
                    .fold(0.0, f64::max)
            } else if cells().all(|(x, y)| x == y) {
                0.0
            } else {
                f64::INFINITY
            };
            ColumnDeviation {
                column: column.clone(),
                max_abs_deviation,
                numeric: is_numeric,
            }
        })
        .collect();
    Ok(FileComparison {
        name: name.to_string(),
        rows: a.rows.len(),
        columns,
    })
}

fn read_table(path: &Path) -> anyhow::Result<Table> {
    let format = Format::from_path(path)
        .ok_or_else(|| anyhow::anyhow!("{}: unknown dataset format", path.display()))?;
    Ok(Table::read(format, std::fs::File::open(path)?)?)
}

/// Dataset files of a run: all table entries of a manifest (a directory is
/// read through its `manifest.json`), or a single dataset file.
fn datasets(path: &Path) -> anyhow::Result<Vec<(String, PathBuf)>> {
    let manifest_path = if path.is_dir() { path.join(MANIFEST_NAME) } else { path.to_path_buf() };
    if Format::from_path(&manifest_path) == Some(Format::Csv) {
        let name = manifest_path.file_name().unwrap_or_default().to_string_lossy().into_owned();
        return Ok(vec![(name, manifest_path)]);
    }
    if let Ok(manifest) = Manifest::load(&manifest_path) {
        let dir = manifest_path.parent().unwrap_or(Path::new("."));
        return Ok(manifest
            .files
            .iter()
            .filter(|f| f.kind == FileKind::Table)
            .map(|f| (f.name.clone(), dir.join(&f.name)))
            .collect());
    }
    let name = manifest_path.file_name().unwrap_or_default().to_string_lossy().into_owned();
    Ok(vec![(name, manifest_path)])
}

pub fn compare(a: &Path, b: &Path, tolerance: f64) -> Result<CompareReport, CompareError> {
    let (left, right) = (datasets(a)?, datasets(b)?);
    let single = left.len() == 1 && right.len() == 1;
    if !single {
        let names = |v: &[(String, PathBuf)]| v.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
        if names(&left) != names(&right) {
            return Err(CompareError::Schema {
                name: "runs".into(),
                detail: format!("datasets {:?} vs {:?}", names(&left), names(&right)),
            });
        }
    }
    let files = left
        .iter()
        .zip(&right)
        .map(|((name, pa), (_, pb))| compare_tables(name, &read_table(pa)?, &read_table(pb)?))
        .collect::<Result<Vec<_>, CompareError>>()?;
    let max_abs_deviation = files
        .iter()
        .flat_map(|f| f.columns.iter().map(|c| c.max_abs_deviation))
        .fold(0.0, f64::max);
    Ok(CompareReport {
        tolerance,
        pass: max_abs_deviation <= tolerance,
        max_abs_deviation,
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[[&str; 2]]) -> Table {
        let mut t = Table::new(&["x", "F"]);
        for r in rows {
            t.push(r.iter().map(|c| c.to_string()).collect());
        }
        t
    }

    #[test]
    fn identical_tables() {
        let t = table(&[["0.0", "0.0"], ["0.5", "0.25"]]);
        let c = compare_tables("t", &t, &t).unwrap();
        assert!(c.columns.iter().all(|c| c.max_abs_deviation == 0.0 && c.numeric));
    }

    #[test]
    fn deviation_and_schema() {
        let a = table(&[["0.0", "0.0"], ["0.5", "0.25"]]);
        let b = table(&[["0.0", "0.0"], ["0.5", "0.5"]]);
        let c = compare_tables("t", &a, &b).unwrap();
        assert_eq!(c.columns[1].max_abs_deviation, 0.25);
        let short = table(&[["0.0", "0.0"]]);
        assert!(matches!(compare_tables("t", &a, &short), Err(CompareError::Schema { .. })));
        let mut other = a.clone();
        other.columns[1] = "G".into();
        assert!(matches!(compare_tables("t", &a, &other), Err(CompareError::Schema { .. })));
    }

    #[test]
    fn text_columns() {
        let mut a = Table::new(&["kind"]);
        a.push(vec!["exact".into()]);
        let mut b = a.clone();
        assert_eq!(compare_tables("t", &a, &b).unwrap().columns[0].max_abs_deviation, 0.0);
        b.rows[0][0] = "empirical".into();
        assert!(compare_tables("t", &a, &b).unwrap().columns[0].max_abs_deviation.is_infinite());
    }
}
