//! File helpers: numeric CSV tables and atomic output.

use std::io::{Read, Write};
use std::path::Path;

use crate::{Error, Result};

/// A numeric CSV table: header names and rows of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    /// Index of the column called `name` (case-sensitive, surrounding spaces ignored).
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h.trim() == name)
    }
}

/// Reads a comma-separated file with a header row where every field parses as `f64`.
pub fn read_numeric_csv<R: Read>(reader: R) -> Result<NumericTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(Error::invalid_data("CSV file has no header row"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != headers.len() {
            return Err(Error::invalid_data(format!(
                "row {} has {} fields, expected {}",
                i + 1,
                rec.len(),
                headers.len()
            )));
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    Error::invalid_data(format!("row {}, column `{}`: `{field}` is not a finite number", i + 1, headers[j]))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(NumericTable { headers, rows })
}

pub fn read_numeric_csv_path(path: &Path) -> Result<NumericTable> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    read_numeric_csv(std::io::BufReader::new(file))
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so that readers never observe a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Formats a float with the shortest representation that round-trips.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_numeric_csv() {
        let t = read_numeric_csv("x1, x2 ,y\n0.5,1,0\n-2e-3,3,1\n".as_bytes()).unwrap();
        assert_eq!(t.headers, ["x1", "x2", "y"]);
        assert_eq!(t.rows[1], [-2e-3, 3.0, 1.0]);
        assert_eq!(t.column("x2"), Some(1));
    }

    #[test]
    fn rejects_non_numeric() {
        assert!(read_numeric_csv("x,y\nabc,1\n".as_bytes()).is_err());
        assert!(read_numeric_csv("x,y\nNaN,1\n".as_bytes()).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
