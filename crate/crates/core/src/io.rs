//! Matrix CSV (no header, one row per line) and whitespace edge lists.

use std::io::{BufRead, Read, Write};

use nalgebra::DMatrix;

use crate::dissim::DissimilarityMatrix;
use crate::error::{Error, Result};

/// Reads a square matrix and validates it as a dissimilarity matrix.
pub fn read_matrix<R: Read>(reader: R) -> Result<DissimilarityMatrix> {
    DissimilarityMatrix::validate(read_raw_matrix(reader)?)
}

/// Reads a rectangular numeric CSV without validation.
pub fn read_raw_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, s)| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("column {}: not a number: {s:?}", c + 1),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} values, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Empty);
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Writes with shortest round-trip formatting, so a re-read is exact.
pub fn write_matrix<W: Write>(writer: W, m: &DMatrix<f64>) -> Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    let mut line = String::new();
    for i in 0..m.nrows() {
        line.clear();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_float(m[(i, j)]));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        format!("{v}")
    }
}

/// Parses `u v` lines of non-negative vertex ids. Blank lines and `#`
/// comments are skipped.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let bad = |msg: String| Error::Parse { line: idx + 1, msg };
        if fields.len() != 2 {
            return Err(bad(format!("expected two vertex ids, found {}", fields.len())));
        }
        let id = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("not a vertex id: {s:?}")));
        edges.push((id(fields[0])?, id(fields[1])?));
    }
    Ok(edges)
}
