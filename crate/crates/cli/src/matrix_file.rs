//! Plain-text matrix files: a header line `m n` followed by `m` rows of `n` reals.

use std::fs;
use std::path::Path;

use kyfan_core::spectral::Mat;
use kyfan_core::{Error, Result};

pub fn parse_matrix(text: &str) -> Result<Mat> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Input("empty matrix file".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::Input(format!("header must be 'm n', got '{header}'")));
    }
    let parse_dim = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::Input(format!("bad dimension '{s}'")))
    };
    let (m, n) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    let mut values = Vec::with_capacity(m * n);
    let mut rows = 0;
    for (r, line) in lines.enumerate() {
        let row: Vec<&str> = line.split_whitespace().collect();
        if row.len() != n {
            return Err(Error::Input(format!("row {} has {} entries, expected {n}", r + 1, row.len())));
        }
        for tok in row {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Input(format!("row {}: '{tok}' is not a number", r + 1)))?;
            if !v.is_finite() {
                return Err(Error::Input(format!("row {}: non-finite entry '{tok}'", r + 1)));
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows != m {
        return Err(Error::Input(format!("found {rows} rows, header declares {m}")));
    }
    Ok(Mat::from_row_slice(m, n, &values))
}

pub fn read_matrix(path: &Path) -> Result<Mat> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| match e {
        Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Shortest round-trip text for every entry, so re-reading gives the same matrix.
pub fn format_matrix(a: &Mat) -> String {
    let mut out = format!("{} {}\n", a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| format!("{:?}", a[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, a: &Mat) -> Result<()> {
    fs::write(path, format_matrix(a)).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}
