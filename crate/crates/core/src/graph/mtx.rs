//! MatrixMarket coordinate format (`real`, `integer` or `pattern`;
//! `symmetric` or `general`). Indices are 1-based on disk.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::SparseSymmetric;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    Symmetric,
    General,
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseSymmetric> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix_market(BufReader::new(file), path)
}

/// Parses from any reader; `origin` only labels error messages.
pub fn read_matrix_market<R: BufRead>(reader: R, origin: impl AsRef<Path>) -> Result<SparseSymmetric> {
    let origin = origin.as_ref().to_path_buf();
    let fail = |line: usize, message: String| Error::Parse { path: origin.clone(), line, message };

    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));
    let mut next_line = || -> Option<Result<(usize, String)>> {
        lines.next().map(|(k, l)| l.map(|s| (k, s)).map_err(|e| Error::io(&origin, e)))
    };

    let (lineno, header) = next_line().ok_or_else(|| fail(1, "empty file".into()))??;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(fail(lineno, format!("unsupported header `{header}`")));
    }
    let field = match tokens[3].as_str() {
        "real" | "integer" => Field::Real,
        "pattern" => Field::Pattern,
        other => return Err(fail(lineno, format!("unsupported field `{other}`"))),
    };
    let symmetry = match tokens[4].as_str() {
        "symmetric" => Symmetry::Symmetric,
        "general" => Symmetry::General,
        other => return Err(fail(lineno, format!("unsupported symmetry `{other}`"))),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut seen: HashMap<(usize, usize), (usize, f64)> = HashMap::new();
    let mut count = 0usize;
    while let Some(item) = next_line() {
        let (lineno, line) = item?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        let Some((n, nnz)) = size else {
            if parts.len() != 3 {
                return Err(fail(lineno, "size line must be `rows cols entries`".into()));
            }
            let nums = parts
                .iter()
                .map(|p| p.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| fail(lineno, format!("bad size line: {e}")))?;
            if nums[0] != nums[1] {
                return Err(fail(lineno, format!("matrix is not square: {} x {}", nums[0], nums[1])));
            }
            if nums[0] == 0 {
                return Err(fail(lineno, "zero-dimension matrix".into()));
            }
            size = Some((nums[0], nums[2]));
            seen.reserve(nums[2]);
            continue;
        };
        let expected = if field == Field::Pattern { 2 } else { 3 };
        if parts.len() != expected {
            return Err(fail(lineno, format!("expected {expected} fields, found {}", parts.len())));
        }
        let index = |s: &str| -> Result<usize> {
            let k: usize = s.parse().map_err(|e| fail(lineno, format!("bad index `{s}`: {e}")))?;
            if k == 0 || k > n {
                return Err(fail(lineno, format!("index {k} outside 1..={n}")));
            }
            Ok(k - 1)
        };
        let (i, j) = (index(parts[0])?, index(parts[1])?);
        let w = match field {
            Field::Pattern => 1.0,
            Field::Real => {
                let w: f64 = parts[2].parse().map_err(|e| fail(lineno, format!("bad value `{}`: {e}", parts[2])))?;
                if !w.is_finite() {
                    return Err(fail(lineno, format!("non-finite value {w}")));
                }
                w
            }
        };
        if i != j && w < 0.0 {
            return Err(fail(lineno, format!("negative off-diagonal weight {w}")));
        }
        let key = match symmetry {
            Symmetry::Symmetric => (i.min(j), i.max(j)),
            Symmetry::General => (i, j),
        };
        if let Some((first, _)) = seen.insert(key, (lineno, w)) {
            return Err(fail(lineno, format!("duplicate entry ({}, {}), first seen on line {first}", i + 1, j + 1)));
        }
        count += 1;
        if count > nnz {
            return Err(fail(lineno, format!("more entries than the declared {nnz}")));
        }
    }
    let Some((n, nnz)) = size else {
        return Err(fail(lineno, "missing size line".into()));
    };
    if count != nnz {
        return Err(fail(lineno, format!("declared {nnz} entries, found {count}")));
    }

    let mut triplets = Vec::with_capacity(seen.len());
    for (&(i, j), &(_, w)) in &seen {
        match symmetry {
            Symmetry::Symmetric => triplets.push((i, j, w)),
            Symmetry::General => {
                if i > j {
                    continue;
                }
                if i != j {
                    let mirror = seen.get(&(j, i)).map_or(0.0, |e| e.1);
                    if mirror != w {
                        return Err(Error::Asymmetric { row: i, col: j, upper: w, lower: mirror });
                    }
                }
                triplets.push((i, j, w));
            }
        }
    }
    if symmetry == Symmetry::General {
        // Entries present only below the diagonal have no upper mirror.
        if let Some((&(i, j), &(_, w))) = seen.iter().find(|(&(i, j), _)| i > j && !seen.contains_key(&(j, i))) {
            return Err(Error::Asymmetric { row: j, col: i, upper: 0.0, lower: w });
        }
    }
    SparseSymmetric::from_triplets(n, triplets)
}

/// Writes `a` as a `symmetric` coordinate file, lower triangle, rows
/// ascending. Uses the `pattern` field when every weight is one. Entries are
/// streamed straight from the CSR rows.
pub fn write_matrix_market(a: &SparseSymmetric, path: impl AsRef<Path>) -> Result<()> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut out = BufWriter::new(file);
    write_matrix_market_to(a, &mut out).map_err(|e| Error::io(&path, e))?;
    out.flush().map_err(|e| Error::io(&path, e))
}

pub fn write_matrix_market_to<W: Write>(a: &SparseSymmetric, out: &mut W) -> std::io::Result<()> {
    let pattern = a.is_pattern();
    let nnz = a.edge_count() + a.diagonal().iter().filter(|&&w| w != 0.0).count();
    writeln!(out, "%%MatrixMarket matrix coordinate {} symmetric", if pattern { "pattern" } else { "real" })?;
    writeln!(out, "{} {} {}", a.n(), a.n(), nnz)?;
    for i in 0..a.n() {
        for (j, w) in a.neighbors(i).take_while(|&(j, _)| j < i) {
            write_entry(out, i, j, w, pattern)?;
        }
        let d = a.diagonal()[i];
        if d != 0.0 {
            write_entry(out, i, i, d, pattern)?;
        }
    }
    Ok(())
}

fn write_entry<W: Write>(out: &mut W, i: usize, j: usize, w: f64, pattern: bool) -> std::io::Result<()> {
    if pattern {
        writeln!(out, "{} {}", i + 1, j + 1)
    } else {
        // `{}` on f64 prints the shortest string that parses back exactly.
        writeln!(out, "{} {} {}", i + 1, j + 1, w)
    }
}
