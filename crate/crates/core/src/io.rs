//! Plain-text polytope files.
//!
//! ```text
//! H
//! 4 3
//! 1 1 0
//! 1 -1 0
//! 1 0 1
//! 1 0 -1
//! ```
//!
//! Line one is `H` or `V`; line two gives the row count and the row width
//! (dimension + 1); each following line is one normalized integer row. An
//! H file may end with an `equalities <k>` line followed by `k` rows.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use num_bigint::BigInt;
use thiserror::Error;

use crate::exactgeom::{GeomError, HRep, HomogeneousVector, VRep, VectorKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Polytope {
    H(HRep),
    V(VRep),
}

fn write_rows(out: &mut String, rows: &[HomogeneousVector]) {
    for r in rows {
        let parts: Vec<String> = r.entries().iter().map(BigInt::to_string).collect();
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
}

pub fn write_hrep(h: &HRep) -> String {
    let mut out = String::from("H\n");
    let _ = writeln!(out, "{} {}", h.len(), h.dimension() + 1);
    write_rows(&mut out, h.rows());
    if !h.equalities().is_empty() {
        let _ = writeln!(out, "equalities {}", h.equalities().len());
        write_rows(&mut out, h.equalities());
    }
    out
}

pub fn write_vrep(v: &VRep) -> String {
    let mut out = String::from("V\n");
    let _ = writeln!(out, "{} {}", v.len(), v.dimension() + 1);
    write_rows(&mut out, v.rows());
    out
}

pub fn write_polytope(p: &Polytope) -> String {
    match p {
        Polytope::H(h) => write_hrep(h),
        Polytope::V(v) => write_vrep(v),
    }
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

pub fn parse_polytope(text: &str) -> Result<Polytope, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (n, tag) = lines.next().ok_or_else(|| syntax(1, "empty input"))?;
    let kind = match tag {
        "H" => VectorKind::Inequality,
        "V" => VectorKind::Point,
        other => return Err(syntax(n, format!("expected H or V, found {other:?}"))),
    };
    let (n, header) = lines.next().ok_or_else(|| syntax(n + 1, "missing size line"))?;
    let sizes: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| syntax(n, "size line must be two integers"))?;
    let [count, width] = sizes[..] else {
        return Err(syntax(n, "size line must be two integers"));
    };
    if width < 2 {
        return Err(syntax(n, "rows need at least two entries"));
    }

    let parse_row = |n: usize, l: &str, kind: VectorKind| -> Result<HomogeneousVector, FormatError> {
        let entries: Vec<BigInt> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| syntax(n, "rows must be integers"))?;
        if entries.len() != width {
            return Err(syntax(n, format!("expected {width} entries, found {}", entries.len())));
        }
        Ok(HomogeneousVector::from_integers(entries, kind)?)
    };

    let mut rows = Vec::with_capacity(count);
    let mut equalities = Vec::new();
    let mut expected_equalities = 0;
    let mut in_equalities = false;
    for (n, l) in lines {
        if let Some(k) = l.strip_prefix("equalities") {
            if kind != VectorKind::Inequality || in_equalities {
                return Err(syntax(n, "unexpected equalities block"));
            }
            expected_equalities = k.trim().parse().map_err(|_| syntax(n, "bad equality count"))?;
            in_equalities = true;
            continue;
        }
        let row = parse_row(n, l, kind)?;
        if in_equalities {
            equalities.push(row);
        } else {
            rows.push(row);
        }
    }
    if rows.len() != count {
        return Err(FormatError::RowCount { expected: count, found: rows.len() });
    }
    if equalities.len() != expected_equalities {
        return Err(FormatError::RowCount { expected: expected_equalities, found: equalities.len() });
    }
    Ok(match kind {
        VectorKind::Inequality => Polytope::H(HRep::with_equalities(width - 1, rows, equalities)?),
        VectorKind::Point => Polytope::V(VRep::new(width - 1, rows)?),
    })
}
