//! Text formats for point sets and generator matrices.
//!
//! Point set: a header `d w N`, then `N` rows of `d` decimal mantissas.
//! Matrices: a header `d s`, then `d` blocks of `s` rows of `s` binary digits.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pointset::{GeneratorMatrices, PointSet};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn numbers<T: std::str::FromStr>(line: usize, text: &str) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| parse_err(line, format!("expected an integer, found {t:?}"))))
        .collect()
}

pub fn parse_point_set(text: &str) -> Result<PointSet> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header \"d w N\""))?;
    let h: Vec<u64> = numbers(hl, header)?;
    if h.len() != 3 {
        return Err(parse_err(hl, "header must be \"d w N\""));
    }
    let (d, w, n) = (h[0] as usize, h[1] as u32, h[2] as usize);
    let mut data = Vec::with_capacity(n.saturating_mul(d).min(1 << 26));
    let mut rows = 0;
    for (ln, l) in lines {
        let row: Vec<u64> = numbers(ln, l)?;
        if row.len() != d {
            return Err(parse_err(ln, format!("expected {d} mantissas, found {}", row.len())));
        }
        data.extend(row);
        rows += 1;
    }
    if rows != n {
        return Err(parse_err(hl, format!("header announces {n} points, file has {rows}")));
    }
    PointSet::new(d, w, data).map_err(|e| parse_err(hl, e.to_string()))
}

pub fn format_point_set(d: &PointSet) -> String {
    let mut out = format!("{} {} {}\n", d.dim(), d.precision(), d.len());
    for row in d.rows() {
        let cells: Vec<String> = row.iter().map(|m| m.to_string()).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

pub fn read_point_set(path: &Path) -> Result<PointSet> {
    parse_point_set(&std::fs::read_to_string(path)?)
}

pub fn write_point_set(path: &Path, d: &PointSet) -> Result<()> {
    Ok(std::fs::write(path, format_point_set(d))?)
}

pub fn parse_matrices(text: &str) -> Result<GeneratorMatrices> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header \"d s\""))?;
    let h: Vec<u32> = numbers(hl, header)?;
    if h.len() != 2 {
        return Err(parse_err(hl, "header must be \"d s\""));
    }
    let (d, s) = (h[0] as usize, h[1] as usize);
    let rows: Vec<(usize, &str)> = lines.collect();
    if rows.len() != d * s {
        return Err(parse_err(hl, format!("expected {} bit rows, found {}", d * s, rows.len())));
    }
    let mats: Vec<Vec<String>> = rows.chunks(s.max(1)).take(d).map(|b| b.iter().map(|(_, r)| r.to_string()).collect()).collect();
    let mats = if s == 0 { vec![Vec::new(); d] } else { mats };
    GeneratorMatrices::from_bit_strings(s as u32, &mats).map_err(|e| parse_err(hl, e.to_string()))
}

pub fn format_matrices(g: &GeneratorMatrices) -> String {
    let mut out = format!("{} {}\n", g.dim(), g.s());
    for m in g.to_bit_strings() {
        for r in m {
            let _ = writeln!(out, "{r}");
        }
    }
    out
}

pub fn read_matrices(path: &Path) -> Result<GeneratorMatrices> {
    parse_matrices(&std::fs::read_to_string(path)?)
}
