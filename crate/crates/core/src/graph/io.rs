//! Edge-list and Matrix Market readers.

use std::fmt::Write as _;
use std::path::Path;

use log::warn;

use super::Graph;
use crate::error::{Error, Result};

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()))
}

fn parse_usize(line: usize, token: Option<&str>, what: &str) -> Result<usize> {
    let token = token.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("{what} `{token}` is not a nonnegative integer")))
}

/// Reads the edge-list format: a header `n m`, then `m` lines `u v` with
/// 1-based endpoints. Blank lines and lines starting with `#` are skipped.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = numbered_lines(text).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty input, expected header `n m`"))?;
    let mut tok = header.split_whitespace();
    let n = parse_usize(hline, tok.next(), "vertex count")?;
    let m = parse_usize(hline, tok.next(), "edge count")?;
    if tok.next().is_some() {
        return Err(Error::parse(hline, "header has trailing tokens"));
    }
    let mut edges = Vec::with_capacity(m);
    let mut last_line = hline;
    for (line, content) in lines {
        last_line = line;
        if edges.len() == m {
            return Err(Error::parse(line, format!("more than the {m} declared edges")));
        }
        let mut tok = content.split_whitespace();
        let u = parse_usize(line, tok.next(), "endpoint")?;
        let v = parse_usize(line, tok.next(), "endpoint")?;
        if tok.next().is_some() {
            return Err(Error::parse(line, "edge line has trailing tokens"));
        }
        for x in [u, v] {
            if x == 0 || x > n {
                return Err(Error::parse(line, format!("endpoint {x} outside 1..={n}")));
            }
        }
        edges.push((u - 1, v - 1));
    }
    if edges.len() != m {
        return Err(Error::parse(
            last_line,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    Graph::new(n, edges)
}

/// Writes `g` in the edge-list format read by [`parse_edge_list`].
pub fn to_edge_list(g: &Graph) -> String {
    let mut out = String::with_capacity(16 + 12 * g.num_edges());
    let _ = writeln!(out, "{} {}", g.n(), g.num_edges());
    for &(a, b) in g.edges() {
        let _ = writeln!(out, "{} {}", a + 1, b + 1);
    }
    out
}

/// Reads a square Matrix Market coordinate matrix as the graph of its
/// off-diagonal pattern. Values are ignored. `general` matrices are
/// symmetrised (pattern of `A + A^T`).
pub fn parse_matrix_market(text: &str) -> Result<Graph> {
    let mut lines = numbered_lines(text);
    let (_, banner) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty input, expected %%MatrixMarket banner"))?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::parse(1, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    if fields[2] != "coordinate" {
        return Err(Error::parse(1, format!("unsupported format `{}`", fields[2])));
    }
    match fields[3].as_str() {
        "pattern" => {}
        "real" | "integer" | "complex" => {
            warn!("matrix field `{}` read as a pattern, values ignored", fields[3])
        }
        other => return Err(Error::parse(1, format!("unsupported field `{other}`"))),
    }
    match fields[4].as_str() {
        "symmetric" => {}
        "general" => warn!("general matrix symmetrised to its undirected pattern"),
        other => return Err(Error::parse(1, format!("unsupported symmetry `{other}`"))),
    }

    let mut lines = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (sline, size) = lines
        .next()
        .ok_or_else(|| Error::parse(2, "missing size line `rows cols entries`"))?;
    let mut tok = size.split_whitespace();
    let rows = parse_usize(sline, tok.next(), "row count")?;
    let cols = parse_usize(sline, tok.next(), "column count")?;
    let nnz = parse_usize(sline, tok.next(), "entry count")?;
    if rows != cols {
        return Err(Error::parse(sline, format!("matrix is {rows}x{cols}, not square")));
    }

    let mut edges = Vec::with_capacity(nnz);
    let mut seen = 0usize;
    let mut last_line = sline;
    for (line, content) in lines {
        last_line = line;
        seen += 1;
        if seen > nnz {
            return Err(Error::parse(line, format!("more than the {nnz} declared entries")));
        }
        let mut tok = content.split_whitespace();
        let i = parse_usize(line, tok.next(), "row index")?;
        let j = parse_usize(line, tok.next(), "column index")?;
        for x in [i, j] {
            if x == 0 || x > rows {
                return Err(Error::parse(line, format!("index {x} outside 1..={rows}")));
            }
        }
        edges.push((i - 1, j - 1));
    }
    if seen != nnz {
        return Err(Error::parse(
            last_line,
            format!("size line declares {nnz} entries, found {seen}"),
        ));
    }
    Graph::new(rows, edges)
}

/// Reads a graph file, choosing the parser by extension (`.mtx` for Matrix
/// Market, anything else as an edge list).
pub fn read_graph_file(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    let is_mtx = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("mtx"));
    if is_mtx {
        parse_matrix_market(&text)
    } else {
        parse_edge_list(&text)
    }
}
