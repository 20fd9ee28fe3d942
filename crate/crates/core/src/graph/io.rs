//! Edge-list and Matrix Market ingestion.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use super::Graph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    MatrixMarket,
}

impl GraphFormat {
    /// `.mtx` files are Matrix Market, everything else an edge list.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("mtx") => GraphFormat::MatrixMarket,
            _ => GraphFormat::EdgeList,
        }
    }
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge-list" | "edges" => Ok(GraphFormat::EdgeList),
            "matrix-market" | "mtx" => Ok(GraphFormat::MatrixMarket),
            other => Err(Error::input(format!("unknown graph format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestOptions {
    /// Edge-list vertex ids start at 1 (Network Repository convention).
    pub one_indexed: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { one_indexed: true }
    }
}

pub fn load_graph(path: &Path, format: GraphFormat, options: &IngestOptions) -> Result<Graph> {
    let reader = BufReader::new(File::open(path)?);
    match format {
        GraphFormat::EdgeList => parse_edge_list(reader, options),
        GraphFormat::MatrixMarket => parse_matrix_market(reader),
    }
}

fn is_comment(line: &str) -> bool {
    line.starts_with('%') || line.starts_with('#')
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
}

fn parse_weight(token: &str, line: usize) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| Error::parse(line, format!("invalid weight `{token}`")))
}

/// Parses `u v [weight ...]` lines. Vertex ids are renumbered `0..n` in order
/// of first appearance; self-loops and zero-weight lines add no edge.
pub fn parse_edge_list<R: BufRead>(reader: R, options: &IngestOptions) -> Result<Graph> {
    let base: i64 = if options.one_indexed { 1 } else { 0 };
    let mut ids: HashMap<i64, usize> = HashMap::new();
    let mut pairs = Vec::new();
    let mut data_lines = 0usize;

    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || is_comment(line) {
            continue;
        }
        data_lines += 1;
        let toks: Vec<&str> = tokens(line).collect();
        if toks.len() < 2 {
            return Err(Error::parse(lineno, "expected two vertex ids"));
        }
        let mut endpoint = |tok: &str| -> Result<usize> {
            let raw: i64 = tok
                .parse()
                .map_err(|_| Error::parse(lineno, format!("invalid vertex id `{tok}`")))?;
            if raw < base {
                return Err(Error::parse(lineno, format!("vertex id {raw} below index base {base}")));
            }
            let next = ids.len();
            Ok(*ids.entry(raw - base).or_insert(next))
        };
        let a = endpoint(toks[0])?;
        let b = endpoint(toks[1])?;
        let weight = match toks.get(2) {
            Some(t) => parse_weight(t, lineno)?,
            None => 1.0,
        };
        if a != b && weight != 0.0 {
            pairs.push((a, b));
        }
    }

    if data_lines == 0 {
        return Err(Error::input("edge list contains no edges"));
    }
    Graph::from_edges(ids.len(), pairs)
}

/// Parses a Matrix Market coordinate file; only the sparsity pattern is kept.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<Graph> {
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(Error::input("matrix market file is empty")),
    };
    let head: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if head.len() != 5 || head[0] != "%%matrixmarket" || head[1] != "matrix" {
        return Err(Error::parse(1, "missing `%%MatrixMarket matrix` banner"));
    }
    if head[2] != "coordinate" {
        return Err(Error::parse(1, format!("unsupported layout `{}`", head[2])));
    }
    let has_value = match head[3].as_str() {
        "pattern" => false,
        "real" | "integer" => true,
        other => return Err(Error::parse(1, format!("unsupported field `{other}`"))),
    };
    match head[4].as_str() {
        "general" | "symmetric" => {}
        other => return Err(Error::parse(1, format!("unsupported symmetry `{other}`"))),
    }

    let mut size: Option<(usize, usize)> = None;
    let mut pairs = Vec::new();
    let mut seen = 0usize;

    for (k, line) in lines {
        let lineno = k + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some((n, nnz)) = size else {
            let parsed: Vec<usize> = toks
                .iter()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(lineno, "invalid size line"))?;
            let [rows, cols, nnz] = parsed[..] else {
                return Err(Error::parse(lineno, "size line must be `rows cols entries`"));
            };
            if rows != cols {
                return Err(Error::parse(
                    lineno,
                    format!("adjacency matrix must be square, got {rows}x{cols}"),
                ));
            }
            if rows == 0 {
                return Err(Error::parse(lineno, "matrix has no rows"));
            }
            size = Some((rows, nnz));
            continue;
        };

        seen += 1;
        if seen > nnz {
            return Err(Error::parse(lineno, format!("more than the declared {nnz} entries")));
        }
        let want = if has_value { 3 } else { 2 };
        if toks.len() < want {
            return Err(Error::parse(lineno, format!("expected {want} tokens")));
        }
        let index = |tok: &str| -> Result<usize> {
            match tok.parse::<usize>() {
                Ok(i) if (1..=n).contains(&i) => Ok(i - 1),
                _ => Err(Error::parse(lineno, format!("invalid index `{tok}` for n = {n}"))),
            }
        };
        let i = index(toks[0])?;
        let j = index(toks[1])?;
        let weight = if has_value { parse_weight(toks[2], lineno)? } else { 1.0 };
        if i != j && weight != 0.0 {
            pairs.push((i, j));
        }
    }

    match size {
        None => Err(Error::input("matrix market file has no size line")),
        Some((_, nnz)) if seen < nnz => Err(Error::input(format!(
            "matrix market file declares {nnz} entries but holds {seen}"
        ))),
        Some((n, _)) => Graph::from_edges(n, pairs),
    }
}

/// One `u v` line per edge, 1-indexed, preceded by a `% n m` comment.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "% {} {}", g.n(), g.m())?;
    for &(i, j) in g.edges() {
        writeln!(out, "{} {}", i + 1, j + 1)?;
    }
    Ok(())
}

/// Symmetric pattern coordinate file; preserves isolated vertices.
pub fn write_matrix_market<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate pattern symmetric")?;
    writeln!(out, "{} {} {}", g.n(), g.n(), g.m())?;
    for &(i, j) in g.edges() {
        writeln!(out, "{} {}", j + 1, i + 1)?;
    }
    Ok(())
}
