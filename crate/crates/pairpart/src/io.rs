//! METIS graph files, coordinate files and partition files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pairpart_core::{BlockId, Graph, NodeId, Weight};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{message} at line {line}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] pairpart_core::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Lines that are not `%` comments, with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.starts_with('%'))
}

fn number<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T, Error> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} '{token}'")))
}

pub fn read_metis(path: &Path) -> Result<Graph, Error> {
    parse_metis(&read(path)?)
}

/// Parses METIS text: a header `n m [fmt]` and one line per node listing
/// 1-based neighbors, with edge weights if `fmt` is 1 or 11 and a leading
/// node weight if `fmt` is 10 or 11.
pub fn parse_metis(text: &str) -> Result<Graph, Error> {
    let mut lines = content_lines(text);
    let (header_line, header) = lines
        .by_ref()
        .find(|(_, l)| !l.is_empty())
        .ok_or_else(|| parse_err(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if !(2..=3).contains(&fields.len()) {
        return Err(parse_err(header_line, "header must be 'n m [fmt]'"));
    }
    let n: usize = number(fields[0], header_line, "node count")?;
    let m: usize = number(fields[1], header_line, "edge count")?;
    let fmt = match fields.get(2) {
        None => 0,
        Some(f) => number::<u32>(f, header_line, "format code")?,
    };
    let (node_weights, edge_weights) = match fmt {
        0 => (false, false),
        1 => (false, true),
        10 => (true, false),
        11 => (true, true),
        _ => {
            return Err(parse_err(
                header_line,
                format!("unsupported format code {fmt}"),
            ))
        }
    };
    if n > NodeId::MAX as usize {
        return Err(parse_err(header_line, "too many nodes"));
    }

    let mut weights = Vec::with_capacity(n);
    let mut line_of = Vec::with_capacity(n);
    let mut arcs: Vec<(NodeId, NodeId, Weight)> = Vec::with_capacity(2 * m);
    let mut last_line = header_line;
    for (line, text) in lines {
        last_line = line;
        if line_of.len() == n {
            if text.is_empty() {
                continue;
            }
            return Err(parse_err(line, format!("more than {n} node lines")));
        }
        let u = line_of.len() as NodeId;
        line_of.push(line);
        let mut tokens = text.split_whitespace();
        if node_weights {
            let w = tokens
                .next()
                .ok_or_else(|| parse_err(line, "missing node weight"))?;
            let w: Weight = number(w, line, "node weight")?;
            if w < 0 {
                return Err(parse_err(line, "negative node weight"));
            }
            weights.push(w);
        } else {
            weights.push(1);
        }
        while let Some(t) = tokens.next() {
            let v: usize = number(t, line, "neighbor")?;
            if v == 0 || v > n {
                return Err(parse_err(line, format!("neighbor {v} out of range 1..{n}")));
            }
            let v = (v - 1) as NodeId;
            if v == u {
                return Err(parse_err(line, "self-loop"));
            }
            let w = if edge_weights {
                let t = tokens
                    .next()
                    .ok_or_else(|| parse_err(line, "missing edge weight"))?;
                number(t, line, "edge weight")?
            } else {
                1
            };
            if w <= 0 {
                return Err(parse_err(line, "edge weight must be positive"));
            }
            arcs.push((u, v, w));
        }
    }
    if line_of.len() < n {
        return Err(parse_err(
            last_line + 1,
            format!("expected {n} node lines, found {}", line_of.len()),
        ));
    }

    let mut directed: HashMap<(NodeId, NodeId), Weight> = HashMap::with_capacity(arcs.len());
    for &(u, v, w) in &arcs {
        if directed.insert((u, v), w).is_some() {
            return Err(parse_err(
                line_of[u as usize],
                format!("duplicate neighbor {}", v + 1),
            ));
        }
    }
    let mut edges = Vec::with_capacity(arcs.len() / 2);
    for &(u, v, w) in &arcs {
        match directed.get(&(v, u)) {
            None => return Err(parse_err(line_of[v as usize], "asymmetric adjacency")),
            Some(&back) if back != w => {
                return Err(parse_err(line_of[v as usize], "edge weight mismatch"))
            }
            Some(_) if u < v => edges.push((u, v, w)),
            Some(_) => {}
        }
    }
    if edges.len() != m {
        return Err(parse_err(
            header_line,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    Ok(Graph::from_edges(n, &edges, weights)?)
}

/// METIS text for `g`, using the smallest format code that keeps all weights.
pub fn format_metis(g: &Graph) -> String {
    let node_weights = g.node_weights().iter().any(|&w| w != 1);
    let edge_weights = g.edges().iter().any(|e| e.weight != 1);
    let mut out = format!("{} {}", g.n(), g.m());
    match (node_weights, edge_weights) {
        (false, false) => {}
        (false, true) => out.push_str(" 1"),
        (true, false) => out.push_str(" 10"),
        (true, true) => out.push_str(" 11"),
    }
    out.push('\n');
    for v in 0..g.n() as NodeId {
        let mut fields = Vec::new();
        if node_weights {
            fields.push(g.node_weight(v).to_string());
        }
        for (w, omega) in g.neighbors(v) {
            fields.push((w + 1).to_string());
            if edge_weights {
                fields.push(omega.to_string());
            }
        }
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_metis(path: &Path, g: &Graph) -> Result<(), Error> {
    write(path, &format_metis(g))
}

pub fn read_coords(path: &Path, n: usize) -> Result<Vec<[f64; 2]>, Error> {
    parse_coords(&read(path)?, n)
}

/// One `x y` pair per non-empty line.
pub fn parse_coords(text: &str, n: usize) -> Result<Vec<[f64; 2]>, Error> {
    let mut coords = Vec::with_capacity(n);
    let mut last_line = 0;
    for (line, text) in content_lines(text) {
        last_line = line;
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(line, "expected 'x y'"));
        }
        let x: f64 = number(fields[0], line, "coordinate")?;
        let y: f64 = number(fields[1], line, "coordinate")?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(parse_err(line, "coordinates must be finite"));
        }
        coords.push([x, y]);
    }
    if coords.len() != n {
        return Err(parse_err(
            last_line,
            format!("expected {n} coordinate lines, found {}", coords.len()),
        ));
    }
    Ok(coords)
}

pub fn format_coords(coords: &[[f64; 2]]) -> String {
    let mut out = String::new();
    for [x, y] in coords {
        let _ = writeln!(out, "{x} {y}");
    }
    out
}

pub fn write_coords(path: &Path, coords: &[[f64; 2]]) -> Result<(), Error> {
    write(path, &format_coords(coords))
}

pub fn format_partition(block_of: &[BlockId]) -> String {
    let mut out = String::with_capacity(block_of.len() * 3);
    for b in block_of {
        let _ = writeln!(out, "{b}");
    }
    out
}

pub fn write_partition(path: &Path, block_of: &[BlockId]) -> Result<(), Error> {
    write(path, &format_partition(block_of))
}

pub fn parse_partition(text: &str) -> Result<Vec<BlockId>, Error> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| number(l.trim(), i + 1, "block id"))
        .collect()
}

pub fn read_partition(path: &Path) -> Result<Vec<BlockId>, Error> {
    parse_partition(&read(path)?)
}
