//! Edge-list and partition files. Vertices are 1-based on disk.
//!
//! Edge list: a header line `n m`, then `m` lines `u v` with `u < v`, sorted.
//! Partition: `n` lines, each `0` or `1`; line `i` labels vertex `i`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};

/// Builds a graph from 1-based pairs, as read from files or typed on the CLI.
pub fn build_graph(n: usize, pairs: &[(usize, usize)]) -> Result<Graph> {
    if n < 2 {
        return Err(Error::TooFewVertices(n));
    }
    let mut zero_based = Vec::with_capacity(pairs.len());
    for &(u, v) in pairs {
        for x in [u, v] {
            if x == 0 || x > n {
                return Err(Error::VertexOutOfRange { vertex: x, n });
            }
        }
        zero_based.push((u - 1, v - 1));
    }
    Graph::from_edges(n, zero_based)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::with_capacity(16 * (g.edge_count() + 1));
    writeln!(out, "{} {}", g.n(), g.edge_count()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "{} {}", u + 1, v + 1).unwrap();
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty edge list".into()))?;
    let (n, m) = parse_pair(header, 1)?;
    let mut pairs = Vec::with_capacity(m);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        pairs.push(parse_pair(line, i + 2)?);
    }
    if pairs.len() != m {
        return Err(Error::Parse(format!(
            "header declares {m} edges, found {}",
            pairs.len()
        )));
    }
    build_graph(n, &pairs)
}

fn parse_pair(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(Error::Parse(format!("line {lineno}: expected two integers, got '{line}'"))),
    }
}

pub fn format_partition(p: &Partition) -> String {
    let mut out = String::with_capacity(2 * p.len());
    for &l in p.labels() {
        out.push(if l == 0 { '0' } else { '1' });
        out.push('\n');
    }
    out
}

pub fn parse_partition(text: &str) -> Result<Partition> {
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        match line.trim() {
            "0" => labels.push(0),
            "1" => labels.push(1),
            "" => continue,
            other => {
                return Err(Error::Parse(format!(
                    "line {}: expected 0 or 1, got '{other}'",
                    i + 1
                )))
            }
        }
    }
    Partition::new(labels)
}

pub fn write_edge_list(path: &Path, g: &Graph) -> Result<()> {
    fs::write(path, format_edge_list(g))?;
    Ok(())
}

pub fn read_edge_list(path: &Path) -> Result<Graph> {
    parse_edge_list(&fs::read_to_string(path)?)
}

pub fn write_partition(path: &Path, p: &Partition) -> Result<()> {
    fs::write(path, format_partition(p))?;
    Ok(())
}

pub fn read_partition(path: &Path) -> Result<Partition> {
    parse_partition(&fs::read_to_string(path)?)
}
