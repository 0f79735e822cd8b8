//! Whitespace-delimited ASCII formats.
//!
//! Edge list: a header line `n m` followed by `m` lines `u v` with `u < v`.
//! Update stream: one `F u v` line per label flip.
//!
//! Blank lines and lines starting with `#` are skipped by both readers.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

/// A single label flip of the pair `{u, v}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Flip {
    pub u: Vertex,
    pub v: Vertex,
}

impl Flip {
    pub fn new(u: Vertex, v: Vertex) -> Self {
        Self { u, v }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_field(line: usize, tok: Option<&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::Parse { line, message: format!("missing {what}") })?;
    tok.parse().map_err(|_| Error::Parse { line, message: format!("{what} `{tok}` is not a non-negative integer") })
}

fn expect_end<'a>(line: usize, mut toks: impl Iterator<Item = &'a str>) -> Result<()> {
    match toks.next() {
        None => Ok(()),
        Some(t) => Err(Error::Parse { line, message: format!("unexpected trailing token `{t}`") }),
    }
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, message: "missing `n m` header".into() })?;
    let mut toks = header.split_whitespace();
    let n = parse_field(hl, toks.next(), "vertex count")?;
    let m = parse_field(hl, toks.next(), "edge count")?;
    expect_end(hl, toks)?;

    let mut g = Graph::new(n);
    let mut seen = 0;
    for (ln, l) in lines {
        let mut toks = l.split_whitespace();
        let u = parse_field(ln, toks.next(), "u")?;
        let v = parse_field(ln, toks.next(), "v")?;
        expect_end(ln, toks)?;
        if u >= v || v >= n {
            return Err(Error::Parse { line: ln, message: format!("edge ({u}, {v}) must satisfy u < v < {n}") });
        }
        if g.has_edge(u, v) {
            return Err(Error::Parse { line: ln, message: format!("duplicate edge ({u}, {v})") });
        }
        g.flip_edge(u, v)?;
        seen += 1;
    }
    if seen != m {
        return Err(Error::Parse { line: hl, message: format!("header announces {m} edges, found {seen}") });
    }
    Ok(g)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_update_stream(text: &str) -> Result<Vec<Flip>> {
    content_lines(text)
        .map(|(ln, l)| {
            let mut toks = l.split_whitespace();
            match toks.next() {
                Some("F") => {}
                Some(op) => {
                    return Err(Error::Parse { line: ln, message: format!("unknown update `{op}`, expected `F`") })
                }
                None => unreachable!("blank lines are filtered"),
            }
            let u = parse_field(ln, toks.next(), "u")?;
            let v = parse_field(ln, toks.next(), "v")?;
            expect_end(ln, toks)?;
            if u == v {
                return Err(Error::Parse { line: ln, message: format!("flip of self-pair ({u}, {v})") });
            }
            Ok(Flip::new(u, v))
        })
        .collect()
}

pub fn format_update_stream(flips: &[Flip]) -> String {
    let mut out = String::with_capacity(flips.len() * 12);
    for f in flips {
        let _ = writeln!(out, "F {} {}", f.u, f.v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_roundtrip() {
        let g = Graph::from_edges(5, [(0, 1), (3, 4), (1, 3)]).unwrap();
        let text = format_edge_list(&g);
        assert_eq!(text, "5 3\n0 1\n1 3\n3 4\n");
        assert_eq!(parse_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(parse_edge_list(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("3 1\n1 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_edge_list("3 2\n0 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_edge_list("3 2\n0 1\n0 1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_edge_list("3 1\n0 x\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn update_stream_roundtrip() {
        let flips = vec![Flip::new(0, 1), Flip::new(4, 2)];
        let text = format_update_stream(&flips);
        assert_eq!(text, "F 0 1\nF 4 2\n");
        assert_eq!(parse_update_stream(&text).unwrap(), flips);
        assert!(parse_update_stream("# comment\n\n").unwrap().is_empty());
        assert!(parse_update_stream("I 0 1\n").is_err());
        assert!(parse_update_stream("F 2 2\n").is_err());
    }
}
