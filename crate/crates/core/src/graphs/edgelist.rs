//! Plain-text edge lists: a header `n m family_tag` followed by `m` lines
//! `u v` with `u < v`, sorted lexicographically.

use std::fmt::Write as _;

use super::{FamilyTag, Graph, Vertex};
use crate::error::{Error, Result};

impl Graph {
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 + self.edge_count() * 12);
        let _ = writeln!(out, "{} {} {}", self.n(), self.edge_count(), self.tag());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text.lines().enumerate();
    let parse_err = |line: usize, message: String| Error::Parse {
        line: line + 1,
        column: 1,
        message,
    };
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty edge list".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, m, tag] = fields[..] else {
        return Err(parse_err(0, format!("expected `n m family_tag`, got {header:?}")));
    };
    let n: usize = n.parse().map_err(|e| parse_err(0, format!("bad n: {e}")))?;
    let m: usize = m.parse().map_err(|e| parse_err(0, format!("bad m: {e}")))?;
    let tag = FamilyTag::parse(tag).ok_or_else(|| parse_err(0, format!("unknown family {tag:?}")))?;

    let mut edges = Vec::with_capacity(m);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut next = |what: &str| -> Result<Vertex> {
            it.next()
                .ok_or_else(|| parse_err(idx, format!("missing {what}")))?
                .parse()
                .map_err(|e| parse_err(idx, format!("bad {what}: {e}")))
        };
        let (u, v) = (next("u")?, next("v")?);
        if u >= v {
            return Err(parse_err(idx, format!("edge ({u}, {v}) must have u < v")));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(parse_err(0, format!("header says {m} edges, found {}", edges.len())));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(parse_err(0, "edges are not strictly sorted".into()));
    }
    Graph::from_edges(n, &edges, tag)
}
