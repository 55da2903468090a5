//! Line-oriented graph text format.
//!
//! ```text
//! # comment
//! vertex <id> <leads>
//! edge <id> <v1> <v2> <length>
//! ```
//!
//! Metadata is written as `#@ key=value` lines, which other readers see as
//! ordinary comments. Lengths are printed in shortest round-trip form.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, ParseErrorKind, Result};
use crate::graph::{Edge, QuantumGraph, Vertex};
use crate::scalar::Real;

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        kind: ParseErrorKind::Syntax(msg.into()),
    }
}

fn field<F: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<F> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| syntax(line, format!("invalid {what} '{tok}'")))
}

pub fn parse_graph<T: Real>(text: &str) -> Result<QuantumGraph<T>> {
    let mut vertices = Vec::new();
    let mut edges: Vec<(usize, Edge<T>)> = Vec::new();
    let mut vids = HashSet::new();
    let mut eids = HashSet::new();
    let mut meta = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix("#@") {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        match toks.next() {
            Some("vertex") => {
                let id: i64 = field(toks.next(), line, "vertex id")?;
                let leads: u32 = field(toks.next(), line, "lead count")?;
                if !vids.insert(id) {
                    return Err(Error::Parse {
                        line,
                        kind: ParseErrorKind::DuplicateVertex(id),
                    });
                }
                vertices.push(Vertex { id, leads });
            }
            Some("edge") => {
                let id: i64 = field(toks.next(), line, "edge id")?;
                let a: i64 = field(toks.next(), line, "endpoint")?;
                let b: i64 = field(toks.next(), line, "endpoint")?;
                let tok = toks.next();
                let length: T = field(tok, line, "length")?;
                if !eids.insert(id) {
                    return Err(Error::Parse {
                        line,
                        kind: ParseErrorKind::DuplicateEdge(id),
                    });
                }
                if !(length.is_finite() && length > T::zero()) {
                    return Err(Error::Parse {
                        line,
                        kind: ParseErrorKind::NonPositiveLength {
                            edge: id,
                            length: tok.unwrap_or_default().to_string(),
                        },
                    });
                }
                edges.push((
                    line,
                    Edge {
                        id,
                        endpoints: (a, b),
                        length,
                    },
                ));
            }
            Some(other) => return Err(syntax(line, format!("unknown directive '{other}'"))),
            None => unreachable!(),
        }
        if let Some(extra) = toks.next() {
            return Err(syntax(line, format!("unexpected token '{extra}'")));
        }
    }
    // Endpoints may reference vertices declared later in the file.
    for (line, e) in &edges {
        for v in [e.endpoints.0, e.endpoints.1] {
            if !vids.contains(&v) {
                return Err(Error::Parse {
                    line: *line,
                    kind: ParseErrorKind::DanglingEndpoint {
                        edge: e.id,
                        vertex: v,
                    },
                });
            }
        }
    }
    let mut g = QuantumGraph::new(vertices, edges.into_iter().map(|(_, e)| e).collect())?;
    for (k, v) in meta {
        g.set_meta(k, v);
    }
    Ok(g)
}

pub fn serialize_graph<T: Real>(graph: &QuantumGraph<T>) -> String {
    let mut out = String::new();
    for (k, v) in graph.meta() {
        let _ = writeln!(out, "#@ {k}={v}");
    }
    for v in graph.vertices() {
        let _ = writeln!(out, "vertex {} {}", v.id, v.leads);
    }
    for e in graph.edges() {
        let _ = writeln!(
            out,
            "edge {} {} {} {}",
            e.id, e.endpoints.0, e.endpoints.1, e.length
        );
    }
    out
}

/// Formats a real with 17 significant digits.
pub fn fmt17<T: Real>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}
