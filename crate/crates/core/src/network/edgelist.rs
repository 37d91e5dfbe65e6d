//! Plain-text edge lists:
//!
//! ```text
//! # comment
//! SOURCE 0
//! SINK 7 8
//! 0 1 2.5
//! 1 7 1
//! ```
//!
//! Vertex ids are nonnegative integers; they are renumbered densely in
//! increasing order and kept as labels on the network.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::graph::Network;
use crate::error::{Error, Result};

pub fn parse_edge_list(text: &str) -> Result<Network> {
    let mut source = Vec::new();
    let mut sink = Vec::new();
    let mut edges = Vec::new();
    let mut seen_source = false;
    let mut seen_sink = false;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let head = fields.next().unwrap();
        let parse_id = |s: &str| -> Result<u64> {
            s.parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("`{s}` is not a nonnegative integer vertex id"),
            })
        };
        match head {
            "SOURCE" | "SINK" => {
                let ids = fields.map(parse_id).collect::<Result<Vec<_>>>()?;
                if ids.is_empty() {
                    return Err(Error::Parse { line: line_no, message: format!("{head} lists no vertices") });
                }
                if head == "SOURCE" {
                    seen_source = true;
                    source.extend(ids);
                } else {
                    seen_sink = true;
                    sink.extend(ids);
                }
            }
            _ => {
                let rest: Vec<&str> = fields.collect();
                if rest.len() != 2 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "expected `u v conductance`".to_string(),
                    });
                }
                let u = parse_id(head)?;
                let v = parse_id(rest[0])?;
                let c: f64 = rest[1].parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("`{}` is not a conductance", rest[1]),
                })?;
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("conductance {c} must be finite and nonnegative"),
                    });
                }
                edges.push((u, v, c));
            }
        }
    }
    if !seen_source || !seen_sink {
        return Err(Error::Parse { line: last_line, message: "missing SOURCE or SINK line".into() });
    }

    let mut index = BTreeMap::new();
    for id in edges.iter().flat_map(|&(u, v, _)| [u, v]).chain(source.iter().copied()).chain(sink.iter().copied()) {
        index.insert(id, 0usize);
    }
    for (i, slot) in index.values_mut().enumerate() {
        *slot = i;
    }
    let labels: Vec<u64> = index.keys().copied().collect();
    let net = Network::new(
        labels.len(),
        edges.iter().map(|&(u, v, c)| (index[&u], index[&v], c)),
        source.iter().map(|a| index[a]),
        sink.iter().map(|b| index[b]),
    )?;
    net.with_labels(labels)
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_edge_list(&text)
}

/// Serialises a network; conductances use 17 significant digits so the file
/// parses back to identical values.
pub fn write_edge_list(net: &Network) -> String {
    let mut out = String::new();
    let ids = |xs: &[usize]| xs.iter().map(|&x| net.label(x).to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "SOURCE {}", ids(net.source()));
    let _ = writeln!(out, "SINK {}", ids(net.sink()));
    for e in net.edges() {
        let _ = writeln!(out, "{} {} {:.16e}", net.label(e.u), net.label(e.v), e.conductance);
    }
    out
}
