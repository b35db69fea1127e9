//! Text formats: edge lists, vertex partitions, label tables.
//!
//! Edge lists are line oriented. The first data line holds `n m`; each of
//! the following m data lines holds one arc `u v` with 0-based endpoints.
//! `#` starts a comment that runs to the end of the line; blank lines are
//! skipped. Errors cite 1-based line numbers.

use crate::error::{Error, Result};
use crate::graph::{OrientedGraph, VertexId};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn parse_usize(token: &str, line: usize) -> Result<usize> {
    token.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a non-negative integer, got {token:?}"),
    })
}

/// Parses the edge-list format into an oriented graph.
pub fn parse_edge_list(text: &str) -> Result<OrientedGraph> {
    let mut lines = data_lines(text);
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty input".into() })?;
    let mut tokens = header.split_whitespace();
    let (Some(n), Some(m), None) = (tokens.next(), tokens.next(), tokens.next()) else {
        return Err(Error::Parse {
            line: header_line,
            msg: "header must be exactly `n m`".into(),
        });
    };
    let n = parse_usize(n, header_line)?;
    let m = parse_usize(m, header_line)?;

    let mut arcs = Vec::with_capacity(m);
    let mut graph = OrientedGraph::from_arcs(n, &[])?;
    for (line_no, line) in lines {
        let mut tokens = line.split_whitespace();
        let (Some(u), Some(v), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Parse {
                line: line_no,
                msg: "arc line must be exactly `u v`".into(),
            });
        };
        let u = parse_usize(u, line_no)?;
        let v = parse_usize(v, line_no)?;
        arcs.push((u, v));
        // Validate incrementally so the error names the offending line.
        graph = OrientedGraph::from_arcs(n, &arcs).map_err(|e| Error::Parse {
            line: line_no,
            msg: match e {
                Error::Input(m) => m,
                other => other.to_string(),
            },
        })?;
    }
    if arcs.len() != m {
        return Err(Error::Parse {
            line: header_line,
            msg: format!("header promises {m} arcs, found {}", arcs.len()),
        });
    }
    Ok(graph)
}

/// Serializes a graph in the edge-list format, arcs in lexicographic order.
pub fn format_edge_list(graph: &OrientedGraph) -> String {
    let mut text = format!("{} {}\n", graph.vertex_count(), graph.arc_count());
    for (u, v) in graph.arcs() {
        text.push_str(&format!("{u} {v}\n"));
    }
    text
}

/// Parses a two-line `A: ...` / `B: ...` vertex partition.
pub fn parse_partition(text: &str) -> Result<(Vec<VertexId>, Vec<VertexId>)> {
    let mut a = None;
    let mut b = None;
    for (line_no, line) in data_lines(text) {
        let Some((tag, rest)) = line.split_once(':') else {
            return Err(Error::Parse {
                line: line_no,
                msg: "expected `A: ...` or `B: ...`".into(),
            });
        };
        let members = rest
            .split_whitespace()
            .map(|t| parse_usize(t, line_no))
            .collect::<Result<Vec<_>>>()?;
        let slot = match tag.trim() {
            "A" => &mut a,
            "B" => &mut b,
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unknown part {other:?}, expected A or B"),
                })
            }
        };
        if slot.replace(members).is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: "part listed twice".into(),
            });
        }
    }
    match (a, b) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Input("partition needs both an A and a B line".into())),
    }
}

/// Parses a label table: one label per data line, for vertex 0, 1, ...
pub fn parse_labels(text: &str) -> Vec<String> {
    data_lines(text).map(|(_, line)| line.to_string()).collect()
}

/// Renders an ordering as whitespace-separated indices on one line.
pub fn format_ordering(order: &[VertexId]) -> String {
    order
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = OrientedGraph::from_arcs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let text = format_edge_list(&g);
        assert_eq!(text, "3 3\n0 1\n1 2\n2 0\n");
        assert_eq!(parse_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let text = "# a triangle\n\n3 3\n0 1 # first arc\n1 2\n2 0\n";
        assert_eq!(parse_edge_list(text).unwrap().arc_count(), 3);
    }

    #[test]
    fn digon_error_names_line() {
        let text = "2 2\n0 1\n1 0\n";
        match parse_edge_list(text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("digon"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn loop_error_names_line() {
        let text = "2 1\n1 1\n";
        match parse_edge_list(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn arc_count_mismatch_is_rejected() {
        assert!(parse_edge_list("2 2\n0 1\n").is_err());
        assert!(parse_edge_list("2 0\n0 1\n").is_err());
    }

    #[test]
    fn partition_both_orders() {
        let (a, b) = parse_partition("A: 0 1\nB: 2\n").unwrap();
        assert_eq!((a, b), (vec![0, 1], vec![2]));
        let (a, b) = parse_partition("B: 2\nA: 0 1\n").unwrap();
        assert_eq!((a, b), (vec![0, 1], vec![2]));
        assert!(parse_partition("A: 0\n").is_err());
        assert!(parse_partition("A: 0\nA: 1\nB: 2\n").is_err());
    }

    #[test]
    fn labels_by_line() {
        assert_eq!(parse_labels("# names\na\nb\nc\n"), vec!["a", "b", "c"]);
    }

    #[test]
    fn ordering_one_line() {
        assert_eq!(format_ordering(&[2, 0, 1]), "2 0 1");
    }
}
