//! Text format for mixed graphs.
//!
//! A `vertices:` line declares the universe (so isolated vertices
//! survive round-trips), then one edge per line. Lines starting with
//! `#` are comments.
//!
//! ```text
//! vertices: X,Z,T,Y
//! X -> Z
//! Z <-> T
//! Z -- Y      # undirected placeholder
//! T o-> Y     # circle marks appear in consensus graphs
//! ```

use super::{Mark, MixedGraph};
use crate::error::{Error, Result};

fn token_marks(token: &str) -> Option<(Mark, Mark)> {
    Some(match token {
        "->" => (Mark::Tail, Mark::Arrow),
        "<-" => (Mark::Arrow, Mark::Tail),
        "<->" => (Mark::Arrow, Mark::Arrow),
        "--" => (Mark::Tail, Mark::Tail),
        "o->" => (Mark::Circle, Mark::Arrow),
        "<-o" => (Mark::Arrow, Mark::Circle),
        "o-o" => (Mark::Circle, Mark::Circle),
        "o--" => (Mark::Circle, Mark::Tail),
        "--o" => (Mark::Tail, Mark::Circle),
        _ => return None,
    })
}

fn marks_token(mx: Mark, my: Mark) -> &'static str {
    match (mx, my) {
        (Mark::Tail, Mark::Arrow) => "->",
        (Mark::Arrow, Mark::Tail) => "<-",
        (Mark::Arrow, Mark::Arrow) => "<->",
        (Mark::Tail, Mark::Tail) => "--",
        (Mark::Circle, Mark::Arrow) => "o->",
        (Mark::Arrow, Mark::Circle) => "<-o",
        (Mark::Circle, Mark::Circle) => "o-o",
        (Mark::Circle, Mark::Tail) => "o--",
        (Mark::Tail, Mark::Circle) => "--o",
    }
}

/// ```
/// use agscore::graph::{graph_from_str, Mark};
///
/// let g = graph_from_str("vertices: A,B,C\nA -> B\nB <-> C\n").unwrap();
/// assert_eq!(g.edge(0, 1), Some((Mark::Tail, Mark::Arrow)));
/// assert!(g.is_ancestral());
/// ```
pub fn graph_from_str(text: &str) -> Result<MixedGraph> {
    let mut graph: Option<MixedGraph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("vertices:") {
            if graph.is_some() {
                return Err(Error::parse(line_no, "duplicate vertices declaration"));
            }
            let names: Vec<String> = rest
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if names.is_empty() {
                return Err(Error::parse(line_no, "vertices line declares no names"));
            }
            graph = Some(
                MixedGraph::new(names)
                    .map_err(|e| Error::parse(line_no, e.to_string()))?,
            );
            continue;
        }
        let g = graph
            .as_mut()
            .ok_or_else(|| Error::parse(line_no, "edge before the vertices declaration"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                line_no,
                format!("expected 'NAME EDGE NAME', got '{line}'"),
            ));
        }
        let (mx, my) = token_marks(fields[1])
            .ok_or_else(|| Error::parse(line_no, format!("unknown edge token '{}'", fields[1])))?;
        let x = g
            .name_index(fields[0])
            .ok_or_else(|| Error::parse(line_no, format!("undeclared vertex '{}'", fields[0])))?;
        let y = g
            .name_index(fields[2])
            .ok_or_else(|| Error::parse(line_no, format!("undeclared vertex '{}'", fields[2])))?;
        g.add_edge(x, y, mx, my)
            .map_err(|e| Error::parse(line_no, e.to_string()))?;
    }
    graph.ok_or_else(|| Error::parse(1, "missing vertices declaration"))
}

pub fn graph_to_string(g: &MixedGraph) -> String {
    let mut out = format!("vertices: {}\n", g.names().join(","));
    for (i, j, mi, mj) in g.edges() {
        // Canonical orientation: directed edges print tail first.
        let (a, b, ma, mb) = if (mi, mj) == (Mark::Arrow, Mark::Tail) {
            (j, i, mj, mi)
        } else {
            (i, j, mi, mj)
        };
        out.push_str(&format!(
            "{} {} {}\n",
            g.name(a),
            marks_token(ma, mb),
            g.name(b)
        ));
    }
    out
}

pub fn load_graph_path(path: &std::path::Path) -> Result<MixedGraph> {
    let text = std::fs::read_to_string(path)?;
    graph_from_str(&text)
}

pub fn write_graph_path(g: &MixedGraph, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, graph_to_string(g))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_edge_kinds() {
        let g = graph_from_str(
            "vertices: A,B,C,D\n# a comment\nA -> B\nB <-> C\nC -- D\nA o-> D\n",
        )
        .unwrap();
        assert_eq!(g.edge(0, 1), Some((Mark::Tail, Mark::Arrow)));
        assert_eq!(g.edge(1, 2), Some((Mark::Arrow, Mark::Arrow)));
        assert_eq!(g.edge(2, 3), Some((Mark::Tail, Mark::Tail)));
        assert_eq!(g.edge(0, 3), Some((Mark::Circle, Mark::Arrow)));
    }

    #[test]
    fn round_trip_preserves_structure() {
        let text = "vertices: X,Z,T,Y\nX -> Z\nZ <-> T\nT o-o Y\n";
        let g = graph_from_str(text).unwrap();
        let again = graph_from_str(&graph_to_string(&g)).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn isolated_vertices_survive() {
        let g = graph_from_str("vertices: A,B,C\nA -> B\n").unwrap();
        assert_eq!(g.n_vertices(), 3);
        let again = graph_from_str(&graph_to_string(&g)).unwrap();
        assert_eq!(again.n_vertices(), 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = graph_from_str("vertices: A,B\nA -> B\nA => B\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected: {other}"),
        }
        assert!(graph_from_str("A -> B\n").is_err());
        assert!(graph_from_str("vertices: A,B\nA -> C\n").is_err());
    }

    #[test]
    fn reversed_directed_token_normalizes() {
        let g = graph_from_str("vertices: A,B\nB <- A\n").unwrap();
        assert_eq!(g.edge(0, 1), Some((Mark::Tail, Mark::Arrow)));
        assert!(graph_to_string(&g).contains("A -> B"));
    }
}
