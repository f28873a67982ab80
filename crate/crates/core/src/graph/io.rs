//! Edge-list text format.
//!
//! ```text
//! # comment
//! n_L n_R
//! u v        # 0 <= u < n_L, 0 <= v < n_R
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use super::{BipartiteGraph, Builder, GraphError};

impl BipartiteGraph {
    /// Parses the edge-list format. Errors carry 1-based line numbers.
    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut builder: Option<Builder> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(GraphError::Parse {
                    line,
                    message: format!("expected two integers, found {}", fields.len()),
                });
            }
            let a = parse_index(fields[0], line)?;
            let b = parse_index(fields[1], line)?;
            match builder.as_mut() {
                None => builder = Some(Builder::new(a, b)),
                Some(builder) => builder.push(a, b, line)?,
            }
        }
        builder
            .map(Builder::finish)
            .ok_or_else(|| GraphError::Parse {
                line: text.lines().count().max(1),
                message: "missing header line \"n_L n_R\"".into(),
            })
    }

    /// Canonical serialization: header then one edge per line in insertion
    /// order.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n_left, self.n_right);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

impl FromStr for BipartiteGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_edge_list(s)
    }
}

fn parse_index(token: &str, line: usize) -> Result<usize, GraphError> {
    token.parse().map_err(|_| GraphError::Parse {
        line,
        message: format!("not a nonnegative integer: {token:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vertex;
    use proptest::prelude::*;

    #[test]
    fn parses_small_graphs() {
        let g = BipartiteGraph::from_edge_list("1 2\n0 0\n0 1").unwrap();
        assert_eq!((g.n_left(), g.n_right()), (1, 2));
        assert_eq!(g.left_neighbors(0), &[0, 1]);

        let g: BipartiteGraph = "# a single edge\n1 1\n0 0   # the edge\n".parse().unwrap();
        assert_eq!(g.edges(), &[(0, 0)]);
        assert_eq!(
            g.neighbors(Vertex::right(0)).collect::<Vec<_>>(),
            [Vertex::left(0)]
        );
    }

    #[test]
    fn reports_line_numbers() {
        assert_eq!(
            BipartiteGraph::from_edge_list("2 1\n0 0\n0 0"),
            Err(GraphError::DuplicateEdge {
                line: 3,
                left: 0,
                right: 0
            })
        );
        assert!(matches!(
            BipartiteGraph::from_edge_list("2 1\n\n2 0"),
            Err(GraphError::IndexOutOfRange { line: 3, .. })
        ));
        assert!(matches!(
            BipartiteGraph::from_edge_list("2 1\n0 x"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            BipartiteGraph::from_edge_list("2 1\n0 0 1"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            BipartiteGraph::from_edge_list("# nothing\n"),
            Err(GraphError::Parse { .. })
        ));
    }

    proptest! {
        #[test]
        fn serialization_round_trips(
            n_left in 1usize..6,
            n_right in 1usize..6,
            bits in proptest::collection::vec(any::<bool>(), 36),
        ) {
            let edges = (0..n_left)
                .flat_map(|u| (0..n_right).map(move |v| (u, v)))
                .filter(|&(u, v)| bits[u * 6 + v]);
            let g = BipartiteGraph::new(n_left, n_right, edges).unwrap();
            let text = g.to_edge_list();
            let back = BipartiteGraph::from_edge_list(&text).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(back.to_edge_list(), text);
        }
    }
}
