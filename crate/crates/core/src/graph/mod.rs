//! Mixed graphs with directed, bidirected and undirected edges.
//!
//! Edges carry one end mark per vertex: tail-arrow is directed,
//! arrow-arrow bidirected, tail-tail undirected. Circle marks appear
//! only in equivalence-class consensus graphs. Undirected edges are
//! accepted as orientable placeholders: they never contribute to
//! ancestor sets and must be resolved before global scoring.

mod acsets;
mod format;
mod project;
mod separation;

pub use acsets::{
    ac_connected, ac_family_difference, enumerate_ac_connected, enumerate_ac_connected_with,
    markov_equivalent, EnumerateOptions, DEFAULT_SUBSET_CEILING,
};
pub use format::{graph_from_str, graph_to_string, load_graph_path, write_graph_path};
pub use project::{latent_project, pag_oracle};
pub use separation::{connecting_witness, is_separated, Criterion, SeparationQuery};

use crate::error::{Error, Result};
use crate::vset::{VertexSet, MAX_VERTICES};

/// One end mark of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mark {
    Tail,
    Arrow,
    Circle,
}

/// Edge classification from the two end marks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// `from -> to`
    Directed { from: usize, to: usize },
    Bidirected,
    Undirected,
    /// At least one circle mark.
    Partial,
}

/// A mixed graph over named vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedGraph {
    names: Vec<String>,
    /// Upper-triangular storage: for i < j, `marks[pair_index(i, j)]`
    /// holds `Some((mark at i, mark at j))` when the pair is adjacent.
    marks: Vec<Option<(Mark, Mark)>>,
}

/// Ancestral-validity violations; data, not errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Edge `from -> to` lies on a directed cycle.
    DirectedCycle { from: usize, to: usize },
    /// `x <-> y` while one endpoint is an ancestor of the other.
    AlmostDirectedCycle { x: usize, y: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::DirectedCycle { from, to } => {
                write!(f, "directed cycle through edge {from} -> {to}")
            }
            Violation::AlmostDirectedCycle { x, y } => {
                write!(f, "almost directed cycle at {x} <-> {y}")
            }
        }
    }
}

impl MixedGraph {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::contract("graph needs at least one vertex"));
        }
        if names.len() > MAX_VERTICES {
            return Err(Error::contract(format!(
                "at most {MAX_VERTICES} vertices supported"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(Error::contract(format!("duplicate vertex name '{n}'")));
            }
        }
        let n = names.len();
        Ok(MixedGraph {
            names,
            marks: vec![None; n * (n - 1) / 2],
        })
    }

    /// Vertices named `V0..V{n-1}`.
    pub fn with_n(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("V{i}")).collect())
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n_vertices());
        // Row-major upper triangle.
        let n = self.n_vertices();
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn n_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn name_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// End marks `(at x, at y)` of the edge between `x` and `y`.
    pub fn edge(&self, x: usize, y: usize) -> Option<(Mark, Mark)> {
        if x == y {
            return None;
        }
        let (i, j) = if x < y { (x, y) } else { (y, x) };
        let stored = self.marks[self.pair_index(i, j)]?;
        Some(if x < y { stored } else { (stored.1, stored.0) })
    }

    pub fn adjacent(&self, x: usize, y: usize) -> bool {
        self.edge(x, y).is_some()
    }

    /// Inserts an edge; errors on self-loops and duplicate pairs.
    pub fn add_edge(&mut self, x: usize, y: usize, mark_x: Mark, mark_y: Mark) -> Result<()> {
        if x == y {
            return Err(Error::contract("self-loops are not allowed"));
        }
        if x >= self.n_vertices() || y >= self.n_vertices() {
            return Err(Error::contract("vertex index out of range"));
        }
        if self.adjacent(x, y) {
            return Err(Error::contract(format!(
                "at most one edge per pair: {} and {}",
                self.names[x], self.names[y]
            )));
        }
        self.set_edge(x, y, mark_x, mark_y);
        Ok(())
    }

    pub fn add_directed(&mut self, from: usize, to: usize) -> Result<()> {
        self.add_edge(from, to, Mark::Tail, Mark::Arrow)
    }

    pub fn add_bidirected(&mut self, x: usize, y: usize) -> Result<()> {
        self.add_edge(x, y, Mark::Arrow, Mark::Arrow)
    }

    pub fn add_undirected(&mut self, x: usize, y: usize) -> Result<()> {
        self.add_edge(x, y, Mark::Tail, Mark::Tail)
    }

    /// Sets or replaces the marks of the pair `(x, y)`.
    pub fn set_edge(&mut self, x: usize, y: usize, mark_x: Mark, mark_y: Mark) {
        let (i, j, m) = if x < y {
            (x, y, (mark_x, mark_y))
        } else {
            (y, x, (mark_y, mark_x))
        };
        let idx = self.pair_index(i, j);
        self.marks[idx] = Some(m);
    }

    pub fn remove_edge(&mut self, x: usize, y: usize) {
        let (i, j) = if x < y { (x, y) } else { (y, x) };
        let idx = self.pair_index(i, j);
        self.marks[idx] = None;
    }

    pub fn kind(&self, x: usize, y: usize) -> Option<EdgeKind> {
        let (mx, my) = self.edge(x, y)?;
        Some(match (mx, my) {
            (Mark::Tail, Mark::Arrow) => EdgeKind::Directed { from: x, to: y },
            (Mark::Arrow, Mark::Tail) => EdgeKind::Directed { from: y, to: x },
            (Mark::Arrow, Mark::Arrow) => EdgeKind::Bidirected,
            (Mark::Tail, Mark::Tail) => EdgeKind::Undirected,
            _ => EdgeKind::Partial,
        })
    }

    /// Unordered adjacent pairs `(i, j)` with `i < j`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize, Mark, Mark)> {
        let n = self.n_vertices();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if let Some((mi, mj)) = self.marks[self.pair_index(i, j)] {
                    out.push((i, j, mi, mj));
                }
            }
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.marks.iter().filter(|m| m.is_some()).count()
    }

    pub fn neighbors(&self, v: usize) -> VertexSet {
        (0..self.n_vertices())
            .filter(|&u| u != v && self.adjacent(u, v))
            .collect()
    }

    /// Vertices `u` with `u -> v`.
    pub fn parents_of(&self, v: usize) -> VertexSet {
        (0..self.n_vertices())
            .filter(|&u| {
                u != v && matches!(self.edge(u, v), Some((Mark::Tail, Mark::Arrow)))
            })
            .collect()
    }

    /// Vertices `u` with `u <-> v`.
    pub fn spouses_of(&self, v: usize) -> VertexSet {
        (0..self.n_vertices())
            .filter(|&u| {
                u != v && matches!(self.edge(u, v), Some((Mark::Arrow, Mark::Arrow)))
            })
            .collect()
    }

    pub fn has_undirected_edges(&self) -> bool {
        self.edges()
            .iter()
            .any(|&(_, _, mi, mj)| mi == Mark::Tail && mj == Mark::Tail)
    }

    pub fn has_circle_marks(&self) -> bool {
        self.edges()
            .iter()
            .any(|&(_, _, mi, mj)| mi == Mark::Circle || mj == Mark::Circle)
    }

    /// Reflexive ancestor set of `targets`: every vertex with a directed
    /// path into some target. Bidirected and undirected edges carry no
    /// ancestry.
    pub fn ancestors(&self, targets: VertexSet) -> VertexSet {
        let mut reached = targets;
        let mut frontier: Vec<usize> = targets.iter().collect();
        while let Some(v) = frontier.pop() {
            for u in 0..self.n_vertices() {
                if !reached.contains(u)
                    && matches!(self.edge(u, v), Some((Mark::Tail, Mark::Arrow)))
                {
                    reached.insert(u);
                    frontier.push(u);
                }
            }
        }
        reached
    }

    /// Per-vertex reflexive ancestor sets, one pass for all vertices.
    pub fn all_ancestors(&self) -> Vec<VertexSet> {
        (0..self.n_vertices())
            .map(|v| self.ancestors(VertexSet::singleton(v)))
            .collect()
    }

    /// Checks the two ancestral-graph conditions: no directed cycle and
    /// no almost directed cycle. Undirected and circle marks are ignored
    /// by the ancestry relation.
    pub fn validate_ancestral(&self) -> Vec<Violation> {
        let anc = self.all_ancestors();
        let mut out = Vec::new();
        for (i, j, mi, mj) in self.edges() {
            match (mi, mj) {
                // A directed edge whose head is already an ancestor of
                // its tail closes a directed cycle.
                (Mark::Tail, Mark::Arrow) if anc[i].contains(j) => {
                    out.push(Violation::DirectedCycle { from: i, to: j });
                }
                (Mark::Arrow, Mark::Tail) if anc[j].contains(i) => {
                    out.push(Violation::DirectedCycle { from: j, to: i });
                }
                (Mark::Arrow, Mark::Arrow) if anc[j].contains(i) || anc[i].contains(j) => {
                    out.push(Violation::AlmostDirectedCycle { x: i, y: j });
                }
                _ => {}
            }
        }
        out
    }

    pub fn is_ancestral(&self) -> bool {
        self.validate_ancestral().is_empty()
    }

    /// True when every edge is directed (tail-arrow) and the graph is
    /// acyclic.
    pub fn is_dag(&self) -> bool {
        self.edges().iter().all(|&(_, _, mi, mj)| {
            matches!((mi, mj), (Mark::Tail, Mark::Arrow) | (Mark::Arrow, Mark::Tail))
        }) && self.is_ancestral()
    }

    /// Order-independent fingerprint of the edge/mark multiset.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for (i, j, mi, mj) in self.edges() {
            (i, j, mi, mj).hash(&mut h);
        }
        h.finish()
    }
}
