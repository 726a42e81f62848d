//! Two-step greedy structure search.
//!
//! Step 1 minimizes each node's score over subsets of its neighbors,
//! primes edge orientations from the selections and drops edges no
//! endpoint selected. Step 2 re-orients the surviving edges one move at
//! a time, always applying the largest score decrement that forms no
//! directed or almost directed triangular cycle, until convergence, a
//! revisited graph, or the iteration cap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Mark, MixedGraph, Violation};
use crate::score::{Orientation, PairKind, ScoreLedger};
use crate::table::CategoricalTable;
use crate::vset::VertexSet;

/// Options for [`learn`]; mirrored by the CLI flags.
#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Exhaustive parent-subset search is used up to this neighbor
    /// count; beyond it, greedy forward-backward selection.
    pub max_parents: usize,
    pub max_iterations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_parents: 5,
            max_iterations: 500,
        }
    }
}

/// Why step 2 stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    LimitCycle,
    MaxIterations,
}

/// Per-vertex selected parents/spouses.
pub type ParentAssignment = Vec<VertexSet>;

/// Outcome of a search run.
#[derive(Debug, Clone)]
pub struct SearchReport {
    pub graph: MixedGraph,
    pub termination: Termination,
    /// Cumulative estimated score decrement; starts at 0 and strictly
    /// decreases across accepted moves.
    pub trajectory: Vec<f64>,
    /// Edges dropped in step 1 (no endpoint selected the other).
    pub removed_edges: Vec<(String, String)>,
    /// Edges removed by the final repair pass, with the violation that
    /// forced each removal.
    pub repaired_edges: Vec<(String, String, String)>,
    /// Violations found at termination, before repair.
    pub residual_violations: Vec<String>,
    /// Final orientation scores per surviving edge.
    pub edge_scores: Vec<EdgeScores>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeScores {
    pub x: String,
    pub y: String,
    pub x_to_y: f64,
    pub y_to_x: f64,
    pub bidirected: f64,
    pub chosen: String,
}

/// Pairwise skeleton initializer: keeps an undirected edge wherever the
/// best single-edge model beats the disconnected pair model. Blind to
/// dependences that vanish marginally.
pub fn init_skeleton(ledger: &ScoreLedger<'_>) -> Result<MixedGraph> {
    let table = ledger.table();
    let m = table.n_vars();
    let mut g = MixedGraph::new(table.names().to_vec())?;
    let empty = VertexSet::empty();
    for x in 0..m {
        for y in (x + 1)..m {
            let disconnected = ledger.pair_score(x, y, empty, empty, PairKind::Disconnected)?;
            let forward = ledger.pair_score(x, y, empty, empty, PairKind::XToY)?;
            let backward = ledger.pair_score(x, y, empty, empty, PairKind::YToX)?;
            if forward.min(backward) < disconnected {
                g.add_undirected(x, y)?;
            }
        }
    }
    Ok(g)
}

/// Step 1: per-node parent selection and edge removal.
pub fn step1(
    ledger: &ScoreLedger<'_>,
    g0: &MixedGraph,
    max_parents: usize,
) -> Result<(MixedGraph, ParentAssignment)> {
    let table = ledger.table();
    if g0.n_vertices() != table.n_vars() {
        return Err(Error::contract("graph and table have different variables"));
    }
    let m = table.n_vars();
    let mut selection: ParentAssignment = vec![VertexSet::empty(); m];
    // Scores depend only on the candidate pool, so this stabilizes after
    // one pass; the loop keeps the fixed-point contract checkable.
    loop {
        let mut changed = false;
        for v in 0..m {
            let pool = g0.neighbors(v);
            let best = best_parent_set(ledger, v, pool, max_parents)?;
            if best != selection[v] {
                selection[v] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut g1 = MixedGraph::new(table.names().to_vec())?;
    let mut removed = Vec::new();
    for x in 0..m {
        for y in (x + 1)..m {
            if !g0.adjacent(x, y) {
                continue;
            }
            let x_selects_y = selection[x].contains(y);
            let y_selects_x = selection[y].contains(x);
            match (x_selects_y, y_selects_x) {
                (true, true) => g1.add_bidirected(x, y)?,
                (false, true) => g1.add_directed(x, y)?,
                (true, false) => g1.add_directed(y, x)?,
                (false, false) => {
                    removed.push((g0.name(x).to_string(), g0.name(y).to_string()));
                }
            }
        }
    }
    Ok((g1, selection))
}

/// Minimizes the node score over subsets of `pool`: exhaustively when
/// the pool is small, greedy forward-backward otherwise.
fn best_parent_set(
    ledger: &ScoreLedger<'_>,
    v: usize,
    pool: VertexSet,
    max_parents: usize,
) -> Result<VertexSet> {
    if pool.len() <= max_parents {
        let mut best = VertexSet::empty();
        let mut best_score = ledger.node_score(v, best)?;
        let mut candidates: Vec<VertexSet> = pool.subsets().collect();
        candidates.sort_by(VertexSet::cmp_size_lex);
        for cand in candidates {
            let s = ledger.node_score(v, cand)?;
            if s < best_score {
                best_score = s;
                best = cand;
            }
        }
        return Ok(best);
    }
    // Greedy forward then backward passes until neither improves.
    let mut current = VertexSet::empty();
    let mut current_score = ledger.node_score(v, current)?;
    loop {
        let mut improved = false;
        // Forward: best single addition.
        loop {
            let mut best_add: Option<(usize, f64)> = None;
            for u in pool.difference(current).iter() {
                let s = ledger.node_score(v, current.with(u))?;
                if s < current_score && best_add.is_none_or(|(_, bs)| s < bs) {
                    best_add = Some((u, s));
                }
            }
            match best_add {
                Some((u, s)) => {
                    current.insert(u);
                    current_score = s;
                    improved = true;
                }
                None => break,
            }
        }
        // Backward: best single removal.
        loop {
            let mut best_drop: Option<(usize, f64)> = None;
            for u in current.iter() {
                let s = ledger.node_score(v, current.without(u))?;
                if s < current_score && best_drop.is_none_or(|(_, bs)| s < bs) {
                    best_drop = Some((u, s));
                }
            }
            match best_drop {
                Some((u, s)) => {
                    current.remove(u);
                    current_score = s;
                    improved = true;
                }
                None => break,
            }
        }
        if !improved {
            return Ok(current);
        }
    }
}

/// Parents and spouses of `v` in `g`, minus `other`.
fn conditioning_set(g: &MixedGraph, v: usize, other: usize) -> VertexSet {
    g.parents_of(v).union(g.spouses_of(v)).without(other)
}

fn orientation_of(g: &MixedGraph, x: usize, y: usize) -> Orientation {
    match g.edge(x, y) {
        Some((Mark::Tail, Mark::Arrow)) => Orientation::XToY,
        Some((Mark::Arrow, Mark::Tail)) => Orientation::YToX,
        Some((Mark::Arrow, Mark::Arrow)) => Orientation::Bidirected,
        other => unreachable!("unprimed edge in step 2: {other:?}"),
    }
}

fn apply_orientation(g: &mut MixedGraph, x: usize, y: usize, o: Orientation) {
    let (mx, my) = match o {
        Orientation::XToY => (Mark::Tail, Mark::Arrow),
        Orientation::YToX => (Mark::Arrow, Mark::Tail),
        Orientation::Bidirected => (Mark::Arrow, Mark::Arrow),
    };
    g.set_edge(x, y, mx, my);
}

/// Rejects a move when some triangle through (x, y) would become a
/// directed or almost directed cycle.
pub(crate) fn forms_triangular_cycle(g: &MixedGraph, x: usize, y: usize, o: Orientation) -> bool {
    let mut probe = g.clone();
    apply_orientation(&mut probe, x, y, o);
    for z in 0..probe.n_vertices() {
        if z == x || z == y || !probe.adjacent(x, z) || !probe.adjacent(y, z) {
            continue;
        }
        if triangle_is_cyclic(&probe, x, y, z) {
            return true;
        }
    }
    false
}

/// Directed cycle: a -> b -> c -> a. Almost directed cycle: a directed
/// two-path plus a bidirected closing edge.
fn triangle_is_cyclic(g: &MixedGraph, a: usize, b: usize, c: usize) -> bool {
    let verts = [a, b, c];
    // Directed cycles in either rotation.
    for perm in [[a, b, c], [a, c, b]] {
        if g.kind(perm[0], perm[1]) == Some(crate::graph::EdgeKind::Directed { from: perm[0], to: perm[1] })
            && g.kind(perm[1], perm[2]) == Some(crate::graph::EdgeKind::Directed { from: perm[1], to: perm[2] })
            && g.kind(perm[2], perm[0]) == Some(crate::graph::EdgeKind::Directed { from: perm[2], to: perm[0] })
        {
            return true;
        }
    }
    // Almost directed: u -> w -> v with u <-> v, any labeling.
    for &u in &verts {
        for &w in &verts {
            for &v in &verts {
                if u == w || w == v || u == v {
                    continue;
                }
                if g.kind(u, w) == Some(crate::graph::EdgeKind::Directed { from: u, to: w })
                    && g.kind(w, v) == Some(crate::graph::EdgeKind::Directed { from: w, to: v })
                    && g.kind(u, v) == Some(crate::graph::EdgeKind::Bidirected)
                {
                    return true;
                }
            }
        }
    }
    false
}

/// Step 2: greedy edge re-orientation.
pub fn step2(
    ledger: &ScoreLedger<'_>,
    g1: &MixedGraph,
    max_iterations: usize,
) -> Result<SearchReport> {
    if g1.has_undirected_edges() || g1.has_circle_marks() {
        return Err(Error::contract(
            "step 2 needs a graph whose edges are all primed directed or bidirected",
        ));
    }
    let mut g = g1.clone();
    let mut trajectory = vec![0.0f64];
    let mut history: Vec<(u64, f64, MixedGraph)> = vec![(g.fingerprint(), 0.0, g.clone())];
    let mut termination = Termination::MaxIterations;

    for _iter in 0..max_iterations {
        let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(i, j, _, _)| (i, j)).collect();
        // Best strictly improving move, ties broken by (edge, orientation).
        let mut best: Option<(f64, usize, usize, Orientation)> = None;
        for &(x, y) in &edges {
            let pa_x = conditioning_set(&g, x, y);
            let pa_y = conditioning_set(&g, y, x);
            let current = orientation_of(&g, x, y);
            let current_score = ledger.edge_orientation_score(x, y, pa_x, pa_y, current)?;
            for o in Orientation::ALL {
                if o == current {
                    continue;
                }
                let delta =
                    ledger.edge_orientation_score(x, y, pa_x, pa_y, o)? - current_score;
                if delta < 0.0 && best.is_none_or(|(bd, _, _, _)| delta < bd)
                    && !forms_triangular_cycle(&g, x, y, o) {
                        best = Some((delta, x, y, o));
                    }
            }
        }
        match best {
            None => {
                termination = Termination::Converged;
                break;
            }
            Some((delta, x, y, o)) => {
                apply_orientation(&mut g, x, y, o);
                let score = trajectory.last().unwrap() + delta;
                trajectory.push(score);
                let fp = g.fingerprint();
                if let Some(first) = history.iter().position(|&(h, _, _)| h == fp) {
                    // Limit cycle: keep the best-scoring graph seen since
                    // the first visit of this fingerprint.
                    let (_, mut best_score, mut best_graph) = history[first].clone();
                    for (_, s, snapshot) in &history[first..] {
                        if *s < best_score {
                            best_score = *s;
                            best_graph = snapshot.clone();
                        }
                    }
                    if score < best_score {
                        best_graph = g.clone();
                    }
                    g = best_graph;
                    termination = Termination::LimitCycle;
                    break;
                }
                history.push((fp, score, g.clone()));
            }
        }
    }

    // Termination report: surviving violations (longer cycles the
    // triangular guard cannot see), then a deterministic repair that
    // removes offending edges and records every removal.
    let residual: Vec<String> = describe_violations(&g);
    let mut repaired = Vec::new();
    loop {
        let violations = g.validate_ancestral();
        let Some(v) = violations.first() else { break };
        let (x, y, label) = match *v {
            Violation::DirectedCycle { from, to } => (from, to, "directed cycle"),
            Violation::AlmostDirectedCycle { x, y } => (x, y, "almost directed cycle"),
        };
        repaired.push((
            g.name(x).to_string(),
            g.name(y).to_string(),
            label.to_string(),
        ));
        g.remove_edge(x, y);
    }

    let mut edge_scores = Vec::new();
    for (x, y, _, _) in g.edges() {
        let pa_x = conditioning_set(&g, x, y);
        let pa_y = conditioning_set(&g, y, x);
        let chosen = orientation_of(&g, x, y);
        edge_scores.push(EdgeScores {
            x: g.name(x).to_string(),
            y: g.name(y).to_string(),
            x_to_y: ledger.edge_orientation_score(x, y, pa_x, pa_y, Orientation::XToY)?,
            y_to_x: ledger.edge_orientation_score(x, y, pa_x, pa_y, Orientation::YToX)?,
            bidirected: ledger.edge_orientation_score(x, y, pa_x, pa_y, Orientation::Bidirected)?,
            chosen: match chosen {
                Orientation::XToY => "->".to_string(),
                Orientation::YToX => "<-".to_string(),
                Orientation::Bidirected => "<->".to_string(),
            },
        });
    }

    Ok(SearchReport {
        graph: g,
        termination,
        trajectory,
        removed_edges: Vec::new(),
        repaired_edges: repaired,
        residual_violations: residual,
        edge_scores,
    })
}

fn describe_violations(g: &MixedGraph) -> Vec<String> {
    g.validate_ancestral()
        .into_iter()
        .map(|v| match v {
            Violation::DirectedCycle { from, to } => {
                format!("directed cycle through {} -> {}", g.name(from), g.name(to))
            }
            Violation::AlmostDirectedCycle { x, y } => {
                format!("almost directed cycle at {} <-> {}", g.name(x), g.name(y))
            }
        })
        .collect()
}

/// Full pipeline: skeleton (or supplied initial graph), step 1, step 2.
///
/// An initial graph whose edges are all directed or bidirected counts
/// as already primed and goes straight to step 2; re-running the whole
/// pipeline on its own output is then a fixed point.
pub fn learn(
    table: &CategoricalTable,
    initial: Option<&MixedGraph>,
    options: &SearchOptions,
) -> Result<SearchReport> {
    let ledger = ScoreLedger::new(table);
    let g0 = match initial {
        Some(g) => {
            if g.n_vertices() != table.n_vars() {
                return Err(Error::contract(
                    "initial graph and table have different variables",
                ));
            }
            let mut remapped = MixedGraph::new(table.names().to_vec())?;
            for (i, j, mi, mj) in g.edges() {
                let x = table.name_index(g.name(i)).ok_or_else(|| {
                    Error::contract(format!("initial-graph vertex '{}' not in data", g.name(i)))
                })?;
                let y = table.name_index(g.name(j)).ok_or_else(|| {
                    Error::contract(format!("initial-graph vertex '{}' not in data", g.name(j)))
                })?;
                remapped.add_edge(x, y, mi, mj)?;
            }
            remapped
        }
        None => init_skeleton(&ledger)?,
    };
    let already_primed =
        initial.is_some() && g0.n_edges() > 0 && !g0.has_undirected_edges() && !g0.has_circle_marks();
    let g1 = if already_primed {
        g0.clone()
    } else {
        step1(&ledger, &g0, options.max_parents)?.0
    };
    let mut report = step2(&ledger, &g1, options.max_iterations)?;
    // Step-1 removals belong in the report alongside repairs.
    let mut removed = Vec::new();
    for (i, j, _, _) in g0.edges() {
        if !g1.adjacent(i, j) {
            removed.push((g0.name(i).to_string(), g0.name(j).to_string()));
        }
    }
    report.removed_edges = removed;
    Ok(report)
}
