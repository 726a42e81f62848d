//! Latent projection of DAGs and equivalence-class consensus graphs.

use super::{ac_connected, enumerate_ac_connected, Mark, MixedGraph};
use crate::error::{Error, Result};
use crate::vset::VertexSet;

/// Projects a purely directed acyclic graph onto `observed`, producing
/// the ancestral graph implied by hiding the rest.
///
/// Two observed vertices stay adjacent exactly when no subset of the
/// remaining observed vertices separates them in the DAG; this is
/// decided by searching for an inducing path (every interior vertex
/// hidden or a collider, every collider an ancestor of an endpoint).
/// Edge marks come from ancestry in the full DAG.
pub fn latent_project(dag: &MixedGraph, observed: VertexSet) -> Result<MixedGraph> {
    if !dag.is_dag() {
        return Err(Error::contract(
            "latent projection needs a directed acyclic input",
        ));
    }
    if observed.is_empty() {
        return Err(Error::contract("observed set is empty"));
    }
    let n = dag.n_vertices();
    if observed.iter().any(|v| v >= n) {
        return Err(Error::contract("observed vertex out of range"));
    }
    let obs: Vec<usize> = observed.iter().collect();
    let names = obs.iter().map(|&v| dag.name(v).to_string()).collect();
    let mut out = MixedGraph::new(names)?;
    let anc: Vec<VertexSet> = dag.all_ancestors();
    for (a, &x) in obs.iter().enumerate() {
        for (b, &y) in obs.iter().enumerate().skip(a + 1) {
            if !inducing_path_exists(dag, &anc, observed, x, y) {
                continue;
            }
            if anc[y].contains(x) {
                out.add_directed(a, b)?;
            } else if anc[x].contains(y) {
                out.add_directed(b, a)?;
            } else {
                out.add_bidirected(a, b)?;
            }
        }
    }
    Ok(out)
}

/// Reachability search for an inducing path between observed `x` and
/// `y` relative to the hidden vertices.
fn inducing_path_exists(
    dag: &MixedGraph,
    anc: &[VertexSet],
    observed: VertexSet,
    x: usize,
    y: usize,
) -> bool {
    let n = dag.n_vertices();
    let endpoint_anc = anc[x].union(anc[y]);
    let state = |v: usize, arrow_in: bool| v * 2 + usize::from(arrow_in);
    let mut seen = vec![false; 2 * n];
    let mut queue = std::collections::VecDeque::new();
    for w in 0..n {
        if w == x {
            continue;
        }
        if let Some((_, mark_at_w)) = dag.edge(x, w) {
            if w == y {
                return true;
            }
            let s = state(w, mark_at_w == Mark::Arrow);
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    while let Some(s) = queue.pop_front() {
        let v = s / 2;
        let arrow_in = s % 2 == 1;
        for w in 0..n {
            if w == v {
                continue;
            }
            let Some((mark_at_v, mark_at_w)) = dag.edge(v, w) else {
                continue;
            };
            let collider = arrow_in && mark_at_v == Mark::Arrow;
            let passable = if collider {
                endpoint_anc.contains(v)
            } else {
                !observed.contains(v)
            };
            if !passable {
                continue;
            }
            if w == y {
                return true;
            }
            let next = state(w, mark_at_w == Mark::Arrow);
            if !seen[next] {
                seen[next] = true;
                queue.push_back(next);
            }
        }
    }
    false
}

/// Brute-force consensus of the Markov equivalence class of a maximal
/// ancestral graph: every orientation of the skeleton (directed both
/// ways or bidirected, per edge) is kept when it is a valid ancestral
/// graph with the same ac-connected family, and each end mark is
/// reported as-is where all class members agree, as a circle otherwise.
pub fn pag_oracle(mag: &MixedGraph) -> Result<MixedGraph> {
    if mag.has_circle_marks() || mag.has_undirected_edges() {
        return Err(Error::contract(
            "equivalence-class consensus needs a graph with directed and bidirected edges only",
        ));
    }
    if !mag.is_ancestral() {
        return Err(Error::contract("input graph is not ancestral"));
    }
    let n = mag.n_vertices();
    let skeleton: Vec<(usize, usize)> = mag.edges().iter().map(|&(i, j, _, _)| (i, j)).collect();
    let n_edges = skeleton.len();
    if n_edges > 12 {
        return Err(Error::resource(format!(
            "class enumeration over {n_edges} edges exceeds the 12-edge limit"
        )));
    }
    // Maximality: every non-adjacent pair must be separable, i.e. not
    // ac-linked as a bare pair.
    for x in 0..n {
        for y in (x + 1)..n {
            if !mag.adjacent(x, y) && ac_connected(mag, VertexSet::from_iter([x, y])) {
                return Err(Error::contract(format!(
                    "input graph is not maximal: {} and {} are inseparable but non-adjacent",
                    mag.name(x),
                    mag.name(y)
                )));
            }
        }
    }

    let reference_pairs = family_up_to(mag, 2)?;
    let reference_triples = family_up_to(mag, 3)?;
    let reference_full = enumerate_ac_connected(mag, n)?;

    let mut consensus: Vec<(Mark, Mark)> = mag
        .edges()
        .iter()
        .map(|&(_, _, mi, mj)| (mi, mj))
        .collect();
    let mut members = 0usize;

    let mut digits = vec![0u8; n_edges];
    loop {
        let mut candidate = MixedGraph::new(mag.names().to_vec())?;
        for (e, &(i, j)) in skeleton.iter().enumerate() {
            let (mi, mj) = match digits[e] {
                0 => (Mark::Tail, Mark::Arrow),
                1 => (Mark::Arrow, Mark::Tail),
                _ => (Mark::Arrow, Mark::Arrow),
            };
            candidate.set_edge(i, j, mi, mj);
        }
        if candidate.is_ancestral()
            && family_up_to(&candidate, 2)? == reference_pairs
            && family_up_to(&candidate, 3)? == reference_triples
            && enumerate_ac_connected(&candidate, n)? == reference_full
        {
            members += 1;
            for (e, &(i, j)) in skeleton.iter().enumerate() {
                let (mi, mj) = candidate.edge(i, j).unwrap();
                if consensus[e].0 != mi {
                    consensus[e].0 = Mark::Circle;
                }
                if consensus[e].1 != mj {
                    consensus[e].1 = Mark::Circle;
                }
            }
        }
        // Next assignment in base 3.
        let mut pos = 0;
        loop {
            if pos == n_edges {
                debug_assert!(members >= 1, "class must contain the input");
                let mut out = MixedGraph::new(mag.names().to_vec())?;
                for (e, &(i, j)) in skeleton.iter().enumerate() {
                    out.set_edge(i, j, consensus[e].0, consensus[e].1);
                }
                return Ok(out);
            }
            digits[pos] += 1;
            if digits[pos] < 3 {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

fn family_up_to(g: &MixedGraph, size: usize) -> Result<Vec<VertexSet>> {
    enumerate_ac_connected(g, size.min(g.n_vertices()))
}
