//! Ancestor-collider connected subsets: the carriers of the likelihood
//! decomposition, plus the Markov-equivalence check built on them.
//!
//! A pair is ac-linked given a subset C when it is adjacent or joined by
//! a collider path whose interior vertices lie in An(C). Interior edges
//! of a collider path are necessarily bidirected, so the pair check
//! reduces to component lookups in the bidirected subgraph restricted
//! to An(C).

use super::{Mark, MixedGraph};
use crate::error::{Error, Result};
use crate::vset::VertexSet;

/// Default ceiling on candidate subsets examined during enumeration.
pub const DEFAULT_SUBSET_CEILING: usize = 2_000_000;

#[derive(Debug, Clone, Copy)]
pub struct EnumerateOptions {
    /// Largest subset size reported.
    pub max_size: usize,
    /// When set, pairs must be linkable by collider paths with at most
    /// this many colliders (interior vertices).
    pub max_colliders: Option<usize>,
    /// Resource guard on candidate subsets examined.
    pub ceiling: usize,
}

impl EnumerateOptions {
    pub fn up_to(max_size: usize) -> Self {
        EnumerateOptions {
            max_size,
            max_colliders: None,
            ceiling: DEFAULT_SUBSET_CEILING,
        }
    }
}

/// Union-find over vertex indices.
struct Components {
    parent: Vec<usize>,
}

impl Components {
    fn new(n: usize) -> Self {
        Components {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = v;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Bidirected-subgraph components among `domain` vertices.
fn bidirected_components(g: &MixedGraph, domain: VertexSet) -> Components {
    let mut comps = Components::new(g.n_vertices());
    for (i, j, mi, mj) in g.edges() {
        if mi == Mark::Arrow && mj == Mark::Arrow && domain.contains(i) && domain.contains(j) {
            comps.union(i, j);
        }
    }
    comps
}

/// Component ids reachable from `x` in one hop: neighbors `z` in the
/// domain whose end mark at `z` is an arrowhead.
fn ports(g: &MixedGraph, comps: &mut Components, domain: VertexSet, x: usize) -> VertexSet {
    let mut out = VertexSet::empty();
    for z in 0..g.n_vertices() {
        if z == x || !domain.contains(z) {
            continue;
        }
        if let Some((_, mark_at_z)) = g.edge(x, z) {
            if mark_at_z == Mark::Arrow {
                out.insert(comps.find(z));
            }
        }
    }
    out
}

/// True when every pair in the nonempty subset `c` is adjacent or
/// ac-linked given `c`.
pub fn ac_connected(g: &MixedGraph, c: VertexSet) -> bool {
    ac_connected_capped(g, c, None)
}

fn ac_connected_capped(g: &MixedGraph, c: VertexSet, cap: Option<usize>) -> bool {
    let members = c.to_vec();
    if members.len() <= 1 {
        return !members.is_empty();
    }
    // Members of c sit inside the conditioning union, so An({x,y} u c)
    // equals An(c): one ancestor set serves every pair.
    let domain = g.ancestors(c);
    match cap {
        None => {
            let mut comps = bidirected_components(g, domain);
            let port_sets: Vec<VertexSet> = members
                .iter()
                .map(|&x| ports(g, &mut comps, domain, x))
                .collect();
            for (a, &x) in members.iter().enumerate() {
                for (b, &y) in members.iter().enumerate().skip(a + 1) {
                    let linked = g.adjacent(x, y)
                        || !port_sets[a].intersection(port_sets[b]).is_empty();
                    if !linked {
                        return false;
                    }
                }
            }
            true
        }
        Some(k) => {
            for (a, &x) in members.iter().enumerate() {
                for &y in members.iter().skip(a + 1) {
                    if !pair_linked_capped(g, domain, x, y, k) {
                        return false;
                    }
                }
            }
            true
        }
    }
}

/// Collider-path link with at most `k` colliders, interior restricted to
/// `domain` minus the endpoints. Any path through an endpoint shortens
/// to one avoiding it.
fn pair_linked_capped(g: &MixedGraph, domain: VertexSet, x: usize, y: usize, k: usize) -> bool {
    if g.adjacent(x, y) {
        return true;
    }
    if k == 0 {
        return false;
    }
    let interior = domain.without(x).without(y);
    let n = g.n_vertices();
    let y_ports: VertexSet = (0..n)
        .filter(|&z| {
            interior.contains(z)
                && matches!(g.edge(y, z), Some((_, m)) if m == Mark::Arrow)
        })
        .collect();
    // Breadth-first over bidirected steps from x's ports, depth-limited.
    let mut frontier: VertexSet = (0..n)
        .filter(|&z| {
            interior.contains(z)
                && matches!(g.edge(x, z), Some((_, m)) if m == Mark::Arrow)
        })
        .collect();
    let mut reached = frontier;
    for _depth in 1..=k {
        if !frontier.intersection(y_ports).is_empty() {
            return true;
        }
        let mut next = VertexSet::empty();
        for v in frontier.iter() {
            for w in interior.iter() {
                if !reached.contains(w)
                    && matches!(g.edge(v, w), Some((Mark::Arrow, Mark::Arrow)))
                {
                    next.insert(w);
                }
            }
        }
        reached = reached.union(next);
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    false
}

/// All ac-connected subsets up to `max_size`, in deterministic
/// (size, then lexicographic) order.
pub fn enumerate_ac_connected(g: &MixedGraph, max_size: usize) -> Result<Vec<VertexSet>> {
    enumerate_ac_connected_with(g, EnumerateOptions::up_to(max_size))
}

pub fn enumerate_ac_connected_with(
    g: &MixedGraph,
    opts: EnumerateOptions,
) -> Result<Vec<VertexSet>> {
    let n = g.n_vertices();
    // Pairwise pruning relation: linked when the ancestor restriction is
    // dropped entirely (domain = V). A subset can only be ac-connected
    // if it induces a clique under this relation.
    let full = VertexSet::full(n);
    let mut linked = vec![VertexSet::empty(); n];
    {
        let mut comps = bidirected_components(g, full);
        let port_sets: Vec<VertexSet> = (0..n)
            .map(|x| ports(g, &mut comps, full, x))
            .collect();
        for x in 0..n {
            for y in (x + 1)..n {
                let p = match opts.max_colliders {
                    None => {
                        g.adjacent(x, y)
                            || !port_sets[x].intersection(port_sets[y]).is_empty()
                    }
                    Some(k) => pair_linked_capped(g, full, x, y, k),
                };
                if p {
                    linked[x].insert(y);
                    linked[y].insert(x);
                }
            }
        }
    }

    let mut out: Vec<VertexSet> = Vec::new();
    let mut examined: usize = 0;
    // Depth-first over cliques of the pruning relation, extending by
    // larger vertex indices only.
    let mut stack: Vec<(VertexSet, VertexSet, usize)> = Vec::new();
    for v in 0..n {
        out.push(VertexSet::singleton(v));
        if opts.max_size >= 2 {
            stack.push((VertexSet::singleton(v), linked[v], v));
        }
    }
    while let Some((base, allowed, last)) = stack.pop() {
        for v in allowed.iter() {
            if v <= last {
                continue;
            }
            let cand = base.with(v);
            examined += 1;
            if examined > opts.ceiling {
                return Err(Error::resource(format!(
                    "ac-connected enumeration exceeded {} candidate subsets",
                    opts.ceiling
                )));
            }
            if ac_connected_capped(g, cand, opts.max_colliders) {
                out.push(cand);
            }
            if cand.len() < opts.max_size {
                stack.push((cand, allowed.intersection(linked[v]), v));
            }
        }
    }
    out.sort_by(VertexSet::cmp_size_lex);
    Ok(out)
}

/// Maps `other`'s vertex indices onto `reference`'s by name.
fn vertex_map(reference: &MixedGraph, other: &MixedGraph) -> Result<Vec<usize>> {
    if reference.n_vertices() != other.n_vertices() {
        return Err(Error::contract("graphs have different vertex sets"));
    }
    other
        .names()
        .iter()
        .map(|name| {
            reference
                .name_index(name)
                .ok_or_else(|| Error::contract(format!("vertex '{name}' missing from other graph")))
        })
        .collect()
}

fn remap_family(family: Vec<VertexSet>, map: &[usize]) -> Vec<VertexSet> {
    let mut out: Vec<VertexSet> = family
        .into_iter()
        .map(|s| s.iter().map(|v| map[v]).collect())
        .collect();
    out.sort_by(VertexSet::cmp_size_lex);
    out
}

/// Two ancestral graphs are Markov equivalent exactly when their
/// ac-connected families coincide.
pub fn markov_equivalent(g1: &MixedGraph, g2: &MixedGraph) -> Result<bool> {
    let (only1, only2) = ac_family_difference(g1, g2)?;
    Ok(only1.is_empty() && only2.is_empty())
}

/// Symmetric difference of the two ac-connected families, expressed in
/// `g1`'s vertex indices: `(only in g1, only in g2)`.
pub fn ac_family_difference(
    g1: &MixedGraph,
    g2: &MixedGraph,
) -> Result<(Vec<VertexSet>, Vec<VertexSet>)> {
    let map = vertex_map(g1, g2)?;
    let n = g1.n_vertices();
    let f1 = enumerate_ac_connected(g1, n)?;
    let f2 = remap_family(enumerate_ac_connected(g2, n)?, &map);
    let set1: std::collections::HashSet<u64> = f1.iter().map(|s| s.bits()).collect();
    let set2: std::collections::HashSet<u64> = f2.iter().map(|s| s.bits()).collect();
    let only1 = f1
        .iter()
        .copied()
        .filter(|s| !set2.contains(&s.bits()))
        .collect();
    let only2 = f2
        .iter()
        .copied()
        .filter(|s| !set1.contains(&s.bits()))
        .collect();
    Ok((only1, only2))
}
