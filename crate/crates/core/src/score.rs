//! Score functions: per-node conditional-entropy scores with fNML
//! regularization, pair and edge-orientation scores, and the exact
//! global decomposition score over ac-connected subsets.
//!
//! All scores are per-sample nats; lower is better.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::graph::{enumerate_ac_connected_with, EnumerateOptions, MixedGraph};
use crate::info::InfoCache;
use crate::nml::ComplexityCache;
use crate::table::CategoricalTable;
use crate::vset::VertexSet;

/// Which edge orientation a score refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Orientation {
    XToY,
    YToX,
    Bidirected,
}

impl Orientation {
    pub const ALL: [Orientation; 3] = [Orientation::XToY, Orientation::YToX, Orientation::Bidirected];
}

/// How a pair of nodes is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Disconnected,
    XToY,
    YToX,
}

/// Additive regularizer applied to the global decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regularizer {
    #[default]
    None,
    /// Per-term correction `I(C) - (1/2) prod_k (1 - r_k) ln(N) / N`.
    Bic,
}

/// Memoized entropies, informations and complexity sums over one table.
///
/// Complexity sums are keyed by (conditioning subset, child level
/// count); the same sums recur across node, pair and edge scores.
pub struct ScoreLedger<'a> {
    info: InfoCache<'a>,
    nml: ComplexityCache,
    complexity_sums: RwLock<HashMap<(u64, u32), f64>>,
}

impl<'a> ScoreLedger<'a> {
    pub fn new(table: &'a CategoricalTable) -> Self {
        ScoreLedger {
            info: InfoCache::new(table),
            nml: ComplexityCache::new(),
            complexity_sums: RwLock::new(HashMap::new()),
        }
    }

    pub fn with_parts(info: InfoCache<'a>, nml: ComplexityCache) -> Self {
        ScoreLedger {
            info,
            nml,
            complexity_sums: RwLock::new(HashMap::new()),
        }
    }

    pub fn table(&self) -> &CategoricalTable {
        self.info.table()
    }

    pub fn info(&self) -> &InfoCache<'a> {
        &self.info
    }

    pub fn nml(&self) -> &ComplexityCache {
        &self.nml
    }

    /// `sum_j log C(r, n_j)` over the configurations of `cond` realized
    /// in data. The empty conditioning set has one configuration with
    /// `n_j = N`; unrealized configurations cost nothing.
    pub fn complexity_sum(&self, cond: VertexSet, r: u32) -> Result<f64> {
        let key = (cond.bits(), r);
        if let Some(&v) = self.complexity_sums.read().unwrap().get(&key) {
            return Ok(v);
        }
        let n = self.table().n_samples() as u64;
        let v = if cond.is_empty() {
            self.nml.log_complexity(r, n)?
        } else {
            let counts = self.table().counts(cond)?;
            let mut sum = 0.0;
            for n_j in counts.counts_iter() {
                sum += self.nml.log_complexity(r, n_j)?;
            }
            sum
        };
        self.complexity_sums.write().unwrap().insert(key, v);
        Ok(v)
    }

    /// Node score: `H(x | pa) + (1/N) sum_j log C(r_x, n_j)` with the
    /// sum over realized parent configurations.
    pub fn node_score(&self, x: usize, pa: VertexSet) -> Result<f64> {
        if pa.contains(x) {
            return Err(Error::contract("node score with the node among its parents"));
        }
        let n = self.table().n_samples() as f64;
        let r_x = self.table().levels(x);
        let h = self.info.conditional_entropy(VertexSet::singleton(x), pa)?;
        Ok(h + self.complexity_sum(pa, r_x)? / n)
    }

    /// Pair score: the sum of the two node scores, with the child's
    /// conditioning set gaining the parent for the directed kinds.
    pub fn pair_score(
        &self,
        x: usize,
        y: usize,
        pa_x: VertexSet,
        pa_y: VertexSet,
        kind: PairKind,
    ) -> Result<f64> {
        if x == y {
            return Err(Error::contract("pair score needs two distinct nodes"));
        }
        if pa_x.contains(x) || pa_x.contains(y) || pa_y.contains(x) || pa_y.contains(y) {
            return Err(Error::contract(
                "pair parent sets must exclude both endpoints",
            ));
        }
        Ok(match kind {
            PairKind::Disconnected => self.node_score(x, pa_x)? + self.node_score(y, pa_y)?,
            PairKind::XToY => self.node_score(x, pa_x)? + self.node_score(y, pa_y.with(x))?,
            PairKind::YToX => self.node_score(x, pa_x.with(y))? + self.node_score(y, pa_y)?,
        })
    }

    /// Orientation score for a single edge given the endpoints' other
    /// parents and spouses: minus the conditional information plus the
    /// symmetrized fNML complexity. With equal parent sets all three
    /// orientations score identically.
    pub fn edge_orientation_score(
        &self,
        x: usize,
        y: usize,
        pa_x: VertexSet,
        pa_y: VertexSet,
        orientation: Orientation,
    ) -> Result<f64> {
        self.edge_score_inner(x, y, pa_x, pa_y, orientation, true)
    }

    /// Unsymmetrized variant: exactly the pair-score difference between
    /// the directed connection and the disconnected baseline.
    pub fn edge_orientation_score_unsymmetrized(
        &self,
        x: usize,
        y: usize,
        pa_x: VertexSet,
        pa_y: VertexSet,
        orientation: Orientation,
    ) -> Result<f64> {
        self.edge_score_inner(x, y, pa_x, pa_y, orientation, false)
    }

    fn edge_score_inner(
        &self,
        x: usize,
        y: usize,
        pa_x: VertexSet,
        pa_y: VertexSet,
        orientation: Orientation,
        symmetrized: bool,
    ) -> Result<f64> {
        if x == y {
            return Err(Error::contract("edge score needs two distinct nodes"));
        }
        if pa_x.contains(x) || pa_x.contains(y) || pa_y.contains(x) || pa_y.contains(y) {
            return Err(Error::contract(
                "edge parent sets must exclude both endpoints",
            ));
        }
        let n = self.table().n_samples() as f64;
        let r_x = self.table().levels(x);
        let r_y = self.table().levels(y);
        let cond = match orientation {
            Orientation::XToY => pa_y,
            Orientation::YToX => pa_x,
            Orientation::Bidirected => pa_x.union(pa_y),
        };
        let info = -self.info.conditional_mi(x, y, cond)?;
        // Complexity increments of adding one endpoint to the other's
        // conditioning set, averaged over both reading directions.
        let (cx, cy) = match orientation {
            Orientation::XToY | Orientation::YToX => (pa_x, pa_y),
            Orientation::Bidirected => {
                let u = pa_x.union(pa_y);
                (u, u)
            }
        };
        let delta_x = self.complexity_sum(cx.with(y), r_x)? - self.complexity_sum(cx, r_x)?;
        let delta_y = self.complexity_sum(cy.with(x), r_y)? - self.complexity_sum(cy, r_y)?;
        let complexity = if symmetrized {
            (delta_x + delta_y) / (2.0 * n)
        } else {
            match orientation {
                Orientation::XToY => delta_y / n,
                Orientation::YToX => delta_x / n,
                Orientation::Bidirected => (delta_x + delta_y) / (2.0 * n),
            }
        };
        Ok(info + complexity)
    }

    /// Exact decomposition score of an ancestral graph: the alternating
    /// sum of plug-in multivariate information over its ac-connected
    /// subsets of size at most `max_subset`.
    pub fn global_score(
        &self,
        g: &MixedGraph,
        regularizer: Regularizer,
        max_subset: usize,
    ) -> Result<f64> {
        Ok(self
            .global_score_terms(g, regularizer, max_subset, None)?
            .into_iter()
            .map(|t| t.signed_value)
            .sum())
    }

    /// Per-subset ledger of the decomposition, largest graphs first in
    /// (size, lexicographic) order. `max_colliders` restricts the
    /// enumeration to subsets linked by short collider paths.
    pub fn global_score_terms(
        &self,
        g: &MixedGraph,
        regularizer: Regularizer,
        max_subset: usize,
        max_colliders: Option<usize>,
    ) -> Result<Vec<ScoreTerm>> {
        if g.n_vertices() != self.table().n_vars() {
            return Err(Error::contract(
                "graph and table have different variable counts",
            ));
        }
        if g.has_undirected_edges() {
            return Err(Error::contract(
                "global score is defined for graphs without undirected edges",
            ));
        }
        if g.has_circle_marks() {
            return Err(Error::contract(
                "global score is defined for fully oriented graphs",
            ));
        }
        let violations = g.validate_ancestral();
        if !violations.is_empty() {
            return Err(Error::contract(format!(
                "graph is not ancestral: {}",
                violations[0]
            )));
        }
        let n = self.table().n_samples() as f64;
        // An ac-connected subset beyond the information cap surfaces as
        // a resource error rather than being dropped silently.
        let opts = EnumerateOptions {
            max_size: max_subset,
            max_colliders,
            ceiling: crate::graph::DEFAULT_SUBSET_CEILING,
        };
        let subsets = enumerate_ac_connected_with(g, opts)?;
        let mut terms = Vec::with_capacity(subsets.len());
        for c in subsets {
            let mut i = self.info.multi_information(c)?;
            if regularizer == Regularizer::Bic {
                let mut prod = 1.0;
                for k in c.iter() {
                    prod *= 1.0 - self.table().levels(k) as f64;
                }
                i -= 0.5 * prod * n.ln() / n;
            }
            // H(p,q) = -sum (-1)^{|C|} I(C)
            let signed = if c.len() % 2 == 1 { i } else { -i };
            terms.push(ScoreTerm {
                subset: c,
                information: i,
                signed_value: signed,
            });
        }
        Ok(terms)
    }

    /// Conditional-entropy score of a DAG, `sum_i H(x_i | Pa_i)`. For a
    /// directed acyclic graph this equals the decomposition score
    /// without regularization; kept as an independent route.
    pub fn bn_conditional_entropy_score(&self, dag: &MixedGraph) -> Result<f64> {
        if !dag.is_dag() {
            return Err(Error::contract(
                "conditional-entropy score needs a directed acyclic graph",
            ));
        }
        if dag.n_vertices() != self.table().n_vars() {
            return Err(Error::contract(
                "graph and table have different variable counts",
            ));
        }
        let mut total = 0.0;
        for v in 0..dag.n_vertices() {
            total += self
                .info
                .conditional_entropy(VertexSet::singleton(v), dag.parents_of(v))?;
        }
        Ok(total)
    }
}

/// One signed term of the global decomposition.
#[derive(Debug, Clone)]
pub struct ScoreTerm {
    pub subset: VertexSet,
    pub information: f64,
    /// `-(-1)^{|C|} I(C)`, the contribution to the score.
    pub signed_value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{load_table, xor_table};
    use rand::{Rng, SeedableRng};
    use std::io::Cursor;

    const LN2: f64 = std::f64::consts::LN_2;

    fn set(vs: &[usize]) -> VertexSet {
        vs.iter().copied().collect()
    }

    #[test]
    fn node_score_with_empty_parents() {
        let t = load_table(Cursor::new("X\n0\n1\n0\n1\n")).unwrap();
        let ledger = ScoreLedger::new(&t);
        let got = ledger.node_score(0, VertexSet::empty()).unwrap();
        let h = ledger.info().entropy(set(&[0])).unwrap();
        let c = ledger.nml().log_complexity(2, 4).unwrap();
        assert!((got - (h + c / 4.0)).abs() < 1e-14);
    }

    #[test]
    fn constant_node_scores_zero() {
        let t = load_table(Cursor::new("X\nk\nk\nk\n")).unwrap();
        let ledger = ScoreLedger::new(&t);
        assert_eq!(ledger.node_score(0, VertexSet::empty()).unwrap(), 0.0);
    }

    #[test]
    fn xor_child_score_is_ln2() {
        // H(C | A,B) = 0; each of the four parent configurations has
        // one sample, and log C(2, 1) = ln 2.
        let t = xor_table();
        let ledger = ScoreLedger::new(&t);
        let got = ledger.node_score(2, set(&[0, 1])).unwrap();
        assert!((got - LN2).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn pair_score_is_compositional() {
        let t = xor_table();
        let ledger = ScoreLedger::new(&t);
        let direct = ledger
            .pair_score(0, 2, VertexSet::empty(), set(&[1]), PairKind::XToY)
            .unwrap();
        let composed = ledger.node_score(0, VertexSet::empty()).unwrap()
            + ledger.node_score(2, set(&[1]).with(0)).unwrap();
        assert_eq!(direct, composed);
    }

    fn independent_uniform_pair(seed: u64, n: usize) -> CategoricalTable {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<String>> = (0..n)
            .map(|_| {
                vec![
                    rng.gen_range(0..2u32).to_string(),
                    rng.gen_range(0..2u32).to_string(),
                ]
            })
            .collect();
        CategoricalTable::from_rows(vec!["X".into(), "Y".into()], &rows).unwrap()
    }

    #[test]
    fn complexity_penalty_separates_independent_pair() {
        let t = independent_uniform_pair(11, 1000);
        let ledger = ScoreLedger::new(&t);
        let (e, e2) = (VertexSet::empty(), VertexSet::empty());
        let disc = ledger.pair_score(0, 1, e, e2, PairKind::Disconnected).unwrap();
        let conn = ledger.pair_score(0, 1, e, e2, PairKind::XToY).unwrap();
        assert!(disc < conn, "disconnected {disc} vs connected {conn}");
    }

    #[test]
    fn orientation_scores_coincide_with_empty_parents() {
        let t = independent_uniform_pair(3, 200);
        let ledger = ScoreLedger::new(&t);
        let e = VertexSet::empty();
        let sxy = ledger
            .edge_orientation_score(0, 1, e, e, Orientation::XToY)
            .unwrap();
        let syx = ledger
            .edge_orientation_score(0, 1, e, e, Orientation::YToX)
            .unwrap();
        let sbi = ledger
            .edge_orientation_score(0, 1, e, e, Orientation::Bidirected)
            .unwrap();
        assert_eq!(sxy, syx);
        assert_eq!(sxy, sbi);
        let expected = -ledger.info().conditional_mi(0, 1, e).unwrap()
            + (ledger.complexity_sum(e.with(1), 2).unwrap()
                - ledger.complexity_sum(e, 2).unwrap()
                + ledger.complexity_sum(e.with(0), 2).unwrap()
                - ledger.complexity_sum(e, 2).unwrap())
                / (2.0 * 200.0);
        assert!((sxy - expected).abs() < 1e-14);
    }

    fn random_table(seed: u64, m: usize, n: usize, max_levels: u32) -> CategoricalTable {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let levels: Vec<u32> = (0..m).map(|_| rng.gen_range(2..=max_levels)).collect();
        let rows: Vec<Vec<String>> = (0..n)
            .map(|_| {
                (0..m)
                    .map(|k| rng.gen_range(0..levels[k]).to_string())
                    .collect()
            })
            .collect();
        CategoricalTable::from_rows((0..m).map(|k| format!("V{k}")).collect(), &rows).unwrap()
    }

    #[test]
    fn shared_parents_make_all_three_orientations_equal() {
        for seed in 0..50u64 {
            let t = random_table(seed, 5, 120, 3);
            let ledger = ScoreLedger::new(&t);
            let p = set(&[2, 3]);
            let scores: Vec<f64> = Orientation::ALL
                .iter()
                .map(|&o| ledger.edge_orientation_score(0, 1, p, p, o).unwrap())
                .collect();
            assert!((scores[0] - scores[1]).abs() <= 1e-12);
            assert!((scores[0] - scores[2]).abs() <= 1e-12);
        }
    }

    #[test]
    fn unsymmetrized_score_matches_pair_difference() {
        for seed in 0..20u64 {
            let t = random_table(seed + 60, 5, 150, 3);
            let ledger = ScoreLedger::new(&t);
            let pa_x = set(&[2]);
            let pa_y = set(&[3, 4]);
            let edge = ledger
                .edge_orientation_score_unsymmetrized(0, 1, pa_x, pa_y, Orientation::XToY)
                .unwrap();
            let diff = ledger.pair_score(0, 1, pa_x, pa_y, PairKind::XToY).unwrap()
                - ledger
                    .pair_score(0, 1, pa_x, pa_y, PairKind::Disconnected)
                    .unwrap();
            assert!((edge - diff).abs() <= 1e-12, "seed {seed}: {edge} vs {diff}");
        }
    }

    #[test]
    fn empty_graph_scores_to_marginal_entropies() {
        let t = random_table(5, 4, 80, 3);
        let ledger = ScoreLedger::new(&t);
        let g = MixedGraph::with_n(4).unwrap();
        let score = ledger.global_score(&g, Regularizer::None, 4).unwrap();
        let want: f64 = (0..4)
            .map(|v| ledger.info().entropy(VertexSet::singleton(v)).unwrap())
            .sum();
        assert!((score - want).abs() < 1e-12);
    }

    fn random_dag(rng: &mut impl Rng, n: usize, p: f64) -> MixedGraph {
        let mut g = MixedGraph::with_n(n).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(p) {
                    g.add_directed(i, j).unwrap();
                }
            }
        }
        g
    }

    #[test]
    fn dag_score_equals_conditional_entropy_sum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for case in 0..25 {
            let n = rng.gen_range(2..=6);
            let t = random_table(1000 + case, n, 60, 3);
            let ledger = ScoreLedger::new(&t);
            let dag = random_dag(&mut rng, n, 0.4);
            let global = ledger.global_score(&dag, Regularizer::None, n).unwrap();
            let oracle = ledger.bn_conditional_entropy_score(&dag).unwrap();
            assert!(
                (global - oracle).abs() <= 1e-9 * oracle.abs().max(1.0),
                "case {case}: {global} vs {oracle}"
            );
        }
    }

    #[test]
    fn undirected_edges_are_rejected_by_global_score() {
        let t = random_table(7, 3, 40, 2);
        let ledger = ScoreLedger::new(&t);
        let mut g = MixedGraph::with_n(3).unwrap();
        g.add_undirected(0, 1).unwrap();
        assert!(matches!(
            ledger.global_score(&g, Regularizer::None, 3),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn bic_regularizer_shifts_each_term() {
        let t = random_table(8, 3, 50, 2);
        let ledger = ScoreLedger::new(&t);
        let g = MixedGraph::with_n(3).unwrap();
        let n = t.n_samples() as f64;
        let plain = ledger.global_score(&g, Regularizer::None, 3).unwrap();
        let bic = ledger.global_score(&g, Regularizer::Bic, 3).unwrap();
        // Three singleton terms, each corrected by -(1/2)(1 - r) ln N / N
        // with r = 2, and signed positively.
        let shift = 3.0 * 0.5 * n.ln() / n;
        assert!((plain + shift - bic).abs() < 1e-12);
    }
}
