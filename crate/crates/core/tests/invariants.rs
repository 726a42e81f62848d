//! Property tests for the structural invariants: relabeling invariance,
//! separation-route agreement, projection validity, consensus grading
//! and count consistency.

use proptest::prelude::*;

use agscore::bench::grade;
use agscore::graph::{
    ac_connected, enumerate_ac_connected, is_separated, latent_project, pag_oracle, Criterion,
    MixedGraph, SeparationQuery,
};
use agscore::table::CategoricalTable;
use agscore::vset::VertexSet;

/// Mark state per vertex pair: 0 none, 1 i->j, 2 j->i, 3 i<->j.
fn graph_from_codes(n: usize, codes: &[u8]) -> MixedGraph {
    let mut g = MixedGraph::with_n(n).unwrap();
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            match codes[k] % 4 {
                0 => {}
                1 => g.add_directed(i, j).unwrap(),
                2 => g.add_directed(j, i).unwrap(),
                _ => g.add_bidirected(i, j).unwrap(),
            }
            k += 1;
        }
    }
    g
}

fn arb_mixed_graph(n: usize) -> impl Strategy<Value = MixedGraph> {
    proptest::collection::vec(0u8..4, n * (n - 1) / 2)
        .prop_map(move |codes| graph_from_codes(n, &codes))
}

fn arb_ancestral_graph(n: usize) -> impl Strategy<Value = MixedGraph> {
    arb_mixed_graph(n).prop_filter("ancestral", |g| g.is_ancestral())
}

fn arb_dag(n: usize) -> impl Strategy<Value = MixedGraph> {
    proptest::collection::vec(proptest::bool::weighted(0.4), n * (n - 1) / 2).prop_map(
        move |bits| {
            let mut g = MixedGraph::with_n(n).unwrap();
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if bits[k] {
                        g.add_directed(i, j).unwrap();
                    }
                    k += 1;
                }
            }
            g
        },
    )
}

fn permute(g: &MixedGraph, perm: &[usize]) -> MixedGraph {
    let names: Vec<String> = (0..g.n_vertices())
        .map(|v| g.name(perm.iter().position(|&p| p == v).unwrap()).to_string())
        .collect();
    let mut out = MixedGraph::new(names).unwrap();
    for (i, j, mi, mj) in g.edges() {
        out.add_edge(perm[i], perm[j], mi, mj).unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Relabeling the vertices permutes the ac-connected family and
    /// changes nothing else.
    #[test]
    fn ac_connectivity_is_isomorphism_invariant(
        g in arb_ancestral_graph(6),
        perm_seed in 0u64..1000,
    ) {
        let n = g.n_vertices();
        let mut perm: Vec<usize> = (0..n).collect();
        // Cheap seeded shuffle.
        let mut state = perm_seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        for i in (1..n).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            perm.swap(i, (state as usize) % (i + 1));
        }
        let h = permute(&g, &perm);
        let fam_g = enumerate_ac_connected(&g, n).unwrap();
        let mut mapped: Vec<VertexSet> = fam_g
            .iter()
            .map(|s| s.iter().map(|v| perm[v]).collect())
            .collect();
        mapped.sort_by(VertexSet::cmp_size_lex);
        let fam_h = enumerate_ac_connected(&h, n).unwrap();
        prop_assert_eq!(mapped, fam_h);
    }

    /// The component-based subset check agrees with the reachability
    /// engine pair by pair.
    #[test]
    fn subset_connectivity_matches_pairwise_reachability(
        g in arb_ancestral_graph(6),
        bits in 1u64..64,
    ) {
        let c = VertexSet::from_bits(bits);
        let members = c.to_vec();
        let mut all_linked = true;
        'pairs: for (a, &x) in members.iter().enumerate() {
            for &y in members.iter().skip(a + 1) {
                let q = SeparationQuery::new(&g, x, y, c, Criterion::Ac).unwrap();
                if is_separated(&g, &q) {
                    all_linked = false;
                    break 'pairs;
                }
            }
        }
        prop_assert_eq!(ac_connected(&g, c), all_linked);
    }

    /// Latent projection always yields a valid ancestral graph, and its
    /// class consensus grades the projection perfectly.
    #[test]
    fn projection_is_ancestral_and_consensus_grades_cleanly(
        dag in arb_dag(6),
        obs_bits in 1u64..63,
    ) {
        let observed = VertexSet::from_bits(obs_bits);
        let mag = latent_project(&dag, observed).unwrap();
        prop_assert!(mag.is_ancestral());
        if mag.n_edges() <= 12 {
            let pag = pag_oracle(&mag).unwrap();
            let r = grade(&mag, &pag).unwrap();
            if mag.n_edges() > 0 {
                prop_assert_eq!(r.precision, Some(1.0));
                prop_assert_eq!(r.recall, Some(1.0));
            }
        }
    }

    /// Joint counts always total the sample count, and marginals of the
    /// full joint match directly computed marginals.
    #[test]
    fn counts_are_consistent(
        rows in proptest::collection::vec(
            proptest::collection::vec(0u32..3, 4),
            1..40
        ),
    ) {
        let string_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect())
            .collect();
        let t = CategoricalTable::from_rows(
            (0..4).map(|k| format!("V{k}")).collect(),
            &string_rows,
        )
        .unwrap();
        let n = t.n_samples() as u64;
        let full = VertexSet::full(4);
        for s in full.subsets().filter(|s| !s.is_empty()) {
            let c = t.counts(s).unwrap();
            prop_assert_eq!(c.counts_iter().sum::<u64>(), n);
        }
    }
}
