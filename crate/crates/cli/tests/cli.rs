//! End-to-end tests against the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_agscore"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn assets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.to_string_lossy().to_string()
}

const V_STRUCTURE_NET: &str = "var X: 0,1\nvar W: 0,1\nvar Z: 0,1\n\
    cpt X: 0.5 0.5\ncpt W: 0.5 0.5\n\
    cpt Z | X,W: 0.9 0.1 ; 0.5 0.5 ; 0.5 0.5 ; 0.1 0.9\n";

const CHAIN_NET: &str = "var X: 0,1\nvar Z: 0,1\nvar W: 0,1\n\
    cpt X: 0.5 0.5\ncpt Z | X: 0.85 0.15 ; 0.15 0.85\ncpt W | Z: 0.85 0.15 ; 0.15 0.85\n";

#[test]
fn learn_recovers_v_structure_edges() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "v.net", V_STRUCTURE_NET);
    let data = dir.path().join("data.csv");
    let out = run(&[
        "simulate", &net, "--n", "6000", "--seed", "11",
        "-o", data.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let graph = dir.path().join("learned.graph");
    let out = run(&[
        "learn", data.to_str().unwrap(),
        "-o", graph.to_str().unwrap(),
        "--seed", "1",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&graph).unwrap();
    assert!(text.contains("X -> Z"), "{text}");
    assert!(text.contains("W -> Z"), "{text}");
}

#[test]
fn unreadable_path_exits_2() {
    let out = run(&["learn", "/nonexistent/data.csv"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn learn_is_byte_identical_under_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "v.net", V_STRUCTURE_NET);
    let data = dir.path().join("data.csv");
    assert!(run(&["simulate", &net, "--n", "2000", "--seed", "3", "-o", data.to_str().unwrap()])
        .status
        .success());
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let graph = dir.path().join(format!("{name}.graph"));
        let report = dir.path().join(format!("{name}.json"));
        let out = run(&[
            "learn", data.to_str().unwrap(),
            "-o", graph.to_str().unwrap(),
            "--report", report.to_str().unwrap(),
            "--seed", "7",
        ]);
        assert!(out.status.success());
        outputs.push((
            std::fs::read(&graph).unwrap(),
            std::fs::read(&report).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn score_of_empty_graph_is_marginal_entropy_sum() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.csv", "A,B\n0,0\n0,1\n1,0\n1,1\n");
    let empty = write(dir.path(), "empty.graph", "vertices: A,B\n");
    let out = run(&["score", &data, &empty]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    // Both variables are uniform binary: score = 2 ln 2.
    let want = 2.0 * std::f64::consts::LN_2;
    let score: f64 = text
        .lines()
        .find(|l| l.starts_with("score:"))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!((score - want).abs() < 1e-9, "{text}");
}

#[test]
fn score_in_bits_scales_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.csv", "A,B\n0,0\n0,1\n1,0\n1,1\n");
    let empty = write(dir.path(), "empty.graph", "vertices: A,B\n");
    let out = run(&["score", &data, &empty, "--units", "bits"]);
    assert!(out.status.success(), "{out:?}");
    let score: f64 = stdout(&out)
        .lines()
        .find(|l| l.starts_with("score:"))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap();
    // Two uniform binary marginals: exactly 2 bits.
    assert!((score - 2.0).abs() < 1e-9);
}

#[test]
fn score_of_dag_matches_oracle_mode() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "chain.net", CHAIN_NET);
    let data = dir.path().join("data.csv");
    assert!(run(&["simulate", &net, "--n", "500", "--seed", "5", "-o", data.to_str().unwrap()])
        .status
        .success());
    let dag = write(dir.path(), "dag.graph", "vertices: X,Z,W\nX -> Z\nZ -> W\n");
    let out = run(&["score", data.to_str().unwrap(), &dag, "--oracle-bn"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let grab = |prefix: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(prefix))
            .and_then(|l| l.strip_prefix(prefix))
            .unwrap()
            .split_whitespace()
            .next()
            .unwrap()
            .parse()
            .unwrap()
    };
    let score = grab("score:");
    let oracle = grab("conditional-entropy score:");
    assert!((score - oracle).abs() < 1e-9, "{text}");
}

#[test]
fn score_difference_between_the_skeleton_twins_is_the_conditional_term() {
    // Generate data from a DAG whose projection is the two-collider graph:
    // L1 confounds Z and T, L2 confounds T and Y.
    let dir = tempfile::tempdir().unwrap();
    let gen = write(
        dir.path(),
        "gen.net",
        "var X: 0,1\nvar Z: 0,1\nvar T: 0,1\nvar Y: 0,1\nvar L1: 0,1\nvar L2: 0,1\n\
         cpt X: 0.5 0.5\ncpt L1: 0.5 0.5\ncpt L2: 0.5 0.5\n\
         cpt Z | X,L1: 0.85 0.15 ; 0.5 0.5 ; 0.5 0.5 ; 0.15 0.85\n\
         cpt T | L1,L2: 0.85 0.15 ; 0.5 0.5 ; 0.5 0.5 ; 0.15 0.85\n\
         cpt Y | Z,L2: 0.85 0.15 ; 0.5 0.5 ; 0.5 0.5 ; 0.15 0.85\n",
    );
    let data = dir.path().join("data.csv");
    assert!(run(&[
        "simulate", &gen, "--n", "20000", "--seed", "9",
        "--hide", "L1,L2", "-o", data.to_str().unwrap(),
    ])
    .status
    .success());
    let unshielded_collider_dag = assets().join("graphs/unshielded_collider_dag.graph");
    let two_collider_ancestral = assets().join("graphs/two_collider_ancestral.graph");
    let score_of = |graph: &Path| -> f64 {
        let out = run(&["score", data.to_str().unwrap(), graph.to_str().unwrap()]);
        assert!(out.status.success(), "{out:?}");
        stdout(&out)
            .lines()
            .find(|l| l.starts_with("score:"))
            .and_then(|l| l.split_whitespace().nth(1))
            .unwrap()
            .parse()
            .unwrap()
    };
    let f = score_of(&unshielded_collider_dag);
    let g = score_of(&two_collider_ancestral);
    // score(G) - score(F) = I(X;Y;T) - I(X;Y;Z;T) = I(X;Y;T|Z).
    let table = agscore::table::load_table_path(&data).unwrap();
    let info = agscore::info::InfoCache::new(&table);
    let idx = |name: &str| table.name_index(name).unwrap();
    let subset: agscore::vset::VertexSet =
        [idx("X"), idx("Y"), idx("T")].into_iter().collect();
    let cond = agscore::vset::VertexSet::singleton(idx("Z"));
    let want = info.conditional_multi_information(subset, cond).unwrap();
    assert!(
        ((g - f) - want).abs() < 1e-9,
        "difference {} vs I(X;Y;T|Z) {want}",
        g - f
    );
}

#[test]
fn equiv_reports_the_figure_facts() {
    let graphs = assets().join("graphs");
    let out = run(&[
        "equiv",
        graphs.join("equivalent_pair_a.graph").to_str().unwrap(),
        graphs.join("equivalent_pair_b.graph").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("equivalent"));

    let out = run(&[
        "equiv",
        graphs.join("unshielded_collider_dag.graph").to_str().unwrap(),
        graphs.join("two_collider_ancestral.graph").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("not equivalent"), "{text}");
    assert!(text.contains("{X,T,Y}"), "{text}");
    assert!(text.contains("{X,Z,T,Y}"), "{text}");

    let out = run(&[
        "equiv",
        graphs.join("two_collider_ancestral.graph").to_str().unwrap(),
        graphs.join("two_collider_ancestral.graph").to_str().unwrap(),
    ]);
    assert!(stdout(&out).contains("equivalent"));
}

#[test]
fn equiv_vertex_mismatch_fails() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.graph", "vertices: A,B\nA -> B\n");
    let b = write(dir.path(), "b.graph", "vertices: A,C\nA -> C\n");
    let out = run(&["equiv", &a, &b]);
    assert!(!out.status.success());
}

#[test]
fn separation_verdicts_mirror_the_v_structure() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "v.graph", "vertices: X,Z,Y\nX -> Z\nY -> Z\n");
    let out = run(&["separation", &g, "X", "Y"]);
    assert!(stdout(&out).contains("separated"), "{out:?}");
    let out = run(&["separation", &g, "X", "Y", "--given", "Z"]);
    assert!(stdout(&out).starts_with("connected"), "{out:?}");
    let out = run(&["separation", &g, "X", "Q"]);
    assert!(!out.status.success());
}

#[test]
fn simulate_is_deterministic_and_hides_columns() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "chain.net", CHAIN_NET);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        assert!(run(&["simulate", &net, "--n", "300", "--seed", "21", "-o", path.to_str().unwrap()])
            .status
            .success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let hidden = dir.path().join("hidden.csv");
    assert!(run(&[
        "simulate", &net, "--n", "300", "--seed", "21",
        "--hide", "Z", "-o", hidden.to_str().unwrap(),
    ])
    .status
    .success());
    let text = std::fs::read_to_string(&hidden).unwrap();
    assert!(text.starts_with("X,W\n"), "{text}");

    let out = run(&["simulate", &net, "--n", "10", "--seed", "1", "--hide", "X,Z,W"]);
    assert!(!out.status.success(), "hiding everything must fail");
}

#[test]
fn project_handles_confounder_and_pag_consensus() {
    let dir = tempfile::tempdir().unwrap();
    let dag = write(
        dir.path(),
        "dag.graph",
        "vertices: L,X,Y\nL -> X\nL -> Y\n",
    );
    let out = run(&["project", &dag, "--hide", "L"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("X <-> Y"), "{out:?}");

    let single = write(dir.path(), "one.graph", "vertices: X,Y\nX -> Y\n");
    let out = run(&["project", &single, "--pag"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("X o-o Y"), "{out:?}");
}

#[test]
fn benchmark_tiny_chain_is_perfect_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "chain.net", CHAIN_NET);
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for path in [&a, &b] {
        let out = run(&[
            "benchmark", &net,
            "--n-list", "50000",
            "--hide-fractions", "0",
            "--replicates", "1",
            "--seed", "33",
            "-o", path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
        let text = stdout(&out);
        assert!(
            text.contains("precision 1.000") && text.contains("recall 1.000"),
            "{text}"
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let out = run(&[
        "benchmark", &net, "--n-list", "100", "--hide-fractions", "1.0",
    ]);
    assert!(!out.status.success(), "hide fraction 1.0 must be rejected");
}
