//! Grading against reference graphs and the end-to-end benchmark
//! pipeline: sample, hide, learn, project the truth, grade.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{latent_project, pag_oracle, Mark, MixedGraph};
use crate::net::DiscreteNetwork;
use crate::search::{learn, SearchOptions, Termination};
use crate::vset::VertexSet;

/// Per-edge grading outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    TruePositive,
    /// Predicted edge absent from the reference.
    FalsePositive,
    /// Edge present in both but with incompatible marks; counts as a
    /// false positive and a false negative at once.
    WrongOrientation,
    FalseNegative,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeVerdict {
    pub x: String,
    pub y: String,
    pub verdict: Verdict,
}

/// Precision/recall tallies; a circle mark in the reference accepts any
/// predicted mark at that end.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub verdicts: Vec<EdgeVerdict>,
}

fn marks_compatible(truth: Mark, predicted: Mark) -> bool {
    truth == Mark::Circle || truth == predicted
}

/// Grades `predicted` against a reference graph over the same vertex
/// universe (matched by name). Orientation mismatches count as both a
/// false positive and a false negative.
pub fn grade(predicted: &MixedGraph, truth: &MixedGraph) -> Result<BenchmarkResult> {
    if predicted.n_vertices() != truth.n_vertices() {
        return Err(Error::contract("graded graphs have different vertex sets"));
    }
    let map: Vec<usize> = truth
        .names()
        .iter()
        .map(|name| {
            predicted
                .name_index(name)
                .ok_or_else(|| Error::contract(format!("vertex '{name}' missing from prediction")))
        })
        .collect::<Result<_>>()?;
    let n = truth.n_vertices();
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    let mut verdicts = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let t = truth.edge(i, j);
            let p = predicted.edge(map[i], map[j]);
            let verdict = match (t, p) {
                (None, None) => continue,
                (None, Some(_)) => {
                    fp += 1;
                    Verdict::FalsePositive
                }
                (Some(_), None) => {
                    fn_ += 1;
                    Verdict::FalseNegative
                }
                (Some((ti, tj)), Some((pi, pj))) => {
                    if marks_compatible(ti, pi) && marks_compatible(tj, pj) {
                        tp += 1;
                        Verdict::TruePositive
                    } else {
                        fp += 1;
                        fn_ += 1;
                        Verdict::WrongOrientation
                    }
                }
            };
            verdicts.push(EdgeVerdict {
                x: truth.name(i).to_string(),
                y: truth.name(j).to_string(),
                verdict,
            });
        }
    }
    let precision = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
    let recall = (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64);
    Ok(BenchmarkResult {
        tp,
        fp,
        fn_,
        precision,
        recall,
        verdicts,
    })
}

/// How the reference graph was produced for grading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthMode {
    /// Latent projection plus the equivalence-class consensus (needs at
    /// most 12 edges).
    ClassConsensus,
    /// Latent projection alone; grading is circle-free and mark-exact.
    Projection,
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub n_list: Vec<usize>,
    pub hide_fractions: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub options: SearchOptions,
    /// Resample rows with replacement from one base draw instead of
    /// sampling fresh datasets.
    pub bootstrap: bool,
    /// Record wall-clock time per replicate (off keeps reruns
    /// byte-identical).
    pub timings: bool,
}

/// One line of the line-delimited results file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub seed: u64,
    pub n: usize,
    pub hide_fraction: f64,
    pub hidden: Vec<String>,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub runtime_ms: u64,
    pub truth_mode: TruthMode,
    pub termination: Termination,
    pub error: Option<String>,
}

/// Splittable per-replicate seeds derived from the master seed.
pub fn derive_seed(master: u64, n: usize, fraction_permille: u64, replicate: usize) -> u64 {
    // SplitMix64 over a packed key.
    let mut z = master
        ^ (n as u64).wrapping_mul(0x9E3779B97F4A7C15)
        ^ fraction_permille.wrapping_mul(0xBF58476D1CE4E5B9)
        ^ (replicate as u64).wrapping_mul(0x94D049BB133111EB);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Seeded choice of variables to hide: a shuffled candidate order is
/// taken greedily, skipping any variable whose removal would disconnect
/// the projected graph over the remaining observed variables.
pub fn choose_hidden(
    net: &DiscreteNetwork,
    fraction: f64,
    seed: u64,
) -> Result<Vec<String>> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::contract(
            "hide fraction must lie in [0, 1) so observed variables remain",
        ));
    }
    let m = net.n_vars();
    let want = (fraction * m as f64).round() as usize;
    if want == 0 {
        return Ok(Vec::new());
    }
    let dag = net.to_dag();
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);
    let mut hidden = VertexSet::empty();
    for &cand in &order {
        if hidden.len() == want {
            break;
        }
        let trial = hidden.with(cand);
        if trial.len() >= m {
            continue;
        }
        let observed = VertexSet::full(m).difference(trial);
        let projected = latent_project(&dag, observed)?;
        if skeleton_connected(&projected) {
            hidden = trial;
        }
    }
    Ok(hidden.iter().map(|v| net.names()[v].clone()).collect())
}

fn skeleton_connected(g: &MixedGraph) -> bool {
    let n = g.n_vertices();
    if n <= 1 {
        return true;
    }
    let mut seen = VertexSet::singleton(0);
    let mut frontier = vec![0usize];
    while let Some(v) = frontier.pop() {
        for u in 0..n {
            if !seen.contains(u) && g.adjacent(u, v) {
                seen.insert(u);
                frontier.push(u);
            }
        }
    }
    seen.len() == n
}

/// Reference graph for a hidden set: the latent projection, upgraded to
/// the class consensus when small enough.
pub fn truth_graph(net: &DiscreteNetwork, hidden: &[String]) -> Result<(MixedGraph, TruthMode)> {
    let dag = net.to_dag();
    let mut observed = VertexSet::full(net.n_vars());
    for name in hidden {
        let v = net
            .name_index(name)
            .ok_or_else(|| Error::contract(format!("unknown variable '{name}'")))?;
        observed.remove(v);
    }
    let mag = latent_project(&dag, observed)?;
    if mag.n_edges() <= 12 {
        Ok((pag_oracle(&mag)?, TruthMode::ClassConsensus))
    } else {
        Ok((mag, TruthMode::Projection))
    }
}

/// Runs the full pipeline for every (n, fraction, replicate) cell.
/// Individual replicate failures are recorded and the run continues.
pub fn run_benchmark(net: &DiscreteNetwork, config: &BenchmarkConfig) -> Result<Vec<ReplicateRecord>> {
    let mut records = Vec::new();
    for &n in &config.n_list {
        for &fraction in &config.hide_fractions {
            let fraction_permille = (fraction * 1000.0).round() as u64;
            // Bootstrap replicates resample one shared base draw per cell.
            let base_seed = derive_seed(config.seed, n, fraction_permille, usize::MAX);
            for rep in 0..config.replicates {
                let seed = derive_seed(config.seed, n, fraction_permille, rep);
                let started = std::time::Instant::now();
                match run_replicate(net, n, fraction, seed, base_seed, config) {
                    Ok(mut record) => {
                        if config.timings {
                            record.runtime_ms = started.elapsed().as_millis() as u64;
                        }
                        records.push(record);
                    }
                    Err(e) => records.push(ReplicateRecord {
                        seed,
                        n,
                        hide_fraction: fraction,
                        hidden: Vec::new(),
                        tp: 0,
                        fp: 0,
                        fn_: 0,
                        precision: None,
                        recall: None,
                        runtime_ms: 0,
                        truth_mode: TruthMode::Projection,
                        termination: Termination::Converged,
                        error: Some(e.to_string()),
                    }),
                }
            }
        }
    }
    Ok(records)
}

fn run_replicate(
    net: &DiscreteNetwork,
    n: usize,
    fraction: f64,
    seed: u64,
    base_seed: u64,
    config: &BenchmarkConfig,
) -> Result<ReplicateRecord> {
    let hidden = choose_hidden(net, fraction, seed)?;
    let table = if config.bootstrap {
        let base = net.sample(n, base_seed)?;
        resample_rows(&base, seed)?
    } else {
        net.sample(n, seed)?
    };
    let table = table.hide(&hidden)?;
    let report = learn(&table, None, &config.options)?;
    let (truth, truth_mode) = truth_graph(net, &hidden)?;
    let graded = grade(&report.graph, &truth)?;
    Ok(ReplicateRecord {
        seed,
        n,
        hide_fraction: fraction,
        hidden,
        tp: graded.tp,
        fp: graded.fp,
        fn_: graded.fn_,
        precision: graded.precision,
        recall: graded.recall,
        runtime_ms: 0,
        truth_mode,
        termination: report.termination,
        error: None,
    })
}

fn resample_rows(table: &crate::table::CategoricalTable, seed: u64) -> Result<crate::table::CategoricalTable> {
    use rand::Rng;
    use rand::SeedableRng;
    let n = table.n_samples();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xB007_57A9);
    let picks: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let rows: Vec<Vec<String>> = picks
        .iter()
        .map(|&r| {
            (0..table.n_vars())
                .map(|v| table.level_labels(v)[table.code(v, r) as usize].clone())
                .collect()
        })
        .collect();
    crate::table::CategoricalTable::from_rows(table.names().to_vec(), &rows)
}

/// Mean and 95% confidence half-width per (n, fraction) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub hide_fraction: f64,
    pub replicates: usize,
    pub failures: usize,
    pub mean_precision: Option<f64>,
    pub ci95_precision: Option<f64>,
    pub mean_recall: Option<f64>,
    pub ci95_recall: Option<f64>,
}

pub fn summarize(records: &[ReplicateRecord]) -> Vec<SummaryRow> {
    use std::collections::BTreeMap;
    let mut cells: BTreeMap<(usize, u64), Vec<&ReplicateRecord>> = BTreeMap::new();
    for r in records {
        cells
            .entry((r.n, (r.hide_fraction * 1000.0).round() as u64))
            .or_default()
            .push(r);
    }
    cells
        .into_iter()
        .map(|((n, fm), rs)| {
            let ok: Vec<&&ReplicateRecord> = rs.iter().filter(|r| r.error.is_none()).collect();
            let precisions: Vec<f64> = ok.iter().filter_map(|r| r.precision).collect();
            let recalls: Vec<f64> = ok.iter().filter_map(|r| r.recall).collect();
            let (mp, cp) = mean_ci(&precisions);
            let (mr, cr) = mean_ci(&recalls);
            SummaryRow {
                n,
                hide_fraction: fm as f64 / 1000.0,
                replicates: rs.len(),
                failures: rs.len() - ok.len(),
                mean_precision: mp,
                ci95_precision: cp,
                mean_recall: mr,
                ci95_recall: cr,
            }
        })
        .collect()
}

/// Two-sided 95% Student quantiles for small samples, then the normal
/// approximation.
fn t_quantile_975(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179,
        2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
        2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    if df == 0 {
        f64::NAN
    } else if df <= 30 {
        TABLE[df - 1]
    } else {
        1.96
    }
}

fn mean_ci(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let half = t_quantile_975(xs.len() - 1) * (var / n).sqrt();
    (Some(mean), Some(half))
}

/// Line-delimited serialization of the records.
pub fn records_to_string(records: &[ReplicateRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serialization"));
        out.push('\n');
    }
    out
}

pub fn records_from_str(text: &str) -> Result<Vec<ReplicateRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l)
                .map_err(|e| Error::contract(format!("bad record line: {e}")))
        })
        .collect()
}
