//! Command-line surface for ancestral-graph structure learning:
//! learning from data, scoring graphs, equivalence and separation
//! queries, simulation and benchmarks.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use agscore::bench::{self, BenchmarkConfig};
use agscore::error::Error;
use agscore::graph::{
    self, ac_family_difference, graph_to_string, latent_project, load_graph_path, pag_oracle,
    Criterion, MixedGraph, SeparationQuery,
};
use agscore::net::load_network_path;
use agscore::score::{Regularizer, ScoreLedger};
use agscore::search::{learn, SearchOptions};
use agscore::table::load_table_path;
use agscore::vset::VertexSet;

#[derive(Parser)]
#[command(name = "agscore", version, about = "Ancestral-graph structure learning from categorical data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Units {
    Nats,
    Bits,
}

impl Units {
    fn scale(self) -> f64 {
        match self {
            Units::Nats => 1.0,
            Units::Bits => 1.0 / std::f64::consts::LN_2,
        }
    }
    fn label(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegularizerArg {
    Fnml,
    Bic,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    M,
    MPrime,
    Ac,
}

#[derive(Args)]
struct SearchArgs {
    /// Exhaustive parent-subset search up to this neighborhood size.
    #[arg(long, default_value_t = 5)]
    max_parents: usize,
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
}

impl SearchArgs {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            max_parents: self.max_parents,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Learn an ancestral graph from a dataset.
    Learn {
        data: PathBuf,
        /// Starting graph (defaults to the pairwise skeleton).
        #[arg(long)]
        initial_graph: Option<PathBuf>,
        /// Where to write the learned graph (stdout when omitted).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Where to write the JSON run report.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum, default_value_t = Units::Nats)]
        units: Units,
    },
    /// Decomposition score of a graph on a dataset.
    Score {
        data: PathBuf,
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = RegularizerArg::Fnml)]
        regularizer: RegularizerArg,
        /// Cap on the size of scored subsets (defaults to all).
        #[arg(long)]
        max_subset: Option<usize>,
        /// Restrict subsets to links through at most two colliders.
        #[arg(long)]
        two_collider: bool,
        /// Print every contributing subset with sign and information.
        #[arg(long)]
        ledger: bool,
        /// Also score via the conditional-entropy identity (DAGs only).
        #[arg(long)]
        oracle_bn: bool,
        #[arg(long, value_enum, default_value_t = Units::Nats)]
        units: Units,
    },
    /// Markov-equivalence verdict for two graphs.
    Equiv {
        graph1: PathBuf,
        graph2: PathBuf,
    },
    /// Separation query between two vertices.
    Separation {
        graph: PathBuf,
        x: String,
        y: String,
        /// Conditioning set, comma-separated names.
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
        #[arg(long, value_enum, default_value_t = CriterionArg::M)]
        criterion: CriterionArg,
    },
    /// Sample a dataset from a network, optionally hiding variables.
    Simulate {
        network: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Fraction of variables to hide (seeded choice).
        #[arg(long)]
        hide_fraction: Option<f64>,
        /// Explicit variables to hide.
        #[arg(long, value_delimiter = ',')]
        hide: Vec<String>,
        /// Dataset destination (stdout when omitted).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Where to write the projected truth graph.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Latent projection of a directed graph onto observed vertices.
    Project {
        graph: PathBuf,
        /// Observed vertices (everything else is hidden).
        #[arg(long, value_delimiter = ',')]
        observe: Vec<String>,
        /// Hidden vertices (complement is observed).
        #[arg(long, value_delimiter = ',')]
        hide: Vec<String>,
        /// Also replace marks by the equivalence-class consensus.
        #[arg(long)]
        pag: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Sample, hide, learn and grade over a parameter grid.
    Benchmark {
        network: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.0")]
        hide_fractions: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        replicates: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Line-delimited results destination.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Resample rows with replacement from one base dataset.
        #[arg(long)]
        bootstrap: bool,
        /// Record wall-clock runtimes (breaks byte-identical reruns).
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
}

fn materialize_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> agscore::Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn resolve_names(g: &MixedGraph, names: &[String]) -> agscore::Result<VertexSet> {
    let mut out = VertexSet::empty();
    for name in names {
        match g.name_index(name) {
            Some(v) => out.insert(v),
            None => return Err(Error::contract(format!("unknown vertex '{name}'"))),
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> agscore::Result<()> {
    match cli.command {
        Command::Learn {
            data,
            initial_graph,
            output,
            report,
            seed,
            search,
            units,
        } => {
            let seed = materialize_seed(seed);
            println!("seed: {seed}");
            let table = load_table_path(&data)?;
            let initial = initial_graph.map(|p| load_graph_path(&p)).transpose()?;
            let result = learn(&table, initial.as_ref(), &search.options())?;
            let graph_text = graph_to_string(&result.graph);
            write_or_print(&output, &graph_text)?;
            println!("termination: {:?}", result.termination);
            println!(
                "score decrement: {:.6} {} over {} accepted moves",
                result.trajectory.last().unwrap() * units.scale(),
                units.label(),
                result.trajectory.len() - 1
            );
            for (x, y) in &result.removed_edges {
                println!("removed: {x} -- {y}");
            }
            for (x, y, why) in &result.repaired_edges {
                println!("repaired: removed {x} ~ {y} ({why})");
            }
            for v in &result.residual_violations {
                println!("residual: {v}");
            }
            if let Some(path) = report {
                let payload = serde_json::json!({
                    "seed": seed,
                    "termination": result.termination,
                    "trajectory": result.trajectory,
                    "removed_edges": result.removed_edges,
                    "repaired_edges": result.repaired_edges,
                    "residual_violations": result.residual_violations,
                    "edge_scores": result.edge_scores,
                    "graph": graph_text,
                });
                std::fs::write(path, serde_json::to_string_pretty(&payload).unwrap())?;
            }
            Ok(())
        }
        Command::Score {
            data,
            graph,
            regularizer,
            max_subset,
            two_collider,
            ledger,
            oracle_bn,
            units,
        } => {
            let table = load_table_path(&data)?;
            let g = load_graph_path(&graph)?;
            if g.names().len() != table.n_vars()
                || g.names().iter().any(|n| table.name_index(n).is_none())
            {
                return Err(Error::contract(
                    "graph vertices must match the dataset header",
                ));
            }
            // Align graph vertex order with the table's column order.
            let mut aligned = MixedGraph::new(table.names().to_vec())?;
            for (i, j, mi, mj) in g.edges() {
                aligned.add_edge(
                    table.name_index(g.name(i)).unwrap(),
                    table.name_index(g.name(j)).unwrap(),
                    mi,
                    mj,
                )?;
            }
            let reg = match regularizer {
                RegularizerArg::Fnml => Regularizer::None,
                RegularizerArg::Bic => Regularizer::Bic,
            };
            let cap = max_subset.unwrap_or(table.n_vars());
            // Asking for larger subsets deliberately raises the
            // inclusion-exclusion cap with them.
            let info_cap = cap.max(agscore::info::DEFAULT_SUBSET_CAP);
            let scorer = ScoreLedger::with_parts(
                agscore::info::InfoCache::with_cap(&table, info_cap),
                agscore::nml::ComplexityCache::new(),
            );
            let terms = scorer.global_score_terms(
                &aligned,
                reg,
                cap,
                two_collider.then_some(2),
            )?;
            let total: f64 = terms.iter().map(|t| t.signed_value).sum();
            println!(
                "score: {:.9} {} over {} ac-connected subsets",
                total * units.scale(),
                units.label(),
                terms.len()
            );
            if ledger {
                for t in &terms {
                    let names: Vec<&str> =
                        t.subset.iter().map(|v| aligned.name(v)).collect();
                    let sign = if t.subset.len() % 2 == 1 { '+' } else { '-' };
                    println!(
                        "  {sign} I({}) = {:.9}",
                        names.join(";"),
                        t.information * units.scale()
                    );
                }
            }
            if oracle_bn {
                let oracle = scorer.bn_conditional_entropy_score(&aligned)?;
                println!(
                    "conditional-entropy score: {:.9} {}",
                    oracle * units.scale(),
                    units.label()
                );
            }
            Ok(())
        }
        Command::Equiv { graph1, graph2 } => {
            let g1 = load_graph_path(&graph1)?;
            let g2 = load_graph_path(&graph2)?;
            let (only1, only2) = ac_family_difference(&g1, &g2)?;
            if only1.is_empty() && only2.is_empty() {
                println!("equivalent");
            } else {
                println!("not equivalent");
                for s in only1 {
                    let names: Vec<&str> = s.iter().map(|v| g1.name(v)).collect();
                    println!("  only in {}: {{{}}}", graph1.display(), names.join(","));
                }
                for s in only2 {
                    let names: Vec<&str> = s.iter().map(|v| g1.name(v)).collect();
                    println!("  only in {}: {{{}}}", graph2.display(), names.join(","));
                }
            }
            Ok(())
        }
        Command::Separation {
            graph,
            x,
            y,
            given,
            criterion,
        } => {
            let g = load_graph_path(&graph)?;
            let xi = g
                .name_index(&x)
                .ok_or_else(|| Error::contract(format!("unknown vertex '{x}'")))?;
            let yi = g
                .name_index(&y)
                .ok_or_else(|| Error::contract(format!("unknown vertex '{y}'")))?;
            let cond = resolve_names(&g, &given)?;
            let crit = match criterion {
                CriterionArg::M => Criterion::M,
                CriterionArg::MPrime => Criterion::MPrime,
                CriterionArg::Ac => Criterion::Ac,
            };
            let query = SeparationQuery::new(&g, xi, yi, cond, crit)?;
            match graph::connecting_witness(&g, &query) {
                None => println!("separated"),
                Some(path) => {
                    let names: Vec<&str> = path.iter().map(|&v| g.name(v)).collect();
                    println!("connected: {}", names.join(" ~ "));
                }
            }
            Ok(())
        }
        Command::Simulate {
            network,
            n,
            seed,
            hide_fraction,
            hide,
            output,
            truth,
        } => {
            let seed = materialize_seed(seed);
            println!("seed: {seed}");
            let net = load_network_path(&network)?;
            let hidden = if !hide.is_empty() {
                for name in &hide {
                    if net.name_index(name).is_none() {
                        return Err(Error::contract(format!("unknown variable '{name}'")));
                    }
                }
                hide
            } else if let Some(f) = hide_fraction {
                bench::choose_hidden(&net, f, seed)?
            } else {
                Vec::new()
            };
            println!("hidden: [{}]", hidden.join(","));
            let table = net.sample(n, seed)?;
            let table = table.hide(&hidden)?;
            let mut text = Vec::new();
            table.write(&mut text)?;
            write_or_print(&output, &String::from_utf8(text).unwrap())?;
            if let Some(path) = truth {
                let mut observed = VertexSet::full(net.n_vars());
                for name in &hidden {
                    observed.remove(net.name_index(name).unwrap());
                }
                let mag = latent_project(&net.to_dag(), observed)?;
                std::fs::write(&path, graph_to_string(&mag))?;
            }
            Ok(())
        }
        Command::Project {
            graph,
            observe,
            hide,
            pag,
            output,
        } => {
            let dag = load_graph_path(&graph)?;
            let observed = match (observe.is_empty(), hide.is_empty()) {
                (false, true) => resolve_names(&dag, &observe)?,
                (true, false) => {
                    VertexSet::full(dag.n_vertices()).difference(resolve_names(&dag, &hide)?)
                }
                (true, true) => VertexSet::full(dag.n_vertices()),
                (false, false) => {
                    return Err(Error::contract(
                        "pass either --observe or --hide, not both",
                    ))
                }
            };
            let mut mag = latent_project(&dag, observed)?;
            if pag {
                mag = pag_oracle(&mag)?;
            }
            write_or_print(&output, &graph_to_string(&mag))?;
            Ok(())
        }
        Command::Benchmark {
            network,
            n_list,
            hide_fractions,
            replicates,
            seed,
            output,
            bootstrap,
            timings,
            search,
        } => {
            if hide_fractions.iter().any(|&f| !(0.0..1.0).contains(&f)) {
                return Err(Error::contract(
                    "hide fractions must lie in [0, 1) so observed variables remain",
                ));
            }
            let seed = materialize_seed(seed);
            println!("seed: {seed}");
            let net = load_network_path(&network)?;
            let config = BenchmarkConfig {
                n_list,
                hide_fractions,
                replicates,
                seed,
                options: search.options(),
                bootstrap,
                timings,
            };
            let records = bench::run_benchmark(&net, &config)?;
            if let Some(path) = output {
                std::fs::write(&path, bench::records_to_string(&records))?;
            }
            for row in bench::summarize(&records) {
                let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3}"));
                println!(
                    "n={} hide={:.2}: precision {} +/- {}, recall {} +/- {} ({} replicates, {} failed)",
                    row.n,
                    row.hide_fraction,
                    fmt(row.mean_precision),
                    fmt(row.ci95_precision),
                    fmt(row.mean_recall),
                    fmt(row.ci95_recall),
                    row.replicates,
                    row.failures
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
