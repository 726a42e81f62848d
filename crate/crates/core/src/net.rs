//! Discrete Bayesian networks: a small text format, forward sampling,
//! and exact joint distributions for test oracles.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::MixedGraph;
use crate::table::CategoricalTable;

/// A discrete Bayesian network with conditional probability tables.
///
/// CPT rows are stored per parent configuration in row-major parent
/// order (the last listed parent varies fastest); each row holds one
/// probability per level of the variable and sums to one.
#[derive(Debug, Clone)]
pub struct DiscreteNetwork {
    names: Vec<String>,
    levels: Vec<Vec<String>>,
    parents: Vec<Vec<usize>>,
    /// `cpts[v][config * r_v + level]`
    cpts: Vec<Vec<f64>>,
    topo: Vec<usize>,
}

impl DiscreteNetwork {
    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn levels(&self, v: usize) -> usize {
        self.levels[v].len()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    /// The parent structure as a directed graph.
    pub fn to_dag(&self) -> MixedGraph {
        let mut g = MixedGraph::new(self.names.clone()).expect("validated at parse");
        for (child, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                g.add_directed(p, child).expect("validated at parse");
            }
        }
        g
    }

    fn parent_config(&self, v: usize, values: &[usize]) -> usize {
        let mut idx = 0usize;
        for &p in &self.parents[v] {
            idx = idx * self.levels(p) + values[p];
        }
        idx
    }

    /// Forward sampling in topological order with a seeded generator.
    /// Column order matches declaration order; level codes are the
    /// declared level indices of the network.
    pub fn sample(&self, n: usize, seed: u64) -> Result<CategoricalTable> {
        if n == 0 {
            return Err(Error::contract("sample size must be positive"));
        }
        let m = self.n_vars();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut codes: Vec<Vec<u32>> = vec![Vec::with_capacity(n); m];
        let mut values = vec![0usize; m];
        for _ in 0..n {
            for &v in &self.topo {
                let r = self.levels(v);
                let row = self.parent_config(v, &values) * r;
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut picked = r - 1;
                for level in 0..r {
                    acc += self.cpts[v][row + level];
                    if u < acc {
                        picked = level;
                        break;
                    }
                }
                values[v] = picked;
            }
            for v in 0..m {
                codes[v].push(values[v] as u32);
            }
        }
        // Re-encode to observed levels in first-appearance order, the
        // same convention the file loader uses.
        let mut labels = Vec::with_capacity(m);
        for v in 0..m {
            let mut remap: Vec<Option<u32>> = vec![None; self.levels(v)];
            let mut observed: Vec<String> = Vec::new();
            for code in codes[v].iter_mut() {
                let dense = match remap[*code as usize] {
                    Some(d) => d,
                    None => {
                        let d = observed.len() as u32;
                        observed.push(self.levels[v][*code as usize].clone());
                        remap[*code as usize] = Some(d);
                        d
                    }
                };
                *code = dense;
            }
            labels.push(observed);
        }
        CategoricalTable::from_codes(self.names.clone(), labels, codes)
    }

    /// Exact joint probability of a full assignment; test oracle for
    /// small networks.
    pub fn joint_probability(&self, values: &[usize]) -> f64 {
        let mut p = 1.0;
        for v in 0..self.n_vars() {
            let r = self.levels(v);
            p *= self.cpts[v][self.parent_config(v, values) * r + values[v]];
        }
        p
    }

    /// Iterates every full assignment with its probability.
    pub fn enumerate_joint(&self) -> Vec<(Vec<usize>, f64)> {
        let m = self.n_vars();
        let mut out = Vec::new();
        let mut values = vec![0usize; m];
        loop {
            out.push((values.clone(), self.joint_probability(&values)));
            let mut pos = m;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                values[pos] += 1;
                if values[pos] < self.levels(pos) {
                    break;
                }
                values[pos] = 0;
            }
        }
    }
}

/// Parses the network text format:
///
/// ```text
/// var A: yes,no
/// var B: low,mid,high
/// cpt A: 0.3 0.7
/// cpt B | A: 0.5 0.3 0.2 ; 0.1 0.4 0.5
/// ```
///
/// One `cpt` row per parent configuration, row-major in the listed
/// parent order. `#` starts a comment.
pub fn parse_network(text: &str) -> Result<DiscreteNetwork> {
    let mut names: Vec<String> = Vec::new();
    let mut levels: Vec<Vec<String>> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    struct PendingCpt {
        line: usize,
        child: usize,
        parents: Vec<usize>,
        rows: Vec<Vec<f64>>,
    }
    let mut pending: Vec<PendingCpt> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("var ") {
            let (name, lv) = rest
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, "expected 'var NAME: l1,l2,...'"))?;
            let name = name.trim().to_string();
            if name.is_empty() {
                return Err(Error::parse(line_no, "empty variable name"));
            }
            if index.contains_key(&name) {
                return Err(Error::parse(line_no, format!("duplicate variable '{name}'")));
            }
            let lv: Vec<String> = lv
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if lv.is_empty() {
                return Err(Error::parse(line_no, "variable needs at least one level"));
            }
            index.insert(name.clone(), names.len());
            names.push(name);
            levels.push(lv);
        } else if let Some(rest) = line.strip_prefix("cpt ") {
            let (head, body) = rest
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, "expected 'cpt NAME [| PARENTS]: rows'"))?;
            let (child_name, parent_names) = match head.split_once('|') {
                Some((c, ps)) => (c.trim(), Some(ps)),
                None => (head.trim(), None),
            };
            let child = *index
                .get(child_name)
                .ok_or_else(|| Error::parse(line_no, format!("undeclared variable '{child_name}'")))?;
            let parents: Vec<usize> = match parent_names {
                None => Vec::new(),
                Some(ps) => ps
                    .split(',')
                    .map(|s| s.trim())
                    .filter(|s| !s.is_empty())
                    .map(|p| {
                        index
                            .get(p)
                            .copied()
                            .ok_or_else(|| Error::parse(line_no, format!("undeclared parent '{p}'")))
                    })
                    .collect::<Result<_>>()?,
            };
            let rows: Vec<Vec<f64>> = body
                .split(';')
                .map(|row| {
                    row.split_whitespace()
                        .map(|tok| {
                            tok.parse::<f64>().map_err(|_| {
                                Error::parse(line_no, format!("bad probability '{tok}'"))
                            })
                        })
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<_>>()?;
            pending.push(PendingCpt {
                line: line_no,
                child,
                parents,
                rows,
            });
        } else {
            return Err(Error::parse(line_no, format!("unrecognized line '{line}'")));
        }
    }

    if names.is_empty() {
        return Err(Error::parse(1, "no variables declared"));
    }
    let m = names.len();
    let mut parents: Vec<Option<Vec<usize>>> = vec![None; m];
    let mut cpts: Vec<Option<Vec<f64>>> = vec![None; m];
    for p in pending {
        let r = levels[p.child].len();
        let expected_rows: usize = p.parents.iter().map(|&q| levels[q].len()).product();
        if p.rows.len() != expected_rows {
            return Err(Error::parse(
                p.line,
                format!(
                    "cpt for '{}' has {} rows, expected {}",
                    names[p.child],
                    p.rows.len(),
                    expected_rows
                ),
            ));
        }
        let mut flat = Vec::with_capacity(expected_rows * r);
        for (row_idx, row) in p.rows.iter().enumerate() {
            if row.len() != r {
                return Err(Error::parse(
                    p.line,
                    format!(
                        "cpt row {} for '{}' has {} entries, expected {}",
                        row_idx + 1,
                        names[p.child],
                        row.len(),
                        r
                    ),
                ));
            }
            if row.iter().any(|&x| x < 0.0) {
                return Err(Error::parse(
                    p.line,
                    format!("negative probability in row {} for '{}'", row_idx + 1, names[p.child]),
                ));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::parse(
                    p.line,
                    format!(
                        "cpt row {} for '{}' sums to {sum}, expected 1",
                        row_idx + 1,
                        names[p.child]
                    ),
                ));
            }
            // Normalize away sub-1e-6 drift so downstream sums are exact.
            flat.extend(row.iter().map(|&x| x / sum));
        }
        if parents[p.child].is_some() {
            return Err(Error::parse(
                p.line,
                format!("duplicate cpt for '{}'", names[p.child]),
            ));
        }
        parents[p.child] = Some(p.parents);
        cpts[p.child] = Some(flat);
    }
    for v in 0..m {
        if parents[v].is_none() {
            return Err(Error::parse(1, format!("missing cpt for '{}'", names[v])));
        }
    }
    let parents: Vec<Vec<usize>> = parents.into_iter().map(Option::unwrap).collect();
    let cpts: Vec<Vec<f64>> = cpts.into_iter().map(Option::unwrap).collect();

    // Topological order; a leftover vertex means a parent cycle.
    let mut indeg: Vec<usize> = parents.iter().map(|p| p.len()).collect();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (child, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(child);
        }
    }
    let mut topo: Vec<usize> = Vec::with_capacity(m);
    let mut ready: Vec<usize> = (0..m).filter(|&v| indeg[v] == 0).collect();
    ready.sort_unstable();
    while let Some(v) = ready.pop() {
        topo.push(v);
        for &c in &children[v] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.push(c);
            }
        }
    }
    if topo.len() != m {
        return Err(Error::parse(1, "parent structure contains a cycle"));
    }

    Ok(DiscreteNetwork {
        names,
        levels,
        parents,
        cpts,
        topo,
    })
}

pub fn load_network_path(path: &std::path::Path) -> Result<DiscreteNetwork> {
    let text = std::fs::read_to_string(path)?;
    parse_network(&text)
}
