//! Categorical datasets: ingestion, level encoding and joint counts.

use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::vset::VertexSet;

/// An immutable table of `N` samples over `m` integer-coded categorical
/// variables. Codes for variable `k` are dense in `0..r_k` where `r_k`
/// is the number of *observed* levels; original labels are retained for
/// output.
#[derive(Debug, Clone)]
pub struct CategoricalTable {
    names: Vec<String>,
    /// Per-variable level labels, in first-appearance order.
    labels: Vec<Vec<String>>,
    /// Column-major codes: `codes[var][row]`.
    codes: Vec<Vec<u32>>,
    n_samples: usize,
}

impl CategoricalTable {
    /// Builds a table from raw string rows, encoding values to dense
    /// codes in first-appearance order.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<String>]) -> Result<Self> {
        let m = names.len();
        if m == 0 {
            return Err(Error::contract("table needs at least one variable"));
        }
        {
            let mut seen = HashMap::new();
            for (i, name) in names.iter().enumerate() {
                if let Some(prev) = seen.insert(name.clone(), i) {
                    return Err(Error::contract(format!(
                        "duplicate variable name '{}' (columns {} and {})",
                        name, prev, i
                    )));
                }
            }
        }
        if rows.is_empty() {
            return Err(Error::contract("table needs at least one sample"));
        }
        let mut labels: Vec<Vec<String>> = vec![Vec::new(); m];
        let mut index: Vec<HashMap<String, u32>> = vec![HashMap::new(); m];
        let mut codes: Vec<Vec<u32>> = vec![Vec::with_capacity(rows.len()); m];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::contract(format!(
                    "row {} has {} fields, expected {}",
                    r + 1,
                    row.len(),
                    m
                )));
            }
            for (k, value) in row.iter().enumerate() {
                if value.is_empty() {
                    return Err(Error::contract(format!(
                        "row {} has a missing value for '{}'",
                        r + 1,
                        names[k]
                    )));
                }
                let code = match index[k].get(value) {
                    Some(&c) => c,
                    None => {
                        let c = labels[k].len() as u32;
                        labels[k].push(value.clone());
                        index[k].insert(value.clone(), c);
                        c
                    }
                };
                codes[k].push(code);
            }
        }
        Ok(CategoricalTable {
            names,
            labels,
            codes,
            n_samples: rows.len(),
        })
    }

    /// Builds a table directly from coded columns; `labels[k]` supplies
    /// the printable level labels and fixes `r_k`.
    pub fn from_codes(
        names: Vec<String>,
        labels: Vec<Vec<String>>,
        codes: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let m = names.len();
        if m == 0 || labels.len() != m || codes.len() != m {
            return Err(Error::contract("names, labels and codes must align"));
        }
        let n = codes[0].len();
        if n == 0 {
            return Err(Error::contract("table needs at least one sample"));
        }
        for k in 0..m {
            if codes[k].len() != n {
                return Err(Error::contract("ragged code columns"));
            }
            let r = labels[k].len() as u32;
            if r == 0 {
                return Err(Error::contract(format!("variable '{}' has no levels", names[k])));
            }
            if codes[k].iter().any(|&c| c >= r) {
                return Err(Error::contract(format!(
                    "code out of range for variable '{}'",
                    names[k]
                )));
            }
        }
        Ok(CategoricalTable {
            names,
            labels,
            codes,
            n_samples: n,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Observed level count `r_k`.
    pub fn levels(&self, var: usize) -> u32 {
        self.labels[var].len() as u32
    }

    pub fn level_labels(&self, var: usize) -> &[String] {
        &self.labels[var]
    }

    pub fn code(&self, var: usize, row: usize) -> u32 {
        self.codes[var][row]
    }

    pub fn column(&self, var: usize) -> &[u32] {
        &self.codes[var]
    }

    /// Drops the named columns, keeping survivor order and codes intact.
    pub fn hide(&self, hidden: &[String]) -> Result<CategoricalTable> {
        let mut drop = vec![false; self.n_vars()];
        for name in hidden {
            match self.name_index(name) {
                Some(i) => drop[i] = true,
                None => {
                    return Err(Error::contract(format!("unknown variable '{name}'")));
                }
            }
        }
        let keep: Vec<usize> = (0..self.n_vars()).filter(|&i| !drop[i]).collect();
        if keep.is_empty() {
            return Err(Error::contract("hiding every variable leaves an empty table"));
        }
        Ok(CategoricalTable {
            names: keep.iter().map(|&i| self.names[i].clone()).collect(),
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            codes: keep.iter().map(|&i| self.codes[i].clone()).collect(),
            n_samples: self.n_samples,
        })
    }

    /// Exact joint occurrence counts over a nonempty variable subset.
    /// Configurations with zero count are omitted.
    pub fn counts(&self, subset: VertexSet) -> Result<CountVector> {
        if subset.is_empty() {
            return Err(Error::contract("counts over an empty subset"));
        }
        let vars = subset.to_vec();
        if let Some(&bad) = vars.iter().find(|&&v| v >= self.n_vars()) {
            return Err(Error::contract(format!("variable index {bad} out of range")));
        }
        // Mixed-radix packing; the last variable varies fastest.
        let mut strides = vec![1u64; vars.len()];
        let mut product: u64 = 1;
        for i in (0..vars.len()).rev() {
            strides[i] = product;
            product = product.checked_mul(self.levels(vars[i]) as u64).ok_or_else(|| {
                Error::resource("joint level product overflows u64")
            })?;
        }
        let mut cells: HashMap<u64, u64> = HashMap::new();
        let columns: Vec<&[u32]> = vars.iter().map(|&v| self.column(v)).collect();
        for row in 0..self.n_samples {
            let mut key = 0u64;
            for (i, col) in columns.iter().enumerate() {
                key += col[row] as u64 * strides[i];
            }
            *cells.entry(key).or_insert(0) += 1;
        }
        let mut cells: Vec<(u64, u64)> = cells.into_iter().collect();
        cells.sort_unstable_by_key(|&(k, _)| k);
        Ok(CountVector {
            vars,
            strides,
            cells,
            n_samples: self.n_samples as u64,
        })
    }

    /// Writes the dataset in the text format read by [`load_table`].
    pub fn write<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.names.join(","))?;
        for row in 0..self.n_samples {
            let mut line = String::new();
            for k in 0..self.n_vars() {
                if k > 0 {
                    line.push(',');
                }
                line.push_str(&self.labels[k][self.codes[k][row] as usize]);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Joint occurrence counts for an ordered variable subset. Each cell is
/// a packed level configuration with its count `n_j`; counts sum to `N`.
#[derive(Debug, Clone)]
pub struct CountVector {
    vars: Vec<usize>,
    strides: Vec<u64>,
    /// `(packed configuration, n_j)` sorted by configuration.
    cells: Vec<(u64, u64)>,
    n_samples: u64,
}

impl CountVector {
    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn cells(&self) -> &[(u64, u64)] {
        &self.cells
    }

    pub fn counts_iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.cells.iter().map(|&(_, n)| n)
    }

    /// Unpacks a cell key back into per-variable levels, aligned with
    /// [`CountVector::vars`].
    pub fn unpack(&self, key: u64) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.vars.len());
        let mut rest = key;
        for &s in &self.strides {
            out.push((rest / s) as u32);
            rest %= s;
        }
        out
    }
}

/// Reads the dataset file format: a header row of comma-separated names
/// followed by one sample per row. Values are arbitrary non-empty tokens
/// without embedded commas.
pub fn load_table<R: BufRead>(reader: R) -> Result<CategoricalTable> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(Error::parse(1, "empty input")),
    };
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if names.iter().any(|n| n.is_empty()) {
        return Err(Error::parse(1, "empty variable name in header"));
    }
    {
        let mut seen = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if seen.insert(n.clone(), i).is_some() {
                return Err(Error::parse(1, format!("duplicate variable name '{n}'")));
            }
        }
    }
    let m = names.len();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if fields.len() != m {
            return Err(Error::parse(
                line_no,
                format!("row has {} fields, expected {}", fields.len(), m),
            ));
        }
        if let Some(k) = fields.iter().position(|f| f.is_empty()) {
            return Err(Error::parse(
                line_no,
                format!("missing value for '{}'", names[k]),
            ));
        }
        rows.push(fields);
    }
    if rows.is_empty() {
        return Err(Error::parse(2, "no data rows"));
    }
    CategoricalTable::from_rows(names, &rows)
}

pub fn load_table_path(path: &std::path::Path) -> Result<CategoricalTable> {
    let file = std::fs::File::open(path)?;
    load_table(std::io::BufReader::new(file))
}

/// The four-row exclusive-or table used in several tests: C = A xor B.
#[cfg(test)]
pub(crate) fn xor_table() -> CategoricalTable {
    let rows: Vec<Vec<String>> = [
        ["0", "0", "0"],
        ["0", "1", "1"],
        ["1", "0", "1"],
        ["1", "1", "0"],
    ]
    .iter()
    .map(|r| r.iter().map(|s| s.to_string()).collect())
    .collect();
    CategoricalTable::from_rows(
        vec!["A".into(), "B".into(), "C".into()],
        &rows,
    )
    .unwrap()
}
