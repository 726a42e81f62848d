//! Plug-in estimation of multivariate entropies and informations.
//!
//! Everything is computed from empirical cell counts in natural-log
//! units. Multivariate information over a set is the alternating
//! inclusion-exclusion combination of subset entropies; conditional
//! variants reduce to differences of joint entropies. The alternating
//! sums re-read the same entropies exponentially often, so values are
//! memoized per canonical subset.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::table::CategoricalTable;
use crate::vset::VertexSet;

/// Default cap on the size of sets fed to inclusion-exclusion sums.
pub const DEFAULT_SUBSET_CAP: usize = 12;

/// Entropy cache over one immutable table.
///
/// Reads are concurrent; insertion takes the write lock briefly and is
/// idempotent, so results are identical to a single-threaded run.
pub struct InfoCache<'a> {
    table: &'a CategoricalTable,
    entropies: RwLock<HashMap<u64, f64>>,
    subset_cap: usize,
}

impl<'a> InfoCache<'a> {
    pub fn new(table: &'a CategoricalTable) -> Self {
        Self::with_cap(table, DEFAULT_SUBSET_CAP)
    }

    pub fn with_cap(table: &'a CategoricalTable, subset_cap: usize) -> Self {
        InfoCache {
            table,
            entropies: RwLock::new(HashMap::new()),
            subset_cap,
        }
    }

    pub fn table(&self) -> &CategoricalTable {
        self.table
    }

    pub fn subset_cap(&self) -> usize {
        self.subset_cap
    }

    /// Empirical joint entropy `H(S)` in nats. Contract error on the
    /// empty subset.
    ///
    /// ```
    /// use agscore::info::InfoCache;
    /// use agscore::table::load_table;
    /// use agscore::vset::VertexSet;
    ///
    /// let t = load_table(std::io::Cursor::new("A\n0\n0\n1\n1\n")).unwrap();
    /// let info = InfoCache::new(&t);
    /// let h = info.entropy(VertexSet::singleton(0)).unwrap();
    /// assert!((h - std::f64::consts::LN_2).abs() < 1e-12);
    /// ```
    pub fn entropy(&self, subset: VertexSet) -> Result<f64> {
        if subset.is_empty() {
            return Err(Error::contract("entropy of an empty subset"));
        }
        self.entropy_allow_empty(subset)
    }

    /// `H(S)` with `H({}) = 0`; internal building block.
    fn entropy_allow_empty(&self, subset: VertexSet) -> Result<f64> {
        if subset.is_empty() {
            return Ok(0.0);
        }
        if let Some(&h) = self.entropies.read().unwrap().get(&subset.bits()) {
            return Ok(h);
        }
        let counts = self.table.counts(subset)?;
        let n = counts.n_samples() as f64;
        // H = ln N - (1/N) sum n_j ln n_j; zero-count cells are absent.
        let mut sum = 0.0;
        let mut comp = 0.0;
        for n_j in counts.counts_iter() {
            let term = (n_j as f64) * (n_j as f64).ln();
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        let h = n.ln() - sum / n;
        // Clamp tiny negative drift from the subtraction.
        let h = if h < 0.0 && h > -1e-12 { 0.0 } else { h };
        self.entropies.write().unwrap().insert(subset.bits(), h);
        Ok(h)
    }

    /// Conditional entropy `H(S | Z) = H(S u Z) - H(Z)`.
    pub fn conditional_entropy(&self, subset: VertexSet, cond: VertexSet) -> Result<f64> {
        if subset.is_empty() {
            return Err(Error::contract("conditional entropy of an empty subset"));
        }
        if !subset.is_disjoint(cond) {
            return Err(Error::contract("subset and conditioning set overlap"));
        }
        Ok(self.entropy_allow_empty(subset.union(cond))? - self.entropy_allow_empty(cond)?)
    }

    /// Multivariate information `I(S)`: the alternating-sign sum of all
    /// nonempty sub-subset entropies. Sign-indefinite for |S| >= 3.
    pub fn multi_information(&self, subset: VertexSet) -> Result<f64> {
        self.conditional_multi_information(subset, VertexSet::empty())
    }

    /// Conditional multivariate information `I(S | Z)`, defined by the
    /// same alternating sum over conditional entropies.
    pub fn conditional_multi_information(
        &self,
        subset: VertexSet,
        cond: VertexSet,
    ) -> Result<f64> {
        if subset.is_empty() {
            return Err(Error::contract("information over an empty subset"));
        }
        if !subset.is_disjoint(cond) {
            return Err(Error::contract("subset and conditioning set overlap"));
        }
        if subset.len() > self.subset_cap {
            return Err(Error::resource(format!(
                "information over {} variables exceeds the cap of {}",
                subset.len(),
                self.subset_cap
            )));
        }
        let h_cond = self.entropy_allow_empty(cond)?;
        // Terms grouped by subset size: near-cancelling alternating
        // series behave better summed smallest-first with compensation.
        let mut terms: Vec<VertexSet> = subset.subsets().filter(|s| !s.is_empty()).collect();
        terms.sort_by(VertexSet::cmp_size_lex);
        let mut sum = 0.0;
        let mut comp = 0.0;
        for s in terms {
            let h = self.entropy_allow_empty(s.union(cond))? - h_cond;
            let signed = if s.len() % 2 == 1 { h } else { -h };
            let y = signed - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        Ok(sum)
    }

    /// Pairwise conditional information `I(X; Y | A)` via the
    /// four-entropy identity `H(X,A) + H(Y,A) - H(X,Y,A) - H(A)`.
    pub fn conditional_mi(&self, x: usize, y: usize, cond: VertexSet) -> Result<f64> {
        if x == y {
            return Err(Error::contract("conditional_mi needs two distinct variables"));
        }
        if cond.contains(x) || cond.contains(y) {
            return Err(Error::contract(
                "conditioning set overlaps the variable pair",
            ));
        }
        let xa = cond.with(x);
        let ya = cond.with(y);
        let xya = cond.with(x).with(y);
        Ok(self.entropy_allow_empty(xa)? + self.entropy_allow_empty(ya)?
            - self.entropy_allow_empty(xya)?
            - self.entropy_allow_empty(cond)?)
    }
}
