//! Multinomial parametric complexity for normalized maximum likelihood
//! regularization.
//!
//! `C(r, n)` normalizes the maximum likelihood over all datasets of `n`
//! points with `r` outcome levels. The binary case is an explicit
//! binomial sum, switched to the Szpankowski asymptotic above a
//! configurable threshold; higher `r` follows the linear ratio
//! recursion `D(r, n) = 1 + n / ((r - 2) * D(r - 1, n))`.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};

/// Memoized `log C(r, n)` values in nats.
///
/// Insertions are idempotent (a key always maps to the same value), so
/// concurrent fills are harmless.
pub struct ComplexityCache {
    exact_threshold: u64,
    values: RwLock<HashMap<(u32, u64), f64>>,
    ln_fact: RwLock<LnFactTable>,
}

impl Default for ComplexityCache {
    fn default() -> Self {
        Self::new()
    }
}

impl ComplexityCache {
    /// Default switch from the exact binomial sum to the Szpankowski
    /// approximation at n = 1000.
    pub fn new() -> Self {
        Self::with_threshold(1000)
    }

    pub fn with_threshold(exact_threshold: u64) -> Self {
        ComplexityCache {
            exact_threshold,
            values: RwLock::new(HashMap::new()),
            ln_fact: RwLock::new(LnFactTable::new()),
        }
    }

    /// `log C(r, n)` in nats. `C(1, n) = 1` for all n and `C(r, 0) = 1`
    /// for all r, so both return 0.
    pub fn log_complexity(&self, r: u32, n: u64) -> Result<f64> {
        if r < 1 {
            return Err(Error::contract("level count r must be >= 1"));
        }
        if r == 1 || n == 0 {
            return Ok(0.0);
        }
        if let Some(&v) = self.values.read().unwrap().get(&(r, n)) {
            return Ok(v);
        }
        let v = if r == 2 {
            self.log_c2(n)
        } else {
            // log C(r, n) = sum_{k=2..r} log D(k, n) with D(2, n) = C(2, n).
            let mut d = self.log_c2(n).exp();
            let mut log_c = d.ln();
            for k in 3..=r {
                d = 1.0 + n as f64 / ((k - 2) as f64 * d);
                log_c += d.ln();
            }
            log_c
        };
        self.values.write().unwrap().insert((r, n), v);
        Ok(v)
    }

    fn log_c2(&self, n: u64) -> f64 {
        if n > self.exact_threshold {
            log_c2_szpankowski(n)
        } else {
            self.log_c2_exact(n)
        }
    }

    /// Exact binomial sum: C(2, n) = sum_h binom(n, h) (h/n)^h ((n-h)/n)^(n-h),
    /// with 0^0 = 1. Every term is <= 1 and the total is O(sqrt(n)), so
    /// plain summation in linear space is safe.
    fn log_c2_exact(&self, n: u64) -> f64 {
        self.ln_fact.write().unwrap().grow_to(n as usize);
        let lf = self.ln_fact.read().unwrap();
        let nf = n as f64;
        let mut sum = 0.0;
        let mut comp = 0.0;
        for h in 0..=n {
            let hf = h as f64;
            let mut log_term = lf.get(n as usize) - lf.get(h as usize) - lf.get((n - h) as usize);
            if h > 0 {
                log_term += hf * (hf / nf).ln();
            }
            if h < n {
                log_term += (nf - hf) * ((nf - hf) / nf).ln();
            }
            let term = log_term.exp();
            // Kahan
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum.ln()
    }
}

/// Szpankowski asymptotic for the binary complexity:
/// C(2, n) ~ sqrt(n pi / 2) * exp(sqrt(8 / (9 n pi)) + (3 pi - 16) / (36 n pi)).
pub fn log_c2_szpankowski(n: u64) -> f64 {
    use std::f64::consts::PI;
    let nf = n as f64;
    0.5 * (nf * PI / 2.0).ln() + (8.0 / (9.0 * nf * PI)).sqrt() + (3.0 * PI - 16.0) / (36.0 * nf * PI)
}

/// Natural-log factorials built by compensated summation, grown on
/// demand. Absolute error stays near machine precision for the sizes
/// used here (n up to a few thousand).
struct LnFactTable {
    values: Vec<f64>,
    comp: f64,
}

impl LnFactTable {
    fn new() -> Self {
        LnFactTable {
            values: vec![0.0, 0.0],
            comp: 0.0,
        }
    }

    fn grow_to(&mut self, n: usize) {
        while self.values.len() <= n {
            let k = self.values.len() as f64;
            let last = *self.values.last().unwrap();
            let y = k.ln() - self.comp;
            let t = last + y;
            self.comp = (t - last) - y;
            self.values.push(t);
        }
    }

    fn get(&self, n: usize) -> f64 {
        self.values[n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct partition-sum definition, usable for tiny n only:
    /// sum over l_1 + ... + l_r = n of n!/(l_1! ... l_r!) prod (l_k/n)^l_k.
    fn partition_sum_oracle(r: u32, n: u64) -> f64 {
        fn fact(k: u64) -> f64 {
            (1..=k).map(|x| x as f64).product()
        }
        fn rec(r_left: u32, n_left: u64, n: u64, weight: f64, acc: &mut f64) {
            if r_left == 1 {
                let l = n_left;
                let mut w = weight / fact(l);
                if l > 0 {
                    w *= ((l as f64) / (n as f64)).powi(l as i32);
                }
                *acc += w;
                return;
            }
            for l in 0..=n_left {
                let mut w = weight / fact(l);
                if l > 0 {
                    w *= ((l as f64) / (n as f64)).powi(l as i32);
                }
                rec(r_left - 1, n_left - l, n, w, acc);
            }
        }
        let mut acc = 0.0;
        rec(r, n, n, fact(n), &mut acc);
        acc
    }

    #[test]
    fn trivial_cases_are_zero() {
        let c = ComplexityCache::new();
        assert_eq!(c.log_complexity(1, 50).unwrap(), 0.0);
        assert_eq!(c.log_complexity(4, 0).unwrap(), 0.0);
        assert!(c.log_complexity(0, 3).is_err());
    }

    #[test]
    fn binary_two_samples_is_ln_2_5() {
        let c = ComplexityCache::new();
        let v = c.log_complexity(2, 2).unwrap();
        assert!((v - 2.5f64.ln()).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn ternary_two_samples_is_ln_4_5() {
        let c = ComplexityCache::new();
        let v = c.log_complexity(3, 2).unwrap();
        assert!((v - 4.5f64.ln()).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn recursion_matches_partition_sum() {
        let c = ComplexityCache::new();
        for r in 2..=5 {
            for n in 1..=12 {
                let got = c.log_complexity(r, n).unwrap();
                let want = partition_sum_oracle(r, n).ln();
                assert!(
                    (got - want).abs() <= 1e-8 * want.abs().max(1.0),
                    "r={r} n={n}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn monotone_in_r_and_n() {
        let c = ComplexityCache::new();
        let mut prev = 0.0;
        for r in 1..=6 {
            let v = c.log_complexity(r, 64).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        let mut prev = 0.0;
        for n in [1, 2, 4, 16, 64, 256, 1024, 4096] {
            let v = c.log_complexity(3, n).unwrap();
            assert!(v >= prev, "n={n}");
            prev = v;
        }
    }

    #[test]
    fn szpankowski_close_to_exact() {
        // Force the exact path well past the default threshold.
        let exact = ComplexityCache::with_threshold(10_000);
        for n in [1000u64, 2000, 5000] {
            let e = exact.log_complexity(2, n).unwrap().exp();
            let a = log_c2_szpankowski(n).exp();
            let rel = (a - e).abs() / e;
            assert!(rel < 1e-3, "n={n}: rel={rel}");
        }
    }
}
