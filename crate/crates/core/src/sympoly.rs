//! Elementary symmetric polynomials in the log domain.
//!
//! `σ_{p,j}` is the sum over all `p`-subsets of the first `j` weights of the
//! product of their weights. Tables store `ln σ_{p,j}` and are filled with the
//! recurrence `σ_{p,j} = σ_{p,j-1} + w_j σ_{p-1,j-1}` using log-sum-exp, so
//! weights spanning hundreds of orders of magnitude stay finite.
//!
//! Indices in this module are 0-based: weight `k` is `weights[k]`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::log_add_exp;

const DOWNDATE_MIN_REMAINING: f64 = 1e-2;

/// Triangular table of `ln σ_{p,j}` for `0 <= p <= p_max`, `0 <= j <= N`.
#[derive(Debug, Clone)]
pub struct SymPolyTable {
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    p_max: usize,
    /// Row-major, `(p_max + 1) x (N + 1)`.
    logsigma: Vec<f64>,
}

fn validate_weights(weights: &[f64]) -> Result<Vec<f64>> {
    weights
        .iter()
        .enumerate()
        .map(|(index, &w)| {
            if w > 0.0 && w.is_finite() {
                Ok(libm::log(w))
            } else {
                Err(Error::NonPositiveWeight { index, value: w })
            }
        })
        .collect()
}

/// Builds the table of `ln σ_{p,j}` up to order `p_max`.
pub fn build_table(weights: &[f64], p_max: usize) -> Result<SymPolyTable> {
    let log_weights = validate_weights(weights)?;
    SymPolyTable::from_logs(weights.to_vec(), log_weights, p_max)
}

impl SymPolyTable {
    fn from_logs(weights: Vec<f64>, log_weights: Vec<f64>, p_max: usize) -> Result<Self> {
        let n = log_weights.len();
        if p_max > n {
            return Err(Error::OrderOutOfRange { order: p_max, len: n });
        }
        let cols = n + 1;
        let mut logsigma = vec![f64::NEG_INFINITY; (p_max + 1) * cols];
        for cell in logsigma.iter_mut().take(cols) {
            *cell = 0.0;
        }
        for p in 1..=p_max {
            let (prev_rows, rest) = logsigma.split_at_mut(p * cols);
            let prev = &prev_rows[(p - 1) * cols..];
            let row = &mut rest[..cols];
            for j in p..=n {
                row[j] = log_add_exp(row[j - 1], log_weights[j - 1] + prev[j - 1]);
            }
        }
        Ok(SymPolyTable { weights, log_weights, p_max, logsigma })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln σ_{p,j}` over the first `j` weights; `-inf` when `p > j`.
    pub fn log_sigma_at(&self, p: usize, j: usize) -> f64 {
        assert!(p <= self.p_max && j <= self.len(), "table index out of range");
        self.logsigma[p * (self.len() + 1) + j]
    }

    /// `ln σ_{p,N}` over all weights.
    pub fn log_sigma(&self, p: usize) -> f64 {
        self.log_sigma_at(p, self.len())
    }

    /// `σ_{p,N}` in the linear domain (may overflow to `inf` for extreme inputs).
    pub fn sigma(&self, p: usize) -> f64 {
        libm::exp(self.log_sigma(p))
    }

    /// `ln σ^k̄_{p,N-1}`: the order-`p` polynomial over every weight except
    /// `k`, recomputed from scratch without that weight.
    pub fn excluded_log_sigma(&self, k: usize, p: usize) -> Result<f64> {
        let n = self.len();
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, len: n });
        }
        if p > n - 1 {
            return Err(Error::OrderOutOfRange { order: p, len: n - 1 });
        }
        let mut weights = self.weights.clone();
        let mut logs = self.log_weights.clone();
        weights.remove(k);
        logs.remove(k);
        let reduced = SymPolyTable::from_logs(weights, logs, p)?;
        Ok(reduced.log_sigma(p))
    }

    /// Fast path for `ln σ^k̄_{p,N-1}` by unrolling
    /// `σ^k̄_{p} = σ_{p,N} - w_k σ^k̄_{p-1}` from `σ^k̄_0 = 1`.
    ///
    /// Each step is a subtraction, so the result is returned only while the
    /// cancellation stays mild at every step; otherwise `None` and
    /// callers should fall back to [`SymPolyTable::excluded_log_sigma`].
    pub fn excluded_log_sigma_downdate(&self, k: usize, p: usize) -> Option<f64> {
        let n = self.len();
        if k >= n || p > n - 1 || p > self.p_max {
            return None;
        }
        let lw = self.log_weights[k];
        let mut current = 0.0;
        for order in 1..=p {
            let a = self.log_sigma(order);
            let delta = lw + current - a;
            if !(delta < 0.0) {
                return None;
            }
            // 1 - e^delta; relative error is amplified by e^delta / (1 - e^delta).
            let remaining = -libm::expm1(delta);
            if remaining < DOWNDATE_MIN_REMAINING {
                return None;
            }
            current = a + libm::log(remaining);
        }
        Some(current)
    }

    pub fn excluded_sigma(&self, k: usize, p: usize) -> Result<f64> {
        self.excluded_log_sigma(k, p).map(libm::exp)
    }
}

/// `σ^k̄_{p,N-1}` for weight `k` (0-based), computed by rebuilding without it.
pub fn excluded_sigma(table: &SymPolyTable, k: usize, p: usize) -> Result<f64> {
    table.excluded_sigma(k, p)
}

fn check_selection(weights: &[f64], q: usize) -> Result<Vec<f64>> {
    let logs = validate_weights(weights)?;
    if q == 0 || q > weights.len() {
        return Err(Error::OrderOutOfRange { order: q, len: weights.len() });
    }
    Ok(logs)
}

/// Probability that candidate `k` is among `q` contacts drawn with
/// probability proportional to the product of their weights:
/// `w_k σ^k̄_{q-1,N-1} / σ_{q,N}`.
pub fn contact_probability(weights: &[f64], q: usize, k: usize) -> Result<f64> {
    let logs = check_selection(weights, q)?;
    if k >= weights.len() {
        return Err(Error::IndexOutOfRange { index: k, len: weights.len() });
    }
    let table = SymPolyTable::from_logs(weights.to_vec(), logs, q)?;
    let excluded = table.excluded_log_sigma(k, q - 1)?;
    Ok(libm::exp(table.log_weights[k] + excluded - table.log_sigma(q)))
}

/// All contact probabilities at once.
///
/// `σ^k̄_{p}` is the convolution of the prefix table (weights before `k`) and
/// the suffix table (weights after `k`); everything stays additive, so no
/// cancellation occurs. Cost is `O(N q^2)`.
pub fn contact_probabilities(weights: &[f64], q: usize) -> Result<Vec<f64>> {
    let logs = check_selection(weights, q)?;
    let n = weights.len();
    let top = q - 1;
    let rows = top + 1;
    // prefix[j][p] = ln σ_p over weights[..j]; suffix[j][p] over weights[j..].
    let mut prefix = vec![f64::NEG_INFINITY; (n + 1) * rows];
    let mut suffix = vec![f64::NEG_INFINITY; (n + 1) * rows];
    prefix[0] = 0.0;
    for j in 1..=n {
        let (done, cur) = prefix.split_at_mut(j * rows);
        let prev = &done[(j - 1) * rows..];
        let cur = &mut cur[..rows];
        cur[0] = 0.0;
        for p in 1..rows {
            cur[p] = log_add_exp(prev[p], logs[j - 1] + prev[p - 1]);
        }
    }
    suffix[n * rows] = 0.0;
    for j in (0..n).rev() {
        let (head, tail) = suffix.split_at_mut((j + 1) * rows);
        let next = &tail[..rows];
        let cur = &mut head[j * rows..];
        cur[0] = 0.0;
        for p in 1..rows {
            cur[p] = log_add_exp(next[p], logs[j] + next[p - 1]);
        }
    }
    let full = SymPolyTable::from_logs(weights.to_vec(), logs.clone(), q)?;
    let log_total = full.log_sigma(q);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let pre = &prefix[k * rows..(k + 1) * rows];
        let suf = &suffix[(k + 1) * rows..(k + 2) * rows];
        let mut acc = f64::NEG_INFINITY;
        for i in 0..=top {
            acc = log_add_exp(acc, pre[i] + suf[top - i]);
        }
        out.push(libm::exp(logs[k] + acc - log_total));
    }
    Ok(out)
}

/// `σ_{1,N} σ_{q,N} / ((q+1) σ_{q+1,N})`; equals `N/(N-q)` for equal weights.
pub fn lemma1_ratio(weights: &[f64], q: usize) -> Result<f64> {
    let logs = validate_weights(weights)?;
    let n = weights.len();
    if n < 2 {
        return Err(Error::TooFewPoints { got: n, need: 2 });
    }
    if q == 0 || q >= n {
        return Err(Error::OrderOutOfRange { order: q, len: n - 1 });
    }
    let table = SymPolyTable::from_logs(weights.to_vec(), logs, q + 1)?;
    let log_ratio = table.log_sigma(1) + table.log_sigma(q)
        - libm::log((q + 1) as f64)
        - table.log_sigma(q + 1);
    Ok(libm::exp(log_ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    /// Direct subset enumeration (independent of the recurrence).
    fn enumerate_sigma(weights: &[f64], p: usize, skip: Option<usize>) -> f64 {
        let n = weights.len();
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != p {
                continue;
            }
            if let Some(s) = skip {
                if mask & (1 << s) != 0 {
                    continue;
                }
            }
            let mut prod = 1.0;
            for (i, w) in weights.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    prod *= w;
                }
            }
            total += prod;
        }
        total
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn first_order_is_sum() {
        let t = build_table(&[0.5, 1.25, 2.0], 1).unwrap();
        assert!(rel(t.sigma(1), 3.75) < 1e-15);
    }

    #[test]
    fn second_order_of_one_two_three() {
        let t = build_table(&[1.0, 2.0, 3.0], 2).unwrap();
        assert!(rel(t.sigma(2), 11.0) < 1e-14);
    }

    #[test]
    fn equal_weights_give_binomials() {
        let t = build_table(&[1.0; 10], 4).unwrap();
        assert!(rel(t.sigma(4), 210.0) < 1e-13);
    }

    #[test]
    fn table_invariants() {
        let w = [0.3, 1.7, 2.2, 0.9, 4.1];
        let t = build_table(&w, 5).unwrap();
        for j in 0..=5 {
            assert_eq!(t.log_sigma_at(0, j), 0.0);
        }
        for p in 1..=5 {
            for j in 0..=5 {
                let v = t.log_sigma_at(p, j);
                if p > j {
                    assert_eq!(v, f64::NEG_INFINITY);
                } else {
                    assert!(v.is_finite());
                    let lhs = v.exp();
                    let rhs = t.log_sigma_at(p, j - 1).exp() + w[j - 1] * t.log_sigma_at(p - 1, j - 1).exp();
                    assert!(rel(lhs, rhs) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn excluded_examples() {
        let t = build_table(&[1.0, 2.0, 3.0], 3).unwrap();
        assert!(rel(excluded_sigma(&t, 2, 1).unwrap(), 3.0) < 1e-15);
        assert!(rel(excluded_sigma(&t, 1, 2).unwrap(), 3.0) < 1e-15);
        let t = build_table(&[4.0, 1.0, 1.0], 3).unwrap();
        assert!(rel(excluded_sigma(&t, 0, 1).unwrap(), 2.0) < 1e-15);
    }

    #[test]
    fn excluded_errors() {
        let t = build_table(&[1.0, 2.0, 3.0], 3).unwrap();
        assert!(matches!(excluded_sigma(&t, 3, 1), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(excluded_sigma(&t, 0, 3), Err(Error::OrderOutOfRange { .. })));
    }

    #[test]
    fn contact_probability_examples() {
        for k in 0..3 {
            assert!(rel(contact_probability(&[1.0; 3], 2, k).unwrap(), 2.0 / 3.0) < 1e-14);
        }
        let w = [4.0, 1.0, 1.0];
        assert!(rel(contact_probability(&w, 2, 0).unwrap(), 8.0 / 9.0) < 1e-14);
        assert!(rel(contact_probability(&w, 2, 1).unwrap(), 5.0 / 9.0) < 1e-14);
        assert!(rel(contact_probability(&[0.37], 1, 0).unwrap(), 1.0) < 1e-15);
        assert!(matches!(contact_probability(&w, 4, 0), Err(Error::OrderOutOfRange { .. })));
    }

    #[test]
    fn build_errors() {
        assert!(matches!(build_table(&[1.0, 0.0], 1), Err(Error::NonPositiveWeight { index: 1, .. })));
        assert!(matches!(build_table(&[1.0, -2.0], 1), Err(Error::NonPositiveWeight { .. })));
        assert!(matches!(build_table(&[1.0, 2.0], 3), Err(Error::OrderOutOfRange { .. })));
    }

    #[test]
    fn lemma1_examples() {
        let r = lemma1_ratio(&[1.0; 10], 3).unwrap();
        assert!(rel(r, 10.0 / 7.0) < 1e-13);
        assert!(rel(lemma1_ratio(&[1.0; 2], 1).unwrap(), 2.0) < 1e-14);
        let w = [1.0, 2.0, 3.0, 4.0];
        let expected = enumerate_sigma(&w, 1, None) * enumerate_sigma(&w, 2, None) / (3.0 * enumerate_sigma(&w, 3, None));
        assert!(rel(lemma1_ratio(&w, 2).unwrap(), expected) < 1e-12);
        assert!(matches!(lemma1_ratio(&w, 4), Err(Error::OrderOutOfRange { .. })));
    }

    #[test]
    fn downdate_agrees_with_rebuild_when_well_conditioned() {
        let w = [0.2, 0.5, 0.1, 0.3, 0.25, 0.15];
        let t = build_table(&w, 6).unwrap();
        for k in 0..w.len() {
            for p in 0..=3 {
                let reference = t.excluded_log_sigma(k, p).unwrap();
                if let Some(fast) = t.excluded_log_sigma_downdate(k, p) {
                    assert!(rel(fast.exp(), reference.exp()) < 1e-10, "k={k} p={p}");
                }
            }
        }
    }

    #[test]
    fn sandwich_bounds() {
        let w = [0.9, 0.2, 1.4, 0.7, 0.33, 2.5, 0.05];
        let t = build_table(&w, 7).unwrap();
        for k in 0..w.len() {
            // q = 2 is the equality case: σ^k̄_1 = σ_1 - w_k.
            let exact = t.sigma(1) - w[k];
            assert!(rel(t.excluded_sigma(k, 1).unwrap(), exact) < 1e-12);
            for q in 3..w.len() {
                let upper = t.sigma(q - 1);
                let lower = upper - w[k] * t.sigma(q - 2);
                let mid = t.excluded_sigma(k, q - 1).unwrap();
                assert!(lower < mid && mid < upper, "k={k} q={q}");
            }
        }
    }

    #[test]
    fn extreme_weights_stay_finite() {
        let w: Vec<f64> = (0..40).map(|i| 10f64.powf(-150.0 + 300.0 * i as f64 / 39.0)).collect();
        let t = build_table(&w, 20).unwrap();
        for p in 0..=20 {
            assert!(t.log_sigma(p).is_finite());
        }
        let probs = contact_probabilities(&w, 5).unwrap();
        let total: f64 = probs.iter().sum();
        assert!(rel(total, 5.0) < 1e-9);
        assert!(probs.iter().all(|p| p.is_finite() && *p >= 0.0 && *p <= 1.0 + 1e-12));
    }

    #[test]
    fn matches_enumeration_oracle() {
        let w = [0.7, 1.9, 0.25, 3.3, 1.0, 0.61, 2.4, 0.12];
        let t = build_table(&w, w.len()).unwrap();
        for p in 0..=w.len() {
            assert!(rel(t.sigma(p), enumerate_sigma(&w, p, None)) < 1e-12);
        }
        for k in 0..w.len() {
            for p in 0..w.len() {
                let e = enumerate_sigma(&w, p, Some(k));
                assert!(rel(t.excluded_sigma(k, p).unwrap(), e) < 1e-12);
            }
        }
        let fast = contact_probabilities(&w, 3).unwrap();
        for k in 0..w.len() {
            let slow = contact_probability(&w, 3, k).unwrap();
            assert!(rel(fast[k], slow) < 1e-12);
        }
    }
}
