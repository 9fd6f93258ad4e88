//! Brute-force references for the elementary symmetric polynomial results.

/// `σ_p` of `w` by direct enumeration of all `p`-subsets.
pub fn sigma(w: &[f64], p: usize) -> f64 {
    subsets(w.len(), p).map(|m| product(w, m)).sum()
}

/// Probability that `k` belongs to a `q`-subset drawn with probability
/// proportional to the product of its weights.
pub fn contact_probability(w: &[f64], q: usize, k: usize) -> f64 {
    let with_k: f64 = subsets(w.len(), q).filter(|m| m & (1 << k) != 0).map(|m| product(w, m)).sum();
    with_k / sigma(w, q)
}

pub fn lemma1_ratio(w: &[f64], q: usize) -> f64 {
    sigma(w, 1) * sigma(w, q) / ((q + 1) as f64 * sigma(w, q + 1))
}

fn subsets(n: usize, p: usize) -> impl Iterator<Item = u32> {
    (0u32..1 << n).filter(move |m| m.count_ones() as usize == p)
}

fn product(w: &[f64], mask: u32) -> f64 {
    w.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, x)| x).product()
}
