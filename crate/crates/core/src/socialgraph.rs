//! Fractal social topology: power-law degrees plus hub-repulsive linking.
//!
//! Nodes are ranked by the total order `(intended degree, node id)`. They are
//! processed from the highest rank down, and each node picks its quota of
//! distinct targets among strictly lower-ranked nodes, without replacement,
//! with probability proportional to `(target intended degree)^-ε`. A large `ε`
//! keeps hubs away from each other.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math::{compensated_sum, least_squares, pearson};
use crate::rng::{stream_rng, DEGREES, GRAPH};

/// `Σ_{k=1..kmax} k^-exponent`, summed in ascending `k`.
pub fn powerlaw_normalization(exponent: f64, kmax: usize) -> Result<f64> {
    if kmax == 0 {
        return Err(Error::InvalidParameter { name: "kmax", value: 0.0 });
    }
    if !(exponent > 1.0) {
        return Err(Error::InvalidParameter { name: "exponent", value: exponent });
    }
    Ok(compensated_sum((1..=kmax).map(|k| libm::pow(k as f64, -exponent))))
}

/// Truncated discrete power law `P(k) = k^-exponent / M` on `1..=kmax`.
#[derive(Debug, Clone)]
pub struct PowerLawDist {
    exponent: f64,
    kmax: usize,
    norm: f64,
    cdf: Vec<f64>,
}

impl PowerLawDist {
    pub fn new(exponent: f64, kmax: usize) -> Result<Self> {
        let norm = powerlaw_normalization(exponent, kmax)?;
        let mut cdf = Vec::with_capacity(kmax);
        let mut acc = 0.0;
        for k in 1..=kmax {
            acc += libm::pow(k as f64, -exponent) / norm;
            cdf.push(acc);
        }
        // Pin the top so inverse sampling never runs off the end.
        cdf[kmax - 1] = 1.0;
        Ok(PowerLawDist { exponent, kmax, norm, cdf })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn pmf(&self, k: usize) -> f64 {
        if k == 0 || k > self.kmax {
            0.0
        } else {
            libm::pow(k as f64, -self.exponent) / self.norm
        }
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cdf.partition_point(|&c| c <= u) + 1
    }
}

/// How the degree cutoff follows from the node count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KmaxRule {
    /// `⌊√n⌋`.
    #[default]
    Sqrt,
    /// `n - 1`.
    Full,
}

impl KmaxRule {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            KmaxRule::Sqrt => isqrt(n).max(1).min(n.saturating_sub(1).max(1)),
            KmaxRule::Full => n.saturating_sub(1).max(1),
        }
    }
}

fn isqrt(n: usize) -> usize {
    let mut r = libm::sqrt(n as f64) as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `n` independent inverse-CDF draws from the degree law.
pub fn sample_degrees(n: usize, gamma: f64, kmax: usize, seed: u64) -> Result<Vec<usize>> {
    if kmax >= n {
        return Err(Error::DegreeCutoff { kmax, n });
    }
    if !(gamma > 2.0) {
        return Err(Error::InvalidParameter { name: "gamma", value: gamma });
    }
    if gamma >= 3.0 {
        log::warn!("gamma = {gamma} lies outside the usual (2, 3) range");
    }
    let dist = PowerLawDist::new(gamma, kmax)?;
    let mut rng = stream_rng(seed, DEGREES, 0);
    Ok((0..n).map(|_| dist.sample(&mut rng)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationParams {
    /// Degree exponent, when the degrees were sampled by this crate.
    pub gamma: Option<f64>,
    pub epsilon: f64,
    pub kmax: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SocialGraph {
    pub graph: Graph,
    pub intended_degree: Vec<usize>,
    /// `(selector, target)` per created edge, in creation order.
    pub creation_log: Vec<(usize, usize)>,
    pub params: GenerationParams,
    /// Nodes whose quota exceeded their candidate pool.
    pub shortfall_nodes: usize,
    /// Total selections that could not be made.
    pub shortfall_total: usize,
}

impl SocialGraph {
    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Nodes sorted by ascending rank `(intended degree, id)`.
    pub fn rank_order(&self) -> Vec<usize> {
        rank_order(&self.intended_degree)
    }

    /// Position of each node in the rank order.
    pub fn ranks(&self) -> Vec<usize> {
        let order = self.rank_order();
        let mut rank = vec![0; order.len()];
        for (pos, &v) in order.iter().enumerate() {
            rank[v] = pos;
        }
        rank
    }
}

fn rank_order(degrees: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..degrees.len()).collect();
    order.sort_by_key(|&v| (degrees[v], v));
    order
}

/// Builds the social graph from intended degrees.
///
/// Every draw picks one remaining candidate with probability proportional to
/// its weight. Candidates sharing a degree share a weight, so a draw first
/// picks a degree class (scanning classes in ascending degree) and then a
/// uniform unpicked member of that class.
pub fn build_graph(degrees: &[usize], epsilon: f64, seed: u64) -> Result<SocialGraph> {
    if !(epsilon > 2.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter { name: "epsilon", value: epsilon });
    }
    if let Some(index) = degrees.iter().position(|&d| d == 0) {
        return Err(Error::InvalidParameter { name: "intended degree", value: index as f64 });
    }
    let n = degrees.len();
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let order = rank_order(degrees);

    // Nodes of degree d occupy order[class_start[d]..class_start[d + 1]].
    let mut class_start = vec![0usize; max_degree + 2];
    for &d in degrees {
        class_start[d + 1] += 1;
    }
    for d in 1..class_start.len() {
        class_start[d] += class_start[d - 1];
    }
    let class_weight: Vec<f64> = (0..=max_degree)
        .map(|d| if d == 0 { 0.0 } else { libm::pow(d as f64, -epsilon) })
        .collect();

    let mut rng = stream_rng(seed, GRAPH, 0);
    let mut available = vec![0usize; max_degree + 1];
    let mut picked_count = vec![0usize; max_degree + 1];
    // (class, offset within class), kept sorted.
    let mut picked: Vec<(usize, usize)> = Vec::new();
    let mut creation_log = Vec::new();
    let mut shortfall_nodes = 0;
    let mut shortfall_total = 0;

    for pos in (0..n).rev() {
        let selector = order[pos];
        let quota = degrees[selector];
        for d in 1..quota {
            available[d] = class_start[d + 1] - class_start[d];
        }
        available[quota] = pos - class_start[quota];
        let take = quota.min(pos);
        if take < quota {
            shortfall_nodes += 1;
            shortfall_total += quota - take;
        }
        picked.clear();
        for _ in 0..take {
            let total = compensated_sum(
                (1..=quota).map(|d| (available[d] - picked_count[d]) as f64 * class_weight[d]),
            );
            let target_mass = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut class = 0;
            for d in 1..=quota {
                let remaining = available[d] - picked_count[d];
                if remaining == 0 {
                    continue;
                }
                class = d;
                acc += remaining as f64 * class_weight[d];
                if target_mass < acc {
                    break;
                }
            }
            let remaining = available[class] - picked_count[class];
            let mut offset = rng.gen_range(0..remaining);
            let first = picked.partition_point(|&(c, _)| c < class);
            for &(c, o) in &picked[first..] {
                if c != class || o > offset {
                    break;
                }
                offset += 1;
            }
            let slot = picked.partition_point(|&p| p < (class, offset));
            picked.insert(slot, (class, offset));
            picked_count[class] += 1;
            creation_log.push((selector, order[class_start[class] + offset]));
        }
        for &(c, _) in &picked {
            picked_count[c] = 0;
        }
    }
    if shortfall_nodes > 0 {
        log::debug!("{shortfall_nodes} nodes could not fill their quota ({shortfall_total} selections short)");
    }
    let graph = Graph::from_edges(n, creation_log.iter().copied())?;
    Ok(SocialGraph {
        graph,
        intended_degree: degrees.to_vec(),
        creation_log,
        params: GenerationParams { gamma: None, epsilon, kmax: max_degree, seed },
        shortfall_nodes,
        shortfall_total,
    })
}

/// Samples degrees and builds the graph from one seed (separate streams).
pub fn generate(n: usize, gamma: f64, epsilon: f64, kmax: usize, seed: u64) -> Result<SocialGraph> {
    let degrees = sample_degrees(n, gamma, kmax, seed)?;
    let mut g = build_graph(&degrees, epsilon, seed)?;
    g.params.gamma = Some(gamma);
    g.params.kmax = kmax;
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeFit {
    pub gamma_hat: f64,
    pub r_squared: Option<f64>,
    pub bins: usize,
}

/// Fits `P(k) ∝ k^-γ` to a degree histogram (`hist[k]` = weight of degree `k`).
///
/// Degrees are grouped in octave bins `[2^i, 2^{i+1})`; each bin contributes
/// its per-degree density against the mean degree of its members.
pub fn fit_degree_histogram(hist: &[f64]) -> Result<DegreeFit> {
    let mut points = Vec::new();
    let mut distinct = 0;
    let mut lo = 1;
    while lo < hist.len() {
        let hi = (2 * lo).min(hist.len());
        let mass = compensated_sum(hist[lo..hi].iter().copied());
        if mass > 0.0 {
            let mean_k = compensated_sum((lo..hi).map(|k| k as f64 * hist[k])) / mass;
            let density = mass / (hi - lo) as f64;
            points.push((libm::log(mean_k), libm::log(density)));
        }
        lo = hi;
    }
    for &c in hist.iter().skip(1) {
        if c > 0.0 {
            distinct += 1;
        }
    }
    if distinct < 2 {
        return Err(Error::FitDegenerate("all degrees are equal"));
    }
    if points.len() < 3 {
        return Err(Error::TooFewPoints { got: points.len(), need: 3 });
    }
    let fit = least_squares(&points)?;
    Ok(DegreeFit { gamma_hat: -fit.slope, r_squared: fit.r_squared, bins: points.len() })
}

/// Log-binned power-law fit of the realized degree distribution.
pub fn realized_degree_fit(graph: &Graph) -> Result<DegreeFit> {
    let degrees = graph.degrees();
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mut hist = vec![0.0; max + 1];
    for d in degrees {
        hist[d] += 1.0;
    }
    fit_degree_histogram(&hist)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDegreeStats {
    /// Pearson correlation of endpoint degrees; `None` when undefined.
    pub assortativity: Option<f64>,
    /// Edge counts keyed by `(higher degree, lower degree)`.
    pub joint: BTreeMap<(usize, usize), usize>,
}

pub fn edge_degree_stats(graph: &Graph) -> Result<EdgeDegreeStats> {
    if graph.edge_count() == 0 {
        return Err(Error::FitDegenerate("graph has no edges"));
    }
    let mut pairs = Vec::with_capacity(2 * graph.edge_count());
    let mut joint = BTreeMap::new();
    for (u, v) in graph.edges() {
        let (du, dv) = (graph.degree(u), graph.degree(v));
        pairs.push((du as f64, dv as f64));
        pairs.push((dv as f64, du as f64));
        *joint.entry((du.max(dv), du.min(dv))).or_insert(0) += 1;
    }
    Ok(EdgeDegreeStats { assortativity: pearson(&pairs), joint })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    #[test]
    fn normalization_examples() {
        assert_eq!(powerlaw_normalization(3.7, 1).unwrap(), 1.0);
        let two = powerlaw_normalization(2.5, 2).unwrap();
        assert!((two - (1.0 + 2f64.powf(-2.5))).abs() < 1e-15);
        assert!((two - 1.17678).abs() < 1e-5);
        assert!(powerlaw_normalization(2.0, 0).is_err());
    }

    #[test]
    fn pmf_sums_to_one_and_decreases() {
        let d = PowerLawDist::new(2.3, 500).unwrap();
        let s: f64 = (1..=500).map(|k| d.pmf(k)).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!((1..500).all(|k| d.pmf(k) > d.pmf(k + 1)));
    }

    #[test]
    fn degenerate_cutoff_gives_unit_degrees() {
        let degs = sample_degrees(50, 2.5, 1, 3).unwrap();
        assert!(degs.iter().all(|&d| d == 1));
    }

    #[test]
    fn cutoff_must_be_below_n() {
        assert!(matches!(sample_degrees(10, 2.5, 10, 0), Err(Error::DegreeCutoff { .. })));
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_degrees(1000, 2.5, 30, 9).unwrap(), sample_degrees(1000, 2.5, 30, 9).unwrap());
        assert_ne!(sample_degrees(1000, 2.5, 30, 9).unwrap(), sample_degrees(1000, 2.5, 30, 10).unwrap());
    }

    #[test]
    fn kmax_rules() {
        assert_eq!(KmaxRule::Sqrt.resolve(10_000), 100);
        assert_eq!(KmaxRule::Sqrt.resolve(99), 9);
        assert_eq!(KmaxRule::Full.resolve(10), 9);
        assert_eq!(KmaxRule::Sqrt.resolve(2), 1);
    }

    #[test]
    fn tie_break_triangle() {
        // Ranks: node 1 < node 2 < node 0. Node 0 takes both lower nodes and
        // node 2 then links to node 1 through the (degree, id) tie-break.
        let g = build_graph(&[2, 1, 1], 3.0, 1).unwrap();
        let edges: Vec<_> = g.graph.edges().collect();
        assert_eq!(edges, [(0, 1), (0, 2), (1, 2)]);
        assert_eq!(g.creation_log.len(), 3);
    }

    #[test]
    fn unit_degrees_form_a_tree() {
        let g = build_graph(&[1; 40], 2.5, 5).unwrap();
        assert_eq!(g.graph.edge_count(), 39);
        assert_eq!(g.shortfall_nodes, 1);
        let labels = g.graph.components();
        assert!(labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn creation_rank_invariant() {
        let g = generate(3000, 2.5, 2.5, 54, 11).unwrap();
        let rank = g.ranks();
        for &(s, t) in &g.creation_log {
            assert!(rank[s] > rank[t]);
        }
        assert!(g.graph.is_simple());
        for v in 0..g.node_count() {
            let selected = g.creation_log.iter().filter(|e| e.0 == v).count();
            assert!(g.graph.degree(v) >= selected);
            assert!(selected <= g.intended_degree[v]);
        }
    }

    #[test]
    fn rejects_zero_degree_and_small_epsilon() {
        assert!(build_graph(&[1, 0, 2], 2.5, 0).is_err());
        assert!(build_graph(&[1, 1], 2.0, 0).is_err());
    }

    #[test]
    fn synthetic_histogram_fit() {
        let hist: Vec<f64> = (0..=1000).map(|k| if k == 0 { 0.0 } else { 1e9 * (k as f64).powf(-2.5) }).collect();
        let fit = fit_degree_histogram(&hist).unwrap();
        assert!((fit.gamma_hat - 2.5).abs() < 0.01, "{}", fit.gamma_hat);
        assert!(fit.r_squared.unwrap() > 0.9999);
    }

    #[test]
    fn single_degree_fit_fails() {
        let ring = Graph::cycle(2000);
        assert!(matches!(realized_degree_fit(&ring), Err(Error::FitDegenerate(_))));
    }

    #[test]
    fn path_assortativity_is_minus_one() {
        let s = edge_degree_stats(&Graph::path(3)).unwrap();
        assert!((s.assortativity.unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(s.joint.get(&(2, 1)), Some(&2));
    }

    #[test]
    fn ring_assortativity_is_undefined() {
        let s = edge_degree_stats(&Graph::cycle(10)).unwrap();
        assert_eq!(s.assortativity, None);
        assert!(edge_degree_stats(&Graph::empty(4)).is_err());
    }
}
