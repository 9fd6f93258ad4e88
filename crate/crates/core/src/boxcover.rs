//! Box covering, renormalization and fractal exponent estimation.
//!
//! A box is a node set whose pairwise shortest-path distances, measured in
//! the original graph, stay within the box size. With the default
//! [`BoxConvention::Inclusive`] a box of size `l_B` allows distance `<= l_B`;
//! [`BoxConvention::Strict`] allows `< l_B`.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::{Graph, UNREACHED};
use crate::math::{compensated_sum, least_squares};
use crate::rng::{stream_rng, COVER};

/// Largest node count accepted by [`cover_exact`].
pub const EXACT_COVER_LIMIT: usize = 16;

/// Minimum R² for a fit to contribute to the derived exponents.
pub const DERIVED_EXPONENT_MIN_R2: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoxConvention {
    /// Intra-box distances `<= l_B`.
    #[default]
    Inclusive,
    /// Intra-box distances `< l_B`.
    Strict,
}

impl BoxConvention {
    /// Largest intra-box distance allowed for box size `l_b`.
    pub fn max_distance(self, l_b: usize) -> u32 {
        match self {
            BoxConvention::Inclusive => l_b as u32,
            BoxConvention::Strict => l_b.saturating_sub(1) as u32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxCovering {
    pub size: usize,
    pub convention: BoxConvention,
    assignment: Vec<usize>,
    boxes: Vec<Vec<usize>>,
}

impl BoxCovering {
    /// Builds a covering from a per-node box assignment. Box ids are
    /// renumbered by first appearance so that every box is nonempty.
    pub fn from_assignment(size: usize, convention: BoxConvention, assignment: &[usize]) -> Self {
        let mut remap = vec![usize::MAX; assignment.iter().copied().max().map_or(0, |m| m + 1)];
        let mut boxes: Vec<Vec<usize>> = Vec::new();
        let mut out = Vec::with_capacity(assignment.len());
        for (v, &b) in assignment.iter().enumerate() {
            if remap[b] == usize::MAX {
                remap[b] = boxes.len();
                boxes.push(Vec::new());
            }
            boxes[remap[b]].push(v);
            out.push(remap[b]);
        }
        BoxCovering { size, convention, assignment: out, boxes }
    }

    /// `N_B`.
    pub fn box_count(&self) -> usize {
        self.boxes.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn box_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn boxes(&self) -> &[Vec<usize>] {
        &self.boxes
    }

    /// Checks the partition property and the intra-box distance bound.
    pub fn is_valid_for(&self, graph: &Graph) -> bool {
        let n = graph.node_count();
        if self.assignment.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for (b, members) in self.boxes.iter().enumerate() {
            if members.is_empty() {
                return false;
            }
            for &v in members {
                if seen[v] || self.assignment[v] != b {
                    return false;
                }
                seen[v] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return false;
        }
        let limit = self.convention.max_distance(self.size);
        let mut dist = Vec::new();
        for members in &self.boxes {
            for &v in members {
                graph.bfs_distances(v, Some(limit), &mut dist);
                if members.iter().any(|&u| dist[u] == UNREACHED) {
                    return false;
                }
            }
        }
        true
    }
}

/// Options for [`cover_greedy_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyOptions {
    pub convention: BoxConvention,
    /// Number of seeded random node orders tried.
    pub random_orders: usize,
    /// Also try the breadth-first order from a peripheral node of each component.
    pub peripheral_order: bool,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions { convention: BoxConvention::Inclusive, random_orders: 8, peripheral_order: true }
    }
}

/// Greedy covering with the default options.
pub fn cover_greedy(graph: &Graph, l_b: usize, seed: u64) -> BoxCovering {
    cover_greedy_with(graph, l_b, seed, &GreedyOptions::default())
}

/// Conflict-coloring greedy: nodes are visited in a fixed order and each joins
/// the lowest-numbered box whose members all lie within the allowed distance,
/// or opens a new box. Several orders are tried and the covering with the
/// fewest boxes is kept (earliest order wins ties).
pub fn cover_greedy_with(graph: &Graph, l_b: usize, seed: u64, options: &GreedyOptions) -> BoxCovering {
    let radius = options.convention.max_distance(l_b);
    let mut orders: Vec<Vec<usize>> = Vec::new();
    if options.peripheral_order {
        orders.push(peripheral_bfs_order(graph));
    }
    for r in 0..options.random_orders {
        let mut order: Vec<usize> = (0..graph.node_count()).collect();
        order.shuffle(&mut stream_rng(seed, COVER, r as u64));
        orders.push(order);
    }
    if orders.is_empty() {
        orders.push((0..graph.node_count()).collect());
    }
    let mut best: Option<Vec<usize>> = None;
    let mut best_count = usize::MAX;
    let mut scratch = BallScratch::new(graph.node_count());
    for order in &orders {
        let (assignment, count) = color_in_order(graph, radius, order, &mut scratch);
        if count < best_count {
            best_count = count;
            best = Some(assignment);
        }
    }
    BoxCovering::from_assignment(l_b, options.convention, &best.unwrap_or_default())
}

struct BallScratch {
    stamp: Vec<u32>,
    depth: Vec<u32>,
    epoch: u32,
    queue: VecDeque<usize>,
    ball: Vec<usize>,
}

impl BallScratch {
    fn new(n: usize) -> Self {
        BallScratch { stamp: vec![0; n], depth: vec![0; n], epoch: 0, queue: VecDeque::new(), ball: Vec::new() }
    }

    /// Fills `self.ball` with every node within `radius` of `source`.
    fn ball(&mut self, graph: &Graph, source: usize, radius: u32) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.ball.clear();
        self.queue.clear();
        self.stamp[source] = epoch;
        self.depth[source] = 0;
        self.queue.push_back(source);
        while let Some(u) = self.queue.pop_front() {
            self.ball.push(u);
            if self.depth[u] >= radius {
                continue;
            }
            for &w in graph.neighbors(u) {
                if self.stamp[w] != epoch {
                    self.stamp[w] = epoch;
                    self.depth[w] = self.depth[u] + 1;
                    self.queue.push_back(w);
                }
            }
        }
    }
}

fn color_in_order(graph: &Graph, radius: u32, order: &[usize], scratch: &mut BallScratch) -> (Vec<usize>, usize) {
    let n = graph.node_count();
    let mut assignment = vec![usize::MAX; n];
    let mut sizes: Vec<usize> = Vec::new();
    let mut hits: Vec<usize> = Vec::new();
    let mut touched: Vec<usize> = Vec::new();
    for &v in order {
        scratch.ball(graph, v, radius);
        for &u in &scratch.ball {
            let b = assignment[u];
            if b != usize::MAX {
                if hits[b] == 0 {
                    touched.push(b);
                }
                hits[b] += 1;
            }
        }
        let mut chosen = usize::MAX;
        for &b in &touched {
            if hits[b] == sizes[b] && b < chosen {
                chosen = b;
            }
        }
        for &b in &touched {
            hits[b] = 0;
        }
        touched.clear();
        if chosen == usize::MAX {
            chosen = sizes.len();
            sizes.push(0);
            hits.push(0);
        }
        assignment[v] = chosen;
        sizes[chosen] += 1;
    }
    (assignment, sizes.len())
}

/// Breadth-first order over each component, starting from the node farthest
/// from the component's lowest id (lowest id among the farthest).
fn peripheral_bfs_order(graph: &Graph) -> Vec<usize> {
    let n = graph.node_count();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut dist = Vec::new();
    for s in 0..n {
        if placed[s] {
            continue;
        }
        graph.bfs_distances(s, None, &mut dist);
        let mut start = s;
        for (v, &d) in dist.iter().enumerate() {
            if d != UNREACHED && d > dist[start] {
                start = v;
            }
        }
        let first = order.len();
        order.push(start);
        placed[start] = true;
        let mut head = first;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &w in graph.neighbors(u) {
                if !placed[w] {
                    placed[w] = true;
                    order.push(w);
                }
            }
        }
    }
    order
}

/// Provably minimal covering by exhaustive search (`n <= 16`).
pub fn cover_exact(graph: &Graph, l_b: usize) -> Result<BoxCovering> {
    cover_exact_with(graph, l_b, BoxConvention::Inclusive)
}

/// Minimum clique cover of the "within distance" relation via subset DP.
pub fn cover_exact_with(graph: &Graph, l_b: usize, convention: BoxConvention) -> Result<BoxCovering> {
    let n = graph.node_count();
    if n > EXACT_COVER_LIMIT {
        return Err(Error::BudgetExceeded { n, limit: EXACT_COVER_LIMIT });
    }
    if n == 0 {
        return Ok(BoxCovering::from_assignment(l_b, convention, &[]));
    }
    let limit = convention.max_distance(l_b);
    let dist = graph.distance_matrix();
    let compat: Vec<u32> = (0..n)
        .map(|v| (0..n).filter(|&u| dist[v][u] <= limit).fold(0u32, |m, u| m | (1 << u)))
        .collect();
    let full = (1u32 << n) - 1;
    let size = 1usize << n;
    let mut valid = vec![false; size];
    valid[0] = true;
    for mask in 1..size as u32 {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        valid[mask as usize] = valid[rest as usize] && (compat[low] & rest) == rest;
    }
    let mut best = vec![u8::MAX; size];
    let mut choice = vec![0u32; size];
    best[0] = 0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let part = sub | low;
            if valid[part as usize] {
                let cand = best[(mask ^ part) as usize].saturating_add(1);
                if cand < best[mask as usize] {
                    best[mask as usize] = cand;
                    choice[mask as usize] = part;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    let mut assignment = vec![0usize; n];
    let mut mask = full;
    let mut b = 0;
    while mask != 0 {
        let part = choice[mask as usize];
        for (v, slot) in assignment.iter_mut().enumerate() {
            if part & (1 << v) != 0 {
                *slot = b;
            }
        }
        mask ^= part;
        b += 1;
    }
    Ok(BoxCovering::from_assignment(l_b, convention, &assignment))
}

/// Collapses each box to one node; boxes are adjacent when any member edge
/// crosses between them.
pub fn renormalize(graph: &Graph, covering: &BoxCovering) -> Graph {
    let edges = graph.edges().filter_map(|(u, v)| {
        let (a, b) = (covering.box_of(u), covering.box_of(v));
        (a != b).then_some((a, b))
    });
    Graph::from_edges(covering.box_count(), edges).expect("box ids are in range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxStats {
    /// Number of distinct neighbouring boxes.
    pub k_b: usize,
    /// Largest member degree in the original graph.
    pub k_hub: usize,
    /// Lowest id among the members attaining `k_hub`.
    pub hub: usize,
    /// Hub edges that leave the box.
    pub n_h: usize,
}

pub fn box_stats(graph: &Graph, covering: &BoxCovering) -> Vec<BoxStats> {
    let mut seen = vec![usize::MAX; covering.box_count()];
    covering
        .boxes()
        .iter()
        .enumerate()
        .map(|(b, members)| {
            let mut hub = members[0];
            for &v in members {
                if graph.degree(v) > graph.degree(hub) || (graph.degree(v) == graph.degree(hub) && v < hub) {
                    hub = v;
                }
            }
            let mut k_b = 0;
            for &v in members {
                for &w in graph.neighbors(v) {
                    let other = covering.box_of(w);
                    if other != b && seen[other] != b {
                        seen[other] = b;
                        k_b += 1;
                    }
                }
            }
            let n_h = graph.neighbors(hub).iter().filter(|&&w| covering.box_of(w) != b).count();
            BoxStats { k_b, k_hub: graph.degree(hub), hub, n_h }
        })
        .collect()
}

/// Greedy coverings for a sorted grid of box sizes. When a larger size would
/// need more boxes than the previous one, the previous covering (also valid
/// at the larger size) is kept, so `N_B` never increases along the grid.
pub fn cover_grid(graph: &Graph, grid: &[usize], seed: u64, options: &GreedyOptions) -> Vec<BoxCovering> {
    let mut sizes = grid.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut out: Vec<BoxCovering> = Vec::with_capacity(sizes.len());
    for &l_b in &sizes {
        let mut cover = cover_greedy_with(graph, l_b, seed, options);
        if let Some(prev) = out.last() {
            if prev.box_count() < cover.box_count() {
                cover = BoxCovering { size: l_b, ..prev.clone() };
            }
        }
        out.push(cover);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractalSample {
    pub l_b: usize,
    pub boxes: usize,
    /// `N_B / n`.
    pub box_fraction: f64,
    /// Mean of `k_B / k_hub` over boxes with `k_hub > 0`.
    pub degree_ratio: Option<f64>,
    /// Mean of `n_h / k_B` over boxes with `k_B > 0`.
    pub hub_link_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractalFit {
    pub samples: Vec<FractalSample>,
    pub d_b: f64,
    pub r2_d_b: Option<f64>,
    pub d_g: Option<f64>,
    pub r2_d_g: Option<f64>,
    pub d_e: Option<f64>,
    pub r2_d_e: Option<f64>,
    /// `1 + d_B / d_g`, only when both fits reach the R² gate.
    pub gamma_hat: Option<f64>,
    /// `2 + d_e / d_g`, only when both fits reach the R² gate.
    pub epsilon_hat: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    (!v.is_empty()).then(|| compensated_sum(v.iter().copied()) / v.len() as f64)
}

/// Samples one covering.
pub fn fractal_sample(graph: &Graph, covering: &BoxCovering) -> FractalSample {
    let stats = box_stats(graph, covering);
    FractalSample {
        l_b: covering.size,
        boxes: covering.box_count(),
        box_fraction: covering.box_count() as f64 / graph.node_count() as f64,
        degree_ratio: mean(stats.iter().filter(|s| s.k_hub > 0).map(|s| s.k_b as f64 / s.k_hub as f64)),
        hub_link_ratio: mean(stats.iter().filter(|s| s.k_b > 0).map(|s| s.n_h as f64 / s.k_b as f64)),
    }
}

/// Slope of `ln y` against `ln(l_B + 1)` over samples with `y > 0`.
fn scale_fit(samples: &[FractalSample], y: impl Fn(&FractalSample) -> Option<f64>) -> Option<(f64, Option<f64>)> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|s| {
            let v = y(s)?;
            (v > 0.0).then(|| (libm::log(s.l_b as f64 + 1.0), libm::log(v)))
        })
        .collect();
    if pts.len() < 3 {
        return None;
    }
    least_squares(&pts).ok().map(|f| (-f.slope, f.r_squared))
}

/// Fits `d_B`, `d_g`, `d_e` from greedy coverings over `grid`.
pub fn fit_fractal_exponents(graph: &Graph, grid: &[usize], seed: u64) -> Result<FractalFit> {
    fit_fractal_exponents_with(graph, grid, seed, &GreedyOptions::default())
}

pub fn fit_fractal_exponents_with(
    graph: &Graph,
    grid: &[usize],
    seed: u64,
    options: &GreedyOptions,
) -> Result<FractalFit> {
    let mut sizes = grid.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::TooFewPoints { got: sizes.len(), need: 3 });
    }
    if graph.node_count() == 0 {
        return Err(Error::FitDegenerate("empty graph"));
    }
    let samples: Vec<FractalSample> =
        cover_grid(graph, &sizes, seed, options).iter().map(|c| fractal_sample(graph, c)).collect();
    let (d_b, r2_d_b) = scale_fit(&samples, |s| Some(s.box_fraction))
        .ok_or(Error::FitDegenerate("box counts"))?;
    if r2_d_b.is_none() || samples.iter().all(|s| s.boxes == samples[0].boxes) {
        return Err(Error::FitDegenerate("box count does not change across the grid"));
    }
    let g = scale_fit(&samples, |s| s.degree_ratio);
    let e = scale_fit(&samples, |s| s.hub_link_ratio);
    let passes = |r2: Option<f64>| r2.is_some_and(|r| r >= DERIVED_EXPONENT_MIN_R2);
    let gamma_hat = match g {
        Some((d_g, r2)) if passes(r2) && passes(r2_d_b) && d_g != 0.0 => Some(1.0 + d_b / d_g),
        _ => None,
    };
    let epsilon_hat = match (g, e) {
        (Some((d_g, r2g)), Some((d_e, r2e))) if passes(r2g) && passes(r2e) && d_g != 0.0 => Some(2.0 + d_e / d_g),
        _ => None,
    };
    Ok(FractalFit {
        samples,
        d_b,
        r2_d_b,
        d_g: g.map(|x| x.0),
        r2_d_g: g.and_then(|x| x.1),
        d_e: e.map(|x| x.0),
        r2_d_e: e.and_then(|x| x.1),
        gamma_hat,
        epsilon_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_one_box() {
        let g = Graph::complete(5);
        assert_eq!(cover_greedy(&g, 1, 0).box_count(), 1);
        assert_eq!(cover_exact(&g, 1).unwrap().box_count(), 1);
    }

    #[test]
    fn path_of_nine() {
        let g = Graph::path(9);
        for seed in 0..5 {
            assert_eq!(cover_greedy(&g, 2, seed).box_count(), 3);
            assert_eq!(cover_greedy(&g, 1, seed).box_count(), 5);
        }
        assert_eq!(cover_exact(&g, 2).unwrap().box_count(), 3);
        assert_eq!(cover_exact(&g, 1).unwrap().box_count(), 5);
    }

    #[test]
    fn exact_trivial_cases() {
        assert_eq!(cover_exact(&Graph::empty(1), 3).unwrap().box_count(), 1);
        assert_eq!(cover_exact(&Graph::complete(3), 1).unwrap().box_count(), 1);
        assert!(matches!(cover_exact(&Graph::path(17), 2), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn strict_convention_shrinks_boxes() {
        let g = Graph::path(9);
        let opts = GreedyOptions { convention: BoxConvention::Strict, ..GreedyOptions::default() };
        assert_eq!(cover_greedy_with(&g, 3, 0, &opts).box_count(), 3);
        assert_eq!(cover_greedy_with(&g, 1, 0, &opts).box_count(), 9);
        assert_eq!(cover_exact_with(&g, 2, BoxConvention::Strict).unwrap().box_count(), 5);
    }

    #[test]
    fn renormalize_examples() {
        let g = Graph::path(9);
        let c = BoxCovering::from_assignment(2, BoxConvention::Inclusive, &[0, 0, 0, 1, 1, 1, 2, 2, 2]);
        assert_eq!(renormalize(&g, &c), Graph::path(3));
        let k5 = Graph::complete(5);
        let one = BoxCovering::from_assignment(1, BoxConvention::Inclusive, &[0; 5]);
        let r = renormalize(&k5, &one);
        assert_eq!((r.node_count(), r.edge_count()), (1, 0));
        let two = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let c = BoxCovering::from_assignment(1, BoxConvention::Inclusive, &[0, 0, 1, 1]);
        let r = renormalize(&two, &c);
        assert_eq!((r.node_count(), r.edge_count()), (2, 0));
    }

    #[test]
    fn stats_examples() {
        let star = Graph::star(6);
        let one = BoxCovering::from_assignment(2, BoxConvention::Inclusive, &[0; 6]);
        assert_eq!(box_stats(&star, &one), [BoxStats { k_b: 0, k_hub: 5, hub: 0, n_h: 0 }]);
        let path = Graph::path(9);
        let c = BoxCovering::from_assignment(2, BoxConvention::Inclusive, &[0, 0, 0, 1, 1, 1, 2, 2, 2]);
        let s = box_stats(&path, &c);
        assert_eq!(s[1], BoxStats { k_b: 2, k_hub: 2, hub: 3, n_h: 1 });
        assert_eq!(s[0].k_b, 1);
    }

    #[test]
    fn path_fractal_dimension_is_one() {
        let g = Graph::path(1024);
        let fit = fit_fractal_exponents(&g, &[1, 3, 7, 15], 0).unwrap();
        let counts: Vec<usize> = fit.samples.iter().map(|s| s.boxes).collect();
        assert_eq!(counts, [512, 256, 128, 64]);
        assert!((fit.d_b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_box_everywhere_is_rejected() {
        let g = Graph::complete(6);
        assert!(matches!(fit_fractal_exponents(&g, &[1, 2, 3], 0), Err(Error::FitDegenerate(_))));
        assert!(matches!(fit_fractal_exponents(&g, &[1, 2], 0), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn disconnected_nodes_never_share_a_box() {
        let g = Graph::from_edges(5, [(0, 1), (3, 4)]).unwrap();
        let c = cover_greedy(&g, 4, 2);
        assert!(c.is_valid_for(&g));
        assert_eq!(c.box_count(), 3);
        assert_eq!(cover_exact(&g, 4).unwrap().box_count(), 3);
    }
}
