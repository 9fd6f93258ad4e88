//! Level-L contacts and the closed-form hierarchy analytics.
//!
//! A level-L contact of `v` is a node at shortest-path distance exactly `L`.
//! Using exact distances means every connected pair is counted at one level
//! only, so the per-level pair ratios `R^(L)` sum to one on a connected graph.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math::compensated_sum;

/// Per-node, per-level contact counts `K^(L)(v)` for `L = 1..=levels`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelProfile {
    n: usize,
    levels: usize,
    per_node: Vec<u32>,
    totals: Vec<u64>,
}

/// One row of the exported level table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRow {
    pub level: usize,
    pub mean_level_degree: f64,
    pub pair_count: u64,
    pub ratio: f64,
}

impl LevelProfile {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `K^(L)(v)`, `level` counted from 1.
    pub fn count(&self, v: usize, level: usize) -> u32 {
        assert!(level >= 1 && level <= self.levels, "level out of range");
        self.per_node[v * self.levels + level - 1]
    }

    /// `K̄^(L)`.
    pub fn mean_level_degree(&self, level: usize) -> f64 {
        self.totals[level - 1] as f64 / self.n as f64
    }

    /// `m^(L)`: number of unordered pairs at distance `L`.
    pub fn pair_count(&self, level: usize) -> u64 {
        self.totals[level - 1] / 2
    }

    /// `R^(L) = m^(L) / C(n, 2)`.
    pub fn ratio(&self, level: usize) -> f64 {
        let pairs = self.n as f64 * (self.n as f64 - 1.0) / 2.0;
        if pairs == 0.0 {
            0.0
        } else {
            self.pair_count(level) as f64 / pairs
        }
    }

    /// Fraction of all pairs reached within the explored levels.
    pub fn coverage(&self) -> f64 {
        compensated_sum((1..=self.levels).map(|l| self.ratio(l)))
    }

    pub fn rows(&self) -> Vec<LevelRow> {
        (1..=self.levels)
            .map(|level| LevelRow {
                level,
                mean_level_degree: self.mean_level_degree(level),
                pair_count: self.pair_count(level),
                ratio: self.ratio(level),
            })
            .collect()
    }
}

/// Reusable level-synchronous BFS state.
#[derive(Debug, Default)]
pub struct LevelScanner {
    stamp: Vec<u32>,
    epoch: u32,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl LevelScanner {
    pub fn new(n: usize) -> Self {
        LevelScanner { stamp: vec![0; n], epoch: 0, frontier: Vec::new(), next: Vec::new() }
    }

    /// Writes `K^(1..=out.len())(source)` into `out`.
    pub fn scan(&mut self, graph: &Graph, source: usize, out: &mut [u32]) {
        if self.stamp.len() != graph.node_count() {
            self.stamp = vec![0; graph.node_count()];
            self.epoch = 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.stamp[source] = epoch;
        self.frontier.clear();
        self.frontier.push(source);
        for slot in out.iter_mut() {
            self.next.clear();
            for &u in &self.frontier {
                for &w in graph.neighbors(u) {
                    if self.stamp[w] != epoch {
                        self.stamp[w] = epoch;
                        self.next.push(w);
                    }
                }
            }
            *slot = self.next.len() as u32;
            core::mem::swap(&mut self.frontier, &mut self.next);
        }
    }
}

/// Breadth-first level counts for every node up to `levels`.
pub fn level_degree_profile(graph: &Graph, levels: usize) -> Result<LevelProfile> {
    if levels == 0 {
        return Err(Error::InvalidParameter { name: "levels", value: 0.0 });
    }
    let n = graph.node_count();
    let mut per_node = vec![0u32; n * levels];
    let mut scanner = LevelScanner::new(n);
    for (v, row) in per_node.chunks_mut(levels).enumerate() {
        scanner.scan(graph, v, row);
    }
    Ok(profile_from_counts(n, levels, per_node))
}

/// Assembles a profile from precomputed per-node rows (`n * levels` values).
pub fn profile_from_counts(n: usize, levels: usize, per_node: Vec<u32>) -> LevelProfile {
    assert_eq!(per_node.len(), n * levels, "count table has the wrong shape");
    let mut totals = vec![0u64; levels];
    for row in per_node.chunks(levels) {
        for (t, &c) in totals.iter_mut().zip(row) {
            *t += u64::from(c);
        }
    }
    LevelProfile { n, levels, per_node, totals }
}

/// How level degrees are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelMode {
    /// Integral approximations, `n -> ∞`.
    Continuous,
    /// Truncated sums over `k = 1..=kmax`.
    Discrete { kmax: usize },
}

fn check_exponents(gamma: f64, epsilon: f64) -> Result<()> {
    if !(gamma > 2.0) {
        return Err(Error::InvalidParameter { name: "gamma", value: gamma });
    }
    if !(epsilon > 2.0) {
        return Err(Error::InvalidParameter { name: "epsilon", value: epsilon });
    }
    Ok(())
}

fn moment_ratio(exponent: f64, kmax: usize) -> f64 {
    let num = compensated_sum((1..=kmax).map(|k| libm::pow(k as f64, 1.0 - exponent)));
    let den = compensated_sum((1..=kmax).map(|k| libm::pow(k as f64, -exponent)));
    num / den
}

/// `Σk^{1-γ} / Σk^{-γ}` over `1..=kmax`.
pub fn discrete_mean_degree(gamma: f64, kmax: usize) -> f64 {
    moment_ratio(gamma, kmax)
}

/// `D̄ = Σk^{1-ε} / Σk^{-ε}` over `1..=kmax`.
pub fn discrete_neighbor_degree(epsilon: f64, kmax: usize) -> f64 {
    moment_ratio(epsilon, kmax)
}

/// `α = 1/(ε-2)`.
pub fn branching_factor(epsilon: f64) -> f64 {
    1.0 / (epsilon - 2.0)
}

/// Mean level-L degree `K̄^(L)`.
pub fn analytic_level_degree(gamma: f64, epsilon: f64, level: usize, mode: LevelMode) -> Result<f64> {
    check_exponents(gamma, epsilon)?;
    if level == 0 {
        return Err(Error::InvalidParameter { name: "level", value: 0.0 });
    }
    let steps = (level - 1) as f64;
    match mode {
        LevelMode::Continuous => {
            let alpha = branching_factor(epsilon);
            Ok(libm::pow(alpha, steps) * (gamma - 1.0) / (gamma - 2.0))
        }
        LevelMode::Discrete { kmax } => {
            if kmax == 0 {
                return Err(Error::InvalidParameter { name: "kmax", value: 0.0 });
            }
            let first = discrete_mean_degree(gamma, kmax);
            let growth = discrete_neighbor_degree(epsilon, kmax) - 1.0;
            Ok(first * libm::pow(growth, steps))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extendibility {
    /// `2 < ε < 3`: mean level degree grows with `L`.
    Expanding,
    /// `ε = 3`: mean level degree is constant.
    Invariant,
    /// `ε > 3`: mean level degree decays.
    Contracting,
}

pub fn extendibility_class(epsilon: f64) -> Result<Extendibility> {
    if !(epsilon > 2.0) {
        return Err(Error::InvalidParameter { name: "epsilon", value: epsilon });
    }
    Ok(if epsilon < 3.0 {
        Extendibility::Expanding
    } else if epsilon == 3.0 {
        Extendibility::Invariant
    } else {
        Extendibility::Contracting
    })
}

fn check_hierarchical(gamma: f64, epsilon: f64, n: usize) -> Result<()> {
    check_exponents(gamma, epsilon)?;
    if epsilon > 3.0 {
        return Err(Error::Unsupported("no hierarchical closed form for epsilon > 3"));
    }
    if n < 2 {
        return Err(Error::InvalidParameter { name: "n", value: n as f64 });
    }
    Ok(())
}

/// `(γ-2)(n-1)/(γ-1)`, the reciprocal of `R^(1)`.
fn inverse_first_ratio(gamma: f64, n: usize) -> f64 {
    (gamma - 2.0) * (n as f64 - 1.0) / (gamma - 1.0)
}

/// Level at which the pair ratios `R^(l)` exhaust all pairs (a real number).
pub fn max_level(gamma: f64, epsilon: f64, n: usize) -> Result<f64> {
    check_hierarchical(gamma, epsilon, n)?;
    let b = inverse_first_ratio(gamma, n);
    if epsilon == 3.0 {
        return Ok(b);
    }
    let alpha = branching_factor(epsilon);
    Ok(libm::log(b * (alpha - 1.0) + 1.0) / libm::log(alpha))
}

/// Closed-form `Σ_{l=1..L} R^(l)` for a real level count `L`.
pub fn level_ratio_sum(gamma: f64, epsilon: f64, n: usize, levels: f64) -> Result<f64> {
    check_hierarchical(gamma, epsilon, n)?;
    let first = 1.0 / inverse_first_ratio(gamma, n);
    if epsilon == 3.0 {
        return Ok(first * levels);
    }
    let alpha = branching_factor(epsilon);
    Ok(first * (libm::pow(alpha, levels) - 1.0) / (alpha - 1.0))
}

/// `E^(H)[X] / E^(1)[X]` under `E^(L)[X] ≈ L E^(1)[X]`.
pub fn hierarchical_hop_factor(gamma: f64, epsilon: f64, n: usize) -> Result<f64> {
    check_hierarchical(gamma, epsilon, n)?;
    if epsilon == 3.0 {
        return Ok(((gamma - 2.0) * n as f64 + 1.0) / (2.0 * (gamma - 1.0)));
    }
    let alpha = branching_factor(epsilon);
    let b = inverse_first_ratio(gamma, n);
    let l_max = max_level(gamma, epsilon, n)?;
    let s = (l_max * (b * (alpha - 1.0) + 1.0) - b) / (alpha - 1.0);
    Ok(s / b)
}

/// Hierarchical capacity estimate: `λ_direct` divided by the hop factor.
pub fn capacity_reduction(lambda_direct: f64, gamma: f64, epsilon: f64, n: usize) -> Result<f64> {
    if !(lambda_direct > 0.0) {
        return Err(Error::InvalidParameter { name: "lambda", value: lambda_direct });
    }
    Ok(lambda_direct / hierarchical_hop_factor(gamma, epsilon, n)?)
}

/// Closed-form hierarchy quantities for one `(γ, ε, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyAnalytics {
    pub gamma: f64,
    pub epsilon: f64,
    pub n: usize,
    pub alpha: f64,
    pub mode: LevelMode,
    /// `D̄`: continuous `(ε-1)/(ε-2)` or the truncated discrete mean.
    pub neighbor_degree: f64,
    pub first_level_degree: f64,
    /// `None` for `ε > 3`.
    pub max_level: Option<f64>,
    /// `S = Σ l α^{l-1}` up to `max_level`; `None` for `ε > 3`.
    pub weighted_level_sum: Option<f64>,
    pub hop_factor: Option<f64>,
}

impl HierarchyAnalytics {
    pub fn new(gamma: f64, epsilon: f64, n: usize, mode: LevelMode) -> Result<Self> {
        check_exponents(gamma, epsilon)?;
        let alpha = branching_factor(epsilon);
        let neighbor_degree = match mode {
            LevelMode::Continuous => (epsilon - 1.0) / (epsilon - 2.0),
            LevelMode::Discrete { kmax } => discrete_neighbor_degree(epsilon, kmax),
        };
        let first_level_degree = analytic_level_degree(gamma, epsilon, 1, mode)?;
        let (max_level, weighted_level_sum, hop_factor) = if epsilon <= 3.0 && n >= 2 {
            let l = max_level(gamma, epsilon, n)?;
            let f = hierarchical_hop_factor(gamma, epsilon, n)?;
            (Some(l), Some(f * inverse_first_ratio(gamma, n)), Some(f))
        } else {
            (None, None, None)
        };
        Ok(HierarchyAnalytics {
            gamma,
            epsilon,
            n,
            alpha,
            mode,
            neighbor_degree,
            first_level_degree,
            max_level,
            weighted_level_sum,
            hop_factor,
        })
    }

    pub fn level_degree(&self, level: usize) -> Result<f64> {
        analytic_level_degree(self.gamma, self.epsilon, level, self.mode)
    }
}
