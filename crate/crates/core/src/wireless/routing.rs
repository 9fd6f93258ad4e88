use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::Deployment;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math::compensated_sum;
use crate::rng::{stream_rng, HIERARCHY, HOPS, LEVELS};

/// How a source picks the destination of a transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DestinationRule {
    /// Equiprobable over level-1 contacts.
    Uniform,
    /// Level-1 contact `j` with probability proportional to `d_j^-beta`,
    /// `d_j` the Euclidean distance clamped below at the nominal cell side.
    PowerLaw { beta: f64 },
    /// Equiprobable over nodes at social distance exactly `L`.
    Level(u32),
    /// Uniform connected ordered pair, routed along a shortest social path.
    Hierarchical,
}

impl DestinationRule {
    pub fn name(&self) -> &'static str {
        match self {
            DestinationRule::Uniform => "uniform",
            DestinationRule::PowerLaw { .. } => "powerlaw",
            DestinationRule::Level(_) => "level",
            DestinationRule::Hierarchical => "hierarchical",
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            DestinationRule::PowerLaw { beta } => Some(*beta),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            DestinationRule::PowerLaw { beta } if !(beta >= 0.0 && beta.is_finite()) => {
                Err(Error::InvalidParameter { name: "beta", value: beta })
            }
            DestinationRule::Level(0) => Err(Error::InvalidParameter { name: "level", value: 0.0 }),
            _ => Ok(()),
        }
    }
}

/// Reusable breadth-first scratch space.
struct Bfs {
    stamp: Vec<u32>,
    dist: Vec<u32>,
    epoch: u32,
    order: Vec<usize>,
}

impl Bfs {
    fn new(n: usize) -> Self {
        Bfs { stamp: vec![0; n], dist: vec![0; n], epoch: 0, order: Vec::new() }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    fn seen(&self, v: usize) -> bool {
        self.stamp[v] == self.epoch
    }

    /// Visits nodes in breadth-first order up to `max_depth`, stopping as
    /// soon as `target` is discovered. Returns whether `target` was found.
    fn run(&mut self, graph: &Graph, source: usize, max_depth: u32, target: Option<usize>) -> bool {
        let epoch = self.next_epoch();
        self.order.clear();
        self.stamp[source] = epoch;
        self.dist[source] = 0;
        self.order.push(source);
        if target == Some(source) {
            return true;
        }
        let mut head = 0;
        while head < self.order.len() {
            let u = self.order[head];
            head += 1;
            let du = self.dist[u];
            if du >= max_depth {
                continue;
            }
            for &w in graph.neighbors(u) {
                if self.stamp[w] != epoch {
                    self.stamp[w] = epoch;
                    self.dist[w] = du + 1;
                    self.order.push(w);
                    if target == Some(w) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Grid hops along the shortest path from the last source to `v`, taking
    /// the smallest-id predecessor at every step.
    fn path_hops(&self, graph: &Graph, dep: &Deployment, v: usize) -> usize {
        let mut cur = v;
        let mut hops = 0;
        while self.dist[cur] > 0 {
            let want = self.dist[cur] - 1;
            let parent = graph
                .neighbors(cur)
                .iter()
                .copied()
                .filter(|&w| self.seen(w) && self.dist[w] == want)
                .min()
                .expect("breadth-first predecessor");
            hops += dep.grid_hops(cur, parent);
            cur = parent;
        }
        hops
    }
}

fn contact_weight(dep: &Deployment, src: usize, dst: usize, beta: f64) -> f64 {
    let d = dep.distance(src, dst).max(dep.cell_side());
    libm::pow(d, -beta)
}

/// Index `i` with `cum_{i-1} <= u * total < cum_i`.
fn pick_cumulative(weights: impl Iterator<Item = f64> + Clone, u: f64) -> usize {
    let total: f64 = weights.clone().sum();
    let target = u * total;
    let mut cum = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        cum += w;
        last = i;
        if cum > target {
            return i;
        }
    }
    last
}

/// Draws a destination for `src`. Uniform and power-law rules consume one
/// uniform variate each, so `beta = 0` reproduces the uniform rule exactly.
pub fn select_destination<R: Rng + ?Sized>(
    graph: &Graph,
    dep: &Deployment,
    src: usize,
    rule: DestinationRule,
    rng: &mut R,
) -> Result<usize> {
    rule.validate()?;
    let mut bfs = Bfs::new(graph.node_count());
    select_with(graph, dep, src, rule, rng, &mut bfs)
}

fn select_with<R: Rng + ?Sized>(
    graph: &Graph,
    dep: &Deployment,
    src: usize,
    rule: DestinationRule,
    rng: &mut R,
    bfs: &mut Bfs,
) -> Result<usize> {
    let contacts = graph.neighbors(src);
    match rule {
        DestinationRule::Uniform | DestinationRule::PowerLaw { .. } if contacts.is_empty() => {
            Err(Error::NoDestination { source: src })
        }
        DestinationRule::Uniform => {
            let u: f64 = rng.gen();
            let i = ((u * contacts.len() as f64) as usize).min(contacts.len() - 1);
            Ok(contacts[i])
        }
        DestinationRule::PowerLaw { beta } => {
            let u: f64 = rng.gen();
            let i = pick_cumulative(contacts.iter().map(|&c| contact_weight(dep, src, c, beta)), u);
            Ok(contacts[i])
        }
        DestinationRule::Level(level) => {
            bfs.run(graph, src, level, None);
            let at_level: Vec<usize> = bfs.order.iter().copied().filter(|&v| bfs.dist[v] == level).collect();
            if at_level.is_empty() {
                return Err(Error::NoDestination { source: src });
            }
            Ok(at_level[rng.gen_range(0..at_level.len())])
        }
        DestinationRule::Hierarchical => Err(Error::Unsupported("hierarchical rule draws pairs, not destinations")),
    }
}

/// Selection probabilities of every eligible destination of `src`.
pub fn destination_probabilities(
    graph: &Graph,
    dep: &Deployment,
    src: usize,
    rule: DestinationRule,
) -> Result<Vec<(usize, f64)>> {
    rule.validate()?;
    let weighted: Vec<(usize, f64)> = match rule {
        DestinationRule::Uniform => graph.neighbors(src).iter().map(|&c| (c, 1.0)).collect(),
        DestinationRule::PowerLaw { beta } => {
            graph.neighbors(src).iter().map(|&c| (c, contact_weight(dep, src, c, beta))).collect()
        }
        DestinationRule::Level(level) => {
            let mut bfs = Bfs::new(graph.node_count());
            bfs.run(graph, src, level, None);
            bfs.order.iter().filter(|&&v| bfs.dist[v] == level).map(|&v| (v, 1.0)).collect()
        }
        DestinationRule::Hierarchical => return Err(Error::Unsupported("hierarchical rule draws pairs")),
    };
    if weighted.is_empty() {
        return Err(Error::NoDestination { source: src });
    }
    let total = compensated_sum(weighted.iter().map(|w| w.1));
    Ok(weighted.into_iter().map(|(v, w)| (v, w / total)).collect())
}

/// One Monte Carlo trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub hops: usize,
    /// Sources (or pairs) redrawn because they had no eligible destination.
    pub resamples: usize,
}

/// Per-trial sampler owning its scratch space. Trial `t` of a run with
/// `seed` always yields the same outcome, whatever the calling order.
pub struct HopSampler<'a> {
    graph: &'a Graph,
    dep: &'a Deployment,
    bfs: Bfs,
}

impl<'a> HopSampler<'a> {
    pub fn new(graph: &'a Graph, dep: &'a Deployment) -> Self {
        HopSampler { graph, dep, bfs: Bfs::new(graph.node_count()) }
    }

    /// Hops of trial `t`: a uniform eligible source and a rule-drawn
    /// destination, or a uniform connected pair for the hierarchical rule.
    pub fn trial(&mut self, rule: DestinationRule, seed: u64, t: u64) -> Result<TrialOutcome> {
        rule.validate()?;
        if rule == DestinationRule::Hierarchical {
            return self.hierarchical(seed, t);
        }
        let n = self.graph.node_count();
        if n == 0 || self.graph.edge_count() == 0 {
            return Err(Error::NoEligibleSource);
        }
        let mut rng = stream_rng(seed, HOPS, t);
        let mut resamples = 0;
        let mut checked = false;
        loop {
            let src = rng.gen_range(0..n);
            match select_with(self.graph, self.dep, src, rule, &mut rng, &mut self.bfs) {
                Ok(dst) => return Ok(TrialOutcome { hops: self.dep.grid_hops(src, dst), resamples }),
                Err(Error::NoDestination { .. }) => {
                    resamples += 1;
                    if !checked && resamples > 64 + 4 * n {
                        checked = true;
                        if !self.any_eligible(rule) {
                            return Err(Error::NoEligibleSource);
                        }
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn any_eligible(&mut self, rule: DestinationRule) -> bool {
        let level = match rule {
            DestinationRule::Level(l) => l,
            _ => 1,
        };
        (0..self.graph.node_count()).any(|v| {
            self.bfs.run(self.graph, v, level, None);
            self.bfs.order.iter().any(|&w| self.bfs.dist[w] == level)
        })
    }

    fn hierarchical(&mut self, seed: u64, t: u64) -> Result<TrialOutcome> {
        let n = self.graph.node_count();
        if n < 2 || self.graph.edge_count() == 0 {
            return Err(Error::AllDisconnected);
        }
        let mut rng = stream_rng(seed, HIERARCHY, t);
        let mut resamples = 0;
        loop {
            let u = rng.gen_range(0..n);
            let mut v = rng.gen_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            if self.bfs.run(self.graph, u, u32::MAX, Some(v)) {
                let hops = self.bfs.path_hops(self.graph, self.dep, v);
                return Ok(TrialOutcome { hops, resamples });
            }
            resamples += 1;
        }
    }

    /// Samples one source and, for each level `1..=max_level` it reaches,
    /// one uniform node at that level. Returns `(level, K_L(source), hops)`.
    pub fn level_trial(&mut self, max_level: u32, seed: u64, t: u64) -> Vec<(u32, usize, usize)> {
        let n = self.graph.node_count();
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let mut rng = stream_rng(seed, LEVELS, t);
        let src = rng.gen_range(0..n);
        self.bfs.run(self.graph, src, max_level, None);
        let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); max_level as usize + 1];
        for &v in &self.bfs.order {
            by_level[self.bfs.dist[v] as usize].push(v);
        }
        for (level, nodes) in by_level.iter().enumerate().skip(1) {
            if nodes.is_empty() {
                break;
            }
            let v = nodes[rng.gen_range(0..nodes.len())];
            out.push((level as u32, nodes.len(), self.bfs.path_hops(self.graph, self.dep, v)));
        }
        out
    }
}

/// Mean grid hops per transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct HopEstimate {
    pub rule: DestinationRule,
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
    pub empty_cell_fraction: f64,
    pub resamples: usize,
}

impl HopEstimate {
    /// Aggregates trial outcomes given in trial-index order.
    pub fn from_outcomes(rule: DestinationRule, outcomes: &[TrialOutcome], empty_cell_fraction: f64) -> Self {
        let trials = outcomes.len();
        let mean = if trials == 0 {
            0.0
        } else {
            compensated_sum(outcomes.iter().map(|o| o.hops as f64)) / trials as f64
        };
        let stderr = if trials < 2 {
            0.0
        } else {
            let ss = compensated_sum(outcomes.iter().map(|o| {
                let d = o.hops as f64 - mean;
                d * d
            }));
            libm::sqrt(ss / (trials - 1) as f64 / trials as f64)
        };
        HopEstimate {
            rule,
            trials,
            mean,
            stderr,
            empty_cell_fraction,
            resamples: outcomes.iter().map(|o| o.resamples).sum(),
        }
    }
}

fn run_trials(graph: &Graph, dep: &Deployment, rule: DestinationRule, trials: usize, seed: u64) -> Result<HopEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParameter { name: "trials", value: 0.0 });
    }
    let mut sampler = HopSampler::new(graph, dep);
    let outcomes = (0..trials as u64).map(|t| sampler.trial(rule, seed, t)).collect::<Result<Vec<_>>>()?;
    let resamples: usize = outcomes.iter().map(|o| o.resamples).sum();
    if resamples > 0 {
        log::debug!("{} rule: {resamples} draws resampled", rule.name());
    }
    Ok(HopEstimate::from_outcomes(rule, &outcomes, dep.occupancy_report()))
}

/// Mean grid hops from uniform eligible sources to rule-drawn destinations.
pub fn estimate_mean_hops(
    graph: &Graph,
    dep: &Deployment,
    rule: DestinationRule,
    trials: usize,
    seed: u64,
) -> Result<HopEstimate> {
    run_trials(graph, dep, rule, trials, seed)
}

/// Mean grid hops over uniform connected pairs, each routed along a shortest
/// social path.
pub fn estimate_hierarchical_hops(graph: &Graph, dep: &Deployment, trials: usize, seed: u64) -> Result<HopEstimate> {
    run_trials(graph, dep, DestinationRule::Hierarchical, trials, seed)
}

/// Routed hops conditioned on the social level of the pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelHops {
    pub level: u32,
    /// Pair-weighted mean of routed hops.
    pub mean: f64,
    /// Trials that reached this level.
    pub samples: usize,
}

/// Level-conditioned routed hops. Each trial draws a source and one node per
/// level; weighting by the level size `K_L(source)` makes every pair at that
/// level equally likely, as under pair-uniform sampling.
pub fn estimate_level_hops(
    graph: &Graph,
    dep: &Deployment,
    max_level: u32,
    trials: usize,
    seed: u64,
) -> Result<Vec<LevelHops>> {
    if max_level == 0 {
        return Err(Error::InvalidParameter { name: "max_level", value: 0.0 });
    }
    if graph.edge_count() == 0 {
        return Err(Error::AllDisconnected);
    }
    let mut sampler = HopSampler::new(graph, dep);
    let mut weighted: Vec<Vec<f64>> = vec![Vec::new(); max_level as usize];
    let mut weights: Vec<Vec<f64>> = vec![Vec::new(); max_level as usize];
    for t in 0..trials as u64 {
        for (level, k, hops) in sampler.level_trial(max_level, seed, t) {
            weighted[level as usize - 1].push(k as f64 * hops as f64);
            weights[level as usize - 1].push(k as f64);
        }
    }
    Ok((0..max_level as usize)
        .filter(|&i| !weights[i].is_empty())
        .map(|i| LevelHops {
            level: i as u32 + 1,
            mean: compensated_sum(weighted[i].iter().copied()) / compensated_sum(weights[i].iter().copied()),
            samples: weights[i].len(),
        })
        .collect())
}

/// Hops of trial `t` under `rule`.
pub fn hop_trial(graph: &Graph, dep: &Deployment, rule: DestinationRule, seed: u64, t: u64) -> Result<TrialOutcome> {
    HopSampler::new(graph, dep).trial(rule, seed, t)
}

/// Hops of hierarchical trial `t`.
pub fn hierarchical_trial(graph: &Graph, dep: &Deployment, seed: u64, t: u64) -> Result<TrialOutcome> {
    HopSampler::new(graph, dep).trial(DestinationRule::Hierarchical, seed, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    /// Positions at cell centres of a `dims × dims` grid with `r = 1/dims`.
    fn grid_dep(cells: &[(usize, usize)], dims: usize) -> Deployment {
        let side = 1.0 / dims as f64;
        let positions = cells.iter().map(|&(i, j)| [(i as f64 + 0.5) * side, (j as f64 + 0.5) * side]).collect();
        let dep = Deployment::from_positions(positions, side * 0.999_999, 1.0, 0.0).unwrap();
        assert_eq!(dep.dims(), dims);
        dep
    }

    #[test]
    fn two_node_pair() {
        let g = Graph::path(2);
        let dep = grid_dep(&[(0, 0), (3, 4)], 8);
        let est = estimate_mean_hops(&g, &dep, DestinationRule::Uniform, 50, 1).unwrap();
        assert_eq!((est.mean, est.stderr), (7.0, 0.0));
        let h = estimate_hierarchical_hops(&g, &dep, 20, 1).unwrap();
        assert_eq!(h.mean, 7.0);
    }

    #[test]
    fn co_celled_nodes_need_no_hops() {
        let g = Graph::complete(4);
        let dep = grid_dep(&[(1, 1); 4], 4);
        for rule in [DestinationRule::Uniform, DestinationRule::PowerLaw { beta: 2.0 }, DestinationRule::Hierarchical] {
            assert_eq!(estimate_mean_hops(&g, &dep, rule, 30, 2).unwrap().mean, 0.0);
        }
    }

    #[test]
    fn path_sums_edge_hops() {
        let g = Graph::path(3);
        let dep = grid_dep(&[(0, 0), (3, 0), (3, 4)], 8);
        let mut sampler = HopSampler::new(&g, &dep);
        sampler.bfs.run(&g, 0, u32::MAX, Some(2));
        assert_eq!(sampler.bfs.path_hops(&g, &dep, 2), 7);
        assert_eq!(dep.grid_hops(0, 2), 7);
    }

    #[test]
    fn lexicographic_parent() {
        // 0 reaches 3 through 1 or 2; the walk back from 3 takes 1.
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let dep = grid_dep(&[(0, 0), (0, 5), (5, 0), (5, 5)], 8);
        let mut bfs = Bfs::new(4);
        bfs.run(&g, 0, u32::MAX, Some(3));
        assert_eq!(bfs.path_hops(&g, &dep, 3), 10);
        // Hops are symmetric even though parents differ.
        bfs.run(&g, 3, u32::MAX, Some(0));
        assert_eq!(bfs.path_hops(&g, &dep, 0), 10);
    }

    #[test]
    fn powerlaw_probabilities() {
        let g = Graph::star(3);
        let positions = vec![[0.5, 0.5], [0.6, 0.5], [0.5, 0.7]];
        let dep = Deployment::from_positions(positions, 0.01, 1.0, 0.0).unwrap();
        let p = destination_probabilities(&g, &dep, 0, DestinationRule::PowerLaw { beta: 1.0 }).unwrap();
        assert!((p[0].1 - 2.0 / 3.0).abs() < 1e-9 && (p[1].1 - 1.0 / 3.0).abs() < 1e-9);
        let p0 = destination_probabilities(&g, &dep, 0, DestinationRule::PowerLaw { beta: 0.0 }).unwrap();
        assert!(p0.iter().all(|x| x.1 == 0.5));
    }

    #[test]
    fn beta_zero_matches_uniform_draw_for_draw() {
        let g = Graph::star(12);
        let dep = crate::wireless::deploy(12, 1.0, 0.5, 1.0, 5).unwrap();
        let mut a = stream_rng(1, 0, 0);
        let mut b = stream_rng(1, 0, 0);
        for _ in 0..1000 {
            let x = select_destination(&g, &dep, 0, DestinationRule::Uniform, &mut a).unwrap();
            let y = select_destination(&g, &dep, 0, DestinationRule::PowerLaw { beta: 0.0 }, &mut b).unwrap();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn close_contacts_are_clamped() {
        let g = Graph::star(3);
        let positions = vec![[0.5, 0.5], [0.5000001, 0.5], [0.50001, 0.5]];
        let dep = Deployment::from_positions(positions, 0.01, 1.0, 0.0).unwrap();
        let p = destination_probabilities(&g, &dep, 0, DestinationRule::PowerLaw { beta: 3.0 }).unwrap();
        assert!(p.iter().all(|x| x.1 == 0.5));
    }

    #[test]
    fn single_contact_always_chosen() {
        let g = Graph::path(2);
        let dep = grid_dep(&[(0, 0), (1, 1)], 4);
        let mut rng = stream_rng(3, 0, 0);
        for beta in [0.0, 1.0, 4.0] {
            assert_eq!(select_destination(&g, &dep, 0, DestinationRule::PowerLaw { beta }, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn level_rule_picks_exact_distance() {
        let g = Graph::path(6);
        let dep = grid_dep(&[(0, 0); 6], 2);
        let mut rng = stream_rng(3, 0, 0);
        for _ in 0..50 {
            let d = select_destination(&g, &dep, 2, DestinationRule::Level(2), &mut rng).unwrap();
            assert!(d == 0 || d == 4);
        }
        assert!(matches!(
            select_destination(&g, &dep, 0, DestinationRule::Level(6), &mut rng),
            Err(Error::NoDestination { source: 0 })
        ));
    }

    #[test]
    fn estimation_errors() {
        let g = Graph::empty(4);
        let dep = grid_dep(&[(0, 0); 4], 2);
        assert_eq!(estimate_mean_hops(&g, &dep, DestinationRule::Uniform, 5, 0), Err(Error::NoEligibleSource));
        assert_eq!(estimate_hierarchical_hops(&g, &dep, 5, 0), Err(Error::AllDisconnected));
        let p = Graph::path(3);
        let dep3 = grid_dep(&[(0, 0); 3], 2);
        assert_eq!(
            estimate_mean_hops(&p, &dep3, DestinationRule::Level(3), 5, 0),
            Err(Error::NoEligibleSource)
        );
    }

    #[test]
    fn isolated_sources_are_resampled() {
        let g = Graph::from_edges(5, [(0, 1)]).unwrap();
        let dep = grid_dep(&[(0, 0), (0, 2), (1, 1), (1, 1), (1, 1)], 4);
        let est = estimate_mean_hops(&g, &dep, DestinationRule::Uniform, 200, 4).unwrap();
        assert_eq!(est.mean, 2.0);
        assert!(est.resamples > 0);
    }

    #[test]
    fn trials_are_order_independent() {
        let g = Graph::cycle(30);
        let dep = crate::wireless::deploy(30, 2.0, 0.5, 0.0, 1).unwrap();
        let forward = estimate_mean_hops(&g, &dep, DestinationRule::Level(3), 40, 8).unwrap();
        let mut sampler = HopSampler::new(&g, &dep);
        let mut backward: Vec<TrialOutcome> =
            (0..40).rev().map(|t| sampler.trial(DestinationRule::Level(3), 8, t).unwrap()).collect();
        backward.reverse();
        let again = HopEstimate::from_outcomes(DestinationRule::Level(3), &backward, forward.empty_cell_fraction);
        assert_eq!(forward, again);
    }
}
