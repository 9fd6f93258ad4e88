use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{routing::select_destination, Cell, Deployment, DestinationRule};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math::compensated_sum;
use crate::rng::{stream_rng, PROTOCOL, TRANSPORT};

/// `T = ceil((2 + delta) / c1) + 1`.
pub fn tdma_parameters(c1: f64, delta: f64) -> usize {
    libm::ceil((2.0 + delta) / c1) as usize + 1
}

fn uniform_in_cell<R: Rng>(cell: Cell, side: f64, rng: &mut R) -> [f64; 2] {
    [(cell.0 as f64 + rng.gen::<f64>()) * side, (cell.1 as f64 + rng.gen::<f64>()) * side]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

fn offset(cell: Cell, di: isize, dj: isize, dims: usize) -> Option<Cell> {
    let i = cell.0.checked_add_signed(di)?;
    let j = cell.1.checked_add_signed(dj)?;
    (i < dims && j < dims).then_some((i, j))
}

/// Samples transmitter/receiver/interferer triples and counts protocol-model
/// violations `|X_k - X_j| < (1 + delta) |X_i - X_j|`.
///
/// The transmitter sits in a random cell and sends to a receiver within range
/// in a 4-adjacent cell. The interferer is uniform in a random co-phase cell
/// from the nearest ring (offsets in `{-T, 0, T}²`), which is where the bound
/// is tightest.
pub fn protocol_check(dep: &Deployment, samples: usize, seed: u64) -> usize {
    let dims = dep.dims();
    if dims < 2 {
        return 0;
    }
    let t = dep.tdma_spacing() as isize;
    let side = dep.grid_side();
    let r = dep.range();
    let guard = 1.0 + dep.delta();
    let mut rng = stream_rng(seed, PROTOCOL, 0);
    let mut violations = 0;
    for _ in 0..samples {
        let a = (rng.gen_range(0..dims), rng.gen_range(0..dims));
        let adjacent: Vec<Cell> =
            [(-1, 0), (1, 0), (0, -1), (0, 1)].iter().filter_map(|&(di, dj)| offset(a, di, dj, dims)).collect();
        let b = adjacent[rng.gen_range(0..adjacent.len())];
        let co_phase: Vec<Cell> = [-t, 0, t]
            .iter()
            .flat_map(|&di| [-t, 0, t].map(move |dj| (di, dj)))
            .filter(|&(di, dj)| (di, dj) != (0, 0))
            .filter_map(|(di, dj)| offset(a, di, dj, dims))
            .collect();
        if co_phase.is_empty() {
            continue;
        }
        let c = co_phase[rng.gen_range(0..co_phase.len())];
        let mut pair = None;
        for _ in 0..10_000 {
            let xi = uniform_in_cell(a, side, &mut rng);
            let xj = uniform_in_cell(b, side, &mut rng);
            if dist(xi, xj) <= r {
                pair = Some((xi, xj));
                break;
            }
        }
        let Some((xi, xj)) = pair else { continue };
        let xk = uniform_in_cell(c, side, &mut rng);
        if dist(xk, xj) < guard * dist(xi, xj) {
            violations += 1;
        }
    }
    violations
}

/// Per-user sustainable rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacity {
    pub lambda: f64,
    /// Set when `E[X] = 0`; `lambda` is then the one-hop bound.
    pub degenerate: bool,
}

/// `lambda = (cells / T²) / (n * E[X])` with unit bandwidth.
pub fn capacity_estimate(e_x: f64, dep: &Deployment) -> Result<Capacity> {
    if !(e_x >= 0.0 && e_x.is_finite()) {
        return Err(Error::InvalidParameter { name: "E_X", value: e_x });
    }
    let per_slot = dep.cell_count() as f64 / dep.phase_count() as f64;
    let n = dep.node_count() as f64;
    if e_x == 0.0 {
        return Ok(Capacity { lambda: per_slot / n, degenerate: true });
    }
    Ok(Capacity { lambda: per_slot / (n * e_x), degenerate: false })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportOutcome {
    pub stable: bool,
    /// Mean queue length per cell after each round.
    pub trajectory: Vec<f64>,
    pub generated: usize,
    pub delivered: usize,
    /// Arrivals dropped because the source had no eligible destination.
    pub dropped: usize,
}

fn step_toward(from: Cell, to: Cell) -> Cell {
    if from.0 != to.0 {
        (if to.0 > from.0 { from.0 + 1 } else { from.0 - 1 }, from.1)
    } else if to.1 > from.1 {
        (from.0, from.1 + 1)
    } else {
        (from.0, from.1 - 1)
    }
}

fn quartile_mean(xs: &[f64], q: usize) -> f64 {
    let len = xs.len();
    let (lo, hi) = (len * q / 4, len * (q + 1) / 4);
    if hi <= lo {
        return 0.0;
    }
    compensated_sum(xs[lo..hi].iter().copied()) / (hi - lo) as f64
}

/// Slot-level queueing simulation of the TDMA grid.
///
/// Each round is one slot. Every user emits a packet with probability
/// `lambda` toward a rule-drawn destination; the packet joins the FIFO of its
/// source cell. In slot `s` the cells of phase `s mod T²` each forward their
/// head packet one cell along an x-then-y route; a packet leaves the system
/// on reaching the destination cell. The run is stable when the mean queue
/// length over the last quarter is at most twice that over the second.
pub fn transport_stability_sim(
    graph: &Graph,
    dep: &Deployment,
    rule: DestinationRule,
    lambda: f64,
    rounds: usize,
    seed: u64,
) -> Result<TransportOutcome> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter { name: "lambda", value: lambda });
    }
    if rounds < dep.phase_count() {
        return Err(Error::InvalidParameter { name: "rounds", value: rounds as f64 });
    }
    if rule == DestinationRule::Hierarchical {
        return Err(Error::Unsupported("transport needs a per-source destination rule"));
    }
    let n = graph.node_count();
    let dims = dep.dims();
    let t = dep.tdma_spacing();
    let cells = dep.cell_count();
    let mut queues: Vec<VecDeque<Cell>> = vec![VecDeque::new(); cells];
    let mut rng = stream_rng(seed, TRANSPORT, 0);
    let log_keep = libm::log1p(-lambda);
    let mut trajectory = Vec::with_capacity(rounds);
    let (mut generated, mut delivered, mut dropped, mut queued) = (0usize, 0usize, 0usize, 0usize);
    let mut moves: Vec<(Cell, Cell)> = Vec::new();
    for slot in 0..rounds {
        if lambda > 0.0 && n > 0 {
            let mut v = 0usize;
            loop {
                let skip = if lambda >= 1.0 {
                    0
                } else {
                    let u: f64 = rng.gen();
                    let g = libm::floor(libm::log1p(-u) / log_keep);
                    if g >= n as f64 { n } else { g as usize }
                };
                v += skip;
                if v >= n {
                    break;
                }
                generated += 1;
                match select_destination(graph, dep, v, rule, &mut rng) {
                    Ok(dst) => {
                        let (from, to) = (dep.cell(v), dep.cell(dst));
                        if from == to {
                            delivered += 1;
                        } else {
                            queues[from.0 * dims + from.1].push_back(to);
                            queued += 1;
                        }
                    }
                    Err(Error::NoDestination { .. }) => dropped += 1,
                    Err(e) => return Err(e),
                }
                v += 1;
            }
        }
        let phase = slot % (t * t);
        let (pi, pj) = (phase / t, phase % t);
        moves.clear();
        for i in (pi..dims).step_by(t) {
            for j in (pj..dims).step_by(t) {
                if let Some(dst) = queues[i * dims + j].pop_front() {
                    moves.push((step_toward((i, j), dst), dst));
                }
            }
        }
        for &(at, dst) in &moves {
            if at == dst {
                delivered += 1;
                queued -= 1;
            } else {
                queues[at.0 * dims + at.1].push_back(dst);
            }
        }
        trajectory.push(queued as f64 / cells as f64);
    }
    let stable = quartile_mean(&trajectory, 3) <= 2.0 * quartile_mean(&trajectory, 1);
    Ok(TransportOutcome { stable, trajectory, generated, delivered, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wireless::deploy;

    #[test]
    fn spacing_examples() {
        assert_eq!(tdma_parameters(1.0, 1.0), 4);
        assert_eq!(tdma_parameters(1.0, 0.0), 3);
        assert_eq!(tdma_parameters(1.0, 2.0), 5);
        for c1 in [0.5, 1.0, 2.0] {
            for delta in [0.0, 1.0, 2.0] {
                let t = tdma_parameters(c1, delta) as f64;
                assert!(t >= (2.0 + delta) / c1);
                assert!((t - 1.0) * c1 >= 2.0 + delta);
            }
        }
    }

    #[test]
    fn phases() {
        let dep = deploy(10_000, 1.0, 1.0, 1.0, 0).unwrap();
        assert_eq!(dep.phase_count(), 16);
        assert_eq!(dep.phase((5, 6)), dep.phase((1, 2)));
        assert_ne!(dep.phase((5, 6)), dep.phase((5, 7)));
    }

    #[test]
    fn protocol_holds_and_breaks() {
        let mut dep = deploy(10_000, 1.0, 1.0, 1.0, 0).unwrap();
        assert_eq!(protocol_check(&dep, 10_000, 1), 0);
        dep.set_tdma_spacing(1);
        assert!(protocol_check(&dep, 10_000, 1) > 0);
        let single = Deployment::from_positions(alloc::vec![[0.5, 0.5]], 1.0, 1.0, 0.0).unwrap();
        assert_eq!(protocol_check(&single, 100, 1), 0);
    }

    #[test]
    fn capacity_arithmetic() {
        let dep = deploy(10_000, 1.0, 1.0, 1.0, 0).unwrap();
        let c = capacity_estimate(20.0, &dep).unwrap();
        assert!((c.lambda - 3.2e-4).abs() < 1e-15);
        assert!(!c.degenerate);
        let half = capacity_estimate(40.0, &dep).unwrap();
        assert!((half.lambda * 2.0 - c.lambda).abs() < 1e-18);
        assert!(capacity_estimate(0.0, &dep).unwrap().degenerate);
        assert!(capacity_estimate(-1.0, &dep).is_err());
    }

    #[test]
    fn idle_network_stays_empty() {
        let g = Graph::cycle(200);
        let dep = deploy(200, 2.0, 1.0, 1.0, 0).unwrap();
        let out = transport_stability_sim(&g, &dep, DestinationRule::Uniform, 0.0, 400, 0).unwrap();
        assert!(out.trajectory.iter().all(|&q| q == 0.0));
        assert!(out.stable);
        assert_eq!(out.generated, 0);
    }

    #[test]
    fn packets_are_conserved() {
        let g = Graph::cycle(300);
        let dep = deploy(300, 2.0, 1.0, 1.0, 2).unwrap();
        let out = transport_stability_sim(&g, &dep, DestinationRule::Uniform, 0.002, 2_000, 5).unwrap();
        let left = (out.trajectory.last().unwrap() * dep.cell_count() as f64).round() as usize;
        assert_eq!(out.generated, out.delivered + left + out.dropped);
        assert!(out.generated > 0);
    }

    #[test]
    fn rounds_must_cover_a_frame() {
        let g = Graph::cycle(200);
        let dep = deploy(200, 2.0, 1.0, 1.0, 0).unwrap();
        assert!(transport_stability_sim(&g, &dep, DestinationRule::Uniform, 0.1, 3, 0).is_err());
    }
}
