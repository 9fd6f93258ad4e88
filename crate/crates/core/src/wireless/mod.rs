//! Unit-square deployment, cell grid, destination rules, hop estimation and
//! TDMA capacity.

mod routing;
mod schedule;

pub use routing::{
    estimate_hierarchical_hops, estimate_level_hops, estimate_mean_hops, hierarchical_trial, hop_trial,
    destination_probabilities, select_destination, DestinationRule, HopEstimate, HopSampler, LevelHops, TrialOutcome,
};
pub use schedule::{
    capacity_estimate, protocol_check, tdma_parameters, transport_stability_sim, Capacity, TransportOutcome,
};

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, DEPLOY};

/// A grid cell `(i, j)`: `i` indexes the x axis, `j` the y axis.
pub type Cell = (usize, usize);

/// `r(n) = c0 * sqrt(ln n / n)`.
pub fn transmission_range(n: usize, c0: f64) -> f64 {
    let n = n as f64;
    c0 * libm::sqrt(libm::log(n) / n)
}

/// Node positions on `[0,1)²` with their cell grid and TDMA spacing.
///
/// The grid has `dims = floor(1 / (c1 * r))` cells per axis. Cells tile the
/// square exactly, so their actual side `1 / dims` is never below the
/// nominal `c1 * r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    positions: Vec<[f64; 2]>,
    cells: Vec<Cell>,
    c0: Option<f64>,
    c1: f64,
    delta: f64,
    r: f64,
    dims: usize,
    t: usize,
}

/// Places `n` nodes uniformly at random.
pub fn deploy(n: usize, c0: f64, c1: f64, delta: f64, seed: u64) -> Result<Deployment> {
    if n < 2 {
        return Err(Error::InvalidParameter { name: "n", value: n as f64 });
    }
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(Error::InvalidParameter { name: "c0", value: c0 });
    }
    let r = transmission_range(n, c0);
    let mut rng = stream_rng(seed, DEPLOY, 0);
    let positions = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let mut dep = Deployment::from_positions(positions, r, c1, delta)?;
    if dep.dims < 2 {
        return Err(Error::Configuration("fewer than two cells per axis"));
    }
    dep.c0 = Some(c0);
    Ok(dep)
}

impl Deployment {
    /// Builds a deployment from explicit positions and range. A single-cell
    /// grid is allowed here.
    pub fn from_positions(positions: Vec<[f64; 2]>, r: f64, c1: f64, delta: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter { name: "r", value: r });
        }
        if !(c1 > 0.0 && c1.is_finite()) {
            return Err(Error::InvalidParameter { name: "c1", value: c1 });
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter { name: "delta", value: delta });
        }
        for p in &positions {
            for &c in p {
                if !(0.0..1.0).contains(&c) {
                    return Err(Error::InvalidParameter { name: "position", value: c });
                }
            }
        }
        let raw = libm::floor(1.0 / (c1 * r));
        if raw < 1.0 {
            return Err(Error::Configuration("cell side exceeds the unit square"));
        }
        if raw > u32::MAX as f64 {
            return Err(Error::Configuration("grid too fine"));
        }
        let dims = raw as usize;
        let cells = positions.iter().map(|p| cell_of(p, dims)).collect();
        Ok(Deployment { positions, cells, c0: None, c1, delta, r, dims, t: tdma_parameters(c1, delta) })
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> [f64; 2] {
        self.positions[v]
    }

    pub fn cell(&self, v: usize) -> Cell {
        self.cells[v]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Range constant, when the deployment came from [`deploy`].
    pub fn c0(&self) -> Option<f64> {
        self.c0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Transmission range `r`.
    pub fn range(&self) -> f64 {
        self.r
    }

    /// Nominal cell side `c1 * r`.
    pub fn cell_side(&self) -> f64 {
        self.c1 * self.r
    }

    /// Side of the cells actually used, `1 / dims`.
    pub fn grid_side(&self) -> f64 {
        1.0 / self.dims as f64
    }

    /// Cells per axis.
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn cell_count(&self) -> usize {
        self.dims * self.dims
    }

    /// TDMA spacing `T`.
    pub fn tdma_spacing(&self) -> usize {
        self.t
    }

    /// Overrides `T`, for adversarial checks.
    pub fn set_tdma_spacing(&mut self, t: usize) {
        self.t = t.max(1);
    }

    /// Phase `(i mod T, j mod T)` flattened to `0..T²`.
    pub fn phase(&self, cell: Cell) -> usize {
        (cell.0 % self.t) * self.t + cell.1 % self.t
    }

    /// Number of distinct phases, `T²`.
    pub fn phase_count(&self) -> usize {
        self.t * self.t
    }

    /// Manhattan distance between the cells of `u` and `v`.
    pub fn grid_hops(&self, u: usize, v: usize) -> usize {
        cell_hops(self.cells[u], self.cells[v])
    }

    /// Euclidean distance between two nodes.
    pub fn distance(&self, u: usize, v: usize) -> f64 {
        let (a, b) = (self.positions[u], self.positions[v]);
        libm::hypot(a[0] - b[0], a[1] - b[1])
    }

    /// Fraction of grid cells holding no node.
    pub fn occupancy_report(&self) -> f64 {
        let mut occupied = alloc::vec![false; self.cell_count()];
        for &(i, j) in &self.cells {
            occupied[i * self.dims + j] = true;
        }
        occupied.iter().filter(|o| !**o).count() as f64 / self.cell_count() as f64
    }
}

fn cell_of(p: &[f64; 2], dims: usize) -> Cell {
    let idx = |c: f64| ((c * dims as f64) as usize).min(dims - 1);
    (idx(p[0]), idx(p[1]))
}

/// Manhattan distance between two cells.
pub fn cell_hops(a: Cell, b: Cell) -> usize {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

/// Fraction of empty cells.
pub fn occupancy_report(dep: &Deployment) -> f64 {
    dep.occupancy_report()
}

/// Manhattan cell distance between two deployed nodes.
pub fn grid_hops(dep: &Deployment, u: usize, v: usize) -> usize {
    dep.grid_hops(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn range_and_grid() {
        let dep = deploy(10_000, 1.0, 1.0, 1.0, 3).unwrap();
        assert!((dep.range() - 0.030_349).abs() < 1e-6);
        assert!((dep.range() - libm::sqrt(libm::log(1e4) / 1e4)).abs() < 1e-12);
        assert_eq!(dep.dims(), 32);
        assert_eq!(dep.tdma_spacing(), 4);
        assert!(dep.positions().iter().all(|p| p.iter().all(|c| (0.0..1.0).contains(c))));
        for v in 0..dep.node_count() {
            let p = dep.position(v);
            let (i, j) = dep.cell(v);
            let side = dep.grid_side();
            assert!(i as f64 * side <= p[0] + 1e-12 && p[0] < (i + 1) as f64 * side + 1e-12);
            assert!(j as f64 * side <= p[1] + 1e-12 && p[1] < (j + 1) as f64 * side + 1e-12);
        }
    }

    #[test]
    fn deploy_is_deterministic() {
        assert_eq!(deploy(500, 1.0, 1.0, 1.0, 9).unwrap(), deploy(500, 1.0, 1.0, 1.0, 9).unwrap());
        assert_ne!(deploy(500, 1.0, 1.0, 1.0, 9).unwrap(), deploy(500, 1.0, 1.0, 1.0, 10).unwrap());
    }

    #[test]
    fn tiny_grid_is_rejected() {
        assert!(matches!(deploy(3, 1.0, 1.0, 1.0, 0), Err(Error::Configuration(_))));
        assert!(deploy(1, 1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn occupancy_examples() {
        let dep = Deployment::from_positions(vec![[0.1, 0.1]], 0.5, 1.0, 0.0).unwrap();
        assert_eq!(dep.dims(), 2);
        assert_eq!(dep.occupancy_report(), 0.75);
        let one = Deployment::from_positions(vec![[0.1, 0.1]], 1.0, 1.0, 0.0).unwrap();
        assert_eq!(one.cell_count(), 1);
        assert_eq!(one.occupancy_report(), 0.0);
    }

    #[test]
    fn hop_examples() {
        assert_eq!(cell_hops((0, 0), (3, 4)), 7);
        assert_eq!(cell_hops((2, 2), (2, 2)), 0);
        assert_eq!(cell_hops((2, 2), (2, 5)), 3);
    }
}
