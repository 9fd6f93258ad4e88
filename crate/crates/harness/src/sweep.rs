//! Parameter sweeps and the versioned results CSV.

use std::io::{Read, Write};
use std::time::Instant;

use fractalcap_core::graph::Graph;
use fractalcap_core::socialgraph::generate;
use fractalcap_core::wireless::{capacity_estimate, deploy, Deployment, DestinationRule, HopEstimate, HopSampler};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, RuleConfig};
use crate::error::{Error, Result};

pub const SWEEP_CSV_VERSION: &str = "# fractalcap-sweep v1";

pub const SWEEP_COLUMNS: [&str; 15] = [
    "experiment_id",
    "n",
    "seed",
    "gamma",
    "epsilon",
    "rule",
    "beta",
    "trials",
    "mean_hops",
    "stderr_hops",
    "cells",
    "T",
    "lambda_est",
    "empty_cell_fraction",
    "runtime_ms",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub experiment_id: String,
    pub n: usize,
    pub seed: u64,
    pub gamma: f64,
    pub epsilon: f64,
    pub rule: String,
    pub beta: Option<f64>,
    pub trials: usize,
    pub mean_hops: f64,
    pub stderr_hops: f64,
    pub cells: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub lambda_est: f64,
    pub empty_cell_fraction: f64,
    pub runtime_ms: f64,
}

impl SweepRow {
    /// Numeric column by CSV name.
    pub fn column(&self, name: &str) -> Option<f64> {
        Some(match name {
            "n" => self.n as f64,
            "seed" => self.seed as f64,
            "gamma" => self.gamma,
            "epsilon" => self.epsilon,
            "beta" => self.beta?,
            "trials" => self.trials as f64,
            "mean_hops" => self.mean_hops,
            "stderr_hops" => self.stderr_hops,
            "cells" => self.cells as f64,
            "T" => self.t as f64,
            "lambda_est" => self.lambda_est,
            "empty_cell_fraction" => self.empty_cell_fraction,
            "runtime_ms" => self.runtime_ms,
            _ => return None,
        })
    }
}

/// Hop estimate with trials spread over the rayon pool. Trial `t` always
/// uses the same random stream and outcomes are aggregated in index order,
/// so the result matches the sequential estimator bit for bit.
pub fn estimate_hops_parallel(
    graph: &Graph,
    dep: &Deployment,
    rule: DestinationRule,
    trials: usize,
    seed: u64,
) -> Result<HopEstimate> {
    if trials == 0 {
        return Err(fractalcap_core::Error::InvalidParameter { name: "trials", value: 0.0 }.into());
    }
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map_init(|| HopSampler::new(graph, dep), |sampler, t| sampler.trial(rule, seed, t))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(HopEstimate::from_outcomes(rule, &outcomes, dep.occupancy_report()))
}

fn run_cell(config: &ExperimentConfig, id: &str, n: usize, seed: u64, rules: &[RuleConfig]) -> Vec<SweepRow> {
    let start = Instant::now();
    let built = generate(n, config.gamma, config.epsilon, config.kmax_for(n), seed)
        .and_then(|g| Ok((g, deploy(n, config.c0, config.c1, config.delta, seed)?)));
    let (social, dep) = match built {
        Ok(pair) => pair,
        Err(e) => {
            log::warn!("skipping n={n} seed={seed}: {e}");
            return Vec::new();
        }
    };
    let setup_ms = start.elapsed().as_secs_f64() * 1e3;
    rules
        .iter()
        .filter_map(|&rule| {
            let t0 = Instant::now();
            let row = estimate_hops_parallel(&social.graph, &dep, rule.destination_rule(), config.trials, seed)
                .and_then(|est| Ok((capacity_estimate(est.mean, &dep)?, est)));
            match row {
                Ok((cap, est)) => Some(SweepRow {
                    experiment_id: id.to_string(),
                    n,
                    seed,
                    gamma: config.gamma,
                    epsilon: config.epsilon,
                    rule: rule.label().to_string(),
                    beta: rule.beta(),
                    trials: est.trials,
                    mean_hops: est.mean,
                    stderr_hops: est.stderr,
                    cells: dep.cell_count(),
                    t: dep.tdma_spacing(),
                    lambda_est: cap.lambda,
                    empty_cell_fraction: est.empty_cell_fraction,
                    runtime_ms: setup_ms + t0.elapsed().as_secs_f64() * 1e3,
                }),
                Err(e) => {
                    log::warn!("skipping n={n} seed={seed} rule={}: {e}", rule.label());
                    None
                }
            }
        })
        .collect()
}

/// Rows for every `(n, seed)` in config order, for the configured rule.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    run_sweep_rules(config, &[config.rule])
}

/// Like [`run_sweep`], evaluating several rules on each generated graph and
/// deployment. Rows are ordered by `(n, seed, rule)` in the given order.
pub fn run_sweep_rules(config: &ExperimentConfig, rules: &[RuleConfig]) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let id = config.experiment_id();
    let cells: Vec<(usize, u64)> =
        config.n_values.iter().flat_map(|&n| config.seeds.iter().map(move |&s| (n, s))).collect();
    let rows: Vec<Vec<SweepRow>> = cells.par_iter().map(|&(n, seed)| run_cell(config, &id, n, seed, rules)).collect();
    Ok(rows.into_iter().flatten().collect())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_VERSION}").map_err(|e| Error::Csv(e.into()))?;
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(SWEEP_COLUMNS)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(SWEEP_COLUMNS) {
        return Err(Error::Format(format!("unexpected sweep header: {headers:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// CSV text with the `runtime_ms` column removed, for byte comparisons.
pub fn without_runtime(csv_text: &str) -> String {
    csv_text
        .lines()
        .map(|line| if line.starts_with('#') { line } else { line.rsplit_once(',').map_or(line, |(head, _)| head) })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n_values: vec![600, 900],
            trials: 200,
            seeds: vec![1, 2],
            c0: 2.0,
            ..ExperimentConfig::default()
        }
    }

    fn csv_text(rows: &[SweepRow]) -> String {
        let mut buf = Vec::new();
        write_sweep_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn one_cell_gives_one_row() {
        let cfg = ExperimentConfig { n_values: vec![600], seeds: vec![4], ..small() };
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].n, rows[0].seed, rows[0].rule.as_str()), (600, 4, "uniform"));
        assert!(rows[0].mean_hops > 0.0 && rows[0].lambda_est > 0.0);
    }

    #[test]
    fn rows_follow_config_order_and_are_deterministic() {
        let cfg = small();
        let a = run_sweep(&cfg).unwrap();
        let order: Vec<(usize, u64)> = a.iter().map(|r| (r.n, r.seed)).collect();
        assert_eq!(order, [(600, 1), (600, 2), (900, 1), (900, 2)]);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = single.install(|| run_sweep(&cfg).unwrap());
        assert_eq!(without_runtime(&csv_text(&a)), without_runtime(&csv_text(&b)));
    }

    #[test]
    fn parallel_estimate_matches_sequential() {
        let social = generate(800, 2.5, 2.5, 28, 3).unwrap();
        let dep = deploy(800, 2.0, 1.0, 1.0, 3).unwrap();
        for rule in [DestinationRule::Uniform, DestinationRule::PowerLaw { beta: 2.0 }, DestinationRule::Hierarchical] {
            let seq = fractalcap_core::wireless::estimate_mean_hops(&social.graph, &dep, rule, 300, 9).unwrap();
            let par = estimate_hops_parallel(&social.graph, &dep, rule, 300, 9).unwrap();
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn csv_round_trips() {
        let mut rows = run_sweep_rules(&small(), &[RuleConfig::Uniform {}, RuleConfig::Powerlaw { beta: 1.5 }]).unwrap();
        rows[0].runtime_ms = 0.1 + 0.2;
        let text = csv_text(&rows);
        assert!(text.starts_with(SWEEP_CSV_VERSION));
        assert_eq!(text.lines().nth(1).unwrap(), SWEEP_COLUMNS.join(","));
        assert_eq!(read_sweep_csv(text.as_bytes()).unwrap(), rows);
        assert!(rows.iter().all(|r| r.mean_hops.is_finite() && r.lambda_est.is_finite()));
        assert_eq!(rows[1].beta, Some(1.5));
        assert_eq!(rows[0].beta, None);
    }

    #[test]
    fn failing_cells_are_skipped() {
        // c0 = 20 leaves a single cell for n = 600, which deploy rejects.
        let cfg = ExperimentConfig { c0: 20.0, n_values: vec![600], ..small() };
        assert!(run_sweep(&cfg).unwrap().is_empty());
    }

    #[test]
    fn empty_output_still_has_header() {
        let text = csv_text(&[]);
        assert!(read_sweep_csv(text.as_bytes()).unwrap().is_empty());
    }
}
