//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 1 when acceptance checks fail, 2 for usage, config and other
//! errors.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fractalcap_core::boxcover::{cover_grid, fit_fractal_exponents, GreedyOptions};
use fractalcap_core::hierarchy::{hierarchical_hop_factor, level_degree_profile, max_level};
use fractalcap_core::socialgraph::{generate, SocialGraph};
use fractalcap_core::wireless::{capacity_estimate, deploy, Deployment};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{io_err, Result};
use crate::formats::{self, FitReport, GraphHeader};
use crate::plot::emit_plot;
use crate::sweep::{estimate_hops_parallel, read_sweep_csv, run_sweep, write_sweep_csv};
use crate::verify::Verifier;

#[derive(Debug, Parser)]
#[command(name = "fractalcap", version, about = "Capacity scaling experiments on fractal social networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (JSON); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Instance {
    /// Node count; defaults to the first of n_values.
    #[arg(long)]
    n: Option<usize>,
    /// Seed; defaults to the first of seeds.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a social graph and write its edge list.
    Generate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: Instance,
    },
    /// Deploy nodes on the unit square and write their cells.
    Deploy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: Instance,
    },
    /// Estimate mean grid hops and capacity for one instance.
    Hops {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: Instance,
    },
    /// Run the configured sweep and write the results CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Box-cover a generated graph and fit its fractal exponents.
    Boxcover {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: Instance,
        /// Box sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4, 6])]
        grid: Vec<usize>,
    },
    /// Level-degree profile and hierarchical analytics.
    Hierarchy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        instance: Instance,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Run every acceptance check and write a JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Plot two sweep columns on log-log axes.
    Plot {
        #[command(flatten)]
        common: Common,
        /// Sweep CSV; defaults to sweep.csv in the output directory.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "n")]
        x: String,
        #[arg(long, default_value = "mean_hops")]
        y: String,
    },
}

struct Context {
    config: ExperimentConfig,
    out: PathBuf,
}

impl Context {
    fn new(common: &Common) -> Result<Self> {
        let config = match &common.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let out = common.out.clone().unwrap_or_else(|| config.output_dir.clone());
        fs::create_dir_all(&out).map_err(io_err(&out))?;
        Ok(Context { config, out })
    }

    fn instance(&self, inst: &Instance) -> (usize, u64) {
        (inst.n.unwrap_or(self.config.n_values[0]), inst.seed.unwrap_or(self.config.seeds[0]))
    }

    fn graph(&self, n: usize, seed: u64) -> Result<SocialGraph> {
        let c = &self.config;
        Ok(generate(n, c.gamma, c.epsilon, c.kmax_for(n), seed)?)
    }

    fn deployment(&self, n: usize, seed: u64) -> Result<Deployment> {
        let c = &self.config;
        Ok(deploy(n, c.c0, c.c1, c.delta, seed)?)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.out.join(name);
        Ok(BufWriter::new(File::create(&path).map_err(io_err(&path))?))
    }

    fn write_json(&self, name: &str, value: &impl serde::Serialize) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w).map_err(io_err(self.out.join(name)))?;
        w.flush().map_err(io_err(self.out.join(name)))
    }
}

fn done(path: &Path) {
    println!("wrote {}", path.display());
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Generate { common, instance } => {
            let ctx = Context::new(&common)?;
            let (n, seed) = ctx.instance(&instance);
            let sg = ctx.graph(n, seed)?;
            let header = GraphHeader { n, gamma: ctx.config.gamma, epsilon: ctx.config.epsilon, seed };
            formats::write_graph(&sg.graph, &header, ctx.create("graph.txt")?)?;
            done(&ctx.out.join("graph.txt"));
        }
        Command::Deploy { common, instance } => {
            let ctx = Context::new(&common)?;
            let (n, seed) = ctx.instance(&instance);
            let dep = ctx.deployment(n, seed)?;
            formats::write_deployment_csv(&dep, ctx.create("deployment.csv")?)?;
            done(&ctx.out.join("deployment.csv"));
        }
        Command::Hops { common, instance } => {
            let ctx = Context::new(&common)?;
            let (n, seed) = ctx.instance(&instance);
            let sg = ctx.graph(n, seed)?;
            let dep = ctx.deployment(n, seed)?;
            let rule = ctx.config.rule;
            let est = estimate_hops_parallel(&sg.graph, &dep, rule.destination_rule(), ctx.config.trials, seed)?;
            let cap = capacity_estimate(est.mean, &dep)?;
            let report = json!({
                "n": n, "seed": seed, "rule": rule.label(), "beta": rule.beta(),
                "trials": est.trials, "mean_hops": est.mean, "stderr_hops": est.stderr,
                "resamples": est.resamples, "cells": dep.cell_count(), "T": dep.tdma_spacing(),
                "lambda_est": cap.lambda, "degenerate": cap.degenerate,
                "empty_cell_fraction": est.empty_cell_fraction,
            });
            println!("{report}");
            ctx.write_json("hops.json", &report)?;
        }
        Command::Sweep { common } => {
            let ctx = Context::new(&common)?;
            let rows = run_sweep(&ctx.config)?;
            write_sweep_csv(&rows, ctx.create("sweep.csv")?)?;
            done(&ctx.out.join("sweep.csv"));
        }
        Command::Boxcover { common, instance, grid } => {
            let ctx = Context::new(&common)?;
            let (n, seed) = ctx.instance(&instance);
            let sg = ctx.graph(n, seed)?;
            let covers = cover_grid(&sg.graph, &grid, seed, &GreedyOptions::default());
            if let Some(first) = covers.first() {
                formats::write_covering_csv(first, ctx.create("covering.csv")?)?;
                done(&ctx.out.join("covering.csv"));
            }
            let fit = fit_fractal_exponents(&sg.graph, &grid, seed)?;
            ctx.write_json("fit.json", &FitReport::from(&fit))?;
            done(&ctx.out.join("fit.json"));
        }
        Command::Hierarchy { common, instance, levels } => {
            let ctx = Context::new(&common)?;
            let (n, seed) = ctx.instance(&instance);
            let sg = ctx.graph(n, seed)?;
            let profile = level_degree_profile(&sg.graph, levels)?;
            formats::write_level_profile_csv(&profile, ctx.create("level_profile.csv")?)?;
            done(&ctx.out.join("level_profile.csv"));
            let (g, e) = (ctx.config.gamma, ctx.config.epsilon);
            let analytics = json!({
                "gamma": g, "epsilon": e, "n": n,
                "max_level": max_level(g, e, n).ok(),
                "hop_factor": hierarchical_hop_factor(g, e, n).ok(),
            });
            ctx.write_json("hierarchy.json", &analytics)?;
        }
        Command::Verify { common } => {
            let ctx = Context::new(&common)?;
            let verifier = Verifier::new(common.config.as_ref().map(|_| ctx.config.clone()));
            let report = verifier.run_all();
            for c in &report.criteria {
                println!("{}", c.line());
            }
            ctx.write_json("verify_report.json", &report)?;
            done(&ctx.out.join("verify_report.json"));
            return Ok(report.all_pass());
        }
        Command::Plot { common, input, x, y } => {
            let ctx = Context::new(&common)?;
            let input = input.unwrap_or_else(|| ctx.out.join("sweep.csv"));
            let file = File::open(&input).map_err(io_err(&input))?;
            let rows = read_sweep_csv(BufReader::new(file))?;
            let svg = emit_plot(&rows, &x, &y)?;
            let name = format!("{y}_vs_{x}.svg");
            let mut w = ctx.create(&name)?;
            w.write_all(svg.as_bytes()).map_err(io_err(ctx.out.join(&name)))?;
            w.flush().map_err(io_err(ctx.out.join(&name)))?;
            done(&ctx.out.join(name));
        }
    }
    Ok(true)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
