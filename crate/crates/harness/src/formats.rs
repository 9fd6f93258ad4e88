//! Exchange formats for graphs, deployments, coverings, level profiles and
//! fractal fit reports.

use std::io::{BufRead, Write};

use fractalcap_core::boxcover::{BoxCovering, FractalFit};
use fractalcap_core::graph::Graph;
use fractalcap_core::hierarchy::LevelProfile;
use fractalcap_core::wireless::Deployment;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GRAPH_MAGIC: &str = "# fractalcap-graph v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphHeader {
    pub n: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub seed: u64,
}

fn io(e: std::io::Error) -> Error {
    Error::Csv(e.into())
}

/// Header line followed by one `u v` line per edge, `u < v`, ascending.
pub fn write_graph<W: Write>(graph: &Graph, header: &GraphHeader, mut out: W) -> Result<()> {
    writeln!(
        out,
        "{GRAPH_MAGIC} n={} gamma={} epsilon={} seed={}",
        header.n, header.gamma, header.epsilon, header.seed
    )
    .map_err(io)?;
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}").map_err(io)?;
    }
    Ok(())
}

fn header_field<'a>(fields: &[&'a str], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find_map(|f| f.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
        .ok_or_else(|| Error::Format(format!("graph header lacks {key}")))
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Format(format!("bad {what}: {s:?}")))
}

pub fn read_graph<R: BufRead>(input: R) -> Result<(GraphHeader, Graph)> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| Error::Format("empty graph file".into()))?.map_err(io)?;
    let rest = first
        .strip_prefix(GRAPH_MAGIC)
        .ok_or_else(|| Error::Format("missing graph header".into()))?;
    let fields: Vec<&str> = rest.split_whitespace().collect();
    let header = GraphHeader {
        n: parse(header_field(&fields, "n")?, "n")?,
        gamma: parse(header_field(&fields, "gamma")?, "gamma")?,
        epsilon: parse(header_field(&fields, "epsilon")?, "epsilon")?,
        seed: parse(header_field(&fields, "seed")?, "seed")?,
    };
    let mut edges = Vec::new();
    for line in lines {
        let line = line.map_err(io)?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(u), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Format(format!("bad edge line: {line:?}")));
        };
        edges.push((parse(u, "node")?, parse(v, "node")?));
    }
    Ok((header, Graph::from_edges(header.n, edges)?))
}

pub fn write_deployment_csv<W: Write>(dep: &Deployment, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node", "x", "y", "cell_i", "cell_j"])?;
    for v in 0..dep.node_count() {
        let p = dep.position(v);
        let (i, j) = dep.cell(v);
        w.write_record([v.to_string(), p[0].to_string(), p[1].to_string(), i.to_string(), j.to_string()])?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn write_covering_csv<W: Write>(covering: &BoxCovering, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node", "box"])?;
    for (v, b) in covering.assignment().iter().enumerate() {
        w.write_record([v.to_string(), b.to_string()])?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn write_level_profile_csv<W: Write>(profile: &LevelProfile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["level", "mean_level_degree", "pair_count", "ratio"])?;
    for row in profile.rows() {
        w.write_record([
            row.level.to_string(),
            row.mean_level_degree.to_string(),
            row.pair_count.to_string(),
            row.ratio.to_string(),
        ])?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

/// JSON summary of a fractal exponent fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    #[serde(rename = "lB_grid")]
    pub l_b_grid: Vec<usize>,
    #[serde(rename = "NB")]
    pub n_b: Vec<usize>,
    #[serde(rename = "dB")]
    pub d_b: f64,
    pub dg: Option<f64>,
    pub de: Option<f64>,
    #[serde(rename = "r2_dB")]
    pub r2_d_b: Option<f64>,
    pub r2_dg: Option<f64>,
    pub r2_de: Option<f64>,
    pub gamma_hat: Option<f64>,
    pub epsilon_hat: Option<f64>,
}

impl From<&FractalFit> for FitReport {
    fn from(fit: &FractalFit) -> Self {
        FitReport {
            l_b_grid: fit.samples.iter().map(|s| s.l_b).collect(),
            n_b: fit.samples.iter().map(|s| s.boxes).collect(),
            d_b: fit.d_b,
            dg: fit.d_g,
            de: fit.d_e,
            r2_d_b: fit.r2_d_b,
            r2_dg: fit.r2_d_g,
            r2_de: fit.r2_d_e,
            gamma_hat: fit.gamma_hat,
            epsilon_hat: fit.epsilon_hat,
        }
    }
}
