//! Fixed corpora of weight vectors and small graphs.

use fractalcap_core::graph::Graph;
use fractalcap_core::rng::stream_rng;
use fractalcap_core::socialgraph::generate;
use rand::Rng;

const CORPUS_SEED: u64 = 0x5eed;

/// Weight vectors with `1 <= N <= 12`: equal, geometric, spread over many
/// decades, and random.
pub fn weight_vectors() -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut rng = stream_rng(CORPUS_SEED, 1, 0);
    for n in 1..=12usize {
        out.push(vec![1.0; n]);
        out.push((0..n).map(|i| 2f64.powi(i as i32)).collect());
        out.push((0..n).map(|i| 10f64.powi(if i % 2 == 0 { 30 } else { -30 } + i as i32)).collect());
        for _ in 0..4 {
            out.push((0..n).map(|_| rng.gen_range(0.05..20.0)).collect());
        }
    }
    out
}

fn grid(w: usize, h: usize) -> Graph {
    let id = |x: usize, y: usize| y * w + x;
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < h {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    Graph::from_edges(w * h, edges).expect("grid edges")
}

fn binary_tree(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|v| ((v - 1) / 2, v))).expect("tree edges")
}

fn caterpillar(spine: usize) -> Graph {
    let mut edges: Vec<(usize, usize)> = (1..spine).map(|v| (v - 1, v)).collect();
    edges.extend((0..spine).map(|v| (v, spine + v)));
    Graph::from_edges(2 * spine, edges).expect("caterpillar edges")
}

/// Small graphs (`n <= 12`) for exhaustive covering checks.
pub fn small_graphs() -> Vec<(String, Graph)> {
    let mut out: Vec<(String, Graph)> = Vec::new();
    for n in 1..=12 {
        out.push((format!("path{n}"), Graph::path(n)));
        out.push((format!("star{n}"), Graph::star(n)));
        out.push((format!("tree{n}"), binary_tree(n)));
        if n >= 3 {
            out.push((format!("cycle{n}"), Graph::cycle(n)));
        }
        if n <= 8 {
            out.push((format!("complete{n}"), Graph::complete(n)));
        }
    }
    for (w, h) in [(2, 2), (2, 3), (3, 3), (2, 5), (3, 4), (2, 6)] {
        out.push((format!("grid{w}x{h}"), grid(w, h)));
    }
    for spine in 2..=6 {
        out.push((format!("caterpillar{spine}"), caterpillar(spine)));
    }
    let mut rng = stream_rng(CORPUS_SEED, 2, 0);
    for i in 0..40 {
        let n = rng.gen_range(4..=12usize);
        let p = rng.gen_range(0.15..0.6);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        out.push((format!("random{i}"), Graph::from_edges(n, edges).expect("random edges")));
    }
    for seed in 0..10 {
        let g = generate(12, 2.5, 2.5, 3, seed).expect("small social graph").graph;
        out.push((format!("social{seed}"), g));
    }
    out
}
