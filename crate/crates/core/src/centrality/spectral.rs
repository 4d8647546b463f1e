//! PageRank and HITS hub scores on the weighted coauthorship graph, each
//! undirected edge usable in both directions.

use crate::error::{Error, Result};
use crate::graph::CoauthorGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankParams {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

/// One step of P(u) = (1−D)/n + D Σ_{v∈n(u)} P(v) w_uv / W_v, with the mass of
/// isolated vertices spread uniformly.
fn pagerank_step(graph: &CoauthorGraph, strength: &[f64], damping: f64, x: &[f64]) -> Vec<f64> {
    let n = graph.n();
    let dangling: f64 = (0..n).filter(|&v| strength[v] == 0.0).map(|v| x[v]).sum();
    let base = (1.0 - damping) / n as f64 + damping * dangling / n as f64;
    (0..n)
        .map(|u| {
            let inflow: f64 = graph
                .neighbors(u)
                .iter()
                .map(|&(v, w)| x[v] * w as f64 / strength[v])
                .sum();
            base + damping * inflow
        })
        .collect()
}

pub fn pagerank_scores(graph: &CoauthorGraph, params: PageRankParams) -> Result<Vec<f64>> {
    let n = graph.n();
    if n == 0 {
        return Err(Error::InvalidParameter("PageRank needs a non-empty graph".into()));
    }
    if !(0.0..=1.0).contains(&params.damping) {
        return Err(Error::InvalidParameter(format!(
            "damping {} outside [0, 1]",
            params.damping
        )));
    }
    let strength: Vec<f64> = (0..n)
        .map(|v| graph.neighbors(v).iter().map(|&(_, w)| w as f64).sum())
        .collect();
    let mut x = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iter {
        let next = pagerank_step(graph, &strength, params.damping, &x);
        residual = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if residual < params.tol {
            let total: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= total);
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        what: "PageRank",
        iterations: params.max_iter,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitsParams {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for HitsParams {
    fn default() -> Self {
        HitsParams {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

fn adjacency_times(graph: &CoauthorGraph, x: &[f64]) -> Vec<f64> {
    (0..graph.n())
        .map(|u| graph.neighbors(u).iter().map(|&(v, w)| w as f64 * x[v]).sum())
        .collect()
}

fn normalize_l2(x: &mut [f64]) -> bool {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    true
}

/// HITS from h = a = 1: a ← Aᵀh, h ← Aa, each normalized to unit 2-norm.
/// Returns h. A graph without edges has all-zero scores.
pub fn hub_scores(graph: &CoauthorGraph, params: HitsParams) -> Result<Vec<f64>> {
    let n = graph.n();
    let mut h = vec![1.0; n];
    if !normalize_l2(&mut h) {
        return Ok(h);
    }
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iter {
        // The adjacency is symmetric, so Aᵀh = Ah.
        let mut a = adjacency_times(graph, &h);
        if !normalize_l2(&mut a) {
            return Ok(vec![0.0; n]);
        }
        let mut next = adjacency_times(graph, &a);
        normalize_l2(&mut next);
        residual = next.iter().zip(&h).map(|(x, y)| (x - y).abs()).sum();
        h = next;
        if residual < params.tol {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        what: "HITS",
        iterations: params.max_iter,
        residual,
    })
}
