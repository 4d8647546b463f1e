//! Shortest-path centralities over the distance view.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{shortest_paths, DistanceView};

/// Sources per parallel task. Partial sums are combined in chunk order, so the
/// result does not depend on the number of threads.
const CHUNK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairCounting {
    /// Each unordered pair {v, w} counted once.
    #[default]
    Unordered,
    /// (v, w) and (w, v) both counted; exactly twice the unordered scores.
    Ordered,
}

/// Brandes accumulation of Σ σ_vw(u) / σ_vw over pairs not containing u.
/// Disconnected pairs contribute nothing.
pub fn betweenness_scores(view: &DistanceView, pairs: PairCounting) -> Vec<f64> {
    let n = view.n();
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            let mut delta = vec![0.0; n];
            for &s in chunk {
                let sp = shortest_paths(view, s);
                delta.iter_mut().for_each(|d| *d = 0.0);
                for &w in sp.order.iter().rev() {
                    for &v in &sp.predecessors[w] {
                        delta[v] += sp.path_count[v] / sp.path_count[w] * (1.0 + delta[w]);
                    }
                    if w != s {
                        acc[w] += delta[w];
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    if pairs == PairCounting::Unordered {
        total.iter_mut().for_each(|t| *t /= 2.0);
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosenessForm {
    /// Σ_{v reachable} 1 / d(u, v); well defined on disconnected graphs.
    #[default]
    Harmonic,
    /// 1 / Σ_{v reachable} d(u, v), 0 for a vertex that reaches nothing.
    Classic,
}

pub fn closeness_scores(view: &DistanceView, form: ClosenessForm) -> Vec<f64> {
    (0..view.n())
        .into_par_iter()
        .map(|u| {
            let sp = shortest_paths(view, u);
            let reachable = sp.order.iter().filter(|&&v| v != u).map(|&v| sp.distance[v]);
            match form {
                ClosenessForm::Harmonic => reachable.map(|d| 1.0 / d).sum(),
                ClosenessForm::Classic => {
                    let total: f64 = reachable.sum();
                    if total > 0.0 {
                        1.0 / total
                    } else {
                        0.0
                    }
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CoauthorGraph;

    fn unit(n: usize, edges: &[(usize, usize)]) -> DistanceView {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1)).collect();
        let g = CoauthorGraph::from_edges((0..n).map(|i| format!("v{i}")).collect(), &e).unwrap();
        DistanceView::with_lengths(&g, |_| 1.0)
    }

    #[test]
    fn path_betweenness() {
        let b = betweenness_scores(&unit(3, &[(0, 1), (1, 2)]), PairCounting::Unordered);
        assert_eq!(b, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn cycle_of_four() {
        let b = betweenness_scores(&unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]), PairCounting::Unordered);
        assert_eq!(b, [0.5; 4]);
    }

    #[test]
    fn complete_graph_has_zero_betweenness() {
        let k4 = unit(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(betweenness_scores(&k4, PairCounting::Unordered), [0.0; 4]);
    }

    #[test]
    fn ordered_pairs_double() {
        let v = unit(5, &[(0, 1), (1, 2), (2, 3), (1, 3), (3, 4)]);
        let u = betweenness_scores(&v, PairCounting::Unordered);
        let o = betweenness_scores(&v, PairCounting::Ordered);
        for (a, b) in u.iter().zip(&o) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn closeness_on_path() {
        let v = unit(4, &[(0, 1), (1, 2)]);
        let c = closeness_scores(&v, ClosenessForm::Harmonic);
        assert_eq!(c, [1.5, 2.0, 1.5, 0.0]);
        let classic = closeness_scores(&v, ClosenessForm::Classic);
        assert_eq!(classic, [1.0 / 3.0, 0.5, 1.0 / 3.0, 0.0]);
    }
}
