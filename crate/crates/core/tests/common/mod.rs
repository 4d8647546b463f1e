//! Reference implementations used as test oracles. They follow the textbook
//! definitions directly and share no code with the library.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Undirected weighted edge list over `n` vertices.
#[derive(Debug, Clone)]
pub struct SmallGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, u32)>,
}

impl SmallGraph {
    pub fn random(rng: &mut ChaCha8Rng, max_n: usize, max_w: u32) -> Self {
        let n = rng.random_range(1..=max_n);
        let density = rng.random_range(0.15..0.85);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < density {
                    edges.push((u, v, rng.random_range(1..=max_w)));
                }
            }
        }
        SmallGraph { n, edges }
    }

    pub fn names(&self) -> Vec<String> {
        // Zero-padded so sorted order equals index order.
        (0..self.n).map(|i| format!("v{i:02}")).collect()
    }

    pub fn neighbors(&self, u: usize) -> Vec<(usize, u32)> {
        self.edges
            .iter()
            .filter_map(|&(a, b, w)| {
                if a == u {
                    Some((b, w))
                } else if b == u {
                    Some((a, w))
                } else {
                    None
                }
            })
            .collect()
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Every simple path from `s`, as (target, length, interior vertices).
fn simple_paths(g: &SmallGraph, s: usize, length: &dyn Fn(u32) -> f64) -> Vec<(usize, f64, Vec<usize>)> {
    let mut out = Vec::new();
    let mut stack = vec![s];
    let mut on_path = vec![false; g.n];
    on_path[s] = true;
    fn go(
        g: &SmallGraph,
        length: &dyn Fn(u32) -> f64,
        stack: &mut Vec<usize>,
        on_path: &mut Vec<bool>,
        dist: f64,
        out: &mut Vec<(usize, f64, Vec<usize>)>,
    ) {
        let u = *stack.last().unwrap();
        for (v, w) in g.neighbors(u) {
            if on_path[v] {
                continue;
            }
            let d = dist + length(w);
            out.push((v, d, stack[1..].to_vec()));
            on_path[v] = true;
            stack.push(v);
            go(g, length, stack, on_path, d, out);
            stack.pop();
            on_path[v] = false;
        }
    }
    go(g, length, &mut stack, &mut on_path, 0.0, &mut out);
    out
}

/// Betweenness over unordered pairs and harmonic closeness, by enumerating
/// every simple path.
pub fn path_measures(g: &SmallGraph, length: &dyn Fn(u32) -> f64) -> (Vec<f64>, Vec<f64>) {
    let mut between = vec![0.0; g.n];
    let mut close = vec![0.0; g.n];
    for s in 0..g.n {
        let paths = simple_paths(g, s, length);
        for t in 0..g.n {
            if t == s {
                continue;
            }
            let to_t: Vec<&(usize, f64, Vec<usize>)> = paths.iter().filter(|p| p.0 == t).collect();
            let Some(best) = to_t.iter().map(|p| p.1).min_by(f64::total_cmp) else {
                continue;
            };
            close[s] += 1.0 / best;
            if t < s {
                continue;
            }
            let shortest: Vec<_> = to_t.iter().filter(|p| same(p.1, best)).collect();
            for u in 0..g.n {
                let through = shortest.iter().filter(|p| p.2.contains(&u)).count();
                between[u] += through as f64 / shortest.len() as f64;
            }
        }
    }
    (between, close)
}

/// Shortest distance and number of shortest paths from `s` to every vertex;
/// unreachable vertices get infinity and 0.
pub fn path_counts(g: &SmallGraph, s: usize, length: &dyn Fn(u32) -> f64) -> (Vec<f64>, Vec<f64>) {
    let paths = simple_paths(g, s, length);
    let mut dist = vec![f64::INFINITY; g.n];
    let mut count = vec![0.0; g.n];
    dist[s] = 0.0;
    count[s] = 1.0;
    for t in (0..g.n).filter(|&t| t != s) {
        if let Some(best) = paths.iter().filter(|p| p.0 == t).map(|p| p.1).min_by(f64::total_cmp) {
            dist[t] = best;
            count[t] = paths.iter().filter(|p| p.0 == t && same(p.1, best)).count() as f64;
        }
    }
    (dist, count)
}

/// 1 / Σ d(u, v) over reachable v, 0 when nothing is reachable.
pub fn classic_closeness(g: &SmallGraph, length: &dyn Fn(u32) -> f64) -> Vec<f64> {
    (0..g.n)
        .map(|s| {
            let paths = simple_paths(g, s, length);
            let total: f64 = (0..g.n)
                .filter(|&t| t != s)
                .filter_map(|t| paths.iter().filter(|p| p.0 == t).map(|p| p.1).min_by(f64::total_cmp))
                .sum();
            if total > 0.0 {
                1.0 / total
            } else {
                0.0
            }
        })
        .collect()
}

/// PageRank as the solution of the linear system x = Gx, Σx = 1, where G is
/// the damped walk matrix with isolated vertices jumping uniformly.
pub fn pagerank_dense(g: &SmallGraph, damping: f64) -> Vec<f64> {
    let n = g.n;
    let mut walk = nalgebra::DMatrix::<f64>::zeros(n, n);
    for v in 0..n {
        let nb = g.neighbors(v);
        let total: f64 = nb.iter().map(|&(_, w)| w as f64).sum();
        if total == 0.0 {
            for u in 0..n {
                walk[(u, v)] = 1.0 / n as f64;
            }
        } else {
            for (u, w) in nb {
                walk[(u, v)] += w as f64 / total;
            }
        }
    }
    let google = walk * damping + nalgebra::DMatrix::from_element(n, n, (1.0 - damping) / n as f64);
    let mut system = nalgebra::DMatrix::<f64>::identity(n, n) - google;
    let mut rhs = nalgebra::DVector::<f64>::zeros(n);
    for c in 0..n {
        system[(n - 1, c)] = 1.0;
    }
    rhs[n - 1] = 1.0;
    let x = system.lu().solve(&rhs).expect("nonsingular");
    x.iter().copied().collect()
}

/// The limit of h ← A(Ah) normalized from h = 1: the projection of the ones
/// vector onto the top eigenspace of A², normalized.
pub fn hub_dense(g: &SmallGraph) -> Vec<f64> {
    let n = g.n;
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    for &(u, v, w) in &g.edges {
        a[(u, v)] = w as f64;
        a[(v, u)] = w as f64;
    }
    if g.edges.is_empty() {
        return vec![0.0; n];
    }
    let eig = nalgebra::SymmetricEigen::new(&a * &a);
    let top = eig.eigenvalues.iter().copied().fold(f64::MIN, f64::max);
    let mut h = nalgebra::DVector::<f64>::zeros(n);
    let ones = nalgebra::DVector::<f64>::from_element(n, 1.0);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l >= top * (1.0 - 1e-9) {
            let v = eig.eigenvectors.column(i);
            h += v * v.dot(&ones);
        }
    }
    let norm = h.norm();
    h.iter().map(|x| x / norm).collect()
}

/// Second-largest over largest eigenvalue of A², used to skip graphs where
/// power iteration cannot separate the top eigenspace at the test precision.
pub fn hub_gap(g: &SmallGraph) -> f64 {
    let n = g.n;
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    for &(u, v, w) in &g.edges {
        a[(u, v)] = w as f64;
        a[(v, u)] = w as f64;
    }
    let eig = nalgebra::SymmetricEigen::new(&a * &a);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    let top = vals[0];
    vals.iter().find(|&&l| l < top * (1.0 - 1e-9)).map_or(0.0, |l| l / top)
}

/// One-sided Jacobi SVD; returns singular values in descending order.
pub fn jacobi_singular_values(rows: usize, cols: usize, data: &[f64]) -> Vec<f64> {
    // Work on the columns of the taller orientation.
    let (m, n, mut u): (usize, usize, Vec<Vec<f64>>) = if rows >= cols {
        (
            rows,
            cols,
            (0..cols)
                .map(|c| (0..rows).map(|r| data[r * cols + c]).collect())
                .collect(),
        )
    } else {
        (
            cols,
            rows,
            (0..rows)
                .map(|r| (0..cols).map(|c| data[r * cols + c]).collect())
                .collect(),
        )
    };
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = u[p].iter().map(|x| x * x).sum();
                let beta: f64 = u[q].iter().map(|x| x * x).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (u[p][i], u[q][i]);
                    u[p][i] = c * x - s * y;
                    u[q][i] = s * x + c * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = u
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Stationary distribution of a dense row-stochastic matrix via a linear
/// solve of (Rᵀ − I)x = 0 with Σx = 1.
pub fn stationary_dense(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let mut system = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            system[(j, i)] = rows[i][j];
        }
        system[(i, i)] -= 1.0;
    }
    for c in 0..n {
        system[(n - 1, c)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    system.lu().solve(&rhs).expect("nonsingular").iter().copied().collect()
}

/// The smoothed MC2 chain written out from its definition: from item i pick
/// a list containing i uniformly, then an item ranked at or above i in it
/// uniformly; with probability α jump uniformly instead.
pub fn mc2_dense(lists: &[Vec<String>], alpha: f64) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut items: Vec<String> = lists.iter().flatten().cloned().collect();
    items.sort();
    items.dedup();
    let n = items.len();
    let idx = |s: &str| items.iter().position(|x| x == s).unwrap();
    let mut rows = vec![vec![0.0; n]; n];
    for (i, item) in items.iter().enumerate() {
        let containing: Vec<&Vec<String>> = lists.iter().filter(|l| l.contains(item)).collect();
        for l in &containing {
            let pos = l.iter().position(|x| x == item).unwrap();
            for above in &l[..=pos] {
                rows[i][idx(above)] += 1.0 / containing.len() as f64 / (pos + 1) as f64;
            }
        }
        for v in rows[i].iter_mut() {
            *v = (1.0 - alpha) * *v + alpha / n as f64;
        }
    }
    (items, rows)
}

/// Exact expected cascade size from `seeds` under edge probability `p`, by
/// enumerating every live-edge subset.
pub fn exact_spread(n: usize, edges: &[(usize, usize)], p: f64, seeds: &[usize]) -> f64 {
    let m = edges.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << m) {
        let live = mask.count_ones() as i32;
        let prob = p.powi(live) * (1.0 - p).powi(m as i32 - live);
        let mut reached = vec![false; n];
        let mut stack: Vec<usize> = seeds.to_vec();
        for &s in seeds {
            reached[s] = true;
        }
        while let Some(u) = stack.pop() {
            for (e, &(a, b)) in edges.iter().enumerate() {
                if mask & (1 << e) == 0 {
                    continue;
                }
                let v = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if !reached[v] {
                    reached[v] = true;
                    stack.push(v);
                }
            }
        }
        total += prob * reached.iter().filter(|&&r| r).count() as f64;
    }
    total
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
