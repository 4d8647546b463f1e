//! The weighted coauthorship graph over candidate authors and its
//! inverse-weight distance view.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Undirected, no self-loops. Vertices are indexed by sorted author name, so
/// the graph does not depend on the order candidates were supplied in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoauthorGraph {
    names: Vec<String>,
    adjacency: Vec<Vec<(usize, u32)>>,
    edges: Vec<(usize, usize, u32)>,
}

impl CoauthorGraph {
    /// `edges` are `(u, v, weight)` with weight ≥ 1; repeated pairs are summed.
    pub fn from_edges(names: Vec<String>, edges: &[(usize, usize, u32)]) -> Result<Self> {
        let n = names.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| names[a].cmp(&names[b]));
        if order.windows(2).any(|w| names[w[0]] == names[w[1]]) {
            return Err(Error::InvalidParameter("duplicate vertex name".into()));
        }
        let mut new_index = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let mut weights: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop on vertex {u}")));
            }
            if w == 0 {
                return Err(Error::InvalidParameter("edge weight must be at least 1".into()));
            }
            let (a, b) = (new_index[u], new_index[v]);
            *weights.entry((a.min(b), a.max(b))).or_insert(0) += w;
        }
        let sorted_names = order.iter().map(|&i| names[i].clone()).collect();
        Ok(Self::assemble(sorted_names, weights))
    }

    fn assemble(names: Vec<String>, weights: BTreeMap<(usize, usize), u32>) -> Self {
        let mut adjacency = vec![Vec::new(); names.len()];
        let mut edges = Vec::with_capacity(weights.len());
        for ((u, v), w) in weights {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
            edges.push((u, v, w));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        CoauthorGraph {
            names,
            adjacency,
            edges,
        }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    /// Neighbors with collaboration counts, ascending by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(usize, u32)] {
        &self.adjacency[v]
    }

    /// `(u, v, weight)` with u < v, sorted.
    pub fn edges(&self) -> &[(usize, usize, u32)] {
        &self.edges
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<u32> {
        self.adjacency[u]
            .binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|i| self.adjacency[u][i].1)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Edge list `u v w` using vertex indices, plus a sidecar with one name
    /// per line in index order.
    pub fn export(&self, edges_path: &Path, names_path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for &(u, v, w) in &self.edges {
            writeln!(out, "{u} {v} {w}").expect("write to vec");
        }
        fs::write(edges_path, out).map_err(|e| Error::io(edges_path, e))?;
        let names = self.names.iter().map(|n| format!("{n}\n")).collect::<String>();
        fs::write(names_path, names).map_err(|e| Error::io(names_path, e))
    }
}

/// Edge (u, v) iff both are candidates and they share at least one corpus
/// document; the weight is the number of shared documents.
pub fn build_graph(corpus: &Corpus, candidates: &[String]) -> Result<CoauthorGraph> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("candidate set is empty".into()));
    }
    let mut names = candidates.to_vec();
    names.sort();
    names.dedup();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();

    let mut positions: Vec<usize> = names
        .iter()
        .flat_map(|a| corpus.author_positions(a).iter().copied())
        .collect();
    positions.sort_unstable();
    positions.dedup();

    let mut weights: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for p in positions {
        let mut members: Vec<usize> = corpus.documents()[p]
            .authors
            .iter()
            .filter_map(|a| index.get(a.as_str()).copied())
            .collect();
        members.sort_unstable();
        members.dedup();
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                *weights.entry((u, v)).or_insert(0) += 1;
            }
        }
    }
    Ok(CoauthorGraph::assemble(names, weights))
}

/// Same topology as the graph with positive edge lengths; by default
/// `1 / weight`, so frequent collaborators are close.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceView {
    names: Vec<String>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl DistanceView {
    pub fn inverse_weights(graph: &CoauthorGraph) -> Self {
        Self::with_lengths(graph, |w| 1.0 / w as f64)
    }

    pub fn with_lengths(graph: &CoauthorGraph, length: impl Fn(u32) -> f64) -> Self {
        let adjacency = (0..graph.n())
            .map(|v| {
                graph
                    .neighbors(v)
                    .iter()
                    .map(|&(u, w)| {
                        let l = length(w);
                        assert!(l > 0.0 && l.is_finite(), "edge lengths must be positive and finite");
                        (u, l)
                    })
                    .collect()
            })
            .collect();
        DistanceView {
            names: graph.names().to_vec(),
            adjacency,
        }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }
}

/// Relative tolerance for treating two path lengths as equal.
pub const PATH_TOLERANCE: f64 = 1e-9;

pub(crate) fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= PATH_TOLERANCE * a.abs().max(b.abs())
}

/// Single-source shortest paths. Unreachable vertices have infinite distance
/// and zero path count. `order` lists reached vertices by non-decreasing
/// distance, `predecessors[w]` the vertices preceding w on shortest paths.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub distance: Vec<f64>,
    pub path_count: Vec<f64>,
    pub predecessors: Vec<Vec<usize>>,
    pub order: Vec<usize>,
}

#[derive(PartialEq)]
struct Frontier {
    distance: f64,
    vertex: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .distance
            .total_cmp(&self.distance)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn shortest_paths(view: &DistanceView, source: usize) -> ShortestPaths {
    let n = view.n();
    let mut distance = vec![f64::INFINITY; n];
    let mut path_count = vec![0.0; n];
    let mut predecessors = vec![Vec::new(); n];
    let mut settled = vec![false; n];
    let mut order = Vec::new();
    let mut heap = BinaryHeap::new();

    distance[source] = 0.0;
    path_count[source] = 1.0;
    heap.push(Frontier {
        distance: 0.0,
        vertex: source,
    });
    while let Some(Frontier { vertex: v, .. }) = heap.pop() {
        if settled[v] {
            continue;
        }
        settled[v] = true;
        order.push(v);
        for &(w, len) in view.neighbors(v) {
            if settled[w] {
                continue;
            }
            let alt = distance[v] + len;
            if distance[w].is_infinite() || (alt < distance[w] && !approx_eq(alt, distance[w])) {
                distance[w] = alt;
                path_count[w] = path_count[v];
                predecessors[w].clear();
                predecessors[w].push(v);
                heap.push(Frontier {
                    distance: alt,
                    vertex: w,
                });
            } else if approx_eq(alt, distance[w]) {
                path_count[w] += path_count[v];
                predecessors[w].push(v);
            }
        }
    }
    ShortestPaths {
        distance,
        path_count,
        predecessors,
        order,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_records, Corpus};

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn corpus(records: &[&[&str]]) -> Corpus {
        let text: String = records
            .iter()
            .enumerate()
            .map(|(i, authors)| format!("#*t{i}\n#@{}\n#index{i}\n\n", authors.join(", ")))
            .collect();
        parse_records(text.as_bytes()).unwrap().0
    }

    #[test]
    fn weights_count_joint_documents() {
        let mut recs: Vec<&[&str]> = vec![&["A", "B"]; 5];
        recs.push(&["C"]);
        recs.push(&["A", "D"]);
        let c = corpus(&recs);
        let g = build_graph(&c, &names(&["C", "B", "A"])).unwrap();
        assert_eq!(g.names(), ["A", "B", "C"]);
        assert_eq!(g.weight(0, 1), Some(5));
        assert_eq!(g.weight(0, 2), None);
        assert_eq!(g.edge_count(), 1);
        let view = DistanceView::inverse_weights(&g);
        assert_eq!(view.neighbors(0), &[(1, 0.2)]);
    }

    #[test]
    fn joint_paper_of_three_is_a_triangle() {
        let c = corpus(&[&["A", "B", "C"]]);
        let g = build_graph(&c, &names(&["A", "B", "C"])).unwrap();
        assert_eq!(g.edges(), &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]);
        assert!(build_graph(&c, &[]).is_err());
    }

    #[test]
    fn candidate_order_does_not_matter() {
        let c = corpus(&[&["A", "B"], &["B", "C"], &["C", "A", "D"]]);
        let a = build_graph(&c, &names(&["D", "A", "C", "B"])).unwrap();
        let b = build_graph(&c, &names(&["A", "B", "C", "D"])).unwrap();
        assert_eq!(a, b);
    }

    fn unit(n: usize, edges: &[(usize, usize)]) -> DistanceView {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1)).collect();
        let g = CoauthorGraph::from_edges((0..n).map(|i| format!("v{i}")).collect(), &e).unwrap();
        DistanceView::with_lengths(&g, |_| 1.0)
    }

    #[test]
    fn path_and_square() {
        let sp = shortest_paths(&unit(3, &[(0, 1), (1, 2)]), 0);
        assert_eq!(sp.distance[2], 2.0);
        assert_eq!(sp.path_count[2], 1.0);
        let sp = shortest_paths(&unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]), 0);
        assert_eq!(sp.distance[2], 2.0);
        assert_eq!(sp.path_count[2], 2.0);
    }

    #[test]
    fn disconnected_vertices() {
        let sp = shortest_paths(&unit(3, &[(0, 1)]), 0);
        assert!(sp.distance[2].is_infinite());
        assert_eq!(sp.path_count[2], 0.0);
        assert_eq!(sp.order, [0, 1]);
    }

    #[test]
    fn matches_floyd_warshall() {
        let edges = [(0, 1, 3), (1, 2, 1), (0, 2, 1), (2, 3, 2), (3, 4, 5), (1, 4, 1)];
        let g = CoauthorGraph::from_edges((0..5).map(|i| format!("v{i}")).collect(), &edges).unwrap();
        let view = DistanceView::inverse_weights(&g);
        let n = 5;
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(u, v, w) in g.edges() {
            d[u][v] = 1.0 / w as f64;
            d[v][u] = 1.0 / w as f64;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        for (s, row) in d.iter().enumerate() {
            let sp = shortest_paths(&view, s);
            for (got, want) in sp.distance.iter().zip(row) {
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn heavier_edges_are_shorter() {
        let g = CoauthorGraph::from_edges(names(&["a", "b", "c"]), &[(0, 1, 4), (1, 2, 2)]).unwrap();
        let v = DistanceView::inverse_weights(&g);
        assert!(v.neighbors(1)[0].1 < v.neighbors(1)[1].1);
    }

    #[test]
    fn export_edge_list() {
        let g = CoauthorGraph::from_edges(names(&["b", "a"]), &[(0, 1, 2)]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (e, n) = (dir.path().join("g.edges"), dir.path().join("g.names"));
        g.export(&e, &n).unwrap();
        assert_eq!(fs::read_to_string(e).unwrap(), "0 1 2\n");
        assert_eq!(fs::read_to_string(n).unwrap(), "a\nb\n");
    }
}
