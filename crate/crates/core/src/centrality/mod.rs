//! Vertex scores on the coauthorship graph, each turned into a [`Ranking`].

pub mod cascade;
pub mod paths;
pub mod spectral;

pub use cascade::{
    celf, celf_select, estimate_spread, simulate_cascade, CascadeParams, SampledWorlds, SpreadObjective,
};
pub use paths::{betweenness_scores, closeness_scores, ClosenessForm, PairCounting};
pub use spectral::{hub_scores, pagerank_scores, HitsParams, PageRankParams};

pub use crate::ranking::{Ranking, RankingKind};

use crate::error::Result;
use crate::graph::{CoauthorGraph, DistanceView};

fn named(graph_names: &[String], scores: Vec<f64>) -> impl Iterator<Item = (String, f64)> + '_ {
    graph_names.iter().cloned().zip(scores)
}

fn full(kind: RankingKind, names: &[String], scores: Vec<f64>) -> Ranking {
    Ranking::from_scores(kind, named(names, scores), false).expect("graph vertex names are unique")
}

pub fn degree_scores(graph: &CoauthorGraph) -> Vec<f64> {
    (0..graph.n()).map(|v| graph.degree(v) as f64).collect()
}

pub fn degree(graph: &CoauthorGraph) -> Ranking {
    full(RankingKind::Degree, graph.names(), degree_scores(graph))
}

pub fn pagerank(graph: &CoauthorGraph, params: PageRankParams) -> Result<Ranking> {
    Ok(full(
        RankingKind::PageRank,
        graph.names(),
        pagerank_scores(graph, params)?,
    ))
}

pub fn hub_score(graph: &CoauthorGraph, params: HitsParams) -> Result<Ranking> {
    Ok(full(RankingKind::HubScore, graph.names(), hub_scores(graph, params)?))
}

pub fn betweenness(view: &DistanceView) -> Ranking {
    full(
        RankingKind::Betweenness,
        view.names(),
        betweenness_scores(view, PairCounting::Unordered),
    )
}

pub fn closeness(view: &DistanceView, form: ClosenessForm) -> Ranking {
    full(RankingKind::Closeness, view.names(), closeness_scores(view, form))
}

/// The first `seeds_k` influence seeds, scored by marginal gain at selection.
/// Unselected authors are left out, so the ranking is partial.
pub fn influence(graph: &CoauthorGraph, params: &CascadeParams) -> Result<Ranking> {
    let seeds = celf_select(graph, params)?;
    let partial = seeds.len() < graph.n();
    Ok(Ranking::from_scores(
        RankingKind::Influence,
        seeds.into_iter().map(|(v, g)| (graph.name(v).to_string(), g)),
        partial,
    )
    .expect("seeds are distinct"))
}
