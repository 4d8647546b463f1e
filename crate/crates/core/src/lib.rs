//! Expert finding over an author–publication corpus.
//!
//! Documents matching a field query are found in a topic space (LSI or LDA),
//! their authors form a weighted coauthorship graph, the graph is scored by
//! several centrality measures and influence maximization, and the resulting
//! rankings are fused by a Markov-chain aggregator. Rankings are evaluated by
//! precision and average precision against held-out expert lists.

pub mod aggregate;
pub mod centrality;
pub mod corpus;
mod error;
pub mod eval;
pub mod graph;
pub mod pipeline;
pub mod ranking;
pub mod retrieval;
pub mod seed;
pub mod sparse;
pub mod synth;
pub mod textprep;
pub mod topics;

pub use error::{Error, Result};
pub use ranking::{Ranking, RankingKind};
