//! Topic models over the term–document matrix and the shared projection
//! space used for retrieval.

pub mod lda;
pub mod lsi;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use lda::{lda_fit, GibbsSampler, LdaFit, LdaModel, LdaParams};
pub use lsi::{randomized_svd, LsiModel, SvdParams};

use crate::error::Result;
use crate::sparse::SparseVec;
use crate::textprep::TermDocMatrix;

/// A document's coordinates in topic space: LSI concept coordinates or LDA θ.
pub type DocEmbedding = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lsi,
    Lda,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lsi => "lsi",
            ModelKind::Lda => "lda",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lsi" | "lsa" => Ok(ModelKind::Lsi),
            "lda" => Ok(ModelKind::Lda),
            other => Err(crate::Error::InvalidParameter(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum TopicModel {
    Lsi(LsiModel),
    Lda(LdaModel),
}

impl TopicModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TopicModel::Lsi(_) => ModelKind::Lsi,
            TopicModel::Lda(_) => ModelKind::Lda,
        }
    }

    pub fn fit(kind: ModelKind, matrix: &TermDocMatrix, k: usize, seed: u64) -> Result<Self> {
        Ok(match kind {
            ModelKind::Lsi => TopicModel::Lsi(randomized_svd(&matrix.entries, SvdParams::new(k, seed))?),
            ModelKind::Lda => TopicModel::Lda(lda_fit(&matrix.entries, LdaParams::new(k, seed))?.model),
        })
    }

    pub fn project(&self, doc: &SparseVec) -> Result<DocEmbedding> {
        match self {
            TopicModel::Lsi(m) => m.project(doc),
            TopicModel::Lda(m) => m.project(doc),
        }
    }

    /// Embeddings of every training document: rows of Q for LSI, fold-in θ
    /// for LDA so that documents and queries go through the same estimator.
    pub fn embed_documents(&self, matrix: &TermDocMatrix) -> Result<Vec<DocEmbedding>> {
        match self {
            TopicModel::Lsi(m) => Ok((0..matrix.n_docs()).map(|j| m.doc_embedding(j)).collect()),
            TopicModel::Lda(m) => (0..matrix.n_docs())
                .into_par_iter()
                .map(|j| m.project(&matrix.column(j)))
                .collect(),
        }
    }
}

impl TopicModel {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        match self {
            TopicModel::Lsi(m) => m.save(path),
            TopicModel::Lda(m) => m.save(path),
        }
    }

    pub fn load(kind: ModelKind, path: &std::path::Path) -> Result<Self> {
        Ok(match kind {
            ModelKind::Lsi => TopicModel::Lsi(LsiModel::load(path)?),
            ModelKind::Lda => TopicModel::Lda(LdaModel::load(path)?),
        })
    }
}

/// aᵀb / (‖a‖‖b‖), 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}
