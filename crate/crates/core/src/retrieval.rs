//! Field queries against a topic model, candidate-author selection, and the
//! model-selection grid scored by training-expert coverage.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_name, Corpus};
use crate::error::{Error, Result};
use crate::eval::ExpertSet;
use crate::ranking::format_score;
use crate::textprep::{Analyzer, CorpusTerms, TermDocMatrix, Weighting};
use crate::topics::{cosine, DocEmbedding, ModelKind, TopicModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub k: usize,
    pub rho: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rho must be in (0, 1], got {}",
                self.rho
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be in [0, 1), got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// A fitted topic model with the embeddings of every corpus document.
#[derive(Debug, Clone)]
pub struct SearchIndex {
    pub matrix: TermDocMatrix,
    pub model: TopicModel,
    pub embeddings: Vec<DocEmbedding>,
}

impl SearchIndex {
    pub fn new(matrix: TermDocMatrix, model: TopicModel) -> Result<Self> {
        let embeddings = model.embed_documents(&matrix)?;
        Ok(SearchIndex {
            matrix,
            model,
            embeddings,
        })
    }

    pub fn build(
        terms: &CorpusTerms,
        kind: ModelKind,
        k: usize,
        rho: f64,
        weighting: Weighting,
        seed: u64,
    ) -> Result<Self> {
        let vocab = terms.vocabulary(rho)?;
        if vocab.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no term reaches document proportion {rho}"
            )));
        }
        let matrix = terms.matrix(&vocab, weighting);
        let model = TopicModel::fit(kind, &matrix, k, seed)?;
        Self::new(matrix, model)
    }

    /// `None` when the query has no in-vocabulary term.
    pub fn embed_query(&self, analyzer: &Analyzer, text: &str) -> Result<Option<DocEmbedding>> {
        let v = self.matrix.vectorize(analyzer, text);
        if v.is_empty() {
            return Ok(None);
        }
        self.model.project(&v).map(Some)
    }

    /// Cosine similarity of every document to the query embedding.
    pub fn similarities(&self, query: &[f64]) -> Vec<f64> {
        self.embeddings.par_iter().map(|d| cosine(d, query)).collect()
    }

    pub fn query_documents(&self, analyzer: &Analyzer, text: &str, gamma: f64) -> Result<QueryMatches> {
        match self.embed_query(analyzer, text)? {
            None => {
                log::warn!("query {text:?} has no in-vocabulary terms");
                Ok(QueryMatches {
                    matches: Vec::new(),
                    out_of_vocabulary: true,
                })
            }
            Some(q) => Ok(QueryMatches {
                matches: threshold_matches(&self.matrix.doc_ids, &self.similarities(&q), gamma),
                out_of_vocabulary: false,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryMatches {
    /// `(doc_id, similarity)` with similarity > γ, most similar first.
    pub matches: Vec<(String, f64)>,
    pub out_of_vocabulary: bool,
}

/// Documents with similarity strictly above `gamma`, by similarity
/// descending then doc id.
pub fn threshold_matches(doc_ids: &[String], similarities: &[f64], gamma: f64) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = doc_ids
        .iter()
        .zip(similarities)
        .filter(|&(_, &s)| s > gamma)
        .map(|(d, &s)| (d.clone(), s))
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Sum of matched-document similarity per author; each matched document
/// counts once for each of its authors.
pub fn score_authors(corpus: &Corpus, matches: &[(String, f64)]) -> BTreeMap<String, f64> {
    let mut scores = BTreeMap::new();
    for (doc_id, sim) in matches {
        if let Some(doc) = corpus.document(doc_id) {
            for a in &doc.authors {
                *scores.entry(a.clone()).or_insert(0.0) += sim;
            }
        }
    }
    scores
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidates {
    /// `(author, score)`, score descending then name.
    pub authors: Vec<(String, f64)>,
    /// Fewer than the requested number of authors were available.
    pub short: bool,
}

impl Candidates {
    pub fn names(&self) -> Vec<String> {
        self.authors.iter().map(|(a, _)| a.clone()).collect()
    }

    /// CSV with `author,score` rows in candidate order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        w.write_record(["author", "score"]).map_err(err)?;
        for (a, s) in &self.authors {
            w.write_record([a, &format_score(*s)]).map_err(err)?;
        }
        w.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
    }

    /// Reads the file written by [`write_csv`](Self::write_csv), keeping row
    /// order. `short` is not recorded in the file and comes back false.
    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let bad = |m: String| Error::InvalidParameter(format!("candidates csv: {m}"));
        let mut authors = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for rec in r.deserialize::<(String, f64)>() {
            let (a, s) = rec.map_err(|e| bad(e.to_string()))?;
            if !seen.insert(a.clone()) {
                return Err(Error::DuplicateItem(a));
            }
            authors.push((a, s));
        }
        Ok(Candidates { authors, short: false })
    }
}

pub fn select_candidates(scores: &BTreeMap<String, f64>, x: usize) -> Result<Candidates> {
    if x < 1 {
        return Err(Error::InvalidParameter("candidate count must be at least 1".into()));
    }
    let mut all: Vec<(String, f64)> = scores.iter().map(|(a, &s)| (a.clone(), s)).collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let short = all.len() < x;
    all.truncate(x);
    Ok(Candidates { authors: all, short })
}

/// |U ∩ experts| / |experts|.
pub fn coverage<'a>(candidates: impl IntoIterator<Item = &'a str>, experts: &ExpertSet) -> Result<f64> {
    if experts.is_empty() {
        return Err(Error::EmptyExperts);
    }
    Ok(covered(candidates, experts) as f64 / experts.len() as f64)
}

fn covered<'a>(candidates: impl IntoIterator<Item = &'a str>, experts: &ExpertSet) -> usize {
    candidates.into_iter().filter(|a| experts.contains(*a)).count()
}

/// One field's query with its training experts.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTarget {
    pub query: String,
    pub train: ExpertSet,
}

impl FieldTarget {
    /// Candidate list size: `multiplier` times the number of training experts.
    pub fn candidate_count(&self, multiplier: usize) -> usize {
        (multiplier * self.train.len()).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub kind: ModelKind,
    pub ks: Vec<usize>,
    pub rhos: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl Grid {
    pub fn points(&self) -> Vec<ModelParams> {
        let mut out = Vec::new();
        for &k in &self.ks {
            for &rho in &self.rhos {
                for &gamma in &self.gammas {
                    out.push(ModelParams {
                        kind: self.kind,
                        k,
                        rho,
                        gamma,
                    });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() || self.rhos.is_empty() || self.gammas.is_empty() {
            return Err(Error::InvalidParameter("model-selection grid has an empty axis".into()));
        }
        self.points().iter().try_for_each(ModelParams::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub params: ModelParams,
    /// Training experts covered, summed over fields.
    pub covered: usize,
    /// Coverage per field, in field order.
    pub coverage: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub best: ModelParams,
    pub points: Vec<GridPoint>,
}

/// Orders grid points best first: more covered experts, then smaller k,
/// larger ρ, smaller γ.
fn preference(a: &GridPoint, b: &GridPoint) -> std::cmp::Ordering {
    b.covered
        .cmp(&a.covered)
        .then(a.params.k.cmp(&b.params.k))
        .then(b.params.rho.total_cmp(&a.params.rho))
        .then(a.params.gamma.total_cmp(&b.params.gamma))
}

/// Runs every grid point and picks the one covering the most training
/// experts across fields. One model is fitted per (ρ, k); all γ values reuse
/// its similarities.
#[allow(clippy::too_many_arguments)]
pub fn model_select(
    corpus: &Corpus,
    terms: &CorpusTerms,
    analyzer: &Analyzer,
    grid: &Grid,
    fields: &[FieldTarget],
    multiplier: usize,
    weighting: Weighting,
    seed: u64,
) -> Result<Selection> {
    grid.validate()?;
    if fields.is_empty() {
        return Err(Error::InvalidParameter(
            "model selection needs at least one field".into(),
        ));
    }
    if let Some(f) = fields.iter().find(|f| f.train.is_empty()) {
        return Err(Error::InvalidParameter(format!(
            "field {:?} has no training experts",
            f.query
        )));
    }
    let fits: Vec<(usize, f64)> = grid
        .ks
        .iter()
        .flat_map(|&k| grid.rhos.iter().map(move |&rho| (k, rho)))
        .collect();
    let per_fit: Vec<Vec<GridPoint>> = fits
        .par_iter()
        .map(|&(k, rho)| {
            let index = SearchIndex::build(terms, grid.kind, k, rho, weighting, seed)?;
            let sims: Vec<Option<Vec<f64>>> = fields
                .iter()
                .map(|f| Ok(index.embed_query(analyzer, &f.query)?.map(|q| index.similarities(&q))))
                .collect::<Result<_>>()?;
            let points = grid
                .gammas
                .iter()
                .map(|&gamma| {
                    let mut total = 0;
                    let mut cov = Vec::with_capacity(fields.len());
                    for (f, s) in fields.iter().zip(&sims) {
                        let n = match s {
                            None => 0,
                            Some(s) => {
                                let matches = threshold_matches(&index.matrix.doc_ids, s, gamma);
                                let scores = score_authors(corpus, &matches);
                                let cands = select_candidates(&scores, f.candidate_count(multiplier))?;
                                covered(cands.authors.iter().map(|(a, _)| a.as_str()), &f.train)
                            }
                        };
                        total += n;
                        cov.push(n as f64 / f.train.len() as f64);
                    }
                    log::debug!("k={k} rho={rho} gamma={gamma}: {total} training experts covered");
                    Ok(GridPoint {
                        params: ModelParams {
                            kind: grid.kind,
                            k,
                            rho,
                            gamma,
                        },
                        covered: total,
                        coverage: cov,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(points)
        })
        .collect::<Result<_>>()?;
    let mut points: Vec<GridPoint> = per_fit.into_iter().flatten().collect();
    points.sort_by(preference);
    Ok(Selection {
        best: points[0].params,
        points,
    })
}

/// Query text for a field label: Arnetminer abbreviations map to their
/// category name, anything else is used with `_` and `-` read as spaces.
pub fn field_query(label: &str) -> String {
    const KNOWN: [(&str, &str); 13] = [
        ("BS", "boosting"),
        ("CV", "computer vision"),
        ("CRY", "cryptography"),
        ("DM", "data mining"),
        ("IE", "information extraction"),
        ("IA", "intelligent agents"),
        ("ML", "machine learning"),
        ("NLP", "natural language processing"),
        ("NN", "neural networks"),
        ("OA", "ontology alignment"),
        ("PL", "planning"),
        ("SW", "semantic web"),
        ("SVM", "support vector machines"),
    ];
    KNOWN
        .iter()
        .find(|(abbr, _)| abbr.eq_ignore_ascii_case(label))
        .map(|(_, name)| name.to_string())
        .unwrap_or_else(|| label.replace(['_', '-'], " "))
}

/// One expert list: the field label (file stem), its query text and the
/// experts named in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertList {
    pub field: String,
    pub query: String,
    pub experts: Vec<String>,
}

/// Reads one name per line; blank lines and lines starting with `#` are
/// skipped.
pub fn parse_expert_list(field: &str, text: &str) -> ExpertList {
    let mut experts: Vec<String> = text
        .lines()
        .map(normalize_name)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    experts.sort();
    experts.dedup();
    ExpertList {
        field: field.to_string(),
        query: field_query(field),
        experts,
    }
}

/// Every regular file in `dir`, keyed by file stem, in name order.
pub fn load_expert_lists(dir: &Path) -> Result<Vec<ExpertList>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok(parse_expert_list(stem, &text))
        })
        .collect()
}
