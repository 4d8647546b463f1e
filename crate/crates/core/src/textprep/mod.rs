//! Text to term–document matrix: tokenization, stop words, stemming, 1- and
//! 2-grams, document-frequency filtering and binary or TF-IDF weighting.

mod porter;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::sparse::{CscMatrix, SparseVec};

pub use porter::stem as porter_stem;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Lowercases, splits on anything that is not alphanumeric and drops tokens
/// shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

/// All contiguous n-grams for n in 1..=max_len, 2-grams joined by a space.
pub fn extract_ngrams(tokens: &[String], max_len: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len() * max_len);
    for n in 1..=max_len {
        out.extend(tokens.windows(n).map(|w| w.join(" ")));
    }
    out
}

#[derive(Debug, Clone)]
pub struct StopWords(HashSet<String>);

impl Default for StopWords {
    fn default() -> Self {
        StopWords::parse(DEFAULT_STOPWORDS)
    }
}

impl StopWords {
    pub fn parse(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(StopWords::parse(&text))
    }

    pub fn none() -> Self {
        StopWords(HashSet::new())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Shared text path for documents and queries.
#[derive(Debug, Clone, Default)]
pub struct Analyzer {
    pub stopwords: StopWords,
}

impl Analyzer {
    pub const MAX_NGRAM: usize = 2;

    pub fn new(stopwords: StopWords) -> Self {
        Analyzer { stopwords }
    }

    /// Stop words are removed before stemming and before n-grams are formed,
    /// so no term contains a stop word.
    pub fn terms(&self, text: &str) -> Vec<String> {
        let stems: Vec<String> = tokenize(text)
            .into_iter()
            .filter(|t| !self.stopwords.contains(t))
            .map(|t| porter_stem(&t))
            .collect();
        extract_ngrams(&stems, Self::MAX_NGRAM)
    }

    pub fn term_counts(&self, text: &str) -> BTreeMap<String, u32> {
        let mut counts = BTreeMap::new();
        for t in self.terms(text) {
            *counts.entry(t).or_insert(0) += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    corpus_size: usize,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>, doc_freq: Vec<usize>, corpus_size: usize) -> Self {
        assert_eq!(terms.len(), doc_freq.len());
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            terms,
            index,
            doc_freq,
            corpus_size,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn doc_freq(&self, index: usize) -> usize {
        self.doc_freq[index]
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    /// ln(m / n_i).
    pub fn idf(&self, index: usize) -> f64 {
        (self.corpus_size as f64 / self.doc_freq[index] as f64).ln()
    }
}

/// Admits a stemmed 1- or 2-gram iff the fraction of documents containing it
/// is at least `rho`. Terms are kept in lexicographic order.
pub fn build_vocabulary(corpus: &Corpus, rho: f64, analyzer: &Analyzer) -> Result<Vocabulary> {
    CorpusTerms::count(corpus, analyzer)?.vocabulary(rho)
}

/// Per-document term counts, computed once and shared by every vocabulary
/// threshold and weighting built from the same corpus.
#[derive(Debug, Clone)]
pub struct CorpusTerms {
    counts: Vec<BTreeMap<String, u32>>,
    doc_ids: Vec<String>,
}

impl CorpusTerms {
    pub fn count(corpus: &Corpus, analyzer: &Analyzer) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(CorpusTerms {
            counts: corpus
                .documents()
                .par_iter()
                .map(|d| analyzer.term_counts(&d.text()))
                .collect(),
            doc_ids: corpus.documents().iter().map(|d| d.doc_id.clone()).collect(),
        })
    }

    pub fn vocabulary(&self, rho: f64) -> Result<Vocabulary> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParameter(format!("rho must be in (0, 1], got {rho}")));
        }
        Ok(vocabulary_from_counts(&self.counts, rho))
    }

    pub fn matrix(&self, vocab: &Vocabulary, mode: Weighting) -> TermDocMatrix {
        let columns: Vec<Vec<(usize, f64)>> = self
            .counts
            .par_iter()
            .map(|doc| {
                let counts: Vec<(usize, u32)> = doc
                    .iter()
                    .filter_map(|(t, &c)| vocab.index_of(t).map(|i| (i, c)))
                    .collect();
                weigh(vocab, counts, mode)
            })
            .collect();
        TermDocMatrix {
            vocabulary: vocab.clone(),
            entries: CscMatrix::from_columns(vocab.len(), columns),
            mode,
            doc_ids: self.doc_ids.clone(),
        }
    }
}

fn vocabulary_from_counts(per_doc: &[BTreeMap<String, u32>], rho: f64) -> Vocabulary {
    let m = per_doc.len();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in per_doc {
        for term in doc.keys() {
            *df.entry(term.as_str()).or_insert(0) += 1;
        }
    }
    let (terms, freqs): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(_, n)| n as f64 / m as f64 >= rho)
        .map(|(t, n)| (t.to_string(), n))
        .unzip();
    Vocabulary::new(terms, freqs, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Binary,
    Tfidf,
}

impl Weighting {
    pub fn as_str(self) -> &'static str {
        match self {
            Weighting::Binary => "binary",
            Weighting::Tfidf => "tfidf",
        }
    }
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Weighting::Binary),
            "tfidf" => Ok(Weighting::Tfidf),
            other => Err(Error::InvalidParameter(format!("unknown weighting {other:?}"))),
        }
    }
}

/// Terms × documents, one column per corpus document in corpus order.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDocMatrix {
    pub vocabulary: Vocabulary,
    pub entries: CscMatrix,
    pub mode: Weighting,
    pub doc_ids: Vec<String>,
}

impl TermDocMatrix {
    pub fn n_terms(&self) -> usize {
        self.entries.rows()
    }

    pub fn n_docs(&self) -> usize {
        self.entries.cols()
    }

    /// Vectorizes text the same way corpus documents were; only
    /// in-vocabulary terms survive.
    pub fn vectorize(&self, analyzer: &Analyzer, text: &str) -> SparseVec {
        let counts: Vec<(usize, u32)> = analyzer
            .term_counts(text)
            .into_iter()
            .filter_map(|(t, c)| self.vocabulary.index_of(&t).map(|i| (i, c)))
            .collect();
        SparseVec::new(self.n_terms(), weigh(&self.vocabulary, counts, self.mode))
    }

    pub fn column(&self, j: usize) -> SparseVec {
        SparseVec::new(self.n_terms(), self.entries.column_entries(j))
    }

    pub fn dense_column(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.n_terms()];
        for (i, x) in self.entries.column(j) {
            v[i] = x;
        }
        v
    }

    /// Writes `<stem>.triplets`, `<stem>.vocab` and `<stem>.docs`.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let triplets = with_ext(stem, "triplets");
        let mut out = BufWriter::new(fs::File::create(&triplets).map_err(|e| Error::io(&triplets, e))?);
        let io = |e| Error::io(&triplets, e);
        writeln!(
            out,
            "# mode={} terms={} docs={} m={}",
            self.mode.as_str(),
            self.n_terms(),
            self.n_docs(),
            self.vocabulary.corpus_size()
        )
        .map_err(io)?;
        for (i, j, v) in self.entries.triplets() {
            writeln!(out, "{i} {j} {v:?}").map_err(io)?;
        }
        out.flush().map_err(io)?;

        let vocab = with_ext(stem, "vocab");
        let mut out = BufWriter::new(fs::File::create(&vocab).map_err(|e| Error::io(&vocab, e))?);
        for (i, t) in self.vocabulary.terms().iter().enumerate() {
            writeln!(out, "{t}\t{}", self.vocabulary.doc_freq(i)).map_err(|e| Error::io(&vocab, e))?;
        }
        out.flush().map_err(|e| Error::io(&vocab, e))?;

        let docs = with_ext(stem, "docs");
        fs::write(&docs, self.doc_ids.join("\n") + "\n").map_err(|e| Error::io(&docs, e))?;
        Ok(())
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let vocab_path = with_ext(stem, "vocab");
        let text = fs::read_to_string(&vocab_path).map_err(|e| Error::io(&vocab_path, e))?;
        let mut terms = Vec::new();
        let mut freqs = Vec::new();
        for line in text.lines() {
            let (t, n) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::format("vocabulary", &vocab_path, format!("bad line {line:?}")))?;
            terms.push(t.to_string());
            freqs.push(
                n.parse()
                    .map_err(|_| Error::format("vocabulary", &vocab_path, format!("bad count {n:?}")))?,
            );
        }

        let docs_path = with_ext(stem, "docs");
        let doc_ids: Vec<String> = fs::read_to_string(&docs_path)
            .map_err(|e| Error::io(&docs_path, e))?
            .lines()
            .map(str::to_string)
            .collect();

        let trip_path = with_ext(stem, "triplets");
        let file = fs::File::open(&trip_path).map_err(|e| Error::io(&trip_path, e))?;
        let bad = |msg: String| Error::format("triplet", &trip_path, msg);
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("missing header".into()))?
            .map_err(|e| Error::io(&trip_path, e))?;
        let mut fields = HashMap::new();
        for kv in header.trim_start_matches('#').split_whitespace() {
            if let Some((k, v)) = kv.split_once('=') {
                fields.insert(k.to_string(), v.to_string());
            }
        }
        let get = |k: &str| fields.get(k).cloned().ok_or_else(|| bad(format!("header lacks {k}")));
        let mode: Weighting = get("mode")?.parse()?;
        let n_terms: usize = get("terms")?.parse().map_err(|_| bad("bad terms".into()))?;
        let n_docs: usize = get("docs")?.parse().map_err(|_| bad("bad docs".into()))?;
        let m: usize = get("m")?.parse().map_err(|_| bad("bad m".into()))?;
        if n_terms != terms.len() || n_docs != doc_ids.len() {
            return Err(bad("header disagrees with sidecar files".into()));
        }

        let mut columns = vec![Vec::new(); n_docs];
        for line in lines {
            let line = line.map_err(|e| Error::io(&trip_path, e))?;
            let mut it = line.split_whitespace();
            let (Some(i), Some(j), Some(v), None) = (it.next(), it.next(), it.next(), it.next()) else {
                return Err(bad(format!("bad triplet {line:?}")));
            };
            let i: usize = i.parse().map_err(|_| bad(format!("bad row {i:?}")))?;
            let j: usize = j.parse().map_err(|_| bad(format!("bad column {j:?}")))?;
            let v: f64 = v.parse().map_err(|_| bad(format!("bad value {v:?}")))?;
            if i >= n_terms || j >= n_docs {
                return Err(bad(format!("triplet ({i}, {j}) out of range")));
            }
            columns[j].push((i, v));
        }
        Ok(TermDocMatrix {
            vocabulary: Vocabulary::new(terms, freqs, m),
            entries: CscMatrix::from_columns(n_terms, columns),
            mode,
            doc_ids,
        })
    }
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Binary: 1 for every present term. TF-IDF: F / max_z F times ln(m / n_i).
fn weigh(vocab: &Vocabulary, counts: Vec<(usize, u32)>, mode: Weighting) -> Vec<(usize, f64)> {
    match mode {
        Weighting::Binary => counts.into_iter().map(|(i, _)| (i, 1.0)).collect(),
        Weighting::Tfidf => {
            let max = counts.iter().map(|&(_, c)| c).max().unwrap_or(1).max(1) as f64;
            counts
                .into_iter()
                .map(|(i, c)| (i, c as f64 / max * vocab.idf(i)))
                .collect()
        }
    }
}

pub fn build_matrix(
    corpus: &Corpus,
    vocab: &Vocabulary,
    mode: Weighting,
    analyzer: &Analyzer,
) -> Result<TermDocMatrix> {
    Ok(CorpusTerms::count(corpus, analyzer)?.matrix(vocab, mode))
}
