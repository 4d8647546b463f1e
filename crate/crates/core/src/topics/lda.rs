//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lsi::BlobReader;
use crate::error::{Error, Result};
use crate::sparse::{CscMatrix, SparseVec};

const FOLD_IN_BURN: usize = 20;
const FOLD_IN_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaParams {
    pub k: usize,
    pub alpha: f64,
    pub eta: f64,
    pub sweeps: usize,
    pub seed: u64,
}

impl LdaParams {
    /// Symmetric priors alpha = 50/k and eta = 0.01, 500 sweeps.
    pub fn new(k: usize, seed: u64) -> Self {
        LdaParams {
            k,
            alpha: 50.0 / k.max(1) as f64,
            eta: 0.01,
            sweeps: 500,
            seed,
        }
    }
}

/// `beta` is k rows of topic–word distributions over the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub beta: Vec<Vec<f64>>,
    pub params: LdaParams,
}

#[derive(Debug, Clone)]
pub struct LdaFit {
    pub model: LdaModel,
    /// θ of each training document from the final sampler state.
    pub doc_topics: Vec<Vec<f64>>,
}

fn tokens_of(entries: impl Iterator<Item = (usize, f64)>) -> Result<Vec<usize>> {
    let mut tokens = Vec::new();
    for (w, v) in entries {
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "LDA needs non-negative integer counts, found {v}"
            )));
        }
        tokens.extend(std::iter::repeat_n(w, v as usize));
    }
    Ok(tokens)
}

fn sample_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (t, &w) in weights.iter().enumerate() {
        if u < w {
            return t;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Collapsed Gibbs state over the whole corpus.
pub struct GibbsSampler {
    params: LdaParams,
    vocab: usize,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<Vec<u32>>,
    topic_total: Vec<u64>,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
}

impl GibbsSampler {
    pub fn new(x: &CscMatrix, params: LdaParams) -> Result<Self> {
        if params.k < 1 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if x.cols() == 0 {
            return Err(Error::EmptyCorpus);
        }
        if !(params.alpha > 0.0 && params.eta > 0.0) {
            return Err(Error::InvalidParameter("alpha and eta must be positive".into()));
        }
        let k = params.k;
        let vocab = x.rows();
        let docs = (0..x.cols())
            .map(|j| tokens_of(x.column(j)))
            .collect::<Result<Vec<_>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut doc_topic = vec![vec![0u32; k]; docs.len()];
        let mut topic_word = vec![vec![0u32; vocab]; k];
        let mut topic_total = vec![0u64; k];
        let assignments = docs
            .iter()
            .enumerate()
            .map(|(d, tokens)| {
                tokens
                    .iter()
                    .map(|&w| {
                        let t = rng.random_range(0..k);
                        doc_topic[d][t] += 1;
                        topic_word[t][w] += 1;
                        topic_total[t] += 1;
                        t
                    })
                    .collect()
            })
            .collect();
        Ok(GibbsSampler {
            params,
            vocab,
            docs,
            assignments,
            doc_topic,
            topic_word,
            topic_total,
            rng,
            weights: vec![0.0; k],
        })
    }

    pub fn sweep(&mut self) {
        let LdaParams { k, alpha, eta, .. } = self.params;
        let v_eta = self.vocab as f64 * eta;
        for d in 0..self.docs.len() {
            for n in 0..self.docs[d].len() {
                let w = self.docs[d][n];
                let old = self.assignments[d][n];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_total[old] -= 1;
                for t in 0..k {
                    self.weights[t] = (self.doc_topic[d][t] as f64 + alpha) * (self.topic_word[t][w] as f64 + eta)
                        / (self.topic_total[t] as f64 + v_eta);
                }
                let new = sample_index(&mut self.rng, &self.weights);
                self.assignments[d][n] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_total[new] += 1;
            }
        }
    }

    pub fn token_count(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    pub fn total_assignments(&self) -> u64 {
        self.topic_total.iter().sum()
    }

    /// Posterior mean (n_tw + η) / (n_t + Vη).
    pub fn beta(&self) -> Vec<Vec<f64>> {
        let eta = self.params.eta;
        let v_eta = self.vocab as f64 * eta;
        self.topic_word
            .iter()
            .zip(&self.topic_total)
            .map(|(row, &total)| {
                let denom = total as f64 + v_eta;
                row.iter().map(|&c| (c as f64 + eta) / denom).collect()
            })
            .collect()
    }

    pub fn doc_topics(&self) -> Vec<Vec<f64>> {
        let alpha = self.params.alpha;
        let k = self.params.k as f64;
        self.doc_topic
            .iter()
            .map(|row| {
                let n: u32 = row.iter().sum();
                let denom = n as f64 + k * alpha;
                row.iter().map(|&c| (c as f64 + alpha) / denom).collect()
            })
            .collect()
    }
}

pub fn lda_fit(x: &CscMatrix, params: LdaParams) -> Result<LdaFit> {
    let mut sampler = GibbsSampler::new(x, params)?;
    for _ in 0..params.sweeps {
        sampler.sweep();
    }
    Ok(LdaFit {
        model: LdaModel {
            beta: sampler.beta(),
            params,
        },
        doc_topics: sampler.doc_topics(),
    })
}

impl LdaModel {
    pub fn k(&self) -> usize {
        self.beta.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.beta.first().map_or(0, Vec::len)
    }

    /// θ for a document under fixed β: Gibbs fold-in seeded with the model's
    /// seed, averaged over the sweeps after burn-in. An empty document gets the
    /// prior mean, which is uniform.
    pub fn project(&self, doc: &SparseVec) -> Result<Vec<f64>> {
        if doc.dim != self.vocab_size() {
            return Err(Error::DimensionMismatch {
                expected: self.vocab_size(),
                actual: doc.dim,
            });
        }
        let k = self.k();
        let tokens = tokens_of(doc.entries.iter().copied())?;
        if tokens.is_empty() {
            return Ok(vec![1.0 / k as f64; k]);
        }
        let alpha = self.params.alpha;
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed);
        let mut counts = vec![0u32; k];
        let mut z: Vec<usize> = tokens
            .iter()
            .map(|_| {
                let t = rng.random_range(0..k);
                counts[t] += 1;
                t
            })
            .collect();
        let mut weights = vec![0.0; k];
        let mut theta = vec![0.0; k];
        let denom = tokens.len() as f64 + k as f64 * alpha;
        for sweep in 0..FOLD_IN_BURN + FOLD_IN_SAMPLES {
            for (n, &w) in tokens.iter().enumerate() {
                counts[z[n]] -= 1;
                for t in 0..k {
                    weights[t] = (counts[t] as f64 + alpha) * self.beta[t][w];
                }
                z[n] = sample_index(&mut rng, &weights);
                counts[z[n]] += 1;
            }
            if sweep >= FOLD_IN_BURN {
                for t in 0..k {
                    theta[t] += (counts[t] as f64 + alpha) / denom;
                }
            }
        }
        let total: f64 = theta.iter().sum();
        theta.iter_mut().for_each(|x| *x /= total);
        Ok(theta)
    }

    const MAGIC: &'static [u8; 8] = b"ERLDA01\0";

    /// Header (magic, vocabulary size, k, sweeps, seed as u64; alpha, eta as
    /// f64, all little-endian) then β column-major (k × vocabulary).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(Self::MAGIC);
        for v in [
            self.vocab_size() as u64,
            self.k() as u64,
            self.params.sweeps as u64,
            self.params.seed,
        ] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&self.params.alpha.to_le_bytes());
        buf.extend_from_slice(&self.params.eta.to_le_bytes());
        for w in 0..self.vocab_size() {
            for row in &self.beta {
                buf.extend_from_slice(&row[w].to_le_bytes());
            }
        }
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| Error::io(path, e))?;
        let mut r = BlobReader::new(&buf, path, "LDA model");
        r.magic(Self::MAGIC)?;
        let vocab = r.u64()? as usize;
        let k = r.u64()? as usize;
        let sweeps = r.u64()? as usize;
        let seed = r.u64()?;
        let alpha = r.f64()?;
        let eta = r.f64()?;
        let flat = r.f64s(vocab * k)?;
        r.finish()?;
        let beta = (0..k).map(|t| (0..vocab).map(|w| flat[w * k + t]).collect()).collect();
        Ok(LdaModel {
            beta,
            params: LdaParams {
                k,
                alpha,
                eta,
                sweeps,
                seed,
            },
        })
    }
}
