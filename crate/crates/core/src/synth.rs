//! Planted-field synthetic corpora with known experts.
//!
//! Each field has its own vocabulary of made-up words and its own authors.
//! Documents draw their lead author and coauthors with Zipf-like activity
//! weights, so a few authors in every field are both prolific and well
//! connected. A small share of documents adds one coauthor from another
//! field. The experts of a field are its most-connected prolific authors.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::retrieval::ExpertList;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub fields: usize,
    pub documents: usize,
    pub authors: usize,
    pub experts_per_field: usize,
    /// Words in each field's vocabulary.
    pub vocabulary: usize,
    /// Probability that a document adds a coauthor from another field.
    pub cross_field: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            fields: 3,
            documents: 600,
            authors: 150,
            experts_per_field: 10,
            vocabulary: 60,
            cross_field: 0.05,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub corpus: Corpus,
    /// One list per field; the field label is its query words joined by `_`.
    pub experts: Vec<ExpertList>,
    /// Field index of every author.
    pub author_field: BTreeMap<String, usize>,
}

const ONSETS: [&str; 14] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];

fn syllable<R: Rng>(rng: &mut R) -> String {
    format!(
        "{}{}",
        ONSETS[rng.random_range(0..ONSETS.len())],
        VOWELS[rng.random_range(0..VOWELS.len())]
    )
}

/// Distinct made-up words of three syllables ending in a consonant, which
/// the stemmer leaves alone.
fn words<R: Rng>(rng: &mut R, n: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = format!("{}{}{}k", syllable(rng), syllable(rng), syllable(rng));
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn names<R: Rng>(rng: &mut R, n: usize) -> Vec<String> {
    let mut taken = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let given = syllable(rng) + &syllable(rng);
        let family = syllable(rng) + &syllable(rng) + &syllable(rng);
        let name = format!(
            "{}{} {}{}",
            given[..1].to_uppercase(),
            &given[1..],
            family[..1].to_uppercase(),
            &family[1..]
        );
        if taken.insert(name.clone()) {
            out.push(name);
        }
    }
    out
}

fn zipf(n: usize, exponent: f64) -> Vec<f64> {
    (0..n).map(|i| 1.0 / ((i + 1) as f64).powf(exponent)).collect()
}

fn sample_text<R: Rng>(rng: &mut R, pool: &[String], dist: &WeightedIndex<f64>, len: usize) -> Vec<String> {
    (0..len).map(|_| pool[dist.sample(rng)].clone()).collect()
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    if spec.fields < 1 || spec.authors < spec.fields * 2 || spec.documents < spec.fields {
        return Err(Error::InvalidParameter(
            "synthetic corpus too small for its fields".into(),
        ));
    }
    if spec.vocabulary < 4 {
        return Err(Error::InvalidParameter(
            "field vocabulary needs at least 4 words".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut taken = BTreeSet::new();
    let pools: Vec<Vec<String>> = (0..spec.fields)
        .map(|_| words(&mut rng, spec.vocabulary, &mut taken))
        .collect();
    let word_dist = WeightedIndex::new(zipf(spec.vocabulary, 1.0)).expect("positive weights");

    let all_names = names(&mut rng, spec.authors);
    let per_field = spec.authors / spec.fields;
    let members: Vec<Vec<String>> = (0..spec.fields)
        .map(|f| {
            let end = if f + 1 == spec.fields {
                spec.authors
            } else {
                (f + 1) * per_field
            };
            all_names[f * per_field..end].to_vec()
        })
        .collect();
    let mut author_field = BTreeMap::new();
    for (f, m) in members.iter().enumerate() {
        for a in m {
            author_field.insert(a.clone(), f);
        }
    }
    let activity: Vec<WeightedIndex<f64>> = members
        .iter()
        .map(|m| WeightedIndex::new(zipf(m.len(), 1.1)).expect("positive weights"))
        .collect();

    let mut order: Vec<usize> = (0..spec.documents).map(|i| i % spec.fields).collect();
    order.shuffle(&mut rng);
    let mut by_field: Vec<Vec<(usize, usize)>> = vec![Vec::new(); spec.fields];
    let mut documents = Vec::with_capacity(spec.documents);
    for (i, &f) in order.iter().enumerate() {
        let pool = &pools[f];
        let lead = activity[f].sample(&mut rng);
        let mut team = vec![lead];
        let extra = rng.random_range(1..=3);
        for _ in 0..extra {
            let c = activity[f].sample(&mut rng);
            if !team.contains(&c) {
                team.push(c);
            }
        }
        let mut authors: Vec<String> = team.iter().map(|&a| members[f][a].clone()).collect();
        if spec.fields > 1 && rng.random::<f64>() < spec.cross_field {
            let other = (f + rng.random_range(1..spec.fields)) % spec.fields;
            authors.push(members[other][rng.random_range(0..members[other].len())].clone());
        }

        let mut title = sample_text(&mut rng, pool, &word_dist, 6);
        if rng.random::<f64>() < 0.5 {
            title.truncate(4);
            title.extend(pool[..2].iter().cloned());
        }
        let abstract_text = if rng.random::<f64>() < 0.7 {
            sample_text(&mut rng, pool, &word_dist, 30).join(" ")
        } else {
            String::new()
        };

        // Cite earlier same-field papers, favouring those led by active authors.
        let earlier = &by_field[f];
        let mut references = Vec::new();
        if !earlier.is_empty() {
            let weights: Vec<f64> = earlier.iter().map(|&(_, lead)| 1.0 / (lead + 1) as f64).collect();
            let dist = WeightedIndex::new(weights).expect("positive weights");
            for _ in 0..rng.random_range(0..=4) {
                let id = (earlier[dist.sample(&mut rng)].0 + 1).to_string();
                if !references.contains(&id) {
                    references.push(id);
                }
            }
        }
        by_field[f].push((i, lead));
        documents.push(Document {
            doc_id: (i + 1).to_string(),
            title: title.join(" "),
            abstract_text,
            authors,
            year: Some(2000 + rng.random_range(0..12)),
            venue: format!("Proc. {}", pool[2]),
            references,
        });
    }
    let corpus = Corpus::from_documents(documents)?;

    let experts = (0..spec.fields)
        .map(|f| {
            let label = format!("{}_{}", pools[f][0], pools[f][1]);
            ExpertList {
                query: label.replace('_', " "),
                field: label,
                experts: planted_experts(&corpus, &members[f], spec.experts_per_field),
            }
        })
        .collect();
    Ok(SyntheticData {
        corpus,
        experts,
        author_field,
    })
}

/// Among authors with at least the field's median paper count, the `n` with
/// the most distinct coauthors, ties by name.
pub fn planted_experts(corpus: &Corpus, field_authors: &[String], n: usize) -> Vec<String> {
    let papers: Vec<usize> = field_authors.iter().map(|a| corpus.author_positions(a).len()).collect();
    let mut sorted = papers.clone();
    sorted.sort_unstable();
    let median = sorted[sorted.len() / 2];
    let mut prolific: Vec<(usize, &String)> = field_authors
        .iter()
        .zip(&papers)
        .filter(|&(_, &p)| p >= median && p > 0)
        .map(|(a, _)| {
            let coauthors: BTreeSet<&str> = corpus
                .author_documents(a)
                .iter()
                .flat_map(|d| d.authors.iter().map(String::as_str))
                .filter(|c| c != a)
                .collect();
            (coauthors.len(), a)
        })
        .collect();
    prolific.sort_by(|x, y| y.0.cmp(&x.0).then_with(|| x.1.cmp(y.1)));
    let mut out: Vec<String> = prolific.into_iter().take(n).map(|(_, a)| a.clone()).collect();
    out.sort();
    out
}

/// Writes `corpus.txt` in the record format and `experts/<field>.txt`.
pub fn write_dataset(data: &SyntheticData, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let corpus_path = dir.join("corpus.txt");
    let experts_dir = dir.join("experts");
    fs::create_dir_all(&experts_dir).map_err(|e| Error::io(&experts_dir, e))?;
    let mut buf = Vec::new();
    data.corpus
        .write_records(&mut buf)
        .map_err(|e| Error::io(&corpus_path, e))?;
    fs::write(&corpus_path, buf).map_err(|e| Error::io(&corpus_path, e))?;
    for list in &data.experts {
        let path = experts_dir.join(format!("{}.txt", list.field));
        let body: String = list.experts.iter().map(|e| format!("{e}\n")).collect();
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok((corpus_path, experts_dir))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let spec = SyntheticSpec::default();
        let a = generate(&spec).unwrap();
        assert_eq!(a.corpus.len(), 600);
        assert_eq!(a.experts.len(), 3);
        assert!(a.experts.iter().all(|l| l.experts.len() == 10));
        assert!(a.corpus.author_count() <= 150);
        let b = generate(&spec).unwrap();
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.experts, b.experts);
        for (f, l) in a.experts.iter().enumerate() {
            assert!(l.experts.iter().all(|e| a.author_field[e] == f));
        }
    }

    #[test]
    fn vocabularies_are_disjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut taken = BTreeSet::new();
        let a = words(&mut rng, 50, &mut taken);
        let b = words(&mut rng, 50, &mut taken);
        assert!(a.iter().all(|w| !b.contains(w)));
    }
}
