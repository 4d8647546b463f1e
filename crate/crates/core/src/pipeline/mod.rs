//! End-to-end runs: ingest, expert split, model selection, per-field
//! candidate retrieval and rankings, greedy fusion and evaluation.
//!
//! Each expensive stage is cached under a SHA-256 key of its inputs and
//! parameters, so changing a parameter recomputes only the stages that
//! depend on it.

pub mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::PipelineConfig;

use crate::aggregate::{greedy_fuse_by, FuseOutcome};
use crate::centrality::{self, HitsParams};
use crate::corpus::{parse_records, Corpus, ParseReport};
use crate::error::{Error, Result};
use crate::eval::{
    ap_curve, average_precision_at, side_by_side_markdown, split_experts, EvalReport, ExpertSet, ExpertSplit, FieldEval,
};
use crate::graph::{build_graph, CoauthorGraph, DistanceView};
use crate::ranking::{Ranking, RankingKind};
use crate::retrieval::{
    load_expert_lists, model_select, score_authors, select_candidates, Candidates, ExpertList, FieldTarget,
    SearchIndex, Selection,
};
use crate::seed;
use crate::textprep::{Analyzer, CorpusTerms};
use crate::topics::TopicModel;

/// SHA-256 over length-prefixed parts, hex encoded.
pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("value serializes")
}

/// Stage results stored as plain files named `<stage>-<key>.<ext>`.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn path(&self, stage: &str, key: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{stage}-{key}.{ext}"))
    }

    pub fn load_json<T: DeserializeOwned>(&self, stage: &str, key: &str) -> Option<T> {
        let path = self.path(stage, key, "json");
        let bytes = fs::read(&path).ok()?;
        match serde_json::from_slice(&bytes) {
            Ok(v) => {
                log::info!("{stage}: cache hit {}", path.display());
                Some(v)
            }
            Err(e) => {
                log::warn!("{stage}: ignoring unreadable cache {}: {e}", path.display());
                None
            }
        }
    }

    pub fn store_json<T: Serialize>(&self, stage: &str, key: &str, value: &T) -> Result<()> {
        self.store_with(&self.path(stage, key, "json"), |p| {
            fs::write(p, json_bytes(value)).map_err(|e| Error::io(p, e))
        })
    }

    /// Writes through a temporary file so a crashed run never leaves a
    /// truncated cache entry.
    pub fn store_with(&self, path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        write(&tmp)?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}

fn timed<T>(stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f().map_err(|e| e.in_stage(stage));
    log::info!("stage {stage} took {:.3} s", start.elapsed().as_secs_f64());
    out
}

/// Reads either the record format or the canonical JSON-lines export,
/// recognized by a leading `{`.
pub fn read_corpus(path: &Path) -> Result<(Corpus, Option<ParseReport>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let canonical = bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{');
    let (corpus, report) = if canonical {
        (Corpus::read_canonical(bytes.as_slice())?, None)
    } else {
        let (c, r) = parse_records(bytes.as_slice())?;
        (c, Some(r))
    };
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok((corpus, report))
}

#[derive(Debug)]
pub struct Ingested {
    pub corpus: Corpus,
    /// SHA-256 of the input file.
    pub hash: String,
    /// Present when the input was parsed rather than read from cache.
    pub report: Option<ParseReport>,
    pub cache_path: PathBuf,
}

/// Parses and validates the corpus and keeps a canonical copy keyed by the
/// input's hash.
pub fn cmd_ingest(corpus_path: &Path, cache: &Cache) -> Result<Ingested> {
    let bytes = fs::read(corpus_path).map_err(|e| Error::io(corpus_path, e))?;
    let hash = digest(&[&bytes]);
    let cache_path = cache.path("corpus", &hash, "jsonl");
    if let Ok(file) = fs::File::open(&cache_path) {
        match Corpus::read_canonical(std::io::BufReader::new(file)) {
            Ok(corpus) => {
                log::info!("ingest: cache hit {}", cache_path.display());
                return Ok(Ingested {
                    corpus,
                    hash,
                    report: None,
                    cache_path,
                });
            }
            Err(e) => log::warn!("ingest: ignoring unreadable cache: {e}"),
        }
    }
    let (corpus, report) = read_corpus(corpus_path)?;
    if let Some(r) = &report {
        if r.skipped() > 0 {
            log::warn!(
                "ingest: skipped {} records ({} bad year, {} no title, {} no authors)",
                r.skipped(),
                r.bad_year,
                r.missing_title,
                r.missing_authors
            );
        }
    }
    cache.store_with(&cache_path, |p| {
        let file = fs::File::create(p).map_err(|e| Error::io(p, e))?;
        let mut w = std::io::BufWriter::new(file);
        corpus.write_canonical(&mut w).map_err(|e| Error::io(p, e))?;
        w.flush().map_err(|e| Error::io(p, e))
    })?;
    Ok(Ingested {
        corpus,
        hash,
        report,
        cache_path,
    })
}

/// Everything computed for one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRun {
    pub field: String,
    pub query: String,
    pub split: ExpertSplit,
    pub out_of_vocabulary: bool,
    pub matched_documents: usize,
    /// Candidate set U with retrieval scores.
    pub candidates: Vec<(String, f64)>,
    pub short: bool,
    pub graph_edges: usize,
    /// The eight single rankings in report column order.
    pub rankings: Vec<Ranking>,
    pub chosen: Vec<RankingKind>,
    /// Training ap@20 after each accepted fusion step.
    pub trace: Vec<f64>,
    pub fused: Ranking,
    /// Training ap@20 of each single ranking and of the fusion.
    pub train_ap20: BTreeMap<RankingKind, f64>,
    pub eval: FieldEval,
}

/// The eight single rankings over the candidates, in report column order.
pub fn single_rankings(
    corpus: &Corpus,
    candidates: &Candidates,
    cfg: &PipelineConfig,
    cascade_seed: u64,
) -> Result<(Option<CoauthorGraph>, Vec<Ranking>)> {
    let topic = Ranking::from_scores(RankingKind::Topic, candidates.authors.iter().cloned(), false)?;
    let everything = std::collections::HashSet::new();
    let citation = Ranking::from_scores(
        RankingKind::Citation,
        candidates
            .authors
            .iter()
            .map(|(a, _)| (a.clone(), corpus.total_citations(a, &everything) as f64)),
        false,
    )?;
    if candidates.authors.is_empty() {
        let empty = |k| Ranking::from_scores(k, std::iter::empty(), false);
        let mut out = vec![topic, citation];
        for k in &RankingKind::SINGLE[2..] {
            out.push(empty(*k)?);
        }
        return Ok((None, out));
    }
    let graph = build_graph(corpus, &candidates.names())?;
    let view = DistanceView::inverse_weights(&graph);
    let betweenness = timed("betweenness", || Ok(centrality::betweenness(&view)))?;
    let closeness = timed("closeness", || {
        Ok(centrality::closeness(&view, cfg.centrality.closeness))
    })?;
    let pagerank = timed("pagerank", || centrality::pagerank(&graph, cfg.pagerank_params()))?;
    let degree = centrality::degree(&graph);
    let influence = timed("influence", || {
        centrality::influence(&graph, &cfg.cascade_params(cascade_seed))
    })?;
    let hubs = timed("hubscore", || centrality::hub_score(&graph, HitsParams::default()))?;
    Ok((
        Some(graph),
        vec![
            topic,
            citation,
            betweenness,
            closeness,
            pagerank,
            degree,
            influence,
            hubs,
        ],
    ))
}

fn run_field(
    corpus: &Corpus,
    index: &SearchIndex,
    analyzer: &Analyzer,
    list: &ExpertList,
    split: &ExpertSplit,
    cfg: &PipelineConfig,
    gamma: f64,
) -> Result<FieldRun> {
    let matches = timed("query", || index.query_documents(analyzer, &list.query, gamma))?;
    let target = FieldTarget {
        query: list.query.clone(),
        train: split.train.clone(),
    };
    let candidates = select_candidates(
        &score_authors(corpus, &matches.matches),
        target.candidate_count(cfg.retrieval.multiplier),
    )?;
    if candidates.short {
        log::warn!(
            "field {}: only {} candidate authors for {} requested",
            list.field,
            candidates.authors.len(),
            target.candidate_count(cfg.retrieval.multiplier)
        );
    }
    let cascade_seed = seed::for_label(cfg.run.seed, &format!("cascade/{}", list.field));
    let (graph, rankings) = single_rankings(corpus, &candidates, cfg, cascade_seed)?;

    // Training rankings exclude test experts and test rankings exclude
    // training experts.
    let train_metric = |r: &Ranking| {
        average_precision_at(&r.without(&split.test), &split.train, 20).expect("training experts are non-empty")
    };
    let fusion: FuseOutcome = timed("fuse", || {
        greedy_fuse_by(&rankings, cfg.aggregate.smoothing, train_metric)
    })?;
    let chosen = fusion.chosen_kinds(&rankings);
    let mut train_ap20: BTreeMap<RankingKind, f64> = rankings.iter().map(|r| (r.kind, train_metric(r))).collect();
    train_ap20.insert(RankingKind::Aggregate, *fusion.trace.last().expect("at least one step"));

    let mut ap = BTreeMap::new();
    for r in &rankings {
        ap.insert(r.kind, ap_curve(&r.without(&split.train), &split.test)?);
    }
    ap.insert(
        RankingKind::Aggregate,
        ap_curve(&fusion.ranking.without(&split.train), &split.test)?,
    );
    Ok(FieldRun {
        field: list.field.clone(),
        query: list.query.clone(),
        split: split.clone(),
        out_of_vocabulary: matches.out_of_vocabulary,
        matched_documents: matches.matches.len(),
        candidates: candidates.authors,
        short: candidates.short,
        graph_edges: graph.as_ref().map_or(0, CoauthorGraph::edge_count),
        rankings,
        chosen: chosen.clone(),
        trace: fusion.trace,
        fused: fusion.ranking,
        train_ap20,
        eval: FieldEval {
            field: list.field.clone(),
            ap,
            chosen,
        },
    })
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: EvalReport,
    pub selection: Selection,
    pub fields: Vec<FieldRun>,
}

fn selected_lists(cfg: &PipelineConfig) -> Result<Vec<ExpertList>> {
    let lists = load_expert_lists(&cfg.input.experts)?;
    cfg.input
        .fields
        .iter()
        .map(|f| {
            lists
                .iter()
                .find(|l| &l.field == f)
                .cloned()
                .ok_or_else(|| Error::InvalidParameter(format!("no expert list for field {f:?}")))
        })
        .collect()
}

/// Runs every configured field and writes the report and per-field outputs
/// under the configured output directory.
pub fn cmd_pipeline(cfg: &PipelineConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let cache = Cache::new(&cfg.run.cache_dir);
    let ingested = timed("ingest", || cmd_ingest(&cfg.input.corpus, &cache))?;
    let corpus = &ingested.corpus;
    let lists = timed("experts", || selected_lists(cfg))?;
    let splits = timed("split", || {
        lists
            .iter()
            .map(|l| split_experts(&l.field, &l.experts, cfg.run.seed))
            .collect::<Result<Vec<_>>>()
    })?;
    for s in &splits {
        log::info!(
            "field {}: {} training / {} test experts",
            s.field,
            s.train.len(),
            s.test.len()
        );
    }

    let analyzer = Analyzer::default();
    let terms = timed("terms", || CorpusTerms::count(corpus, &analyzer))?;
    let model_seed = seed::for_label(cfg.run.seed, "model");
    let targets: Vec<FieldTarget> = lists
        .iter()
        .zip(&splits)
        .map(|(l, s)| FieldTarget {
            query: l.query.clone(),
            train: s.train.clone(),
        })
        .collect();
    let target_key: Vec<(&str, &ExpertSet)> = targets.iter().map(|t| (t.query.as_str(), &t.train)).collect();
    let select_key = digest(&[
        ingested.hash.as_bytes(),
        &json_bytes(&cfg.grid()),
        &json_bytes(&target_key),
        &json_bytes(&(cfg.retrieval.multiplier, cfg.model.weighting, model_seed)),
    ]);
    let selection: Selection = match cache.load_json("select", &select_key) {
        Some(s) => s,
        None => {
            let s = timed("select", || {
                model_select(
                    corpus,
                    &terms,
                    &analyzer,
                    &cfg.grid(),
                    &targets,
                    cfg.retrieval.multiplier,
                    cfg.model.weighting,
                    model_seed,
                )
            })?;
            cache.store_json("select", &select_key, &s)?;
            s
        }
    };
    let best = selection.best;
    log::info!(
        "selected {} k={} rho={} gamma={} covering {} training experts",
        best.kind.as_str(),
        best.k,
        best.rho,
        best.gamma,
        selection.points[0].covered
    );

    let index = timed("fit", || {
        let model_key = digest(&[
            ingested.hash.as_bytes(),
            &json_bytes(&(best.kind, best.k, best.rho, cfg.model.weighting, model_seed)),
        ]);
        let vocab = terms.vocabulary(best.rho)?;
        let matrix = terms.matrix(&vocab, cfg.model.weighting);
        let path = cache.path("model", &model_key, best.kind.as_str());
        let model = match TopicModel::load(best.kind, &path) {
            Ok(m) => {
                log::info!("fit: cache hit {}", path.display());
                m
            }
            Err(_) => {
                let m = TopicModel::fit(best.kind, &matrix, best.k, model_seed)?;
                cache.store_with(&path, |p| m.save(p))?;
                m
            }
        };
        SearchIndex::new(matrix, model)
    })?;

    let field_params = json_bytes(&(
        &cfg.retrieval,
        &cfg.cascade,
        &cfg.centrality,
        &cfg.aggregate,
        cfg.run.seed,
        best,
        model_seed,
        cfg.model.weighting,
    ));
    let fields: Vec<FieldRun> = lists
        .par_iter()
        .zip(&splits)
        .map(|(list, split)| {
            let key = digest(&[
                ingested.hash.as_bytes(),
                &field_params,
                &json_bytes(&(list.field.as_str(), list.query.as_str(), split)),
            ]);
            if let Some(run) = cache.load_json::<FieldRun>("field", &key) {
                return Ok(run);
            }
            let run = run_field(corpus, &index, &analyzer, list, split, cfg, best.gamma).inspect_err(|e| {
                log::error!("field {} failed: {e}", list.field);
            })?;
            cache.store_json("field", &key, &run)?;
            Ok(run)
        })
        .collect::<Result<_>>()?;

    let report = EvalReport {
        model: best.kind.as_str().to_string(),
        fields: fields.iter().map(|f| f.eval.clone()).collect(),
    };
    let out = RunOutput {
        report,
        selection,
        fields,
    };
    timed("write", || write_run(&cfg.run.out_dir, corpus, &out))?;
    Ok(out)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn ranking_csv(r: &Ranking) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    r.write_csv(&mut buf)?;
    Ok(buf)
}

/// Report files (`report.json`, `report.csv`, `report.md`), the selection
/// table, and per field the candidates, each ranking, the fused ranking with
/// its provenance, and the coauthorship graph.
pub fn write_run(out_dir: &Path, corpus: &Corpus, run: &RunOutput) -> Result<()> {
    let report_json = serde_json::to_vec_pretty(&run.report).expect("report serializes");
    write_file(&out_dir.join("report.json"), &report_json)?;
    let mut csv = Vec::new();
    run.report.write_csv(&mut csv)?;
    write_file(&out_dir.join("report.csv"), &csv)?;
    write_file(&out_dir.join("report.md"), run.report.to_markdown()?.as_bytes())?;
    write_file(&out_dir.join("selection.csv"), &selection_csv(&run.selection)?)?;

    for f in &run.fields {
        let dir = out_dir.join("fields").join(&f.field);
        let cands = Candidates {
            authors: f.candidates.clone(),
            short: f.short,
        };
        let mut buf = Vec::new();
        cands.write_csv(&mut buf)?;
        write_file(&dir.join("candidates.csv"), &buf)?;
        for r in &f.rankings {
            write_file(&dir.join(format!("{}.csv", r.kind.label())), &ranking_csv(r)?)?;
        }
        write_file(&dir.join("aggregate.csv"), &ranking_csv(&f.fused)?)?;
        let chosen: Vec<&str> = f.chosen.iter().map(|k| k.label()).collect();
        let trace: Vec<String> = f.trace.iter().map(|v| format!("{v:?}")).collect();
        let provenance = format!("chosen={}\ntrace={}\n", chosen.join(","), trace.join(","));
        write_file(&dir.join("provenance.txt"), provenance.as_bytes())?;
        if !cands.authors.is_empty() {
            let g = build_graph(corpus, &cands.names())?;
            g.export(&dir.join("graph.edges"), &dir.join("graph.names"))?;
        }
    }
    Ok(())
}

fn selection_csv(sel: &Selection) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    w.write_record(["kind", "k", "rho", "gamma", "covered", "coverage"])
        .map_err(err)?;
    for p in &sel.points {
        let cov: Vec<String> = p.coverage.iter().map(|c| format!("{c:?}")).collect();
        w.write_record([
            p.params.kind.as_str().to_string(),
            p.params.k.to_string(),
            format!("{:?}", p.params.rho),
            format!("{:?}", p.params.gamma),
            p.covered.to_string(),
            cov.join(";"),
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
}

/// Rendered MAP tables for one or more run directories.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedReport {
    /// One CSV per run, in the order given.
    pub csv: Vec<String>,
    pub markdown: String,
}

pub fn load_report(run_dir: &Path) -> Result<EvalReport> {
    let path = run_dir.join("report.json");
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format("report", &path, e.to_string()))
}

/// A single run renders as its own table; several runs render side by side.
pub fn cmd_report(run_dirs: &[PathBuf]) -> Result<RenderedReport> {
    if run_dirs.is_empty() {
        return Err(Error::InvalidParameter("no run directories given".into()));
    }
    let reports = run_dirs.iter().map(|d| load_report(d)).collect::<Result<Vec<_>>>()?;
    let csv = reports
        .iter()
        .map(|r| {
            let mut buf = Vec::new();
            r.write_csv(&mut buf)?;
            Ok(String::from_utf8(buf).expect("csv is utf-8"))
        })
        .collect::<Result<Vec<_>>>()?;
    let markdown = if reports.len() == 1 {
        reports[0].to_markdown()?
    } else {
        side_by_side_markdown(&reports.iter().collect::<Vec<_>>())?
    };
    Ok(RenderedReport { csv, markdown })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_separates_parts() {
        assert_ne!(digest(&[b"ab", b"c"]), digest(&[b"a", b"bc"]));
        assert_eq!(digest(&[b"x"]), digest(&[b"x"]));
        assert_eq!(digest(&[]).len(), 64);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().join("c"));
        assert!(cache.load_json::<Vec<u32>>("s", "k").is_none());
        cache.store_json("s", "k", &vec![1u32, 2]).unwrap();
        assert_eq!(cache.load_json::<Vec<u32>>("s", "k"), Some(vec![1, 2]));
    }

    #[test]
    fn ingest_counts_and_caches() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        fs::write(&path, "#*Title\n#@Ann Lee, Bo Chen\n#index1\n").unwrap();
        let cache = Cache::new(dir.path().join("cache"));
        let first = cmd_ingest(&path, &cache).unwrap();
        assert_eq!((first.corpus.len(), first.corpus.author_count()), (1, 2));
        assert!(first.report.is_some());
        let second = cmd_ingest(&path, &cache).unwrap();
        assert!(second.report.is_none());
        assert_eq!(second.corpus, first.corpus);
        let (canonical, _) = read_corpus(&first.cache_path).unwrap();
        assert_eq!(canonical, first.corpus);
        fs::write(&path, "").unwrap();
        assert!(cmd_ingest(&path, &cache).is_err());
    }

    #[test]
    fn report_needs_runs() {
        let dir = tempfile::tempdir().unwrap();
        assert!(cmd_report(&[]).is_err());
        assert!(cmd_report(&[dir.path().to_path_buf()]).is_err());
    }
}
