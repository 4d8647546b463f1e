//! Command-line front end: ingest a corpus, fit topic models, query for
//! candidate experts, rank and fuse candidates, evaluate, and run the whole
//! pipeline from a config file.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! non-convergence.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use expertrank::aggregate::{self, greedy_fuse, DEFAULT_SMOOTHING};
use expertrank::centrality::ClosenessForm;
use expertrank::eval::{average_precision_at, precision_at, ExpertSet, CUTOFFS};
use expertrank::pipeline::{self, Cache, PipelineConfig};
use expertrank::retrieval::{parse_expert_list, score_authors, select_candidates, Candidates, SearchIndex};
use expertrank::seed;
use expertrank::textprep::{Analyzer, CorpusTerms, TermDocMatrix, Weighting};
use expertrank::topics::{ModelKind, TopicModel};
use expertrank::Ranking;

#[derive(Debug, Parser)]
#[command(name = "expertrank", version, about = "Rank experts in a publication corpus")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a corpus and cache its canonical form.
    Ingest {
        corpus: PathBuf,
        #[arg(long, default_value = "cache")]
        cache: PathBuf,
    },
    /// Build the term-document matrix and fit a topic model.
    Fit {
        corpus: PathBuf,
        #[arg(long, default_value = "lsi")]
        model: ModelKind,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1e-3)]
        rho: f64,
        #[arg(long, default_value = "binary")]
        weighting: Weighting,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output stem; writes `<stem>.triplets`, `.vocab`, `.docs` and `.<model>`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Query a fitted model and write the candidate authors.
    Query {
        corpus: PathBuf,
        /// Stem given to `fit --out`.
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value = "lsi")]
        model: ModelKind,
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// Number of candidates to keep.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Candidates file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the eight single rankings of a candidate set.
    Rank {
        corpus: PathBuf,
        /// Candidates file written by `query`.
        #[arg(long)]
        candidates: PathBuf,
        /// Directory for `<kind>.csv` files.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cascade: CascadeArgs,
        #[arg(long, default_value_t = 0.85)]
        damping: f64,
        #[arg(long, default_value = "harmonic", value_parser = parse_closeness)]
        closeness: ClosenessForm,
        /// Also write the coauthorship graph as `graph.edges` and `graph.names`.
        #[arg(long)]
        graph: bool,
    },
    /// Fuse rankings with MC2, or greedily against training experts.
    Fuse {
        #[arg(required = true)]
        rankings: Vec<PathBuf>,
        /// Training experts; enables greedy selection under ap@20.
        #[arg(long)]
        experts: Option<PathBuf>,
        /// Authors removed from every input ranking first.
        #[arg(long)]
        exclude: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
        alpha: f64,
        /// Fused ranking file; standard output when absent. Greedy fusion
        /// also writes `<out>.provenance`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Precision and average precision of a ranking at each cutoff.
    Eval {
        ranking: PathBuf,
        #[arg(long)]
        experts: PathBuf,
        /// Authors removed from the ranking first.
        #[arg(long)]
        exclude: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        cutoffs: Option<Vec<usize>>,
    },
    /// Run every stage for the configured fields and write the report.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key, as `table.key=value` or `key=value`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        ic_p: Option<f64>,
        #[arg(long)]
        ic_reps: Option<usize>,
        #[arg(long)]
        ic_seeds: Option<usize>,
        #[arg(long)]
        model: Option<ModelKind>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the MAP tables of one or more finished runs.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Print the CSV tables instead of markdown.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Debug, Args)]
struct CascadeArgs {
    #[arg(long, default_value_t = 0.05)]
    ic_p: f64,
    #[arg(long, default_value_t = 100)]
    ic_reps: usize,
    #[arg(long, default_value_t = 100)]
    ic_seeds: usize,
    #[arg(long)]
    weight_scaled: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_closeness(s: &str) -> Result<ClosenessForm, String> {
    match s {
        "harmonic" => Ok(ClosenessForm::Harmonic),
        "classic" => Ok(ClosenessForm::Classic),
        other => Err(format!("unknown closeness form {other:?}; use harmonic or classic")),
    }
}

/// A bad argument detected after parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    Usage(message.into()).into()
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Writes to `path`, creating parent directories, or to standard output.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            }
            fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display()))
        }
        None => std::io::stdout()
            .write_all(bytes)
            .context("cannot write to standard output"),
    }
}

fn read_experts(path: &Path) -> Result<ExpertSet> {
    let text = String::from_utf8(read_file(path)?).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    Ok(parse_expert_list(stem, &text).experts.into_iter().collect())
}

fn read_ranking(path: &Path) -> Result<Ranking> {
    Ok(Ranking::read_csv(read_file(path)?.as_slice())?)
}

fn model_path(stem: &Path, kind: ModelKind) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(kind.as_str());
    PathBuf::from(s)
}

fn ingest(corpus: &Path, cache: &Path) -> Result<()> {
    let out = pipeline::cmd_ingest(corpus, &Cache::new(cache))?;
    let c = &out.corpus;
    println!("documents {}", c.len());
    println!("authors {}", c.author_count());
    println!("abstracts {}", c.abstract_count());
    if let Some(r) = &out.report {
        println!("skipped {}", r.skipped());
    }
    println!("cache {}", out.cache_path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fit(corpus: &Path, kind: ModelKind, k: usize, rho: f64, weighting: Weighting, seed: u64, out: &Path) -> Result<()> {
    let (corpus, _) = pipeline::read_corpus(corpus)?;
    let terms = CorpusTerms::count(&corpus, &Analyzer::default())?;
    let vocab = terms.vocabulary(rho)?;
    if vocab.is_empty() {
        bail!(expertrank::Error::InvalidParameter(format!(
            "no term reaches document proportion {rho}"
        )));
    }
    let matrix = terms.matrix(&vocab, weighting);
    let model = TopicModel::fit(kind, &matrix, k, seed)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    matrix.save(out)?;
    model.save(&model_path(out, kind))?;
    println!("terms {}", matrix.n_terms());
    println!("documents {}", matrix.n_docs());
    println!("model {} k={}", kind.as_str(), k);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn query(
    corpus: &Path,
    stem: &Path,
    kind: ModelKind,
    text: &str,
    gamma: f64,
    count: usize,
    out: Option<&Path>,
) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(usage(format!("--gamma must be in [0, 1), got {gamma}")));
    }
    let (corpus, _) = pipeline::read_corpus(corpus)?;
    let matrix = TermDocMatrix::load(stem)?;
    let model = TopicModel::load(kind, &model_path(stem, kind))?;
    let index = SearchIndex::new(matrix, model)?;
    let matches = index.query_documents(&Analyzer::default(), text, gamma)?;
    let candidates = select_candidates(&score_authors(&corpus, &matches.matches), count)?;
    log::info!(
        "{} matching documents, {} candidates",
        matches.matches.len(),
        candidates.authors.len()
    );
    let mut buf = Vec::new();
    candidates.write_csv(&mut buf)?;
    emit(out, &buf)
}

fn rank(
    corpus: &Path,
    candidates: &Path,
    out: &Path,
    cascade: &CascadeArgs,
    damping: f64,
    closeness: ClosenessForm,
    graph: bool,
) -> Result<()> {
    let (corpus, _) = pipeline::read_corpus(corpus)?;
    let candidates = Candidates::read_csv(read_file(candidates)?.as_slice())?;
    let mut cfg = PipelineConfig::default();
    cfg.cascade.p = cascade.ic_p;
    cfg.cascade.reps = cascade.ic_reps;
    cfg.cascade.seeds = cascade.ic_seeds;
    cfg.cascade.weight_scaled = cascade.weight_scaled;
    cfg.centrality.damping = damping;
    cfg.centrality.closeness = closeness;
    cfg.cascade_params(0).validate()?;
    let (g, rankings) =
        pipeline::single_rankings(&corpus, &candidates, &cfg, seed::for_label(cascade.seed, "cascade"))?;
    for r in &rankings {
        let mut buf = Vec::new();
        r.write_csv(&mut buf)?;
        emit(Some(&out.join(format!("{}.csv", r.kind.label()))), &buf)?;
    }
    if graph {
        if let Some(g) = g {
            g.export(&out.join("graph.edges"), &out.join("graph.names"))?;
        }
    }
    println!("wrote {} rankings to {}", rankings.len(), out.display());
    Ok(())
}

fn fuse(
    rankings: &[PathBuf],
    experts: Option<&Path>,
    exclude: Option<&Path>,
    alpha: f64,
    out: Option<&Path>,
) -> Result<()> {
    let mut lists = rankings.iter().map(|p| read_ranking(p)).collect::<Result<Vec<_>>>()?;
    if let Some(ex) = exclude {
        let ex = read_experts(ex)?;
        lists = lists.iter().map(|r| r.without(&ex)).collect();
    }
    let fused = match experts {
        None => aggregate::mc2(&lists, alpha)?,
        Some(path) => {
            let train = read_experts(path)?;
            let outcome = greedy_fuse(&lists, &train, alpha)?;
            let lines: String = aggregate::provenance(&outcome, &lists)
                .iter()
                .map(|(k, v)| format!("{k}={v}\n"))
                .collect();
            match out {
                Some(p) => {
                    let mut prov = p.as_os_str().to_owned();
                    prov.push(".provenance");
                    emit(Some(Path::new(&prov)), lines.as_bytes())?;
                }
                None => eprint!("{lines}"),
            }
            outcome.ranking
        }
    };
    let mut buf = Vec::new();
    fused.write_csv(&mut buf)?;
    emit(out, &buf)
}

fn eval(ranking: &Path, experts: &Path, exclude: Option<&Path>, cutoffs: Option<&[usize]>) -> Result<()> {
    let mut r = read_ranking(ranking)?;
    if let Some(ex) = exclude {
        r = r.without(&read_experts(ex)?);
    }
    let experts = read_experts(experts)?;
    let cutoffs = cutoffs.unwrap_or(&CUTOFFS);
    if cutoffs.contains(&0) {
        return Err(usage("cutoffs must be at least 1"));
    }
    let mut out = String::from("N,p@N,ap@N\n");
    for &n in cutoffs {
        let ap = average_precision_at(&r, &experts, n)?;
        out.push_str(&format!("{n},{:?},{ap:?}\n", precision_at(&r, &experts, n)));
    }
    emit(None, out.as_bytes())
}

#[allow(clippy::too_many_arguments)]
fn run_pipeline(
    config: &Path,
    overrides: &[String],
    seed: Option<u64>,
    ic_p: Option<f64>,
    ic_reps: Option<usize>,
    ic_seeds: Option<usize>,
    model: Option<ModelKind>,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = PipelineConfig::load(config)?;
    for o in overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got {o:?}")))?;
        cfg.set(key.trim(), value.trim()).map_err(|e| usage(e.to_string()))?;
    }
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    if let Some(p) = ic_p {
        cfg.cascade.p = p;
    }
    if let Some(r) = ic_reps {
        cfg.cascade.reps = r;
    }
    if let Some(k) = ic_seeds {
        cfg.cascade.seeds = k;
    }
    if let Some(m) = model {
        cfg.model.kind = m;
    }
    if let Some(o) = out {
        cfg.run.out_dir = o;
    }
    let run = pipeline::cmd_pipeline(&cfg)?;
    print!("{}", run.report.to_markdown()?);
    log::info!("outputs written to {}", cfg.run.out_dir.display());
    Ok(())
}

fn report(runs: &[PathBuf], csv: bool) -> Result<()> {
    let rendered = pipeline::cmd_report(runs)?;
    if csv {
        for (dir, table) in runs.iter().zip(&rendered.csv) {
            if runs.len() > 1 {
                println!("# {}", dir.display());
            }
            print!("{table}");
        }
    } else {
        print!("{}", rendered.markdown);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { corpus, cache } => ingest(&corpus, &cache),
        Command::Fit {
            corpus,
            model,
            k,
            rho,
            weighting,
            seed,
            out,
        } => fit(&corpus, model, k, rho, weighting, seed, &out),
        Command::Query {
            corpus,
            index,
            model,
            query: text,
            gamma,
            count,
            out,
        } => query(&corpus, &index, model, &text, gamma, count, out.as_deref()),
        Command::Rank {
            corpus,
            candidates,
            out,
            cascade,
            damping,
            closeness,
            graph,
        } => rank(&corpus, &candidates, &out, &cascade, damping, closeness, graph),
        Command::Fuse {
            rankings,
            experts,
            exclude,
            alpha,
            out,
        } => fuse(&rankings, experts.as_deref(), exclude.as_deref(), alpha, out.as_deref()),
        Command::Eval {
            ranking,
            experts,
            exclude,
            cutoffs,
        } => eval(&ranking, &experts, exclude.as_deref(), cutoffs.as_deref()),
        Command::Pipeline {
            config,
            overrides,
            seed,
            ic_p,
            ic_reps,
            ic_seeds,
            model,
            out,
        } => run_pipeline(&config, &overrides, seed, ic_p, ic_reps, ic_seeds, model, out),
        Command::Report { runs, csv } => report(&runs, csv),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 1;
    }
    match err.downcast_ref::<expertrank::Error>() {
        Some(e) if e.is_non_convergence() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
