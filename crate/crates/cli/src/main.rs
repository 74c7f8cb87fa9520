use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use landscape::aspect::{
    extract_aspect_keywords, AspectKeywords, ExclusionList, ExtractOptions, NormalizeMode,
};
use landscape::config::LandscapeConfig;
use landscape::corpus::{load_corpus, write_jsonl, Corpus, CorpusFormat, SearchQuery};
use landscape::replay::ReplayFixture;
use landscape::reports::{build_report, Format, ReportKind, ReportRequest};
use landscape::session::{self, load_session, save_session, SessionState, SplitPlan, Validation};
use landscape::{Error, Result};

#[derive(Parser)]
#[command(name = "landscape", version, about = "Aspect-guided topic exploration")]
struct Cli {
    /// JSON config file; falls back to $LANDSCAPE_CONFIG, then built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the LDA seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a raw corpus, filter it and write JSONL.
    Ingest(Ingest),
    /// Fit the baseline model and create a session directory.
    Fit(Fit),
    /// Extract aspect keywords from a set of documents.
    Aspect(Aspect),
    /// Run one iteration of a saved session.
    Iterate(Iterate),
    /// Continue or stop after an iteration.
    Decide(Decide),
    /// Run iterations back to back until inputs run out or Q settles.
    Autopilot(Autopilot),
    /// Export a report from a saved session.
    Report(Report),
    /// Alpha / lambda sensitivity of one iteration.
    Sweep(Sweep),
    /// Serve the HTTP API.
    Serve(Serve),
}

#[derive(Args)]
struct Ingest {
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    /// Input format; guessed from the extension when absent.
    #[arg(long)]
    format: Option<CorpusFormat>,
    /// Boolean search query, e.g. `quantum AND (network OR repeat*)`.
    #[arg(long)]
    query: Option<String>,
    /// Keep documents matching at least this many distinct query terms.
    #[arg(long, requires = "query")]
    min_hits: Option<usize>,
}

#[derive(Args)]
struct Fit {
    #[arg(
        long,
        required_unless_present = "reference",
        conflicts_with = "reference"
    )]
    corpus: Option<PathBuf>,
    /// Start from a published reference run instead of fitting.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Session directory to create.
    #[arg(long)]
    session: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Split the baseline into this many subtopics.
    #[arg(long)]
    split_total: Option<usize>,
    #[arg(long)]
    id: Option<String>,
}

#[derive(Args)]
struct Aspect {
    /// Documents describing the aspect.
    #[arg(long)]
    texts: PathBuf,
    #[arg(long)]
    label: String,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Word list of terms to leave out.
    #[arg(long)]
    exclude: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    max_k: usize,
    #[arg(long, default_value_t = 0.0)]
    min_score: f64,
    #[arg(long, value_parser = parse_normalize, default_value = "none")]
    normalize: NormalizeMode,
}

fn parse_normalize(s: &str) -> std::result::Result<NormalizeMode, String> {
    match s {
        "none" => Ok(NormalizeMode::None),
        "max_one" => Ok(NormalizeMode::MaxOne),
        "sum_one" => Ok(NormalizeMode::SumOne),
        _ => Err(format!("expected none, max_one or sum_one, got {s}")),
    }
}

#[derive(Args)]
struct Iterate {
    #[arg(long)]
    session: PathBuf,
    /// Aspect JSON; the staged aspect is used when absent.
    #[arg(long)]
    aspect: Option<PathBuf>,
    #[arg(
        long,
        required_unless_present = "reference",
        conflicts_with = "reference"
    )]
    validation: Option<PathBuf>,
    /// Take the published rewards for this iteration from a reference run.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Args)]
struct Decide {
    #[arg(long)]
    session: PathBuf,
    #[arg(
        long = "continue",
        conflicts_with = "stop",
        required_unless_present = "stop"
    )]
    continue_: bool,
    #[arg(long)]
    stop: bool,
    #[arg(long, default_value = "")]
    notes: String,
    /// Aspect JSON staged for the next iteration.
    #[arg(long, requires = "continue_")]
    edited_aspect: Option<PathBuf>,
}

#[derive(Args)]
struct Autopilot {
    #[arg(long)]
    session: PathBuf,
    /// Aspect JSON files, one per iteration.
    #[arg(long, conflicts_with = "reference")]
    aspect: Vec<PathBuf>,
    /// Validation corpora, one per iteration.
    #[arg(long, conflicts_with = "reference")]
    validation: Vec<PathBuf>,
    /// Replay the aspects and rewards of a reference run.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    max_iterations: usize,
    /// Stop once the largest Q change of an iteration falls below this.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
}

#[derive(Args)]
struct Report {
    #[arg(long)]
    session: PathBuf,
    #[arg(long)]
    kind: ReportKind,
    #[arg(long, conflicts_with_all = ["from", "to"])]
    iteration: Option<usize>,
    #[arg(long, requires = "to")]
    from: Option<usize>,
    #[arg(long, requires = "from")]
    to: Option<usize>,
    #[arg(long, default_value = "csv")]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    top_words: usize,
    /// Validation corpus, needed by keyword_comparison.
    #[arg(long)]
    validation: Option<PathBuf>,
}

#[derive(Args)]
struct Sweep {
    #[arg(long)]
    session: PathBuf,
    #[arg(long)]
    iteration: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Vec<f64>,
    /// Pair alphas and lambdas element-wise.
    #[arg(long)]
    zip: bool,
    #[arg(long, default_value = "csv")]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Serve {
    #[arg(long, default_value = "landscape-store")]
    store: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    /// Allowed CORS origin; repeat for several, `*` for any.
    #[arg(long)]
    cors_origin: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (cfg, source) = LandscapeConfig::resolve(cli.config.as_deref())?;
    let cfg = cfg.with_seed(cli.seed);
    tracing::info!(
        source = %source.as_ref().map_or("defaults".into(), |p| p.display().to_string()),
        config = %serde_json::to_string(&cfg)?,
        "effective config"
    );
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Fit(a) => fit(a, cfg),
        Command::Aspect(a) => aspect(a, &cfg),
        Command::Iterate(a) => iterate(a, &cfg),
        Command::Decide(a) => decide(a),
        Command::Autopilot(a) => autopilot(a, &cfg),
        Command::Report(a) => report(a, &cfg),
        Command::Sweep(a) => sweep(a),
        Command::Serve(a) => serve(a, cfg),
    }
}

fn read_corpus(path: &Path) -> Result<Corpus> {
    load_corpus(path, CorpusFormat::from_path(path))
}

fn read_preprocessed(path: &Path, cfg: &LandscapeConfig) -> Result<Corpus> {
    read_corpus(path)?.preprocess(&cfg.preprocess)
}

fn write_out(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn label_of(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn ingest(a: Ingest) -> Result<()> {
    let format = a
        .format
        .unwrap_or_else(|| CorpusFormat::from_path(&a.input));
    let mut corpus = load_corpus(&a.input, format)?;
    let loaded = corpus.len();
    if let Some(q) = &a.query {
        let query: SearchQuery = q.parse()?;
        corpus = match a.min_hits {
            Some(n) => corpus.relevance_filter(&query, n),
            None => corpus.filter_by_query(&query),
        };
    }
    let file = std::fs::File::create(&a.output).map_err(|e| Error::Io {
        path: a.output.clone(),
        source: e,
    })?;
    write_jsonl(corpus.documents(), std::io::BufWriter::new(file))?;
    tracing::info!(loaded, kept = corpus.len(), output = %a.output.display(), "ingested");
    Ok(())
}

fn fit(a: Fit, mut cfg: LandscapeConfig) -> Result<()> {
    let state = if let Some(reference) = &a.reference {
        let fx = ReplayFixture::load(reference)?;
        fx.session(a.id.as_deref().unwrap_or("reference"), cfg.session_config())?
    } else {
        let path = a
            .corpus
            .as_ref()
            .expect("clap requires corpus or reference");
        if let Some(k) = a.k {
            cfg.lda.k = k;
        }
        if let Some(n) = a.iterations {
            cfg.lda.iterations = n;
        }
        if let Some(total) = a.split_total {
            let sub_params = cfg.split.take().map(|s| s.sub_params).unwrap_or_default();
            cfg.split = Some(SplitPlan {
                total_subtopics: total,
                sub_params,
            });
        }
        let corpus = read_preprocessed(path, &cfg)?;
        let id = a.id.clone().unwrap_or_else(|| label_of(&a.session));
        session::create_session(
            id,
            path.display().to_string(),
            &corpus,
            &cfg.lda,
            cfg.split.as_ref(),
            cfg.session_config(),
        )?
    };
    save_session(&state, &a.session)?;
    println!(
        "{} topics in {}; session saved to {}",
        state.current_model().labels().len(),
        state.ctp1,
        a.session.display()
    );
    Ok(())
}

fn aspect(a: Aspect, cfg: &LandscapeConfig) -> Result<()> {
    let docs = read_preprocessed(&a.texts, cfg)?;
    let exclusions = match &a.exclude {
        Some(p) => ExclusionList::load(p)?,
        None => ExclusionList::default(),
    };
    let opts = ExtractOptions {
        label: a.label,
        max_k: a.max_k,
        min_score: a.min_score,
    };
    let ak = extract_aspect_keywords(&docs, &opts, &exclusions)?.normalize(a.normalize)?;
    write_out(&(ak.to_json()? + "\n"), a.output.as_deref())
}

fn reference_validation(path: &Path, index: usize) -> Result<Validation> {
    let fx = ReplayFixture::load(path)?;
    fx.validations().into_iter().nth(index).ok_or_else(|| {
        Error::InvalidParameter(format!("reference run has no iteration {}", index + 1))
    })
}

fn iterate(a: Iterate, cfg: &LandscapeConfig) -> Result<()> {
    let mut state = load_session(&a.session)?;
    let aspect = a.aspect.as_deref().map(AspectKeywords::load).transpose()?;
    let validation = match (&a.validation, &a.reference) {
        (Some(v), _) => Validation::documents(label_of(v), read_preprocessed(v, cfg)?),
        (None, Some(r)) => reference_validation(r, state.iterations.len())?,
        (None, None) => unreachable!("clap requires validation or reference"),
    };
    let rec = session::run_iteration(&mut state, aspect.as_ref(), &validation)?;
    save_session(&state, &a.session)?;
    println!(
        "iteration {} -> {}; selected {}",
        rec.index,
        rec.model,
        rec.selected_topics.join(", ")
    );
    for d in &rec.q_updates {
        println!("  {:<12} {:>10.6} -> {:>10.6}", d.label, d.before, d.after);
    }
    Ok(())
}

fn decide(a: Decide) -> Result<()> {
    let mut state = load_session(&a.session)?;
    let edited = a
        .edited_aspect
        .as_deref()
        .map(AspectKeywords::load)
        .transpose()?;
    session::record_decision(&mut state, a.continue_, edited, &a.notes)?;
    save_session(&state, &a.session)?;
    println!(
        "session {} is {}; current model {}",
        state.id, state.status, state.ctp1
    );
    Ok(())
}

fn autopilot(a: Autopilot, cfg: &LandscapeConfig) -> Result<()> {
    let mut state = load_session(&a.session)?;
    let (aspects, validations) = match &a.reference {
        Some(r) => {
            let fx = ReplayFixture::load(r)?;
            (fx.aspects.clone(), fx.validations())
        }
        None => {
            let aspects = a
                .aspect
                .iter()
                .map(|p| AspectKeywords::load(p))
                .collect::<Result<Vec<_>>>()?;
            let validations = a
                .validation
                .iter()
                .map(|p| {
                    Ok(Validation::documents(
                        label_of(p),
                        read_preprocessed(p, cfg)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            (aspects, validations)
        }
    };
    session::autopilot(
        &mut state,
        &aspects,
        &validations,
        a.max_iterations,
        a.epsilon,
    )?;
    save_session(&state, &a.session)?;
    let last = state
        .last_iteration()
        .map_or(String::new(), |r| r.expert_notes.clone());
    let mut lineage = state.lineage_chain();
    lineage.reverse();
    println!(
        "{} iterations; lineage {}; {last}",
        state.iterations.len(),
        lineage.join(" -> ")
    );
    Ok(())
}

fn report(a: Report, cfg: &LandscapeConfig) -> Result<()> {
    let state = load_session(&a.session)?;
    let mut req = ReportRequest::new(a.kind);
    req.format = a.format;
    req.top_words = a.top_words;
    req.iterations = match (a.iteration, a.from, a.to) {
        (Some(n), _, _) => Some((n, n)),
        (None, Some(f), Some(t)) => Some((f, t)),
        _ => None,
    };
    let validation = a
        .validation
        .as_deref()
        .map(|p| read_preprocessed(p, cfg))
        .transpose()?;
    let table = build_report(&state, &req, validation.as_ref())?;
    write_out(&table.render(a.format)?, a.output.as_deref())
}

fn sweep(a: Sweep) -> Result<()> {
    let state: SessionState = load_session(&a.session)?;
    let mut req = ReportRequest::new(ReportKind::Sweep);
    req.format = a.format;
    req.iterations = a.iteration.map(|n| (n, n));
    req.alphas = a.alphas;
    req.lambdas = a.lambdas;
    req.zip = a.zip;
    let table = build_report(&state, &req, None)?;
    write_out(&table.render(a.format)?, a.output.as_deref())
}

fn serve(a: Serve, cfg: LandscapeConfig) -> Result<()> {
    let mut gw = landscape_gateway::GatewayConfig::new(&a.store);
    if !a.cors_origin.is_empty() {
        gw.cors_origins = a.cors_origin;
    }
    gw.defaults = cfg;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Io {
        path: a.store.clone(),
        source: e,
    })?;
    rt.block_on(landscape_gateway::serve(a.bind, gw))
        .map_err(|e| Error::Io {
            path: a.store,
            source: e,
        })
}
