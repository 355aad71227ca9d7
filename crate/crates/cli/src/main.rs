//! Batch pipeline driver: index a corpus snapshot, extract crowd signals,
//! assemble features, train the model pair, produce TREC runs, and evaluate
//! or compare them.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use chronorank_core::corpus::{
    admit_document, build_index, load_corpus, load_queries, retrieve_candidates, IndexFile,
};
use chronorank_core::density::{Correction, RecencyConfig, TimeUnit};
use chronorank_core::eval::{
    load_run, mean_precision_at_k, paired_t_test, per_query_average_precision, write_run, EvalError,
    Qrels, RunFile,
};
use chronorank_core::features::{
    assemble_features, source_density, write_features_csv, FeatureConfig, FeatureName,
    QueryFeatureSet,
};
use chronorank_core::ltr::{
    classify_query, load_model, rank, rank_with_model, train, write_model, ModelPair, QueryClass,
    TrainConfig,
};
use chronorank_core::signals::{
    extract_external_signals, extract_twitter_feedback_signal, load_signal_file, write_signals,
    SnapshotStore, SourceKind, TemporalSignal,
};
use chronorank_core::synth::{self, SynthConfig};
use chronorank_core::textscore::{Bm25Config, DirichletConfig};
use chronorank_core::Query;

#[derive(Parser)]
#[command(
    name = "chronorank",
    version,
    about = "Time-aware learning-to-rank over temporal crowd signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the inverted index and collection statistics from a corpus
    /// snapshot, applying the retweet and language admission filters.
    Index(IndexArgs),
    /// Signal extraction and inspection.
    #[command(subcommand)]
    Signals(SignalsCommand),
    /// Assemble per-(query, document) feature vectors into a CSV.
    Features(FeaturesArgs),
    /// Train the temporal and atemporal models by coordinate ascent.
    Train(TrainArgs),
    /// Produce a TREC run file from trained models.
    Rank(RankArgs),
    /// Report MAP and P30 for a run against qrels.
    Eval(EvalArgs),
    /// Paired t-test between two runs' per-query average precision.
    Compare(CompareArgs),
    /// Generate the seeded synthetic benchmark (corpus, queries, qrels, and
    /// aligned signal snapshots).
    Synth(SynthArgs),
}

#[derive(Subcommand)]
enum SignalsCommand {
    /// Extract per-query signals: corpus feedback from the index plus news
    /// and Wikipedia snapshots when provided.
    Extract(ExtractArgs),
    /// Sample per-query density curves to CSV for plotting.
    Dump(DumpArgs),
}

#[derive(Args)]
struct IndexArgs {
    /// Corpus snapshot, one JSON document record per line.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExtractArgs {
    /// Index file produced by `index`.
    #[arg(long)]
    index: PathBuf,
    /// Query file, one JSON record per line.
    #[arg(long)]
    queries: PathBuf,
    /// News headline snapshot (`site,timestamp,title`).
    #[arg(long)]
    news: Option<PathBuf>,
    /// Wikipedia daily view snapshot (`title,date,count`).
    #[arg(long)]
    wiki_views: Option<PathBuf>,
    /// Wikipedia revision snapshot (`title,timestamp,editor,is_bot,added_text`).
    #[arg(long)]
    wiki_revisions: Option<PathBuf>,
    /// Per-site clock offset in seconds, as SITE=SECONDS. Repeatable.
    #[arg(long, value_name = "SITE=SECONDS")]
    site_offset: Vec<String>,
    /// Additional editor names treated as bots. Repeatable.
    #[arg(long)]
    bot_editor: Vec<String>,
    /// Minimum query-headline Jaccard similarity for a news match.
    #[arg(long, default_value_t = 0.1)]
    min_jaccard: f64,
    /// Candidate pool depth for the corpus feedback signal.
    #[arg(long, default_value_t = 1000)]
    k: usize,
    #[arg(long, default_value_t = 2500.0)]
    mu: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DumpArgs {
    /// Signal CSV produced by `signals extract`.
    #[arg(long)]
    signals: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// Output directory; one `<query>_<source>.csv` per curve.
    #[arg(long)]
    out_dir: PathBuf,
    /// Uniform sample nodes per curve.
    #[arg(long, default_value_t = 512)]
    nodes: usize,
    #[arg(long, value_enum, default_value_t = CorrectionArg::Reflection)]
    correction: CorrectionArg,
}

/// Scoring and density options shared by `features` and `rank`.
#[derive(Args, Clone)]
struct FeatureFlags {
    /// Candidate pool depth per query.
    #[arg(long, default_value_t = 1000)]
    k: usize,
    #[arg(long, default_value_t = 1.2)]
    k1: f64,
    #[arg(long, default_value_t = 0.75)]
    b: f64,
    #[arg(long, default_value_t = 2500.0)]
    mu: f64,
    /// Recency prior decay rate per time unit.
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    #[arg(long, value_enum, default_value_t = UnitArg::Days)]
    lambda_unit: UnitArg,
    #[arg(long, value_enum, default_value_t = CorrectionArg::Reflection)]
    correction: CorrectionArg,
    /// Drop these signal sources before feature assembly and routing.
    /// Accepts several values after one flag.
    #[arg(long, value_enum, num_args = 1..)]
    disable_source: Vec<SourceArg>,
}

impl FeatureFlags {
    fn config(&self) -> FeatureConfig {
        FeatureConfig {
            bm25: Bm25Config {
                k1: self.k1,
                b: self.b,
            },
            dirichlet: DirichletConfig { mu: self.mu },
            recency: RecencyConfig {
                lambda: self.lambda,
                time_unit: self.lambda_unit.into(),
            },
            correction: self.correction.into(),
        }
    }

    fn disabled(&self) -> BTreeSet<SourceKind> {
        self.disable_source.iter().map(|&s| s.into()).collect()
    }
}

#[derive(Args)]
struct FeaturesArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// Signal CSV; omit to assemble with every temporal column at zero.
    #[arg(long)]
    signals: Option<PathBuf>,
    /// Relevance judgments for the label column.
    #[arg(long)]
    qrels: Option<PathBuf>,
    #[command(flatten)]
    flags: FeatureFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Feature CSV produced by `features`.
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 25)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[arg(long, default_value_t = 0.2)]
    validation_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_temporal: PathBuf,
    #[arg(long)]
    out_atemporal: PathBuf,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    signals: Option<PathBuf>,
    /// Temporal (18-feature) model file; required for routed and temporal
    /// modes.
    #[arg(long)]
    model_temporal: Option<PathBuf>,
    /// Atemporal (13-feature) model file; required for routed and atemporal
    /// modes.
    #[arg(long)]
    model_atemporal: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Routed)]
    mode: ModeArg,
    /// Run tag; defaults to rmts (routed/temporal) or ltr (atemporal).
    #[arg(long)]
    tag: Option<String>,
    #[command(flatten)]
    flags: FeatureFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    /// Also print one AP line per query.
    #[arg(long)]
    per_query: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    run_a: PathBuf,
    #[arg(long)]
    run_b: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 200)]
    queries: usize,
    #[arg(long, default_value_t = 30)]
    relevant: usize,
    #[arg(long, default_value_t = 30)]
    confounders: usize,
    #[arg(long, default_value_t = 6000)]
    background: usize,
    /// Every n-th query is atemporal.
    #[arg(long, default_value_t = 4)]
    atemporal_period: usize,
    #[arg(long, default_value_t = 13)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Route each query by news presence.
    Routed,
    /// Score every query with the temporal model.
    Temporal,
    /// Score every query with the atemporal model.
    Atemporal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CorrectionArg {
    Reflection,
    None,
}

impl From<CorrectionArg> for Correction {
    fn from(c: CorrectionArg) -> Self {
        match c {
            CorrectionArg::Reflection => Correction::Reflection,
            CorrectionArg::None => Correction::None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UnitArg {
    Days,
    Hours,
}

impl From<UnitArg> for TimeUnit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Days => TimeUnit::Days,
            UnitArg::Hours => TimeUnit::Hours,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SourceArg {
    #[value(name = "news")]
    News,
    #[value(name = "wiki_views")]
    WikiViews,
    #[value(name = "wiki_edits")]
    WikiEdits,
    #[value(name = "twitter_feedback")]
    TwitterFeedback,
}

impl From<SourceArg> for SourceKind {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::News => SourceKind::News,
            SourceArg::WikiViews => SourceKind::WikiViews,
            SourceArg::WikiEdits => SourceKind::WikiEdits,
            SourceArg::TwitterFeedback => SourceKind::TwitterFeedback,
        }
    }
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Index(args) => cmd_index(args),
        Command::Signals(SignalsCommand::Extract(args)) => cmd_extract(args),
        Command::Signals(SignalsCommand::Dump(args)) => cmd_dump(args),
        Command::Features(args) => cmd_features(args),
        Command::Train(args) => cmd_train(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

/// Writes via a temp file in the same directory and renames into place.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn load_index(path: &Path) -> Result<IndexFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading index {}", path.display()))?;
    IndexFile::from_json(&text).with_context(|| format!("parsing index {}", path.display()))
}

fn cmd_index(args: IndexArgs) -> Result<()> {
    let docs = load_corpus(&args.corpus)
        .with_context(|| format!("loading corpus {}", args.corpus.display()))?;
    let total = docs.len();
    let admitted: Vec<_> = docs.into_iter().filter(admit_document).collect();
    let kept = admitted.len();
    let (index, stats) = build_index(admitted).context("building index")?;
    let file = IndexFile { stats, index };
    write_atomic(&args.out, &file.to_json())?;
    println!("indexed {kept} of {total} documents into {}", args.out.display());
    Ok(())
}

fn cmd_extract(args: ExtractArgs) -> Result<()> {
    let file = load_index(&args.index)?;
    let queries = load_queries(&args.queries)
        .with_context(|| format!("loading queries {}", args.queries.display()))?;

    let mut store = SnapshotStore::new();
    if let Some(news) = &args.news {
        let offsets = parse_site_offsets(&args.site_offset)?;
        store
            .load_news(news, &offsets)
            .with_context(|| format!("loading news snapshot {}", news.display()))?;
    }
    if let Some(views) = &args.wiki_views {
        store
            .load_wiki_views(views)
            .with_context(|| format!("loading view snapshot {}", views.display()))?;
    }
    if let Some(revisions) = &args.wiki_revisions {
        let bots: BTreeSet<String> = args.bot_editor.iter().map(|b| b.to_lowercase()).collect();
        store
            .load_wiki_revisions(revisions, &bots)
            .with_context(|| format!("loading revision snapshot {}", revisions.display()))?;
    }

    let dirichlet = DirichletConfig { mu: args.mu };
    let mut all: BTreeMap<String, Vec<TemporalSignal>> = BTreeMap::new();
    for query in &queries {
        let mut signals = extract_external_signals(query, &store, args.min_jaccard);
        let candidates = retrieve_candidates(query, &file.index, &file.stats, &dirichlet, args.k);
        let feedback = extract_twitter_feedback_signal(query, &candidates);
        if !feedback.is_empty() {
            signals.push(feedback);
        }
        if !signals.is_empty() {
            all.insert(query.query_id.clone(), signals);
        }
    }

    write_atomic(&args.out, &write_signals(&all))?;
    let total: usize = all.values().map(|s| s.len()).sum();
    println!("extracted {total} signals for {} queries", queries.len());
    Ok(())
}

fn parse_site_offsets(raw: &[String]) -> Result<BTreeMap<String, i64>> {
    let mut offsets = BTreeMap::new();
    for entry in raw {
        let (site, seconds) = entry
            .split_once('=')
            .with_context(|| format!("bad --site-offset {entry:?}; expected SITE=SECONDS"))?;
        let seconds: i64 = seconds
            .parse()
            .with_context(|| format!("bad offset seconds in {entry:?}"))?;
        offsets.insert(site.to_string(), seconds);
    }
    Ok(offsets)
}

fn cmd_dump(args: DumpArgs) -> Result<()> {
    if args.nodes < 2 {
        bail!("--nodes must be at least 2");
    }
    let signals = load_signal_file(&args.signals)
        .with_context(|| format!("loading signals {}", args.signals.display()))?;
    let queries = load_queries(&args.queries)?;
    let by_id: BTreeMap<&str, &Query> =
        queries.iter().map(|q| (q.query_id.as_str(), q)).collect();

    std::fs::create_dir_all(&args.out_dir)?;
    let mut written = 0;
    for (query_id, per_query) in &signals {
        let Some(query) = by_id.get(query_id.as_str()) else {
            continue;
        };
        for signal in per_query {
            // Domain is the signal's own span up to the query time.
            let Some(est) = source_density(query, signal, i64::MAX, args.correction.into()) else {
                continue;
            };
            let mut out = String::from("t,density\n");
            for (t, density) in est.sample_curve(args.nodes) {
                out.push_str(&format!("{t},{density}\n"));
            }
            let path = args.out_dir.join(format!("{query_id}_{}.csv", signal.source));
            write_atomic(&path, &out)?;
            written += 1;
        }
    }
    println!("wrote {written} density curves to {}", args.out_dir.display());
    Ok(())
}

/// Retrieves candidates and assembles features for every query, honoring the
/// disabled-source set. Returns the per-query class implied by the
/// (filtered) news signal.
fn assemble_pipeline(
    file: &IndexFile,
    queries: &[Query],
    signals: &BTreeMap<String, Vec<TemporalSignal>>,
    flags: &FeatureFlags,
) -> Vec<(QueryFeatureSet, QueryClass)> {
    let cfg = flags.config();
    let disabled = flags.disabled();
    queries
        .iter()
        .map(|query| {
            let candidates =
                retrieve_candidates(query, &file.index, &file.stats, &cfg.dirichlet, flags.k);
            let empty = Vec::new();
            let active: Vec<TemporalSignal> = signals
                .get(&query.query_id)
                .unwrap_or(&empty)
                .iter()
                .filter(|s| !disabled.contains(&s.source))
                .cloned()
                .collect();
            let news = active.iter().find(|s| s.source == SourceKind::News);
            let class = classify_query(news);
            let set = assemble_features(query, &candidates, &active, &file.stats, &cfg);
            (set, class)
        })
        .collect()
}

fn load_signals_opt(path: &Option<PathBuf>) -> Result<BTreeMap<String, Vec<TemporalSignal>>> {
    match path {
        Some(p) => load_signal_file(p).with_context(|| format!("loading signals {}", p.display())),
        None => Ok(BTreeMap::new()),
    }
}

fn cmd_features(args: FeaturesArgs) -> Result<()> {
    let file = load_index(&args.index)?;
    let queries = load_queries(&args.queries)?;
    let signals = load_signals_opt(&args.signals)?;
    let qrels = match &args.qrels {
        Some(p) => Some(Qrels::load(p).with_context(|| format!("loading qrels {}", p.display()))?),
        None => None,
    };

    let mut sets: Vec<QueryFeatureSet> = assemble_pipeline(&file, &queries, &signals, &args.flags)
        .into_iter()
        .map(|(set, _)| set)
        .collect();
    if let Some(qrels) = &qrels {
        for set in &mut sets {
            set.apply_labels(qrels);
        }
    }
    let rows: usize = sets.iter().map(|s| s.rows.len()).sum();
    write_atomic(&args.out, &write_features_csv(&sets))?;
    println!("wrote {rows} feature rows for {} queries", sets.len());
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let sets = chronorank_core::features::load_features_csv(&args.features)
        .with_context(|| format!("loading features {}", args.features.display()))?;
    let cfg = TrainConfig {
        restarts: args.restarts,
        max_sweeps: args.max_sweeps,
        tolerance: args.tolerance,
        validation_fraction: args.validation_fraction,
        seed: args.seed,
        ..TrainConfig::default()
    };

    let temporal = train(&sets, &FeatureName::ALL, &cfg).context("training temporal model")?;
    let atemporal =
        train(&sets, &FeatureName::NON_TEMPORAL, &cfg).context("training atemporal model")?;

    write_atomic(&args.out_temporal, &write_model(&temporal.model))?;
    write_atomic(&args.out_atemporal, &write_model(&atemporal.model))?;
    println!(
        "temporal: train MAP {:.4}, validation MAP {:.4} (restart {})",
        temporal.model.meta.train_map,
        temporal.model.meta.validation_map,
        temporal.model.meta.restart
    );
    println!(
        "atemporal: train MAP {:.4}, validation MAP {:.4} (restart {})",
        atemporal.model.meta.train_map,
        atemporal.model.meta.validation_map,
        atemporal.model.meta.restart
    );
    Ok(())
}

fn cmd_rank(args: RankArgs) -> Result<()> {
    let file = load_index(&args.index)?;
    let queries = load_queries(&args.queries)?;
    let signals = load_signals_opt(&args.signals)?;

    let temporal = match &args.model_temporal {
        Some(p) => Some(load_model(p).with_context(|| format!("loading model {}", p.display()))?),
        None => None,
    };
    let atemporal = match &args.model_atemporal {
        Some(p) => Some(load_model(p).with_context(|| format!("loading model {}", p.display()))?),
        None => None,
    };

    let tag = args.tag.clone().unwrap_or_else(|| {
        match args.mode {
            ModeArg::Atemporal => "ltr",
            _ => "rmts",
        }
        .to_string()
    });

    let assembled = assemble_pipeline(&file, &queries, &signals, &args.flags);
    let mut run = RunFile::new(tag);
    match args.mode {
        ModeArg::Routed => {
            let pair = ModelPair {
                temporal: temporal.context("routed mode needs --model-temporal")?,
                atemporal: atemporal.context("routed mode needs --model-atemporal")?,
            };
            for (set, class) in &assembled {
                insert_ranking(&mut run, set, rank(&pair, set, *class));
            }
        }
        ModeArg::Temporal => {
            let model = temporal.context("temporal mode needs --model-temporal")?;
            for (set, _) in &assembled {
                insert_ranking(&mut run, set, rank_with_model(&model, set));
            }
        }
        ModeArg::Atemporal => {
            let model = atemporal.context("atemporal mode needs --model-atemporal")?;
            for (set, _) in &assembled {
                insert_ranking(&mut run, set, rank_with_model(&model, set));
            }
        }
    }

    let lines: usize = run.rankings.values().map(|r| r.len()).sum();
    write_atomic(&args.out, &write_run(&run))?;
    println!("wrote {lines} run lines for {} queries", run.rankings.len());
    Ok(())
}

fn insert_ranking(run: &mut RunFile, set: &QueryFeatureSet, ranked: Vec<(String, f64)>) {
    if !ranked.is_empty() {
        run.rankings.insert(set.query_id.clone(), ranked);
    }
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let run = load_run(&args.run).with_context(|| format!("loading run {}", args.run.display()))?;
    let qrels = Qrels::load(&args.qrels)?;
    let per_query = per_query_average_precision(&run.rankings, &qrels);
    if per_query.is_empty() {
        bail!("no evaluable queries: qrels contain no relevant documents");
    }
    if args.per_query {
        for (query_id, ap) in &per_query {
            println!("AP {query_id} {ap:.6}");
        }
    }
    let map = per_query.values().sum::<f64>() / per_query.len() as f64;
    let p30 = mean_precision_at_k(&run.rankings, &qrels, 30).unwrap_or(0.0);
    println!("queries {}", per_query.len());
    println!("MAP {map:.6}");
    println!("P30 {p30:.6}");
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let run_a = load_run(&args.run_a)?;
    let run_b = load_run(&args.run_b)?;
    let qrels = Qrels::load(&args.qrels)?;
    let a = per_query_average_precision(&run_a.rankings, &qrels);
    let b = per_query_average_precision(&run_b.rankings, &qrels);
    match paired_t_test(&a, &b) {
        Ok(report) => {
            println!("n {}", report.n);
            println!("mean_diff {:.6}", report.mean_diff);
            println!("variance {:.6}", report.variance);
            println!("t {:.4}", report.t_stat);
            println!("df {}", report.df);
            println!("p {:.6}", report.p_two_sided);
            println!("effect_size {:.4}", report.effect_size);
            println!("ci95 [{:.6}, {:.6}]", report.ci95.0, report.ci95.1);
            Ok(())
        }
        Err(EvalError::NoDifference) => {
            println!("no difference");
            Ok(())
        }
        Err(other) => Err(other.into()),
    }
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        num_queries: args.queries,
        relevant_per_query: args.relevant,
        confounders_per_query: args.confounders,
        background_docs: args.background,
        atemporal_period: args.atemporal_period,
        seed: args.seed,
        ..SynthConfig::default()
    };
    let data = synth::generate(&cfg);
    std::fs::create_dir_all(&args.out_dir)?;
    let dir = &args.out_dir;
    write_atomic(
        &dir.join("corpus.jsonl"),
        &chronorank_core::corpus::write_corpus(&data.documents),
    )?;
    write_atomic(
        &dir.join("queries.jsonl"),
        &chronorank_core::corpus::write_queries(&data.queries),
    )?;
    write_atomic(&dir.join("qrels.txt"), &data.qrels.to_text())?;
    write_atomic(&dir.join("news.csv"), &synth::news_csv(&data.news))?;
    write_atomic(&dir.join("wiki_views.csv"), &synth::views_csv(&data.views))?;
    write_atomic(
        &dir.join("wiki_revisions.csv"),
        &synth::revisions_csv(&data.revisions),
    )?;
    println!(
        "generated {} documents, {} queries into {}",
        data.documents.len(),
        data.queries.len(),
        dir.display()
    );
    Ok(())
}
