//! Command implementations behind the `detox` binary.
//!
//! Every command takes its parsed arguments and returns an [`Outcome`] or a
//! [`CliError`]; `main` only maps those to exit codes, so the commands are
//! directly testable.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use detox_core::baselines::{self, BaselineConfig, BaselineSystem};
use detox_core::clients::{
    ChatModel, ClientError, Detoxifier, Embedder, HttpChat, HttpClassifier, HttpDetoxifier, HttpEmbedder,
    HttpTranslator, ReplayStore, ServiceEndpoint, Translator, ENV_EMB_URL, ENV_LLM_TOKEN, ENV_LLM_URL, ENV_MT_URL,
    ENV_STA_URL,
};
use detox_core::corpus::{load_corpus, load_outputs, write_outputs, Corpus, Split, SystemOutput};
use detox_core::eval::{evaluate, EvalConfig, EvalError};
use detox_core::features::{
    characterize_clusters, edit_breakdown, encode_profile, fit_kmeans, length_stats, load_profiles, profiles_to_jsonl,
    project_2d, sweep, top_toxic_keywords, ClusterModel, FeatureError, FeatureProfile, KMeansConfig,
    KeywordVocabulary,
};
use detox_core::lang::LanguageTag;
use detox_core::lexicon::{load_lexicon, LexiconStore};
use detox_core::metrics::{LexiconScorer, RemoteScorer, StaMode, StyleScorer};
use detox_core::prompting::{align_to_descriptions, run_detox, CotContext, DetoxMode, LlmParams, RetryPolicy};
use detox_core::text::WordTokenizer;

#[derive(Debug, Parser)]
#[command(name = "detox", version, about = "Multilingual detoxification evaluation harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    /// Parses an argument list whose first item is the program name.
    pub fn from_args<I, T>(args: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        Self::try_parse_from(args)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a baseline system over a corpus.
    Baseline(BaselineArgs),
    /// Score system outputs and write report tables.
    Evaluate(EvaluateArgs),
    /// Fit k-means over feature profiles and characterize the clusters.
    Cluster(ClusterArgs),
    /// Edit-type, keyword and length analyses of a corpus.
    Analyze(AnalyzeArgs),
    /// Detoxify a corpus with an LLM.
    Detox(DetoxArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SystemArg {
    Duplicate,
    Delete,
    Backtranslation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "few_shot", alias = "few-shot")]
    FewShot,
    Cot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
    Md,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Corpus JSONL, optionally prefixed `LANG=`.
    #[arg(long)]
    pub corpus: String,
    #[arg(long)]
    pub lang: Option<LanguageTag>,
    #[arg(long, value_enum)]
    pub system: SystemArg,
    /// Lexicon file (required for delete), optionally prefixed `LANG=`.
    #[arg(long)]
    pub lexicon: Vec<String>,
    /// Pivot language for backtranslation.
    #[arg(long, default_value = "en")]
    pub pivot: LanguageTag,
    #[arg(long)]
    pub mt_endpoint: Option<String>,
    #[arg(long)]
    pub detox_endpoint: Option<String>,
    /// Recorded service responses used in place of live endpoints.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Corpus JSONL, optionally prefixed `LANG=`. Repeat for several languages.
    #[arg(long, required = true)]
    pub corpus: Vec<String>,
    /// Language of unprefixed corpus and lexicon paths.
    #[arg(long)]
    pub lang: Option<LanguageTag>,
    /// System output JSONL. Repeatable.
    #[arg(long, required = true)]
    pub outputs: Vec<PathBuf>,
    #[arg(long, conflicts_with = "sta_lexicon_fallback")]
    pub sta_endpoint: Option<String>,
    /// Score STA by lexicon lookup: 1 without a hit, 0 with one.
    #[arg(long)]
    pub sta_lexicon_fallback: bool,
    #[arg(long)]
    pub lexicon: Vec<String>,
    /// Threshold STA probabilities at this value.
    #[arg(long)]
    pub sta_threshold: Option<f64>,
    #[arg(long)]
    pub emb_endpoint: Option<String>,
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Recorded in the report metadata.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub skip_missing: bool,
    #[arg(long, default_value = "report")]
    pub report_dir: PathBuf,
    /// Report formats to write; all by default.
    #[arg(long, value_enum)]
    pub format: Vec<FormatArg>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Feature profile JSONL.
    #[arg(long)]
    pub profiles: PathBuf,
    #[arg(long)]
    pub lang: LanguageTag,
    /// Corpus whose train split selects the profiles to fit on.
    #[arg(long)]
    pub corpus: Option<String>,
    /// With `--corpus`, fit on every profile instead of the train split.
    #[arg(long)]
    pub all_splits: bool,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also report inertia for each k in `LO..HI` (inclusive).
    #[arg(long)]
    pub sweep: Option<String>,
    /// Keep the fitted cluster numbering instead of matching it to the
    /// chain-of-thought prompt's cluster descriptions.
    #[arg(long)]
    pub no_align: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "report")]
    pub report_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub corpus: String,
    #[arg(long)]
    pub lang: Option<LanguageTag>,
    /// Lexicon for the toxic keyword counts.
    #[arg(long)]
    pub lexicon: Vec<String>,
    #[arg(long, default_value_t = 5)]
    pub top_n: usize,
    #[arg(long, default_value = "report")]
    pub report_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DetoxArgs {
    #[arg(long)]
    pub corpus: String,
    #[arg(long)]
    pub lang: Option<LanguageTag>,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub llm_endpoint: Option<String>,
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    /// Cluster model (required for cot).
    #[arg(long)]
    pub cluster_model: Option<PathBuf>,
    /// Feature profiles already extracted; other sentences go through the
    /// descriptive prompt.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Corpus holding the cluster exemplars; defaults to `--corpus`.
    #[arg(long)]
    pub exemplar_corpus: Option<String>,
    /// Where to write profiles extracted during the run.
    #[arg(long)]
    pub profiles_out: Option<PathBuf>,
    /// System label of the outputs; defaults per mode.
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, default_value_t = 4)]
    pub concurrency: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Prompt/response log, one JSON object per exchange.
    #[arg(long)]
    pub audit: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("service failure: {0}")]
    Service(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Service(_) => 2,
        }
    }
}

impl From<ClientError> for CliError {
    fn from(e: ClientError) -> Self {
        CliError::Service(e.to_string())
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

/// What a successful command did.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    /// Samples skipped or flagged; nonzero means a partial run.
    pub partial: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.partial.is_empty() {
            0
        } else {
            3
        }
    }
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Baseline(a) => cmd_baseline(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Cluster(a) => cmd_cluster(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Detox(a) => cmd_detox(&a),
    }
}

/// Splits `LANG=PATH`; a bare path takes `default`.
pub fn lang_path(arg: &str, default: Option<LanguageTag>) -> Result<(LanguageTag, PathBuf), CliError> {
    if let Some((l, p)) = arg.split_once('=') {
        if let Ok(lang) = l.parse::<LanguageTag>() {
            return Ok((lang, PathBuf::from(p)));
        }
    }
    let lang = default.ok_or_else(|| invalid(format!("{arg}: give --lang or prefix the path with LANG=")))?;
    Ok((lang, PathBuf::from(arg)))
}

fn read_corpus(arg: &str, default: Option<LanguageTag>) -> Result<Corpus, CliError> {
    let (lang, path) = lang_path(arg, default)?;
    load_corpus(&path, lang).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn read_lexicons(args: &[String], default: Option<LanguageTag>) -> Result<LexiconStore, CliError> {
    let mut store = LexiconStore::new();
    for a in args {
        let (lang, path) = lang_path(a, default)?;
        store.merge(load_lexicon(&path, lang).map_err(invalid)?);
    }
    Ok(store)
}

fn read_replay(path: &Option<PathBuf>) -> Result<Option<Arc<ReplayStore>>, CliError> {
    path.as_ref()
        .map(|p| ReplayStore::load(p).map(Arc::new).map_err(invalid))
        .transpose()
}

fn write(path: &Path, content: &str, outcome: &mut Outcome) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| invalid(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, content).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    outcome.written.push(path.to_path_buf());
    Ok(())
}

/// A service picked from, in order: an explicit endpoint flag, a replay
/// file, the environment variable.
enum Source {
    Live(ServiceEndpoint),
    Replay(Arc<ReplayStore>),
}

fn pick_source(flag: &Option<String>, replay: &Option<Arc<ReplayStore>>, env: Option<&str>) -> Result<Option<Source>, CliError> {
    if let Some(url) = flag {
        return Ok(Some(Source::Live(ServiceEndpoint::new(url.clone())?)));
    }
    if let Some(r) = replay {
        return Ok(Some(Source::Replay(r.clone())));
    }
    match env.and_then(ServiceEndpoint::from_env) {
        Some(ep) => Ok(Some(Source::Live(ep?))),
        None => Ok(None),
    }
}

fn source_name(s: &Source, replay_path: &Option<PathBuf>) -> String {
    match s {
        Source::Live(ep) => ep.base_url.clone(),
        Source::Replay(_) => format!(
            "replay:{}",
            replay_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
        ),
    }
}

pub fn cmd_baseline(args: &BaselineArgs) -> Result<Outcome, CliError> {
    let corpus = read_corpus(&args.corpus, args.lang)?;
    let mut outcome = Outcome::default();
    let outputs: Vec<SystemOutput> = match args.system {
        SystemArg::Duplicate => corpus.pairs.iter().map(baselines::duplicate).collect(),
        SystemArg::Delete => {
            if args.lexicon.is_empty() {
                return Err(invalid("--system delete needs --lexicon"));
            }
            let lex = read_lexicons(&args.lexicon, Some(corpus.lang))?;
            lex.require(corpus.lang).map_err(invalid)?;
            corpus.pairs.iter().map(|p| baselines::delete(p, &lex)).collect()
        }
        SystemArg::Backtranslation => {
            let cfg = BaselineConfig {
                pivot_lang: args.pivot,
                ..BaselineConfig::new(BaselineSystem::Backtranslation, corpus.lang)
            };
            cfg.validate().map_err(invalid)?;
            let replay = read_replay(&args.replay)?;
            let mt: Box<dyn Translator> = match pick_source(&args.mt_endpoint, &replay, Some(ENV_MT_URL))? {
                Some(Source::Live(ep)) => Box::new(HttpTranslator::new(ep)?),
                Some(Source::Replay(r)) => Box::new(r),
                None => return Err(invalid("backtranslation needs --mt-endpoint, --replay or DETOX_MT_URL")),
            };
            let detox: Box<dyn Detoxifier> = match pick_source(&args.detox_endpoint, &replay, None)? {
                Some(Source::Live(ep)) => Box::new(HttpDetoxifier::new(ep)?),
                Some(Source::Replay(r)) => Box::new(r),
                None => return Err(invalid("backtranslation needs --detox-endpoint or --replay")),
            };
            let results = baselines::backtranslate_detox(&corpus.pairs, &cfg, &*mt, &*detox).map_err(invalid)?;
            let mut outs = Vec::new();
            for r in results {
                match r {
                    Ok(o) => outs.push(o),
                    Err(e) => {
                        eprintln!("skipped: {e}");
                        outcome.partial.push(e.to_string());
                    }
                }
            }
            if outs.is_empty() {
                return Err(CliError::Service("every sample failed".into()));
            }
            outs
        }
    };
    write_outputs(&args.out, &outputs).map_err(invalid)?;
    outcome.written.push(args.out.clone());
    Ok(outcome)
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<Outcome, CliError> {
    let corpora = args
        .corpus
        .iter()
        .map(|c| read_corpus(c, args.lang))
        .collect::<Result<Vec<_>, _>>()?;
    let mut outputs = Vec::new();
    for p in &args.outputs {
        outputs.extend(load_outputs(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?);
    }
    let replay = read_replay(&args.replay)?;
    let mut endpoints = BTreeMap::new();

    let scorer: Box<dyn StyleScorer> = if args.sta_lexicon_fallback {
        if args.lexicon.is_empty() {
            return Err(invalid("--sta-lexicon-fallback needs --lexicon"));
        }
        let lex = read_lexicons(&args.lexicon, args.lang)?;
        for c in &corpora {
            lex.require(c.lang).map_err(invalid)?;
        }
        Box::new(LexiconScorer::new(lex))
    } else {
        match pick_source(&args.sta_endpoint, &replay, Some(ENV_STA_URL))? {
            Some(s) => {
                let name = source_name(&s, &args.replay);
                endpoints.insert("sta".to_string(), name.clone());
                match s {
                    Source::Live(ep) => Box::new(RemoteScorer::new(HttpClassifier::new(ep)?, name)),
                    Source::Replay(r) => Box::new(RemoteScorer::new(r, name)),
                }
            }
            None => {
                return Err(invalid(
                    "no STA scorer: give --sta-endpoint, --sta-lexicon-fallback, --replay or DETOX_STA_URL",
                ))
            }
        }
    };
    let embedder: Box<dyn Embedder> = match pick_source(&args.emb_endpoint, &replay, Some(ENV_EMB_URL))? {
        Some(s) => {
            endpoints.insert("emb".to_string(), source_name(&s, &args.replay));
            match s {
                Source::Live(ep) => Box::new(HttpEmbedder::new(ep)?),
                Source::Replay(r) => Box::new(r),
            }
        }
        None => return Err(invalid("no embedder: give --emb-endpoint, --replay or DETOX_EMB_URL")),
    };

    let cfg = EvalConfig {
        sta_mode: match args.sta_threshold {
            Some(t) if (0.0..=1.0).contains(&t) => StaMode::Binarized { threshold: t },
            Some(t) => return Err(invalid(format!("--sta-threshold {t} is outside [0, 1]"))),
            None => StaMode::Probability,
        },
        skip_missing: args.skip_missing,
        seed: args.seed,
        endpoints,
        ..EvalConfig::default()
    };
    let report = evaluate(&corpora, &outputs, &*scorer, &*embedder, &cfg).map_err(|e| match e {
        EvalError::Client(c) => CliError::Service(c.to_string()),
        EvalError::Metric(m @ detox_core::metrics::MetricError::Scorer { .. }) => CliError::Service(m.to_string()),
        other => invalid(other),
    })?;

    let mut outcome = Outcome::default();
    let formats = if args.format.is_empty() {
        vec![FormatArg::Json, FormatArg::Csv, FormatArg::Md]
    } else {
        args.format.clone()
    };
    let dir = &args.report_dir;
    for f in formats {
        match f {
            FormatArg::Json => write(&dir.join("report.json"), &report.to_json(), &mut outcome)?,
            FormatArg::Csv => {
                write(&dir.join("rows.csv"), &report.rows_csv(), &mut outcome)?;
                write(&dir.join("summary.csv"), &report.summaries_csv(), &mut outcome)?;
            }
            FormatArg::Md => write(&dir.join("report.md"), &report.to_markdown(), &mut outcome)?,
        }
    }
    for s in &report.skipped {
        eprintln!("skipped unjoinable row {s}");
    }
    outcome.partial = report.skipped;
    Ok(outcome)
}

/// `LO..HI` or `LO..=HI`, both inclusive.
pub fn parse_sweep(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || invalid(format!("--sweep {s:?}: expected LO..HI"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

pub fn cmd_cluster(args: &ClusterArgs) -> Result<Outcome, CliError> {
    let mut profiles = load_profiles(&args.profiles).map_err(invalid)?;
    if let (Some(c), false) = (&args.corpus, args.all_splits) {
        let corpus = read_corpus(c, Some(args.lang))?;
        let train: HashSet<&str> = corpus
            .pairs
            .iter()
            .filter(|p| p.split == Split::Train)
            .map(|p| p.id.as_str())
            .collect();
        if train.is_empty() {
            return Err(invalid(format!("{c} has no train split; pass --all-splits")));
        }
        profiles.retain(|p| train.contains(p.sentence_id.as_str()));
    }
    let vocab = KeywordVocabulary::default();
    let encoded = profiles
        .iter()
        .map(|p| encode_profile(p, &vocab))
        .collect::<Result<Vec<_>, _>>()
        .map_err(invalid)?;
    let cfg = KMeansConfig {
        k: args.k,
        seed: args.seed,
        ..KMeansConfig::default()
    };
    let mut model = fit_kmeans(args.lang, &encoded, &cfg).map_err(invalid)?;
    if !args.no_align {
        model = align_to_descriptions(&model, &profiles, &vocab).map_err(invalid)?;
    }
    let mut outcome = Outcome::default();
    write(&args.out, &model.to_json(), &mut outcome)?;

    let features = characterize_clusters(&model, &profiles, &vocab).map_err(invalid)?;
    let dir = &args.report_dir;
    let mut report = json!({ "lang": args.lang, "k": model.k, "seed": model.seed, "inertia": model.inertia,
        "iterations": model.iterations, "sizes": model.cluster_sizes(), "clusters": features });

    let mut md = format!("# Clusters ({}, k = {}, seed = {})\n\n", args.lang, model.k, model.seed);
    md.push_str("| Cluster | Size | Exemplar | Tone | Language | Implied Sentiment |\n|---:|---:|---|---|---|---|\n");
    for (f, ex) in features.iter().zip(&model.exemplars) {
        let words = |ks: &[detox_core::features::RankedKeyword]| {
            ks.iter().map(|k| k.keyword.as_str()).collect::<Vec<_>>().join(", ")
        };
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} | {} |",
            f.cluster,
            f.size,
            ex.id,
            words(&f.tone),
            words(&f.language),
            words(&f.implied_sentiment)
        );
    }

    if let Some(range) = &args.sweep {
        let ks = parse_sweep(range)?;
        let table = sweep(args.lang, &encoded, ks, &cfg).map_err(invalid)?;
        let mut csv = String::from("k,inertia\n");
        md.push_str("\n## Inertia by k\n\n| k | Inertia |\n|---:|---:|\n");
        for (k, inertia) in &table {
            let _ = writeln!(csv, "{k},{inertia}");
            let _ = writeln!(md, "| {k} | {inertia:.4} |");
        }
        report["sweep"] = json!(table.iter().map(|(k, i)| json!({"k": k, "inertia": i})).collect::<Vec<_>>());
        write(&dir.join("sweep.csv"), &csv, &mut outcome)?;
    }

    let points = project_2d(&encoded.iter().map(|e| e.vector.clone()).collect::<Vec<_>>());
    let mut csv = String::from("id,cluster,pc1,pc2\n");
    for (e, (x, y)) in encoded.iter().zip(points) {
        let _ = writeln!(csv, "{},{},{x},{y}", csv_field(&e.id), model.assignments[&e.id]);
    }
    write(&dir.join("projection.csv"), &csv, &mut outcome)?;
    write(&dir.join("clusters.json"), &pretty(&report), &mut outcome)?;
    write(&dir.join("clusters.md"), &md, &mut outcome)?;
    Ok(outcome)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let corpus = read_corpus(&args.corpus, args.lang)?;
    let tok = WordTokenizer;
    let breakdown = match edit_breakdown(&corpus.pairs, &tok) {
        Ok(b) => Some(b),
        Err(FeatureError::NoEdits) => None,
        Err(e) => return Err(invalid(e)),
    };
    let lengths = length_stats(&corpus, &tok).map_err(invalid)?;
    let keywords = if args.lexicon.is_empty() {
        None
    } else {
        let lex = read_lexicons(&args.lexicon, Some(corpus.lang))?;
        Some(top_toxic_keywords(&corpus, &lex, args.top_n))
    };
    let report = json!({
        "lang": corpus.lang,
        "pairs": corpus.len(),
        "edit_breakdown": breakdown,
        "top_toxic_keywords": keywords.as_ref().map(|k| k.iter().map(|(w, n)| json!({"keyword": w, "count": n})).collect::<Vec<_>>()),
        "lengths": lengths,
    });

    let mut md = format!("# Analysis ({}, {} pairs)\n\n## Edit types\n\n", corpus.lang, corpus.len());
    match &breakdown {
        Some(b) => {
            let _ = writeln!(
                md,
                "| Del | Rephrase | Insert | Counted | Unchanged |\n|---:|---:|---:|---:|---:|\n| {:.1}% | {:.1}% | {:.1}% | {} | {} |",
                b.deleted_pct, b.rephrased_pct, b.inserted_pct, b.counted, b.unchanged
            );
        }
        None => md.push_str("No pair differs from its reference.\n"),
    }
    if let Some(k) = &keywords {
        md.push_str("\n## Top toxic keywords\n\n| Keyword | Sentences |\n|---|---:|\n");
        for (w, n) in k {
            let _ = writeln!(md, "| {w} | {n} |");
        }
    }
    md.push_str("\n## Lengths (tokens)\n\n| | Mean | Min | Q1 | Median | Q3 | Max |\n|---|---:|---:|---:|---:|---:|---:|\n");
    for (name, d) in [
        ("Toxic", &lengths.toxic_tokens),
        ("Reference", &lengths.reference_tokens),
        ("Levenshtein", &lengths.levenshtein),
    ] {
        let _ = writeln!(
            md,
            "| {name} | {:.2} | {} | {:.2} | {:.2} | {:.2} | {} |",
            d.mean, d.min, d.q1, d.median, d.q3, d.max
        );
    }
    let mut outcome = Outcome::default();
    write(&args.report_dir.join("analysis.json"), &pretty(&report), &mut outcome)?;
    write(&args.report_dir.join("analysis.md"), &md, &mut outcome)?;
    Ok(outcome)
}

pub fn cmd_detox(args: &DetoxArgs) -> Result<Outcome, CliError> {
    let corpus = read_corpus(&args.corpus, args.lang)?;
    let replay = read_replay(&args.replay)?;
    let mut params = LlmParams::default();
    if let Some(m) = &args.model {
        params.model = m.clone();
    }
    let chat: Box<dyn ChatModel> = match pick_source(&args.llm_endpoint, &replay, Some(ENV_LLM_URL))? {
        Some(Source::Live(ep)) => {
            params.endpoint = Some(ep.base_url.clone());
            let token = std::env::var(ENV_LLM_TOKEN).ok().filter(|t| !t.is_empty());
            Box::new(HttpChat::new(ep.with_auth_token(token))?)
        }
        Some(Source::Replay(r)) => Box::new(r),
        None => return Err(invalid("no LLM: give --llm-endpoint, --replay or DETOX_LLM_URL")),
    };
    let mode = match args.mode {
        ModeArg::FewShot => DetoxMode::FewShot,
        ModeArg::Cot => DetoxMode::Cot,
    };
    let system = args.system.clone().unwrap_or_else(|| mode.default_system().to_string());
    let vocab = KeywordVocabulary::default();

    let model: Option<ClusterModel> = match (&args.cluster_model, mode) {
        (Some(p), _) => {
            let text = fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
            Some(ClusterModel::from_json(&text).map_err(invalid)?)
        }
        (None, DetoxMode::Cot) => return Err(invalid("--mode cot needs --cluster-model")),
        (None, DetoxMode::FewShot) => None,
    };
    let exemplars = match &args.exemplar_corpus {
        Some(c) => read_corpus(c, Some(corpus.lang))?,
        None => corpus.clone(),
    };
    let known: HashMap<String, FeatureProfile> = match &args.profiles {
        Some(p) => load_profiles(p)
            .map_err(invalid)?
            .into_iter()
            .map(|p| (p.sentence_id.clone(), p))
            .collect(),
        None => HashMap::new(),
    };
    let ctx = model.as_ref().map(|m| CotContext {
        model: m,
        exemplars: &exemplars,
        vocab: &vocab,
        profiles: known,
    });

    let run = run_detox(
        &corpus.pairs,
        mode,
        &system,
        &*chat,
        &params,
        &RetryPolicy::default(),
        ctx.as_ref().filter(|_| mode == DetoxMode::Cot),
        args.concurrency.max(1),
    )?;

    let mut outcome = Outcome::default();
    if let Some(p) = &args.audit {
        write(p, &run.audit_jsonl(), &mut outcome)?;
    }
    if let Some(p) = &args.profiles_out {
        write(p, &profiles_to_jsonl(&run.profiles), &mut outcome)?;
    }
    write_outputs(&args.out, &run.outputs).map_err(invalid)?;
    outcome.written.push(args.out.clone());
    for f in &run.flagged {
        eprintln!("flagged {} at {}: {}", f.pair_id, f.stage, f.reason);
        outcome.partial.push(f.pair_id.clone());
    }
    Ok(outcome)
}
