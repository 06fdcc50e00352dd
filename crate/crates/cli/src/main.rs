//! `threatfilter` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 output error.

mod config;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use threatfilter::experiment::write_sweep_csv;
use threatfilter::scoring::{write_breakdown_csv, BREAKDOWN_CSV_HEADER};
use threatfilter::select::{DEFAULT_GROUPS, DEFAULT_MAX_ITER};
use threatfilter::synth::write_corpus;
use threatfilter::text::{DEFAULT_MAX_ARITY, DEFAULT_MIN_TOKEN_LEN};
use threatfilter::{
    classify, evaluate, load_corpus, parse_email, roc_curve, roc_thresholds, split_corpus, sweep,
    train, Approach, ClassifierConfig, Error, LabeledEmail, Model, Pipeline, StopList, SweepAxis,
    SweepSpec, SynthConfig, TrainParams,
};

use config::{resolve, ConfigFile};

#[derive(Parser)]
#[command(name = "threatfilter", version, about = "Naive Bayesian threat e-mail filter")]
struct Cli {
    /// Flat key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a labeled corpus directory.
    Train(TrainArgs),
    /// Score messages against a trained model.
    Classify(ClassifyArgs),
    /// Evaluate a model on labeled test messages.
    Evaluate(EvaluateArgs),
    /// Retrain and evaluate across data sizes or feature counts.
    Sweep(SweepArgs),
    /// Dump a model's ranked features and their groups.
    Inspect(InspectArgs),
    /// Write a seeded synthetic corpus.
    GenCorpus(GenArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// Stopword file, one word per line.
    #[arg(long, env = "THREATFILTER_STOPLIST")]
    stoplist: Option<PathBuf>,
    /// Keep stopwords.
    #[arg(long)]
    no_stoplist: bool,
    #[arg(long)]
    min_token_len: Option<usize>,
    #[arg(long)]
    max_arity: Option<usize>,
}

#[derive(Args)]
struct ScoringArgs {
    #[arg(long)]
    approach: Option<Approach>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    w1: Option<f64>,
    #[arg(long)]
    w2: Option<f64>,
    /// Arity weights for arity 1,2,3.
    #[arg(long)]
    arity_weights: Option<String>,
    /// Context weights for arity 1,2,3.
    #[arg(long)]
    context_weights: Option<String>,
    /// Threshold the raw total instead of the per-feature mean.
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    features: Option<usize>,
    /// Train on this fraction of each class only.
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Write the per-feature score breakdown as CSV.
    #[arg(long)]
    explain: Option<PathBuf>,
    /// Count each message under its verdict and rewrite the model.
    #[arg(long)]
    update: bool,
    #[arg(long)]
    groups: Option<usize>,
    #[arg(long)]
    cluster_seed: Option<u64>,
    #[arg(required = true)]
    messages: Vec<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Labeled directory of test messages.
    #[arg(long, conflicts_with = "corpus")]
    test: Option<PathBuf>,
    /// Evaluate on the held-out side of a split of this corpus.
    #[arg(long, requires = "split")]
    corpus: Option<PathBuf>,
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Write ROC points as CSV.
    #[arg(long)]
    roc: Option<PathBuf>,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    axis: Option<SweepAxis>,
    /// Comma-separated axis values.
    #[arg(long)]
    values: Option<String>,
    /// Comma-separated approaches.
    #[arg(long)]
    approaches: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Feature count on the data axis.
    #[arg(long)]
    features: Option<usize>,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    groups: Option<usize>,
    #[arg(long)]
    cluster_seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    threat: Option<usize>,
    #[arg(long)]
    spam: Option<usize>,
    #[arg(long)]
    legitimate: Option<usize>,
    /// Scale the default class mix to about this many messages.
    #[arg(long, conflicts_with_all = ["threat", "spam", "legitimate"])]
    size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ambiguity: Option<f64>,
}

enum Failure {
    Usage(anyhow::Error),
    Input(anyhow::Error),
    Output(anyhow::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Output(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Input(e) | Failure::Output(e) => e,
        }
    }
}

type CmdResult<T = ()> = Result<T, Failure>;

trait Classify<T> {
    fn usage(self) -> CmdResult<T>;
    fn input(self) -> CmdResult<T>;
    fn output(self) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
    fn input(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Input(e.into()))
    }
    fn output(self) -> CmdResult<T> {
        self.map_err(|e| Failure::Output(e.into()))
    }
}

/// Resolved settings, echoed to stderr before a command runs.
struct Resolved(Vec<(String, String)>);

impl Resolved {
    fn new() -> Self {
        Resolved(Vec::new())
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    fn log(&self, command: &str) {
        let mut err = io::stderr().lock();
        let _ = writeln!(err, "# {command}");
        for (k, v) in &self.0 {
            let _ = writeln!(err, "# {k}={v}");
        }
    }
}

fn load_config(path: Option<&Path>) -> CmdResult<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p).input(),
        None => Ok(ConfigFile::default()),
    }
}

fn pipeline_from(args: &PipelineArgs, cfg: &ConfigFile, log: &mut Resolved) -> CmdResult<Pipeline> {
    let stoplist_path = match &args.stoplist {
        Some(p) => Some(p.clone()),
        None => cfg.get::<PathBuf>("stoplist").usage()?,
    };
    let stops = match &stoplist_path {
        Some(p) => StopList::load(p).input()?,
        None => StopList::default(),
    };
    let no_stoplist = args.no_stoplist || cfg.get::<bool>("no_stoplist").usage()?.unwrap_or(false);
    let pipeline = Pipeline {
        stops,
        min_token_len: resolve(args.min_token_len, cfg, "min_token_len", DEFAULT_MIN_TOKEN_LEN).usage()?,
        use_stoplist: !no_stoplist,
        max_arity: resolve(args.max_arity, cfg, "max_arity", DEFAULT_MAX_ARITY).usage()?,
    };
    pipeline.validate().usage()?;
    log.set(
        "stoplist",
        stoplist_path.map(|p| p.display().to_string()).unwrap_or_else(|| "builtin".into()),
    );
    log.set("use_stoplist", pipeline.use_stoplist);
    log.set("min_token_len", pipeline.min_token_len);
    log.set("max_arity", pipeline.max_arity);
    Ok(pipeline)
}

fn parse_triple(s: &str) -> anyhow::Result<[f64; 3]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad weight list {s:?}"))?;
    parts
        .try_into()
        .map_err(|_| anyhow!("expected three comma-separated weights, got {s:?}"))
}

fn scoring_from(args: &ScoringArgs, cfg: &ConfigFile, log: &mut Resolved) -> CmdResult<ClassifierConfig> {
    let d = ClassifierConfig::default();
    let weights = |flag: &Option<String>, key: &str, default: [f64; 3]| -> CmdResult<[f64; 3]> {
        match flag.clone().or(cfg.get::<String>(key).usage()?) {
            Some(s) => parse_triple(&s).usage(),
            None => Ok(default),
        }
    };
    let no_normalize = args.no_normalize || cfg.get::<bool>("no_normalize").usage()?.unwrap_or(false);
    let out = ClassifierConfig {
        approach: resolve(args.approach, cfg, "approach", d.approach).usage()?,
        arity_weights: weights(&args.arity_weights, "arity_weights", d.arity_weights)?,
        context_weights: weights(&args.context_weights, "context_weights", d.context_weights)?,
        w1: resolve(args.w1, cfg, "w1", d.w1).usage()?,
        w2: resolve(args.w2, cfg, "w2", d.w2).usage()?,
        threshold: resolve(args.threshold, cfg, "threshold", d.threshold).usage()?,
        normalize: !no_normalize,
    };
    out.validate().usage()?;
    log.set("approach", out.approach);
    log.set("arity_weights", join(&out.arity_weights));
    log.set("context_weights", join(&out.context_weights));
    log.set("w1", out.w1);
    log.set("w2", out.w2);
    log.set("threshold", out.threshold);
    log.set("normalize", out.normalize);
    Ok(out)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn load_labeled(dir: &Path) -> CmdResult<Vec<LabeledEmail>> {
    let loaded = load_corpus(dir).input()?;
    if loaded.skipped > 0 {
        eprintln!("warning: skipped {} entries outside the label directories", loaded.skipped);
    }
    if loaded.emails.is_empty() {
        return Err(Failure::Input(anyhow!("{}: {}", dir.display(), Error::EmptyCorpus)));
    }
    Ok(loaded.emails)
}

/// Input errors for bad data, usage errors for bad parameters.
fn classify_core(e: Error) -> Failure {
    match e {
        Error::InvalidParameter(_) | Error::InvalidRatio(_) | Error::InvalidArity(_) | Error::OutOfBounds(_) => {
            Failure::Usage(e.into())
        }
        _ => Failure::Input(e.into()),
    }
}

fn open_out(path: Option<&Path>) -> CmdResult<Box<dyn Write>> {
    match path {
        Some(p) if p != Path::new("-") => {
            let f = fs::File::create(p).with_context(|| format!("creating {}", p.display())).output()?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn load_model(path: &Path, pipeline: &Pipeline) -> CmdResult<Model> {
    let model = Model::load(path).input()?;
    if !model.pipeline_matches(pipeline) {
        eprintln!(
            "warning: {} was trained with different feature extraction settings",
            path.display()
        );
    }
    Ok(model)
}

fn cmd_train(args: TrainArgs, cfg: &ConfigFile) -> CmdResult {
    let mut log = Resolved::new();
    let pipeline = pipeline_from(&args.pipeline, cfg, &mut log)?;
    let features = resolve(args.features, cfg, "features", TrainParams::default().features).usage()?;
    let split = resolve(args.split, cfg, "split", 1.0).usage()?;
    let seed = resolve(args.seed, cfg, "seed", 0u64).usage()?;
    log.set("corpus", args.corpus.display());
    log.set("out", args.out.display());
    log.set("features", features);
    log.set("split", split);
    log.set("seed", seed);
    log.log("train");

    let emails = load_labeled(&args.corpus)?;
    let emails = if split < 1.0 {
        split_corpus(&emails, split, seed).map_err(classify_core)?.train
    } else {
        emails
    };
    let params = TrainParams { pipeline, features };
    let model = train(&emails, &params).map_err(classify_core)?;
    model
        .save(&args.out)
        .with_context(|| "writing model".to_string())
        .output()?;
    let selected = model.selected().len();
    if selected < features {
        eprintln!("warning: only {selected} candidate features available, fewer than the requested {features}");
    }
    println!(
        "n_threat={} n_normal={} candidates={} selected={}",
        model.n_threat(),
        model.n_normal(),
        model.library().len(),
        selected
    );
    Ok(())
}

fn cmd_classify(args: ClassifyArgs, cfg: &ConfigFile) -> CmdResult {
    let mut log = Resolved::new();
    let pipeline = pipeline_from(&args.pipeline, cfg, &mut log)?;
    let scoring = scoring_from(&args.scoring, cfg, &mut log)?;
    let groups_k = resolve(args.groups, cfg, "groups", DEFAULT_GROUPS).usage()?;
    let cluster_seed = resolve(args.cluster_seed, cfg, "cluster_seed", 0u64).usage()?;
    log.set("model", args.model.display());
    log.set("groups", groups_k);
    log.set("cluster_seed", cluster_seed);
    log.set("update", args.update);
    log.log("classify");

    let mut model = load_model(&args.model, &pipeline)?;
    let groups = model
        .feature_groups(groups_k, cluster_seed, DEFAULT_MAX_ITER)
        .map_err(classify_core)?;
    let mut explain = match &args.explain {
        Some(p) => {
            let mut w = open_out(Some(p))?;
            writeln!(w, "{BREAKDOWN_CSV_HEADER}").output()?;
            Some(w)
        }
        None => None,
    };

    let mut stdout = BufWriter::new(io::stdout().lock());
    let mut unreadable = 0;
    for path in &args.messages {
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                unreadable += 1;
                continue;
            }
        };
        let id = path.display().to_string();
        let email = parse_email(&bytes, id.as_str());
        let b = classify(&model, &email, &scoring, &pipeline, Some(&groups));
        writeln!(stdout, "{id}\t{}\t{:.6}\t{:.6}", b.verdict, b.normalized + 0.0, b.total + 0.0).output()?;
        if let Some(w) = explain.as_mut() {
            write_breakdown_csv(w, &id, &b).output()?;
        }
        if args.update {
            model.update_online(&pipeline.extract(&email), b.verdict);
        }
    }
    stdout.flush().output()?;
    if let Some(mut w) = explain {
        w.flush().output()?;
    }
    if args.update {
        model.save(&args.model).output()?;
    }
    if unreadable > 0 {
        return Err(Failure::Input(anyhow!("{unreadable} message file(s) could not be read")));
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs, cfg: &ConfigFile) -> CmdResult {
    let mut log = Resolved::new();
    let pipeline = pipeline_from(&args.pipeline, cfg, &mut log)?;
    let scoring = scoring_from(&args.scoring, cfg, &mut log)?;
    let lambda = resolve(args.lambda, cfg, "lambda", 1.0).usage()?;
    log.set("model", args.model.display());
    log.set("lambda", lambda);

    let test = match (&args.test, &args.corpus) {
        (Some(dir), None) => {
            log.set("test", dir.display());
            log.log("evaluate");
            load_labeled(dir)?
        }
        (None, Some(dir)) => {
            let split = resolve(args.split, cfg, "split", 0.75).usage()?;
            let seed = resolve(args.seed, cfg, "seed", 0u64).usage()?;
            log.set("corpus", dir.display());
            log.set("split", split);
            log.set("seed", seed);
            log.log("evaluate");
            let emails = load_labeled(dir)?;
            split_corpus(&emails, split, seed).map_err(classify_core)?.test
        }
        _ => return Err(Failure::Usage(anyhow!("pass either --test <dir> or --corpus <dir> --split <ratio>"))),
    };

    let model = load_model(&args.model, &pipeline)?;
    let ev = evaluate(&model, &test, &scoring, &pipeline, lambda).map_err(classify_core)?;
    let c = ev.confusion;
    println!("approach\t{}", scoring.approach);
    println!("n_test\t{}", test.len());
    println!("n_nn\t{}\nn_nt\t{}\nn_tn\t{}\nn_tt\t{}", c.n_nn, c.n_nt, c.n_tn, c.n_tt);
    print!("{}", ev.metrics);

    if let Some(path) = &args.roc {
        let points = roc_curve(&ev.scores, &roc_thresholds(&ev.scores)).map_err(classify_core)?;
        let mut w = open_out(Some(path))?;
        threatfilter::eval::write_roc_csv(&mut w, &points).output()?;
        w.flush().output()?;
    }
    Ok(())
}

fn parse_list<T>(s: &str) -> anyhow::Result<Vec<T>>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<T>().map_err(|e| anyhow!("{p:?}: {e}")))
        .collect()
}

fn cmd_sweep(args: SweepArgs, cfg: &ConfigFile) -> CmdResult {
    let mut log = Resolved::new();
    let pipeline = pipeline_from(&args.pipeline, cfg, &mut log)?;
    let base = scoring_from(&args.scoring, cfg, &mut log)?;
    let axis = resolve(args.axis, cfg, "axis", SweepAxis::FeatureCount).usage()?;
    let values: String = resolve(args.values, cfg, "values", "10,20,40,60".to_string()).usage()?;
    let approaches: String = resolve(args.approaches, cfg, "approaches", "bs,bm,bmc".to_string()).usage()?;
    let seed = resolve(args.seed, cfg, "seed", 0u64).usage()?;
    let split = resolve(args.split, cfg, "split", 0.75).usage()?;
    let lambda = resolve(args.lambda, cfg, "lambda", 1.0).usage()?;
    let features = resolve(args.features, cfg, "features", TrainParams::default().features).usage()?;
    log.set("corpus", args.corpus.display());
    log.set("axis", axis);
    log.set("values", &values);
    log.set("approaches", &approaches);
    log.set("seed", seed);
    log.set("split", split);
    log.set("lambda", lambda);
    log.set("features", features);
    log.set(
        "out",
        args.out.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "-".into()),
    );
    log.log("sweep");

    let spec = SweepSpec {
        axis,
        values: parse_list(&values).usage()?,
        approaches: parse_list(&approaches).usage()?,
        seed,
        split,
        lambda,
        features,
        base,
        pipeline,
    };
    let corpus = load_labeled(&args.corpus)?;
    let rows = sweep(&corpus, &spec).map_err(classify_core)?;
    let mut w = open_out(args.out.as_deref())?;
    write_sweep_csv(&mut w, &rows).output()?;
    w.flush().output()
}

fn cmd_inspect(args: InspectArgs, cfg: &ConfigFile) -> CmdResult {
    let mut log = Resolved::new();
    let k = resolve(args.groups, cfg, "groups", DEFAULT_GROUPS).usage()?;
    let seed = resolve(args.cluster_seed, cfg, "cluster_seed", 0u64).usage()?;
    log.set("model", args.model.display());
    log.set("groups", k);
    log.set("cluster_seed", seed);
    log.log("inspect");

    let model = Model::load(&args.model).input()?;
    let groups = model.feature_groups(k, seed, DEFAULT_MAX_ITER).map_err(classify_core)?;
    let mut w = open_out(args.out.as_deref())?;
    writeln!(w, "rank,feature,arity,ig,threat_docs,normal_docs,token_prob,group").output()?;
    for (rank, e) in model.selected().iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            rank + 1,
            e.feature,
            e.feature.arity(),
            e.ig,
            e.threat_docs,
            e.normal_docs,
            model.token_prob(&e.feature).value(),
            groups.group_of(&e.feature).map(|g| g.to_string()).unwrap_or_default()
        )
        .output()?;
    }
    w.flush().output()?;
    eprintln!(
        "n_threat={} n_normal={} selected={} group_sizes={}",
        model.n_threat(),
        model.n_normal(),
        model.selected().len(),
        join(&groups.groups.iter().map(Vec::len).collect::<Vec<_>>())
    );
    Ok(())
}

fn cmd_gen_corpus(args: GenArgs, cfg: &ConfigFile) -> CmdResult {
    let d = SynthConfig::default();
    let seed = resolve(args.seed, cfg, "seed", d.seed).usage()?;
    let size: Option<usize> = match args.size {
        Some(s) => Some(s),
        None => cfg.get("size").usage()?,
    };
    let mut synth = match size {
        Some(n) => SynthConfig::scaled(n, seed),
        None => SynthConfig {
            threat: resolve(args.threat, cfg, "threat", d.threat).usage()?,
            spam: resolve(args.spam, cfg, "spam", d.spam).usage()?,
            legitimate: resolve(args.legitimate, cfg, "legitimate", d.legitimate).usage()?,
            seed,
            ambiguity: d.ambiguity,
        },
    };
    synth.ambiguity = resolve(args.ambiguity, cfg, "ambiguity", d.ambiguity).usage()?;
    let mut log = Resolved::new();
    log.set("out", args.out.display());
    log.set("threat", synth.threat);
    log.set("spam", synth.spam);
    log.set("legitimate", synth.legitimate);
    log.set("seed", synth.seed);
    log.set("ambiguity", synth.ambiguity);
    log.log("gen-corpus");

    let n = write_corpus(&args.out, &synth).map_err(|e| match e {
        Error::Io { .. } => Failure::Output(e.into()),
        other => Failure::Usage(other.into()),
    })?;
    println!(
        "wrote {n} messages to {} (threat={} spam={} legitimate={})",
        args.out.display(),
        synth.threat,
        synth.spam,
        synth.legitimate
    );
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Train(a) => cmd_train(a, &cfg),
        Command::Classify(a) => cmd_classify(a, &cfg),
        Command::Evaluate(a) => cmd_evaluate(a, &cfg),
        Command::Sweep(a) => cmd_sweep(a, &cfg),
        Command::Inspect(a) => cmd_inspect(a, &cfg),
        Command::GenCorpus(a) => cmd_gen_corpus(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.exit_code())
        }
    }
}
