//! The `kc` command line: dataset preparation, capture, evaluation, and
//! store management. Exit codes: 0 success, 1 domain errors (validation
//! failures, infeasible splits, rejected captures), 2 usage errors.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use kc_core::vocab::default_prefixes;
use kc_core::{
    canonicalize, load_schema, macro_metrics, materialize, parse_turtle, serialize_turtle,
    validate, CanonMode, CompareMode, EvalReport, Graph, OntologySchema,
};

use crate::capture::{capture_response, CaptureStatus};
use crate::client::{
    api_key_from_env, batch_complete, EndpointClient, EndpointConfig, ModelClient, OracleClient,
    OracleNoise, ReplayClient, RetryConfig,
};
use crate::config::{load_config, FileConfig};
use crate::corpus::{bundled_corpus, load_corpus, write_corpus, Corpus};
use crate::dataset::{
    corpus_stats, export_chat_jsonl, select_k_per_concept, split, SplitSpec, SWEPT_CONCEPTS,
};
use crate::eval::{run_eval, run_sweep, write_csv, FailMode, SweepManifest};
use crate::manifest::{TrainingManifest, DEFAULT_MODEL_NAME, DEFAULT_SYSTEM_PROMPT};
use crate::store::{MergePolicy, Store};
use crate::svg::render_svg;

#[derive(Debug, Parser)]
#[command(
    name = "kc",
    version,
    about = "Ontology-driven symbolic knowledge capture: datasets, capture, evaluation",
    propagate_version = true
)]
pub struct Cli {
    /// Directory all relative paths resolve against.
    #[arg(long, global = true, default_value = ".")]
    pub workdir: PathBuf,

    /// JSON config file merged beneath flags (flags win). Defaults to
    /// `<workdir>/kc.json` when present.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Ontology schema Turtle file; the bundled family schema when omitted.
    #[arg(long, global = true)]
    pub schema: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a Turtle file and reprint it canonically.
    Parse {
        /// Input Turtle file.
        #[arg(long)]
        input: PathBuf,
        /// Write the canonical form here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Canonicalize person names to stable IRIs before printing.
        #[arg(long)]
        canonical_names: bool,
    },
    /// Validate a Turtle file against the ontology schema.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Compute the rule closure of a valid Turtle file.
    Materialize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corpus statistics and dataset preparation.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Run one prompt through a backend and classify the response.
    Capture(CaptureArgs),
    /// Evaluate a backend over a test corpus.
    Eval(EvalArgs),
    /// Run a multi-label sweep from a JSON manifest.
    Sweep {
        /// Sweep manifest (JSON).
        #[arg(long)]
        manifest: PathBuf,
        /// CSV output path.
        #[arg(long)]
        csv: PathBuf,
        /// Optional grouped-bar chart output path.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Inspect or merge persistent stores.
    #[command(subcommand)]
    Store(StoreCommand),
}

#[derive(Debug, Subcommand)]
pub enum DatasetCommand {
    /// Print the per-concept sample histogram.
    Stats {
        /// Corpus file; the bundled corpus when omitted.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Split a corpus into disjoint train/validation/test files.
    Split {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Number of samples reserved for the test set.
        #[arg(long)]
        test_count: usize,
        /// Number of samples reserved for the validation set.
        #[arg(long, default_value_t = 0)]
        validation_count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write train.jsonl/validation.jsonl/test.jsonl here; without
        /// this the split is only reported.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Overwrite existing output files.
        #[arg(long)]
        force: bool,
    },
    /// Select a subset with at least k samples per concept.
    Select {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Minimum number of samples per swept concept.
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Concepts to cover (comma separated); the nine swept
        /// relationship concepts when omitted.
        #[arg(long, value_delimiter = ',')]
        concepts: Option<Vec<String>>,
        /// Leave generic (empty-graph) samples out of the selection.
        #[arg(long)]
        no_generic: bool,
        /// Write the selected corpus here; without this the selection is
        /// only reported.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Export a corpus as chat-format JSONL for fine-tuning.
    Export {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Output JSONL path; a `<out>.manifest.json` sidecar records the
        /// training configuration.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
        /// Training epochs recorded in the manifest.
        #[arg(long)]
        epochs: Option<u32>,
        /// Samples-per-concept count recorded in the manifest.
        #[arg(long)]
        samples_per_concept: Option<u32>,
    },
}

#[derive(Debug, Subcommand)]
pub enum StoreCommand {
    /// Print a store as canonical Turtle with provenance counts.
    Show {
        #[arg(long)]
        store: PathBuf,
    },
    /// Merge a Turtle file into a store (creating it if missing).
    Merge {
        #[arg(long)]
        store: PathBuf,
        /// Incoming Turtle file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "reject-conflicts")]
        policy: MergePolicyArg,
        /// Origin label recorded in provenance.
        #[arg(long, default_value = "manual-merge")]
        origin: String,
    },
}

/// Backend selection shared by `capture` and `eval`: exactly one of a
/// replay recording, an HTTP endpoint, or the ground-truth oracle.
#[derive(Debug, Args)]
pub struct BackendArgs {
    /// Replay recording (JSONL of {sample_id, response_text}).
    #[arg(long, group = "backend")]
    pub responses: Option<PathBuf>,
    /// Chat-completions endpoint base URL.
    #[arg(long, group = "backend")]
    pub endpoint: Option<String>,
    /// Synthesize responses from ground truth with calibrated noise.
    #[arg(long, group = "backend")]
    pub oracle: bool,
    /// Oracle: probability of dropping each gold triple.
    #[arg(long, default_value_t = 0.0)]
    pub drop_rate: f64,
    /// Oracle: probability of adding a spurious triple per kept one.
    #[arg(long, default_value_t = 0.0)]
    pub spurious_rate: f64,
    /// Oracle noise seed.
    #[arg(long, default_value_t = 0)]
    pub noise_seed: u64,
    /// Model name sent to the endpoint.
    #[arg(long)]
    pub model: Option<String>,
    /// Sampling temperature sent to the endpoint.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Request timeout in seconds.
    #[arg(long)]
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CaptureArgs {
    /// The user message to capture from.
    #[arg(long, group = "source", required = true)]
    pub prompt: Option<String>,
    /// Read the user message from a file instead.
    #[arg(long, group = "source")]
    pub prompt_file: Option<PathBuf>,
    /// Sample id for replay/oracle lookup and recording; derived from the
    /// prompt text when omitted.
    #[arg(long)]
    pub sample_id: Option<String>,
    /// Corpus supplying oracle ground truth (oracle backend only).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Merge the captured graph into this store file.
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[arg(long, default_value = "reject-conflicts")]
    pub policy: MergePolicyArg,
    /// Append the raw completion to this replay recording.
    #[arg(long)]
    pub record: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Test corpus; the bundled holdout split when omitted.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Comparison mode: name-keyed or iso(morphism).
    #[arg(long, default_value = "name-keyed")]
    pub mode: CompareModeArg,
    /// Run label echoed into the report.
    #[arg(long, default_value = "eval")]
    pub label: String,
    /// Write the full report as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// What to do when a request fails: score-zero or abort.
    #[arg(long, default_value = "score-zero")]
    pub fail_mode: FailModeArg,
    /// Also print macro-averaged metrics (mean of per-sample metrics).
    #[arg(long = "macro")]
    pub macro_avg: bool,
    /// Maximum in-flight requests.
    #[arg(long)]
    pub max_parallel: Option<usize>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

macro_rules! fromstr_arg {
    ($name:ident, $inner:ty) => {
        #[derive(Debug, Clone, Copy)]
        pub struct $name(pub $inner);

        impl std::str::FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.parse().map($name)
            }
        }
    };
}

fromstr_arg!(MergePolicyArg, MergePolicy);
fromstr_arg!(CompareModeArg, CompareMode);
fromstr_arg!(FailModeArg, FailMode);

/// Parses argv, runs the command, and maps the outcome to an exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Clap exits 2 on usage errors, 0 for --help/--version.
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

/// Resolved global context: working directory, file config, schema.
struct AppContext {
    workdir: PathBuf,
    config: FileConfig,
    schema: OntologySchema,
}

impl AppContext {
    fn resolve(&self, path: &Path) -> PathBuf {
        resolve_in(&self.workdir, path)
    }

    fn load_corpus_or_bundled(&self, path: &Option<PathBuf>) -> Result<Corpus> {
        let chosen = path.clone().or_else(|| self.config.corpus.clone());
        match chosen {
            Some(path) => {
                let path = self.resolve(&path);
                let corpus = load_corpus(&path, &self.schema)
                    .with_context(|| format!("loading corpus {}", path.display()))?;
                log::info!("loaded {} samples from {}", corpus.len(), path.display());
                Ok(corpus)
            }
            None => Ok(bundled_corpus()),
        }
    }

    fn system_prompt(&self) -> Result<String> {
        match &self.config.system_prompt_file {
            Some(path) => {
                let path = self.resolve(path);
                std::fs::read_to_string(&path)
                    .with_context(|| format!("reading system prompt {}", path.display()))
            }
            None => Ok(DEFAULT_SYSTEM_PROMPT.to_string()),
        }
    }

    fn max_parallel(&self, flag: Option<usize>) -> usize {
        flag.or(self.config.max_parallel).unwrap_or(4)
    }
}

fn resolve_in(workdir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        workdir.join(path)
    }
}

fn load_schema_file(path: &Path) -> Result<OntologySchema> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading schema {}", path.display()))?;
    let graph = parse_turtle(&text, &default_prefixes())
        .with_context(|| format!("parsing schema {}", path.display()))?;
    let (schema, ignored) =
        load_schema(&graph).with_context(|| format!("loading schema {}", path.display()))?;
    if !ignored.is_empty() {
        log::info!("schema {}: {} axiom triples ignored", path.display(), ignored.len());
    }
    Ok(schema)
}

fn execute(cli: Cli) -> Result<()> {
    let workdir = cli.workdir.clone();
    let config = load_config(
        cli.config.as_ref().map(|p| resolve_in(&workdir, p)).as_deref(),
        &workdir,
    )?;
    let schema_path = cli.schema.clone().or_else(|| config.schema.clone());
    let schema = match schema_path {
        Some(path) => load_schema_file(&resolve_in(&workdir, &path))?,
        None => OntologySchema::bundled(),
    };
    let context = AppContext { workdir, config, schema };

    match cli.command {
        Command::Parse { input, out, canonical_names } => {
            cmd_parse(&context, &input, out.as_deref(), canonical_names)
        }
        Command::Validate { input } => cmd_validate(&context, &input),
        Command::Materialize { input, out } => cmd_materialize(&context, &input, out.as_deref()),
        Command::Dataset(command) => cmd_dataset(&context, command),
        Command::Capture(args) => cmd_capture(&context, args),
        Command::Eval(args) => cmd_eval(&context, args),
        Command::Sweep { manifest, csv, svg } => {
            cmd_sweep(&context, &manifest, &csv, svg.as_deref())
        }
        Command::Store(command) => cmd_store(&context, command),
    }
}

fn read_graph(context: &AppContext, input: &Path) -> Result<Graph> {
    let path = context.resolve(input);
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_turtle(&text, &default_prefixes())
        .with_context(|| format!("parsing {}", path.display()))
}

fn emit(context: &AppContext, out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            let path = context.resolve(path);
            std::fs::write(&path, text)
                .with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_parse(
    context: &AppContext,
    input: &Path,
    out: Option<&Path>,
    canonical_names: bool,
) -> Result<()> {
    let graph = read_graph(context, input)?;
    let graph = if canonical_names {
        canonicalize(&graph, &context.schema, CanonMode::NameKeyed)
            .map_err(|e| anyhow::anyhow!("cannot canonicalize {}: {e}", input.display()))?
    } else {
        graph
    };
    emit(context, out, &serialize_turtle(&graph, graph.prefixes()))
}

fn cmd_validate(context: &AppContext, input: &Path) -> Result<()> {
    let graph = read_graph(context, input)?;
    let report = validate(&graph, &context.schema);
    println!("{report}");
    if report.is_clean() {
        Ok(())
    } else {
        bail!("{}: {} violation(s)", input.display(), report.violations.len());
    }
}

fn cmd_materialize(context: &AppContext, input: &Path, out: Option<&Path>) -> Result<()> {
    let graph = read_graph(context, input)?;
    let materialized = materialize(&graph, &context.schema)
        .map_err(|e| anyhow::anyhow!("cannot materialize {}: {e}", input.display()))?;
    log::info!(
        "materialized {} triples from {} input triples",
        materialized.len(),
        graph.len()
    );
    emit(context, out, &serialize_turtle(&materialized, materialized.prefixes()))
}

// ---------------------------------------------------------------------------
// dataset
// ---------------------------------------------------------------------------

fn cmd_dataset(context: &AppContext, command: DatasetCommand) -> Result<()> {
    match command {
        DatasetCommand::Stats { corpus } => {
            let corpus = context.load_corpus_or_bundled(&corpus)?;
            let histogram = corpus_stats(&corpus);
            let width = histogram.keys().map(|k| k.len()).max().unwrap_or(7).max(7);
            println!("{:width$}  samples", "concept");
            for (concept, count) in &histogram {
                println!("{concept:width$}  {count}");
            }
            println!("total samples: {}", corpus.len());
            Ok(())
        }
        DatasetCommand::Split { corpus, test_count, validation_count, seed, out_dir, force } => {
            let corpus = context.load_corpus_or_bundled(&corpus)?;
            let seed = if seed == 0 { context.config.seed.unwrap_or(0) } else { seed };
            let spec = SplitSpec { seed, test_count, validation_count };
            let splits = split(&corpus, &spec)?;
            println!(
                "split {} samples: {} train, {} validation, {} test (seed {seed})",
                corpus.len(),
                splits.train.len(),
                splits.validation.len(),
                splits.test.len()
            );
            if let Some(dir) = out_dir {
                let dir = context.resolve(&dir);
                std::fs::create_dir_all(&dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
                for (name, part) in [
                    ("train.jsonl", &splits.train),
                    ("validation.jsonl", &splits.validation),
                    ("test.jsonl", &splits.test),
                ] {
                    if name == "validation.jsonl" && part.is_empty() {
                        continue;
                    }
                    let path = dir.join(name);
                    if path.exists() && !force {
                        bail!("refusing to overwrite {} (pass --force)", path.display());
                    }
                    write_corpus(part, &path)?;
                    println!("wrote {} ({} samples)", path.display(), part.len());
                }
            }
            Ok(())
        }
        DatasetCommand::Select { corpus, k, seed, concepts, no_generic, out, force } => {
            let corpus = context.load_corpus_or_bundled(&corpus)?;
            let seed = if seed == 0 { context.config.seed.unwrap_or(0) } else { seed };
            let concepts = concepts.unwrap_or_else(|| {
                SWEPT_CONCEPTS.iter().map(|s| s.to_string()).collect()
            });
            let selected = select_k_per_concept(&corpus, k, &concepts, seed, !no_generic)?;
            println!(
                "selected {} of {} samples (k={k}, seed {seed}, {} concepts)",
                selected.len(),
                corpus.len(),
                concepts.len()
            );
            if let Some(out) = out {
                let path = context.resolve(&out);
                if path.exists() && !force {
                    bail!("refusing to overwrite {} (pass --force)", path.display());
                }
                write_corpus(&selected, &path)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        DatasetCommand::Export { corpus, out, force, epochs, samples_per_concept } => {
            let corpus = context.load_corpus_or_bundled(&corpus)?;
            let mut manifest = TrainingManifest {
                system_prompt: context.system_prompt()?,
                ..TrainingManifest::default()
            };
            if let Some(epochs) = epochs {
                manifest.epochs = epochs;
            }
            if let Some(k) = samples_per_concept {
                manifest.samples_per_concept = k;
            }
            manifest.check().map_err(|e| anyhow::anyhow!("invalid manifest: {e}"))?;
            let path = context.resolve(&out);
            manifest.train_path = Some(path.display().to_string());
            let count = export_chat_jsonl(&corpus, &manifest, &path, force)?;
            println!("wrote {count} chat records to {}", path.display());
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// backends
// ---------------------------------------------------------------------------

/// Builds the selected backend. The oracle backend needs gold graphs,
/// supplied by `oracle_corpus`.
fn build_backend(
    context: &AppContext,
    args: &BackendArgs,
    oracle_corpus: Option<&Corpus>,
) -> Result<Box<dyn ModelClient>> {
    let chosen = [args.responses.is_some(), args.endpoint.is_some(), args.oracle]
        .iter()
        .filter(|b| **b)
        .count();
    let endpoint_fallback = args.endpoint.clone().or_else(|| {
        if chosen == 0 { context.config.endpoint_url.clone() } else { None }
    });
    match (&args.responses, endpoint_fallback, args.oracle) {
        (Some(path), _, false) => {
            let path = context.resolve(path);
            Ok(Box::new(ReplayClient::load(&path)?))
        }
        (None, Some(url), false) => {
            let config = EndpointConfig {
                url,
                model_name: args
                    .model
                    .clone()
                    .or_else(|| context.config.model_name.clone())
                    .unwrap_or_else(|| DEFAULT_MODEL_NAME.to_string()),
                temperature: args.temperature.or(context.config.temperature).unwrap_or(0.0),
                timeout: std::time::Duration::from_secs(
                    args.timeout_secs.or(context.config.timeout_secs).unwrap_or(30),
                ),
                retry: RetryConfig::default(),
                system_prompt: context.system_prompt()?,
                api_key: api_key_from_env(),
            };
            Ok(Box::new(EndpointClient::new(config)?))
        }
        (None, None, true) => {
            let corpus = oracle_corpus
                .context("the oracle backend needs a corpus supplying ground truth")?;
            let noise = OracleNoise {
                drop_rate: args.drop_rate,
                spurious_rate: args.spurious_rate,
                seed: args.noise_seed,
            };
            Ok(Box::new(OracleClient::new(corpus, &context.schema, noise)?))
        }
        _ => bail!(
            "select exactly one backend: --responses <file>, --endpoint <url>, or --oracle \
             (or set endpoint_url in kc.json)"
        ),
    }
}

// ---------------------------------------------------------------------------
// capture
// ---------------------------------------------------------------------------

fn cmd_capture(context: &AppContext, args: CaptureArgs) -> Result<()> {
    let prompt = match (&args.prompt, &args.prompt_file) {
        (Some(prompt), None) => prompt.clone(),
        (None, Some(path)) => {
            let path = context.resolve(path);
            std::fs::read_to_string(&path)
                .with_context(|| format!("reading prompt {}", path.display()))?
        }
        _ => bail!("provide exactly one of --prompt or --prompt-file"),
    };
    let sample_id = args.sample_id.clone().unwrap_or_else(|| {
        format!("prompt-{}", kc_core::hash::fnv1a64_hex(prompt.as_bytes()))
    });

    let oracle_corpus = if args.backend.oracle {
        Some(context.load_corpus_or_bundled(&args.corpus)?)
    } else {
        None
    };
    let client = build_backend(context, &args.backend, oracle_corpus.as_ref())?;

    let records = batch_complete(client.as_ref(), &[(sample_id.clone(), prompt)], 1);
    let record = records.into_iter().next().expect("one record per input");
    let raw = match &record.result {
        Ok(raw) => raw.clone(),
        Err(e) => bail!("completion for {sample_id} failed: {e}"),
    };
    if let Some(path) = &args.record {
        let path = context.resolve(path);
        crate::client::write_replay_file(std::slice::from_ref(&record), &path)?;
        println!("recorded response to {}", path.display());
    }

    let result = capture_response(&raw, &context.schema);
    println!("sample:  {sample_id}");
    println!("backend: {}", record.backend);
    println!("status:  {}", result.status);
    match result.status {
        CaptureStatus::Captured => {
            let graph = result.captured_graph().expect("captured graph");
            print!("{}", serialize_turtle(graph, graph.prefixes()));
        }
        CaptureStatus::Empty => {
            println!("no personal facts found in the response");
        }
        CaptureStatus::Rejected => {
            if let Err(reason) = &result.parsed {
                println!("reason: {reason}");
            }
            for violation in &result.validation.violations {
                println!("  {violation}");
            }
        }
    }

    if let Some(store_path) = &args.store {
        if result.status == CaptureStatus::Captured {
            let store_path = context.resolve(store_path);
            let mut store = if store_path.exists() {
                Store::load(&store_path, &context.schema)?
            } else {
                Store::new()
            };
            let graph = result.captured_graph().expect("captured graph");
            let report =
                store.merge(graph, &context.schema, args.policy.0, &sample_id)?;
            store.save(&store_path)?;
            println!(
                "merged into {}: {} added, {} duplicate(s), {} derived",
                store_path.display(),
                report.added,
                report.duplicates,
                report.derived
            );
        } else if result.status == CaptureStatus::Empty {
            println!("nothing to merge");
        }
    }

    if result.status == CaptureStatus::Rejected {
        bail!("response rejected");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// eval / sweep
// ---------------------------------------------------------------------------

fn print_report(report: &EvalReport, macro_avg: bool) {
    println!(
        "label: {}    mode: {}    schema: {}",
        report.label, report.mode, report.schema_fingerprint
    );
    println!(
        "micro  P={:.3} R={:.3} F1={:.3}  (tp={} fp={} fn={})",
        report.micro.precision,
        report.micro.recall,
        report.micro.f1,
        report.micro_counts.tp,
        report.micro_counts.fp,
        report.micro_counts.fn_
    );
    if macro_avg {
        if let Some(metrics) = macro_metrics(&report.samples) {
            println!(
                "macro  P={:.3} R={:.3} F1={:.3}  (mean over {} samples)",
                metrics.precision,
                metrics.recall,
                metrics.f1,
                report.samples.len()
            );
        }
    }
    println!("{:12}  {:>6} {:>6} {:>6}  {:>5} {:>5} {:>5}", "concept", "P", "R", "F1", "tp", "fp", "fn");
    for (concept, metrics) in &report.per_concept {
        let counts = &report.per_concept_counts[concept];
        println!(
            "{concept:12}  {:>6.3} {:>6.3} {:>6.3}  {:>5} {:>5} {:>5}",
            metrics.precision, metrics.recall, metrics.f1, counts.tp, counts.fp, counts.fn_
        );
    }
}

fn cmd_eval(context: &AppContext, args: EvalArgs) -> Result<()> {
    let test = match &args.test {
        Some(path) => {
            let path = context.resolve(path);
            load_corpus(&path, &context.schema)
                .with_context(|| format!("loading corpus {}", path.display()))?
        }
        None => crate::dataset::bundled_test_split(),
    };
    let client = build_backend(context, &args.backend, Some(&test))?;
    let report = run_eval(
        &test,
        client.as_ref(),
        &context.schema,
        args.mode.0,
        &args.label,
        args.fail_mode.0,
        context.max_parallel(args.max_parallel),
    )?;
    print_report(&report, args.macro_avg);
    if let Some(out) = &args.out {
        let path = context.resolve(out);
        let json = serde_json::to_string_pretty(&report).context("serializing report")?;
        std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(context: &AppContext, manifest: &Path, csv: &Path, svg: Option<&Path>) -> Result<()> {
    let manifest_path = context.resolve(manifest);
    let text = std::fs::read_to_string(&manifest_path)
        .with_context(|| format!("reading manifest {}", manifest_path.display()))?;
    let manifest: SweepManifest = serde_json::from_str(&text)
        .with_context(|| format!("parsing manifest {}", manifest_path.display()))?;
    let base_dir = manifest_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let outcome = run_sweep(&manifest, &context.schema, &base_dir)?;

    for report in &outcome.reports {
        print_report(report, false);
        println!();
    }
    for (label, error) in &outcome.failures {
        eprintln!("label {label:?} failed: {error}");
    }

    let csv_path = context.resolve(csv);
    write_csv(&outcome.reports, &csv_path)?;
    println!("wrote {}", csv_path.display());
    if let Some(svg) = svg {
        let svg_path = context.resolve(svg);
        std::fs::write(&svg_path, render_svg(&outcome.reports))
            .with_context(|| format!("writing {}", svg_path.display()))?;
        println!("wrote {}", svg_path.display());
    }
    if !outcome.failures.is_empty() {
        bail!("{} of {} sweep labels failed", outcome.failures.len(), manifest.labels.len());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// store
// ---------------------------------------------------------------------------

fn cmd_store(context: &AppContext, command: StoreCommand) -> Result<()> {
    match command {
        StoreCommand::Show { store } => {
            let path = context.resolve(&store);
            let store = Store::load(&path, &context.schema)?;
            println!("# {} triple(s)", store.len());
            print!("{}", serialize_turtle(store.graph(), store.graph().prefixes()));
            Ok(())
        }
        StoreCommand::Merge { store, input, policy, origin } => {
            let store_path = context.resolve(&store);
            let mut target = if store_path.exists() {
                Store::load(&store_path, &context.schema)?
            } else {
                Store::new()
            };
            let incoming = read_graph(context, &input)?;
            let report = target.merge(&incoming, &context.schema, policy.0, &origin)?;
            target.save(&store_path)?;
            println!(
                "merged {} into {}: {} added, {} duplicate(s), {} dropped, {} removed, {} derived, {} conflict(s)",
                input.display(),
                store_path.display(),
                report.added,
                report.duplicates,
                report.dropped,
                report.removed,
                report.derived,
                report.conflicts
            );
            Ok(())
        }
    }
}
