//! Command-line front end. Settings resolve as flags over the `--config` file
//! over built-in defaults; the remote backend token only comes from
//! `LLM_API_TOKEN`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::agents::{ReplanThresholds, Session, SessionConfig};
use crate::corpus::{generate_with, load_jsonl, to_jsonl, validate_corpus, Paraphraser, TemplateSet};
use crate::embedding::{build_index, EmbedderConfig, HashingEmbedder};
use crate::eval::{eval_decomposition, eval_retrieval, export_header, paraphrase_suite, DecompositionSuite};
use crate::llm::{LlmBackend, RemoteBackend, RemoteConfig, ScriptedBackend};
use crate::registry::{load_library, Registry};
use crate::retrieval::{DEFAULT_K_REPORT, DEFAULT_TAU};
use crate::scenario::Scenario;
use crate::util::{csv_field, fmt_sig};

pub const GOLDEN_SCENARIO: &str = include_str!("../scenarios/deeprx_golden.json");
pub const GOLDEN_RULES: &str = include_str!("../scenarios/deeprx_golden.rules.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Scripted,
    Remote,
}

/// Contents of a `--config` file. Relative paths resolve against the
/// working directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `None` uses the bundled library.
    pub library_path: Option<PathBuf>,
    /// `None` uses the bundled golden scenario.
    pub scenario_path: Option<PathBuf>,
    pub backend: BackendKind,
    pub rules_path: Option<PathBuf>,
    pub remote: RemoteConfig,
    pub embedder: EmbedderConfig,
    pub tau: f64,
    pub bind_tau: f64,
    pub k_report: usize,
    pub thresholds: ReplanThresholds,
    pub prose_summary: bool,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub corpus_records: usize,
    pub retrieval_cases: usize,
    pub retrieval_first_n: usize,
    pub decomposition_queries: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SessionConfig::default();
        RunConfig {
            library_path: None,
            scenario_path: None,
            backend: BackendKind::Scripted,
            rules_path: None,
            remote: RemoteConfig::default(),
            embedder: EmbedderConfig::default(),
            tau: DEFAULT_TAU,
            bind_tau: s.bind_tau,
            k_report: DEFAULT_K_REPORT,
            thresholds: s.thresholds,
            prose_summary: true,
            seed: 7,
            output_dir: PathBuf::from("out"),
            corpus_records: 20_000,
            retrieval_cases: 35,
            retrieval_first_n: 50,
            decomposition_queries: 100,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(-1.0..=1.0).contains(&self.tau) {
            return Err(format!("tau {} outside [-1, 1]", self.tau));
        }
        if !(0.0..=1.0).contains(&self.bind_tau) {
            return Err(format!("bind_tau {} outside [0, 1]", self.bind_tau));
        }
        if self.k_report == 0 {
            return Err("k_report must be at least 1".into());
        }
        for p in [&self.library_path, &self.scenario_path, &self.rules_path].into_iter().flatten() {
            if !p.exists() {
                return Err(format!("{} does not exist", p.display()));
            }
        }
        self.embedder.validate().map_err(|e| e.to_string())
    }

    fn session_config(&self) -> SessionConfig {
        SessionConfig {
            tau: self.tau,
            bind_tau: self.bind_tau,
            k_report: self.k_report,
            thresholds: self.thresholds,
            prose_summary: self.prose_summary,
            planner_categories: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "phy-agents", version, about = "Agent orchestration over a simulated physical layer")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Retrieval acceptance threshold
    #[arg(long, global = true, allow_negative_numbers = true)]
    tau: Option<f64>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendKind>,
    /// Scripted backend rules file
    #[arg(long, global = true)]
    rules: Option<PathBuf>,
    /// Tool library file (default: bundled library)
    #[arg(long, global = true)]
    library: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit generation timestamps so reruns are byte-identical
    #[arg(long, global = true)]
    no_timestamps: bool,
    /// Evaluate cases concurrently
    #[arg(long, global = true)]
    parallel_eval: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the tool library against its schema and rules
    ValidateLibrary,
    /// Embed every API instruction and write the vector store
    BuildIndex,
    /// Generate a synthetic instruction corpus
    GenCorpus {
        #[arg(long)]
        records: Option<usize>,
    },
    /// Check a corpus file against the library
    ValidateCorpus {
        /// Corpus file (default: <out>/corpus.jsonl)
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Run a scenario end to end
    RunScenario {
        /// Scenario file (default: bundled golden scenario)
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Paraphrase retrieval accuracy and the similarity matrix
    EvalRetrieval {
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long)]
        first_n: Option<usize>,
    },
    /// Task decomposition correction rate
    EvalDecomposition {
        #[arg(long)]
        queries: Option<usize>,
        /// Corpus to draw queries from (default: generated from the seed)
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the exit status: 0 success, 1 domain error, 2 usage error.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn resolve_config(g: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(t) = g.tau {
        cfg.tau = t;
    }
    if let Some(b) = g.backend {
        cfg.backend = b;
    }
    if let Some(r) = &g.rules {
        cfg.rules_path = Some(r.clone());
    }
    if let Some(l) = &g.library {
        cfg.library_path = Some(l.clone());
    }
    if let Some(o) = &g.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

struct Ctx {
    cfg: RunConfig,
    timestamps: bool,
    parallel: bool,
}

impl Ctx {
    fn registry(&self) -> Result<Registry> {
        let r = match &self.cfg.library_path {
            Some(p) => load_library(p)?,
            None => Registry::shipped(),
        };
        if r.is_empty() {
            bail!("tool library is empty");
        }
        Ok(r)
    }

    fn embedder(&self) -> Result<HashingEmbedder> {
        Ok(HashingEmbedder::new(self.cfg.embedder.clone())?)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let dir = &self.cfg.output_dir;
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// Table header: provenance comments plus an optional timestamp.
    fn header(&self, registry: &Registry, fingerprint: &str) -> String {
        let mut h = export_header(self.cfg.seed, registry.library_version(), fingerprint);
        if let Some(t) = self.timestamp() {
            let _ = writeln!(h, "# generated_at={t}");
        }
        h
    }

    fn timestamp(&self) -> Option<u64> {
        self.timestamps.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
    }

    fn backend(&self, default_rules: Option<&str>) -> Result<Box<dyn LlmBackend>> {
        match self.cfg.backend {
            BackendKind::Scripted => {
                let b = match (&self.cfg.rules_path, default_rules) {
                    (Some(p), _) => ScriptedBackend::from_file(p)?,
                    (None, Some(text)) => ScriptedBackend::from_json_str(text)?,
                    (None, None) => return Err(usage("the scripted backend needs --rules")),
                };
                Ok(Box::new(b))
            }
            BackendKind::Remote => Ok(Box::new(RemoteBackend::from_env(self.cfg.remote.clone())?)),
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = resolve_config(&cli.global)?;
    let ctx = Ctx { cfg, timestamps: !cli.global.no_timestamps, parallel: cli.global.parallel_eval };
    let line = match cli.command {
        Command::ValidateLibrary => validate_library(&ctx)?,
        Command::BuildIndex => build_index_cmd(&ctx)?,
        Command::GenCorpus { records } => gen_corpus(&ctx, records.unwrap_or(ctx.cfg.corpus_records))?,
        Command::ValidateCorpus { corpus } => validate_corpus_cmd(&ctx, corpus)?,
        Command::RunScenario { scenario } => run_scenario(&ctx, scenario.or_else(|| ctx.cfg.scenario_path.clone()))?,
        Command::EvalRetrieval { cases, first_n } => eval_retrieval_cmd(
            &ctx,
            cases.unwrap_or(ctx.cfg.retrieval_cases),
            first_n.unwrap_or(ctx.cfg.retrieval_first_n),
        )?,
        Command::EvalDecomposition { queries, corpus } => {
            eval_decomposition_cmd(&ctx, queries.unwrap_or(ctx.cfg.decomposition_queries), corpus)?
        }
    };
    writeln!(out, "{line}")?;
    Ok(())
}

fn validate_library(ctx: &Ctx) -> Result<String> {
    let r = ctx.registry()?;
    Ok(format!("{} descriptors OK", r.len()))
}

fn build_index_cmd(ctx: &Ctx) -> Result<String> {
    let registry = ctx.registry()?;
    let store = build_index(&registry, &ctx.embedder()?)?;
    let path = ctx.write("index.txt", &store.to_text())?;
    Ok(format!("indexed {} APIs into {}", store.len(), path.display()))
}

fn gen_corpus(ctx: &Ctx, n: usize) -> Result<String> {
    let registry = ctx.registry()?;
    let records = generate_with(&registry, &TemplateSet::shipped(), &Paraphraser::shipped(), n, ctx.cfg.seed, ctx.parallel)?;
    let path = ctx.write("corpus.jsonl", &to_jsonl(&records))?;
    Ok(format!("wrote {} records to {}", records.len(), path.display()))
}

fn validate_corpus_cmd(ctx: &Ctx, corpus: Option<PathBuf>) -> Result<String> {
    let registry = ctx.registry()?;
    let path = corpus.unwrap_or_else(|| ctx.cfg.output_dir.join("corpus.jsonl"));
    let records = load_jsonl(&path)?;
    let report = validate_corpus(&registry, &records);
    let mut csv = String::from("record,passed,reasons\n");
    for c in &report.records {
        let _ = writeln!(csv, "{},{},{}", c.index + 1, c.passed, csv_field(&c.reasons.join("; ")));
    }
    ctx.write("corpus_validation.csv", &csv)?;
    let line = format!("{}/{} records valid", report.n_passed, report.n_records);
    if report.n_passed != report.n_records {
        bail!("{line}");
    }
    Ok(line)
}

fn run_scenario(ctx: &Ctx, scenario_path: Option<PathBuf>) -> Result<String> {
    let registry = ctx.registry()?;
    let embedder = ctx.embedder()?;
    let store = build_index(&registry, &embedder)?;
    let (scenario, default_rules) = match &scenario_path {
        Some(p) => (Scenario::load(p)?, None),
        None => (Scenario::from_json_str(GOLDEN_SCENARIO)?, Some(GOLDEN_RULES)),
    };
    let backend = ctx.backend(default_rules)?;
    let mut session =
        Session::for_scenario(&registry, &store, &embedder, backend.as_ref(), &scenario, ctx.cfg.session_config())?;
    let reports = session.run(&scenario.events)?;

    let mut doc = json!({
        "scenario": scenario.name,
        "seed": scenario.seed,
        "library_version": registry.library_version(),
        "embedder": store.fingerprint(),
        "backend": backend.id(),
        "reports": reports,
    });
    if let Some(t) = ctx.timestamp() {
        doc["generated_at"] = json!(t);
    }
    ctx.write("report.json", &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    ctx.write("traces.json", &(serde_json::to_string_pretty(session.traces())? + "\n"))?;
    let header = ctx.header(&registry, store.fingerprint());
    ctx.write("timeline.csv", &format!("{header}{}", session.simulator().timeline_csv()))?;

    let mut metrics = header;
    metrics.push_str("task_id,trigger,at,verdict,penalty_before_db,penalty_after_db,throughput_before_mbps,throughput_after_mbps\n");
    for r in &reports {
        let _ = writeln!(
            metrics,
            "{},{},{},{},{},{},{},{}",
            csv_field(&r.task_id),
            r.trigger,
            fmt_sig(r.at, 9),
            r.verdict.as_str(),
            fmt_sig(r.metrics_before.distortion_penalty_db, 9),
            fmt_sig(r.metrics_after.distortion_penalty_db, 9),
            fmt_sig(r.metrics_before.throughput_mbps, 9),
            fmt_sig(r.metrics_after.throughput_mbps, 9)
        );
    }
    ctx.write("metrics.csv", &metrics)?;

    let verdicts: Vec<String> = reports.iter().map(|r| format!("{}={}", r.task_id, r.verdict.as_str())).collect();
    Ok(format!("scenario `{}`: {} report(s) [{}]", scenario.name, reports.len(), verdicts.join(", ")))
}

fn eval_retrieval_cmd(ctx: &Ctx, cases: usize, first_n: usize) -> Result<String> {
    let registry = ctx.registry()?;
    let subset = registry.first_n(first_n);
    if subset.is_empty() {
        return Err(usage("--first-n must be at least 1"));
    }
    let embedder = ctx.embedder()?;
    let store = build_index(&subset, &embedder)?;
    let suite = paraphrase_suite(&subset, &Paraphraser::shipped(), cases, ctx.cfg.seed);
    let eval = eval_retrieval(&store, &embedder, &suite, ctx.parallel)?;
    let header = ctx.header(&registry, store.fingerprint());
    ctx.write("similarity_matrix.csv", &format!("{header}{}", eval.matrix.to_csv()))?;
    ctx.write("retrieval_summary.csv", &format!("{header}{}", eval.summary.to_csv()))?;
    let s = &eval.summary;
    let correct = s.per_case.iter().filter(|c| c.correct).count();
    Ok(format!(
        "retrieval top-1 {correct}/{} ({}), mean margin {}, min truth margin {}",
        s.n_cases,
        fmt_sig(s.top1_accuracy, 6),
        fmt_sig(s.mean_margin, 6),
        fmt_sig(s.per_case.iter().map(|c| c.truth_margin).fold(f64::INFINITY, f64::min), 6)
    ))
}

/// Corpus records with at least `n` distinct queries, grown until enough
/// exist.
fn corpus_for(registry: &Registry, n: usize, seed: u64, parallel: bool) -> Result<DecompositionSuite> {
    let mut size = n.saturating_mul(2).max(10);
    loop {
        let records = generate_with(registry, &TemplateSet::shipped(), &Paraphraser::shipped(), size, seed, parallel)?;
        match DecompositionSuite::from_corpus(&records, n) {
            Ok(s) => return Ok(s),
            Err(e) if size >= n.saturating_mul(64) => return Err(e.into()),
            Err(_) => size *= 2,
        }
    }
}

fn eval_decomposition_cmd(ctx: &Ctx, n: usize, corpus: Option<PathBuf>) -> Result<String> {
    if n == 0 {
        return Err(usage("--queries must be at least 1"));
    }
    let registry = ctx.registry()?;
    let embedder = ctx.embedder()?;
    let store = build_index(&registry, &embedder)?;
    let suite = match &corpus {
        Some(p) => DecompositionSuite::from_corpus(&load_jsonl(p)?, n)?,
        None => corpus_for(&registry, n, ctx.cfg.seed, ctx.parallel)?,
    };
    let backend: Box<dyn LlmBackend> = match (ctx.cfg.backend, &ctx.cfg.rules_path) {
        (BackendKind::Scripted, None) => Box::new(suite.backend()),
        _ => ctx.backend(None)?,
    };
    let eval = eval_decomposition(backend.as_ref(), &store, &embedder, &suite.cases, ctx.cfg.tau, ctx.parallel)?;
    let header = ctx.header(&registry, store.fingerprint());
    ctx.write("decomposition.csv", &format!("{header}{}", eval.to_csv()))?;
    let mut diffs = eval.diffs().join("\n");
    if !diffs.is_empty() {
        diffs.push('\n');
    }
    ctx.write("decomposition_diffs.txt", &diffs)?;
    Ok(format!(
        "decomposition correction rate {} ({}/{}), mean step precision {}",
        fmt_sig(eval.correction_rate, 6),
        eval.n_correct,
        eval.n_queries,
        fmt_sig(eval.mean_step_precision, 6)
    ))
}

/// Used by the binary; keeps `main` trivial.
pub fn main_with_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut o = Vec::new();
        let mut e = Vec::new();
        let mut argv = vec!["phy-agents"];
        argv.extend_from_slice(args);
        let code = run_cli(argv, &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn validate_shipped_library() {
        let (code, out, _) = run(&["validate-library"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "200 descriptors OK");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(&["frobnicate"]).0, 2);
        assert_eq!(run(&["validate-library", "--tau", "3"]).0, 2);
        assert_eq!(run(&["validate-library", "--library", "/nonexistent/lib.json"]).0, 2);
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn config_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"seed": 11, "tau": 0.2}"#).unwrap();
        let c = cfg.to_str().unwrap();
        let parsed = Cli::try_parse_from(["x", "--config", c, "--seed", "3", "validate-library"]).unwrap();
        let r = resolve_config(&parsed.global).unwrap();
        assert_eq!((r.seed, r.tau), (3, 0.2));
        std::fs::write(&cfg, r#"{"sede": 11}"#).unwrap();
        let parsed = Cli::try_parse_from(["x", "--config", c, "validate-library"]).unwrap();
        assert!(resolve_config(&parsed.global).unwrap_err().downcast_ref::<UsageError>().is_some());
    }
}
