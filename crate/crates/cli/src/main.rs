use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dyncurric::data::Tokenizer;
use dyncurric::eval::corpus_bleu;
use dyncurric::harness::{
    run_experiment, run_matrix, standard_methods, write_avg_loss, write_curves, write_length_buckets,
    ExperimentConfig, RunFailure, RunLog,
};
use dyncurric::Error;

#[derive(Parser)]
#[command(name = "dyncurric", version, about = "Dynamic curriculum learning experiments for small translation models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration and write its run log.
    Run(RunArgs),
    /// Run the baseline and every curriculum method, then write the
    /// comparison table and all reports.
    Matrix(MatrixArgs),
    /// Corpus BLEU of a hypothesis file against a reference file.
    Score(ScoreArgs),
    /// Curves, loss-by-count and length-bucket CSVs from finished run logs.
    Report(ReportArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML experiment file; defaults apply to anything it leaves out.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_phases: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    schedule: Option<String>,
    /// `length` or `difficulty`.
    #[arg(long)]
    batching: Option<String>,
    #[arg(long)]
    token_budget: Option<usize>,
    /// Inline curriculum-length BLEU for the dmc schedule.
    #[arg(long)]
    bleu_cap: Option<f64>,
    /// Baseline run log providing the curriculum-length BLEU.
    #[arg(long)]
    baseline_log: Option<PathBuf>,
    /// Any config field as `dotted.key=value`; repeatable, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let mut sets: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: String| sets.push((k.to_string(), v));
        if let Some(v) = self.seed {
            push("seed", v.to_string());
        }
        if let Some(v) = self.max_phases {
            push("max_phases", v.to_string());
        }
        if let Some(v) = self.patience {
            push("patience", v.to_string());
        }
        if let Some(v) = &self.metric {
            push("curriculum.metric", quoted(v));
        }
        if let Some(v) = &self.schedule {
            push("curriculum.schedule", quoted(v));
        }
        if let Some(v) = &self.batching {
            push("batching.key", quoted(v));
        }
        if let Some(v) = self.token_budget {
            push("batching.token_budget", v.to_string());
        }
        if let Some(v) = self.bleu_cap {
            push("bleu_cap.value", format!("{v:?}"));
        }
        if let Some(v) = &self.baseline_log {
            push("bleu_cap.baseline_log", quoted(&v.display().to_string()));
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            push(k.trim(), v.trim().to_string());
        }
        for (k, v) in sets {
            c.set(&k, &v)?;
        }
        c.validate()?;
        Ok(c)
    }
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Run log destination (JSON lines).
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct MatrixArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Directory for logs, the table and reports.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated method names to run (default: all nine).
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Source-length bucket edges for the length report.
    #[arg(long, value_delimiter = ',', default_value = "0,5,10,15,20")]
    bucket_edges: Vec<usize>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    hyp: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long, default_value = "whitespace")]
    tokenizer: String,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Run logs to include.
    #[arg(required = true)]
    logs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0,5,10,15,20")]
    bucket_edges: Vec<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Matrix(a) => cmd_matrix(a),
        Command::Score(a) => cmd_score(a),
        Command::Report(a) => cmd_report(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for numerical divergence, 1 for everything else.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            if err.is_divergence() {
                return 2;
            }
        }
        if let Some(f) = cause.downcast_ref::<RunFailure>() {
            if f.error.is_divergence() {
                return 2;
            }
        }
    }
    1
}

fn summary(log: &RunLog) -> String {
    match &log.final_record {
        Some(f) => format!(
            "{}: {} phases, {} steps, best dev BLEU {:.2} (phase {}), test BLEU {:.2}",
            log.run_id(),
            f.phases,
            f.steps,
            f.best_dev_bleu,
            f.best_phase,
            f.test.bleu
        ),
        None => format!("{}: aborted after {} phases", log.run_id(), log.phases.len()),
    }
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let mut config = a.config.load()?;
    if a.log.is_some() {
        config.log_path = a.log;
    }
    if config.log_path.is_none() {
        config.log_path = Some(PathBuf::from(format!("{}.jsonl", config.run_id())));
    }
    let log = run_experiment(&config)?;
    println!("{}", summary(&log));
    println!("log written to {}", config.log_path.as_ref().expect("set above").display());
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cmd_matrix(a: MatrixArgs) -> Result<()> {
    let config = a.config.load()?;
    let mut rows = standard_methods();
    if !a.methods.is_empty() {
        let wanted: Vec<String> = a.methods.iter().map(|m| m.trim().to_lowercase()).collect();
        rows.retain(|r| wanted.contains(&r.name.to_lowercase()));
        if rows.len() != wanted.len() {
            let known: Vec<String> = standard_methods().into_iter().map(|r| r.name).collect();
            bail!(Error::Config(format!("unknown method in {:?}; known: {}", a.methods, known.join(", "))));
        }
    }
    let logs_dir = a.out.join("logs");
    create_dir(&logs_dir)?;
    let data = config.task.prepare(config.seed)?;
    let mut write_error = None;
    let report = run_matrix(&config, &rows, &data, |row, log| {
        println!("{:<26} {}", row.name, summary(log));
        let path = logs_dir.join(format!("{}.jsonl", log.run_id()));
        if let Err(e) = log.write(&path) {
            write_error.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_error {
        return Err(e.into());
    }
    let table = a.out.join("table.csv");
    std::fs::write(&table, report.to_csv()).with_context(|| format!("writing {}", table.display()))?;
    write_curves(&report.logs, &a.out)?;
    write_avg_loss(&report.logs, &a.out)?;
    write_length_buckets(&report.logs, &data.test, &a.bucket_edges, &a.out)?;
    print!("{}", report.to_table());
    println!("outputs in {}", a.out.display());
    Ok(())
}

fn read_tokenized(path: &Path, tokenizer: Tokenizer) -> Result<Vec<Vec<String>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(|l| tokenizer.split(l)).collect())
}

fn cmd_score(a: ScoreArgs) -> Result<()> {
    let tokenizer = match a.tokenizer.as_str() {
        "whitespace" => Tokenizer::Whitespace,
        "char" => Tokenizer::Char,
        other => bail!(Error::Config(format!("unknown tokenizer '{other}'"))),
    };
    let hyps = read_tokenized(&a.hyp, tokenizer)?;
    let refs = read_tokenized(&a.reference, tokenizer)?;
    if hyps.len() != refs.len() {
        bail!(Error::LineCountMismatch {
            source_lines: hyps.len(),
            target_lines: refs.len()
        });
    }
    let r = corpus_bleu(&hyps, &refs)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&r)?);
    } else {
        let p = r.ngram_precisions.map(|x| format!("{:.1}", 100.0 * x));
        println!(
            "BLEU = {:.2} {}/{}/{}/{} (BP = {:.3}, ratio = {:.3}, hyp_len = {}, ref_len = {})",
            r.bleu,
            p[0],
            p[1],
            p[2],
            p[3],
            r.brevity_penalty,
            r.hyp_length as f64 / r.ref_length.max(1) as f64,
            r.hyp_length,
            r.ref_length
        );
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let logs = a
        .logs
        .iter()
        .map(|p| RunLog::read(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    create_dir(&a.out)?;
    write_curves(&logs, &a.out)?;
    write_avg_loss(&logs, &a.out)?;
    let finished: Vec<RunLog> = logs.iter().filter(|l| l.final_record.is_some()).cloned().collect();
    if let Some(first) = finished.first() {
        let c = &first.header.config;
        let data = c.task.prepare(c.seed)?;
        let same_task: Vec<RunLog> = finished
            .iter()
            .filter(|l| l.header.config.task == c.task && l.header.config.seed == c.seed)
            .cloned()
            .collect();
        if same_task.len() != finished.len() {
            eprintln!("length buckets cover only runs sharing the first run's task and seed");
        }
        write_length_buckets(&same_task, &data.test, &a.bucket_edges, &a.out)?;
    }
    println!("reports for {} runs in {}", logs.len(), a.out.display());
    Ok(())
}
