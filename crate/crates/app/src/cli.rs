use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use qgen_core::corpus::{load_articles_dir, AnnotatedArticle, GradedLexicon};
use qgen_core::grammargen::{calibrate_difficulty, self_test, Registry};
use qgen_core::pipeline::generate_bank;
use qgen_core::quizengine::ItemBank;
use qgen_core::sim::{run_experiment, ExperimentConfig};

use crate::config::{data_dir, load_bank, read_text, resolve_bank, ServiceConfig};
use crate::error::CliError;
use crate::server::{serve, Service};

#[derive(Debug, Parser)]
#[command(name = "qgen", version, about = "Graded question generation, adaptive quizzes and learner simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate articles, lexicon and registry and copy them into a store.
    Ingest(IngestArgs),
    /// Set pattern difficulties from a graded textbook corpus.
    Calibrate(CalibrateArgs),
    /// Generate an item bank from annotated articles.
    Generate(GenerateArgs),
    /// Inspect an item bank.
    Bank {
        #[command(subcommand)]
        command: BankCommand,
    },
    /// Run a simulated experiment.
    Simulate(SimulateArgs),
    /// Start the HTTP session service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Article bundle file or directory of `*.json` bundles (repeatable).
    #[arg(long, required = true)]
    articles: Vec<PathBuf>,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    registry: PathBuf,
    /// Store directory; without it the inputs are only validated.
    #[arg(long)]
    store: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// Directory of graded article bundles.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    registry: PathBuf,
    /// Where to write the calibrated registry.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, required = true)]
    articles: Vec<PathBuf>,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    registry: PathBuf,
    /// Item bank output (JSON lines).
    #[arg(long)]
    out: PathBuf,
    /// Also write the generation report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum BankCommand {
    /// Item counts per type and level.
    Stats {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Print JSON instead of the text tables.
    #[arg(long)]
    json_stdout: bool,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Store root; overrides QG_DATA_DIR and the config file.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    port: Option<u16>,
}

/// Parses arguments and runs a subcommand, printing errors to stderr.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(64)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Generate(a) => generate(a),
        Command::Bank {
            command: BankCommand::Stats { bank, json },
        } => {
            let stats = ItemBank::load(&bank)?.stats();
            if json {
                print(&format!("{}\n", to_json(&stats)))
            } else {
                print(&stats.render())
            }
        }
        Command::Simulate(a) => simulate(a),
        Command::Serve(a) => serve_cmd(a),
    }
}

fn print(s: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(s.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_articles(paths: &[PathBuf]) -> Result<Vec<AnnotatedArticle>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if !p.exists() {
            return Err(CliError::Io(format!("{}: no such file or directory", p.display())));
        }
        out.extend(load_articles_dir(p)?);
    }
    let mut ids: Vec<&str> = out.iter().map(|a| a.id.as_str()).collect();
    ids.sort();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Validation(format!("article id {:?} appears twice", w[0])));
    }
    Ok(out)
}

fn ingest(a: IngestArgs) -> Result<(), CliError> {
    let articles = load_articles(&a.articles)?;
    let lexicon = GradedLexicon::load(&a.lexicon)?;
    let registry = Registry::load(&a.registry)?;
    let checks = self_test(&registry)?;
    let mut msg = format!(
        "{} articles, {} lexicon entries, {} grammar patterns ({} self-tests passed)\n",
        articles.len(),
        lexicon.len(),
        registry.patterns.len(),
        checks.len()
    );
    if let Some(store) = a.store {
        let dir = store.join("articles");
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let copy = |from: &Path, to: &Path| {
            std::fs::copy(from, to)
                .map(|_| ())
                .map_err(|e| CliError::Io(format!("{} -> {}: {e}", from.display(), to.display())))
        };
        for p in &a.articles {
            let files: Vec<PathBuf> = if p.is_file() {
                vec![p.clone()]
            } else {
                std::fs::read_dir(p)
                    .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|f| f.extension().is_some_and(|x| x == "json"))
                    .collect()
            };
            for f in files {
                copy(&f, &dir.join(f.file_name().expect("file path")))?;
            }
        }
        write_file(&store.join("lexicon.tsv"), &lexicon.to_tsv())?;
        write_file(&store.join("grammar.toml"), &registry.to_toml())?;
        msg.push_str(&format!("stored in {}\n", store.display()));
    }
    print(&msg)
}

fn calibrate(a: CalibrateArgs) -> Result<(), CliError> {
    let corpus = load_articles_dir(&a.corpus)?;
    let registry = Registry::load(&a.registry)?;
    let (calibrated, report) = calibrate_difficulty(&registry, &corpus)?;
    if let Some(out) = &a.out {
        write_file(out, &calibrated.to_toml())?;
    }
    if a.json {
        return print(&format!("{}\n", to_json(&report)));
    }
    let mut o = String::from("sentences per grade:");
    for s in report.sentences {
        o.push_str(&format!(" {s}"));
    }
    o.push_str("\n\npattern                 G1   G2   G3   G4   G5   G6  difficulty\n");
    for c in &report.patterns {
        o.push_str(&format!("{:<22}", c.pattern));
        for m in c.matches {
            o.push_str(&format!("{m:>5}"));
        }
        let note = if c.fallback { " (fallback, no matches)" } else { "" };
        o.push_str(&format!("  {}{note}\n", c.difficulty));
    }
    print(&o)
}

fn generate(a: GenerateArgs) -> Result<(), CliError> {
    let articles = load_articles(&a.articles)?;
    let lexicon = GradedLexicon::load(&a.lexicon)?;
    let registry = Registry::load(&a.registry)?;
    let (bank, report) = generate_bank(&articles, &lexicon, &registry)?;
    bank.save(&a.out)?;
    if let Some(path) = &a.report {
        write_file(path, &format!("{}\n", to_json(&report)))?;
    }
    print(&format!("{}wrote {} items to {}\n", report.render(), bank.len(), a.out.display()))
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let text = read_text(&a.config)?;
    let mut cfg = ExperimentConfig::parse_toml(&text).map_err(|e| CliError::Validation(format!("{}: {e}", a.config.display())))?;
    cfg.bank = resolve_bank(cfg.bank, a.config.parent().unwrap_or(Path::new(".")));
    let bank = load_bank(&cfg.bank)?;
    let report = run_experiment(&cfg, &bank, a.seed)?;
    let json = report.to_json();
    if let Some(path) = &a.json {
        write_file(path, &json)?;
    }
    if a.json_stdout {
        print(&json)
    } else {
        print(&report.render())
    }
}

fn serve_cmd(a: ServeArgs) -> Result<(), CliError> {
    let mut cfg = ServiceConfig::load(&a.config)?;
    if let Some(port) = a.port {
        cfg.port = port;
    }
    let dir = data_dir(a.data_dir, &cfg);
    let service = Arc::new(Service::open(cfg, &dir)?);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(format!("runtime: {e}")))?;
    runtime
        .block_on(serve(service))
        .map_err(|e| CliError::Io(format!("server: {e}")))
}
