use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use pagewise::api;
use pagewise::corpus::{Corpus, Rasterizer};
use pagewise::review::ReviewStore;
use pagewise::runner::{ablate, evaluate_runs, run_corpus, Pipeline};
use pagewise::{generate_synthetic_corpus, RunConfig, SyntheticCorpusSpec};
use pagewise_core::docmodel::builtin_schema;
use pagewise_core::RunVariant;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(
    name = "pagewise",
    version,
    about = "Page retrieval and structured extraction for long scanned documents"
)]
struct Cli {
    /// TOML run configuration; defaults use mock OCR and VLM backends.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Pipeline variant: full, no_imgprep, no_retrieval, no_prompt, direct.
    #[arg(long, global = true)]
    variant: Option<RunVariant>,
    /// Seed for corpus generation and mock backends.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Where stage artifacts, records and reports go.
    #[arg(long, global = true)]
    run_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with planted ground truth.
    GenCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        docs: Option<usize>,
    },
    /// Run page preprocessing only, filling the artifact cache.
    Preprocess {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Run preprocessing (if the variant uses it) and OCR.
    Ocr {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Print the pages selected for every field.
    Retrieve {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        doc: Option<String>,
    },
    /// Extract every field of one document and print the records.
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        doc: String,
    },
    /// Run the configured variant over the corpus.
    Run {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Run all five variants and write the comparison report.
    Ablate {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Re-score saved runs against the corpus ground truth.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Serve the review API (and optionally the review UI).
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
    /// Print the prompt refinements backed by logged corrections.
    ExportSuggestions {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let cfg = load_config(&cli)?;

    match cli.command {
        Command::GenCorpus { out, docs } => {
            let mut spec = SyntheticCorpusSpec::default();
            if let Some(n) = docs {
                spec.doc_count = n;
            }
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            let summary = generate_synthetic_corpus(&spec, &out)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Preprocess { corpus } => prepare_all(&cfg, &corpus, false)?,
        Command::Ocr { corpus } => prepare_all(&cfg, &corpus, true)?,
        Command::Retrieve { corpus, doc } => {
            let corpus = load_corpus(&cfg, &corpus)?;
            let pipeline = Pipeline::new(&cfg)?;
            for d in corpus
                .docs
                .iter()
                .filter(|d| doc.as_deref().is_none_or(|id| id == d.doc_id))
            {
                let prepared = pipeline.prepare(d)?;
                let retriever = pipeline.retriever(d, &prepared)?;
                for spec in builtin_schema(d.doc_type) {
                    let (pages, _) = pipeline.candidates(retriever.as_ref(), &spec, d.page_count())?;
                    let pages: Vec<usize> = pages.into_iter().take(cfg.vlm.max_images_per_call).collect();
                    let line = serde_json::json!({"doc_id": d.doc_id, "field": spec.name, "pages": pages});
                    println!("{line}");
                }
            }
        }
        Command::Extract { corpus, doc } => {
            let corpus = load_corpus(&cfg, &corpus)?;
            let Some(d) = corpus.docs.iter().find(|d| d.doc_id == doc) else {
                bail!("no document {doc} in {}", corpus.root.display());
            };
            let result = Pipeline::new(&cfg)?.run_document(d);
            for r in &result.records {
                println!("{}", serde_json::to_string(r)?);
            }
        }
        Command::Run { corpus } => {
            let corpus = load_corpus(&cfg, &corpus)?;
            let out = run_corpus(&corpus, &cfg)?;
            let records = out.records();
            eprintln!(
                "{}: {} records from {} documents in {}",
                cfg.variant,
                records.len(),
                out.docs.len(),
                cfg.run_dir.display()
            );
            if corpus.ground_truth_path().exists() {
                let s = out.summarize(&corpus, &corpus.ground_truth()?)?;
                println!(
                    "accuracy {}% ({} / {})",
                    s.accuracy_pct, s.overall.correct, s.overall.total
                );
            }
        }
        Command::Ablate { corpus } => {
            let corpus = load_corpus(&cfg, &corpus)?;
            let out = ablate(&corpus, &cfg)?;
            println!("{}", out.report_md);
            println!("{}", out.latency_md);
        }
        Command::Eval { corpus } => {
            let corpus = load_corpus(&cfg, &corpus)?;
            let report = evaluate_runs(&corpus, &cfg.run_dir)?;
            println!(
                "{}",
                pagewise_core::evaluate::render_report(&report, &corpus.doc_meta())
            );
        }
        Command::Serve { addr, ui_dir } => {
            let store = ReviewStore::open(&cfg.run_dir)?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(api::serve(store, addr, ui_dir.as_deref()))?;
        }
        Command::ExportSuggestions { out } => {
            let store = ReviewStore::open(&cfg.run_dir)?;
            let body = serde_json::to_string_pretty(&serde_json::json!({
                "schema_version": pagewise::API_SCHEMA_VERSION,
                "suggestions": store.suggestions(),
            }))?;
            match out {
                Some(path) => {
                    std::fs::write(&path, body + "\n").with_context(|| format!("writing {}", path.display()))?
                }
                None => println!("{body}"),
            }
        }
    }
    Ok(())
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.variant {
        cfg.variant = v;
    }
    if let Some(seed) = cli.seed {
        cfg.ocr.mock_noise.seed = seed;
        cfg.vlm.mock.seed = seed;
    }
    if let Some(dir) = &cli.run_dir {
        cfg.run_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_corpus(cfg: &RunConfig, root: &Path) -> Result<Corpus> {
    let rasterizer = cfg.rasterize_cmd.as_ref().map(|command| Rasterizer {
        command: command.clone(),
        out_root: cfg.run_dir.join("rasterized"),
    });
    Ok(Corpus::load_with(root, rasterizer.as_ref())?)
}

fn prepare_all(cfg: &RunConfig, root: &Path, ocr: bool) -> Result<()> {
    let corpus = load_corpus(cfg, root)?;
    let pipeline = Pipeline::new(cfg)?;
    for d in &corpus.docs {
        let p = pipeline.prepare_stages(d, ocr)?;
        println!(
            "{}",
            serde_json::json!({"doc_id": d.doc_id, "pages": d.page_count(), "cache": p.cache, "ocr_failures": p.ocr_failures})
        );
    }
    Ok(())
}
