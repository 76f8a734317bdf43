use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use biasview_core::config::PipelineConfig;
use biasview_core::corpus::{apply_filter, bundled_name_pool, load_corpus, write_corpus, Hotel, HotelMeta};
use biasview_core::pipeline::analyze;
use biasview_core::sentiment::Lexicon;
use biasview_core::shapes::{generate_biased_corpus, study_corpus, BiasConfig, Manifest, SyntheticVocab};
use biasview_core::studylab::{
    build_report, load_responses, load_session_logs, responses_from_logs, GateConfig, Questionnaire, ReportConfig,
};
use biasview_gateway::{router, AppState, StudyConfig, SystemClock};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "biasview", version, about = "Rating-bias transparency pipeline and study server")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Study,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a review file or corpus directory and write it in canonical form.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Pipeline config whose corpus filter is applied.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the analysis pipeline and write the analysis bundle.
    Analyze {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic corpus with self-selection bias.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, conflicts_with_all = ["mean", "spread", "gain", "base_rate"])]
        preset: Option<Preset>,
        #[arg(long, default_value_t = 2020)]
        seed: u64,
        #[arg(long, default_value = "hotel-01")]
        hotel_id: String,
        #[arg(long)]
        mean: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        spread: f64,
        /// Extremity gain of the reporting probability.
        #[arg(long, default_value_t = 0.0)]
        gain: f64,
        #[arg(long, default_value_t = 1.0)]
        base_rate: f64,
        #[arg(long, default_value_t = 10_000)]
        population: usize,
        /// Stop once this many reviews exist.
        #[arg(long)]
        reviews: Option<usize>,
    },
    /// Serve the study API.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
    /// Apply the quality gates and compare conditions.
    Stats {
        /// Directory of session telemetry files.
        #[arg(long)]
        logs: PathBuf,
        /// Questionnaire responses (JSONL); defaults to answers inside the logs.
        #[arg(long)]
        responses: Option<PathBuf>,
        #[arg(long)]
        questionnaire: Option<PathBuf>,
        /// Study config supplying gate thresholds.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn pipeline_config(path: Option<&Path>) -> anyhow::Result<PipelineConfig> {
    Ok(match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn generate(out: &Path, hotels: &[Hotel], manifest: &Manifest) -> anyhow::Result<()> {
    write_corpus(out, hotels)?;
    write_json(&out.join("manifest.json"), manifest)?;
    for h in &manifest.hotels {
        println!(
            "{}  {} reviews  true {:?}  reported {:?}",
            h.hotel_id,
            h.reported_histogram.total(),
            h.true_shape,
            h.reported_shape
        );
    }
    Ok(())
}

async fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest { input, out, config } => {
            let cfg = pipeline_config(config.as_deref())?;
            let mut hotels = load_corpus(&input)?;
            if let Some(filter) = &cfg.corpus.filter {
                hotels = apply_filter(&hotels, filter)?;
            }
            write_corpus(&out, &hotels)?;
            let reviews: usize = hotels.iter().map(|h| h.reviews.len()).sum();
            println!("{} hotels, {reviews} reviews -> {}", hotels.len(), out.display());
        }
        Command::Analyze { corpus, config, out } => {
            let cfg = pipeline_config(config.as_deref())?;
            let analysis = analyze(&load_corpus(&corpus)?, &cfg)?;
            std::fs::write(&out, analysis.bundle.to_json()).with_context(|| format!("writing {}", out.display()))?;
            for h in &analysis.bundle.hotels {
                println!("{}  {} reviews  {:?}", h.meta.hotel_id, h.review_count, h.shape);
            }
        }
        Command::Generate { out, preset, seed, hotel_id, mean, spread, gain, base_rate, population, reviews } => {
            let lexicon = Lexicon::bundled();
            let names = bundled_name_pool();
            if preset.is_some() {
                let (hotels, manifest) = study_corpus(seed, &lexicon, &names)?;
                generate(&out, &hotels, &manifest)?;
            } else {
                let mean = mean.context("either --preset or --mean is required")?;
                let cfg = BiasConfig {
                    true_mean: mean,
                    true_spread: spread,
                    population,
                    extremity_gain: gain,
                    base_rate,
                    seed,
                    stop_after_reports: reviews,
                };
                let range = (
                    chrono_date(2019, 1, 1),
                    chrono_date(2019, 12, 31),
                );
                let g = generate_biased_corpus(&cfg, &hotel_id, &SyntheticVocab::default(), &lexicon, &names, range)?;
                let hotel = Hotel {
                    meta: HotelMeta {
                        hotel_id: hotel_id.clone(),
                        name: hotel_id.clone(),
                        price_per_night: None,
                        star_class: None,
                        photo: None,
                    },
                    reviews: g.reviews,
                };
                let manifest = Manifest {
                    generator_version: biasview_core::shapes::GENERATOR_VERSION.to_string(),
                    hotels: vec![g.manifest],
                };
                generate(&out, &[hotel], &manifest)?;
            }
        }
        Command::Serve { config, port } => {
            let cfg = StudyConfig::load(&config)?;
            let state = AppState::from_config(&cfg, Arc::new(SystemClock))?;
            tracing::info!(
                hotels = state.analysis.hotels.len(),
                sessions = state.sessions.len(),
                "analysis ready"
            );
            let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
            tracing::info!("listening on {}", listener.local_addr()?);
            axum::serve(listener, router(Arc::new(state))).await?;
        }
        Command::Stats { logs, responses, questionnaire, config, out } => {
            let sessions = load_session_logs(&logs)?;
            let responses = match responses {
                Some(path) => load_responses(&path)?,
                None => responses_from_logs(&sessions),
            };
            let (q, gate) = match config {
                Some(path) => {
                    let cfg = StudyConfig::load(&path)?;
                    (cfg.questionnaire()?, cfg.gate)
                }
                None => (Questionnaire::bundled(), GateConfig::default()),
            };
            let q = match questionnaire {
                Some(path) => Questionnaire::load(&path)?,
                None => q,
            };
            let report = build_report(&sessions, &responses, &q, &gate, &ReportConfig::default())?;
            match out {
                Some(path) => write_json(&path, &report)?,
                None => println!("{}", serde_json::to_string_pretty(&report)?),
            }
        }
    }
    Ok(())
}

fn chrono_date(y: i32, m: u32, d: u32) -> chrono::NaiveDate {
    chrono::NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    run(Cli::parse()).await
}
