//! Command-line interface.

use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tourdesk_core::bundle::ArtifactBundle;
use tourdesk_core::clock::SystemClock;
use tourdesk_core::config::{BackendConfig, EngineConfig, DEFAULT_CREDENTIAL_ENV};
use tourdesk_core::session::{
    parse_transcript, persist_transcript, replay, transcript_jsonl, Assignment, Engine, Speaker, Turn,
};
use tourdesk_core::sightdb::SightCatalog;

use crate::api::{router, AppState};

#[derive(Debug, Parser)]
#[command(name = "tourdesk", version, about = "Travel consultation dialog engine")]
pub struct Cli {
    /// Engine configuration file (TOML).
    #[arg(long, global = true, env = "TOURDESK_CONFIG")]
    pub config: Option<PathBuf>,
    /// Sight corpus (JSON lines); overrides the configured corpus or bundle.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendKind>,
    /// Completion endpoint for the remote backend.
    #[arg(long, global = true, env = "TOURDESK_BACKEND_ENDPOINT")]
    pub endpoint: Option<String>,
    /// Seed for the mock backend, offline generation and sessions.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Mock,
    Remote,
}

#[derive(Debug, Args)]
pub struct AssignmentArgs {
    #[arg(long)]
    pub candidate_a: String,
    #[arg(long)]
    pub candidate_b: String,
    /// Defaults to the first candidate.
    #[arg(long)]
    pub recommended: Option<String>,
}

impl AssignmentArgs {
    fn assignment(&self) -> Assignment {
        Assignment::new(
            &self.candidate_a,
            &self.candidate_b,
            self.recommended.as_deref().unwrap_or(&self.candidate_a),
        )
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest the corpus and generate the offline artifact bundle.
    BuildCorpus {
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Write each session's transcript here after every turn.
        #[arg(long)]
        transcripts: Option<PathBuf>,
    },
    /// Consult in the terminal, one customer utterance per input line.
    Chat {
        #[command(flatten)]
        assignment: AssignmentArgs,
        /// Save the transcript when the session ends.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Render a saved transcript. With the candidates given, the session is
    /// also re-run and must reproduce the transcript exactly.
    Replay {
        file: PathBuf,
        #[arg(long, requires = "candidate_b")]
        candidate_a: Option<String>,
        #[arg(long, requires = "candidate_a")]
        candidate_b: Option<String>,
        #[arg(long)]
        recommended: Option<String>,
    },
}

impl Cli {
    /// The configuration file with the command-line overrides applied.
    pub fn engine_config(&self) -> Result<EngineConfig> {
        let mut config = match &self.config {
            Some(path) => EngineConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => EngineConfig::default(),
        };
        if let Some(corpus) = &self.corpus {
            config.corpus = Some(corpus.clone());
            config.bundle = None;
        }
        if let Some(seed) = self.seed {
            config.build_seed = seed;
        }
        match (self.backend, &config.backend) {
            (Some(BackendKind::Mock), _) | (None, BackendConfig::Mock { .. }) => {
                let configured = match config.backend {
                    BackendConfig::Mock { seed } => seed,
                    BackendConfig::Remote { .. } => 0,
                };
                config.backend = BackendConfig::Mock {
                    seed: self.seed.unwrap_or(configured),
                };
            }
            (Some(BackendKind::Remote), BackendConfig::Mock { .. }) => {
                let Some(endpoint) = self.endpoint.clone() else {
                    bail!("--backend remote needs --endpoint or TOURDESK_BACKEND_ENDPOINT");
                };
                config.backend = BackendConfig::Remote {
                    endpoint,
                    credential_env: DEFAULT_CREDENTIAL_ENV.to_string(),
                    timeout_secs: 30,
                };
            }
            (_, BackendConfig::Remote { .. }) => {
                if let (Some(endpoint), BackendConfig::Remote { endpoint: current, .. }) =
                    (&self.endpoint, &mut config.backend)
                {
                    *current = endpoint.clone();
                }
            }
        }
        if config.corpus.is_none() && config.bundle.is_none() {
            bail!("no sights: pass --corpus or a --config naming a corpus or bundle");
        }
        Ok(config)
    }

    fn session_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// One transcript line for the terminal.
pub fn render_turn(turn: &Turn) -> String {
    let who = match turn.speaker {
        Speaker::Agent => "agent",
        Speaker::Customer => "customer",
    };
    format!("[{}] {who}: {}", turn.phase.as_str(), turn.text)
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::BuildCorpus { out } => build_corpus(&cli, out),
        Command::Serve {
            port,
            host,
            transcripts,
        } => serve(&cli, host, *port, transcripts.clone()),
        Command::Chat { assignment, save } => chat(&cli, assignment.assignment(), save.as_ref()),
        Command::Replay {
            file,
            candidate_a,
            candidate_b,
            recommended,
        } => {
            let assignment = match (candidate_a, candidate_b) {
                (Some(a), Some(b)) => Some(Assignment::new(a, b, recommended.as_deref().unwrap_or(a))),
                _ => None,
            };
            replay_file(&cli, file, assignment)
        }
    }
}

fn build_corpus(cli: &Cli, out: &PathBuf) -> Result<()> {
    let config = cli.engine_config()?;
    let corpus = config
        .corpus
        .as_ref()
        .context("build-corpus needs a corpus (--corpus or config)")?;
    let catalog = SightCatalog::ingest(corpus, config.catalog_options())
        .with_context(|| format!("ingesting {}", corpus.display()))?;
    let gateway = config.gateway()?;
    let lexicon = config.answer_lexicon()?;
    let (bundle, report) = ArtifactBundle::build(&catalog, &gateway, &lexicon, config.build_seed)?;
    bundle.save(out).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "built {} sights into {} ({} backend calls, {} fallbacks)",
        report.sights,
        out.display(),
        report.metrics.backend_calls,
        report.metrics.fallbacks
    );
    for (id, artifacts) in &bundle.artifacts {
        println!("  {id}: {} questions", artifacts.questions.len());
    }
    if !report.without_questions.is_empty() {
        println!("no usable questions for: {}", report.without_questions.join(", "));
    }
    Ok(())
}

fn engine(cli: &Cli) -> Result<Engine> {
    Ok(cli.engine_config()?.engine(Arc::new(SystemClock))?)
}

fn serve(cli: &Cli, host: &str, port: u16, transcripts: Option<PathBuf>) -> Result<()> {
    let engine = engine(cli)?;
    let mut state = AppState::new(engine, cli.session_seed());
    if let Some(dir) = transcripts {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        state = state.with_transcript_dir(dir);
    }
    let addr: SocketAddr = format!("{host}:{port}").parse().context("bad --host/--port")?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        tracing::info!(%addr, "listening");
        axum::serve(listener, router(Arc::new(state)))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

fn chat(cli: &Cli, assignment: Assignment, save: Option<&PathBuf>) -> Result<()> {
    let engine = engine(cli)?;
    let mut session = engine.start(assignment, cli.session_seed())?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for turn in engine.advance(&mut session, None)? {
        writeln!(out, "{}", render_turn(&turn))?;
    }
    let stdin = std::io::stdin();
    for line in stdin.lock().lines() {
        if session.is_done() {
            break;
        }
        let line = line?;
        let turns = engine.advance(&mut session, Some(&line))?;
        for turn in &session.turns[session.turns.len() - turns.len() - 1..] {
            writeln!(out, "{}", render_turn(turn))?;
        }
    }
    if let Some(path) = save {
        let mut file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        persist_transcript(&session, &mut file)?;
    }
    if !session.is_done() {
        writeln!(out, "(input ended in phase {})", session.phase.as_str())?;
    }
    Ok(())
}

fn replay_file(cli: &Cli, file: &PathBuf, assignment: Option<Assignment>) -> Result<()> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let records = parse_transcript(&text)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for turn in &records {
        writeln!(out, "{}", render_turn(turn))?;
    }
    if let Some(assignment) = assignment {
        let session = replay(&engine(cli)?, assignment, &records, cli.session_seed())?;
        if transcript_jsonl(&session.turns) != transcript_jsonl(&records) {
            bail!("replay diverged from {}", file.display());
        }
        writeln!(out, "replay reproduced {} turns", records.len())?;
    }
    Ok(())
}
