use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use parley_core::metrics::build_report;
use parley_core::persistence::{PersistenceError, RegistryStore};
use parley_core::remote::MissingEnv;
use parley_core::speech::{AudioFormat, AudioRef};
use parley_core::types::TranscriptError;
use parley_core::Transcript;
use thiserror::Error;

use crate::api::{self, AppState};
use crate::config::{Config, ConfigError, ProviderMode};
use crate::providers::Providers;
use crate::session::{Runtime, Session, SessionError, TurnInput};

#[derive(Debug, Parser)]
#[command(name = "parley", version, about = "Small-talk practice partner with conversation feedback")]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the feedback report for a transcript file (one JSON utterance per line).
    Analyze { file: PathBuf },
    /// Converse on the terminal, one reply per input line. A line starting
    /// with '@' is an audio reference instead of text.
    Chat {
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long, value_enum)]
        providers: Option<ProviderMode>,
        /// Name to greet a returning user by.
        #[arg(long)]
        name: Option<String>,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long)]
        host: Option<String>,
        /// 0 picks a free port; the bound address is printed on startup.
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long, value_enum)]
        providers: Option<ProviderMode>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Transcript {
        path: PathBuf,
        source: TranscriptError,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("live providers unavailable: {0}")]
    MissingEnv(#[from] MissingEnv),
    #[error("cannot open store: {0}")]
    Store(#[from] PersistenceError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("input ended before the conversation finished (state {0})")]
    Unfinished(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Server(String),
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = Config::load_or_default(cli.config.as_deref())?;
    match cli.command {
        Command::Analyze { file } => {
            config.validate()?;
            let mut out = std::io::stdout().lock();
            analyze(&config, &file, &mut out)
        }
        Command::Chat { store, providers, name } => {
            override_with(&mut config, store, providers);
            let runtime = build_runtime(&config)?;
            let stdin = std::io::stdin().lock();
            let mut out = std::io::stdout().lock();
            chat(&runtime, name.as_deref(), stdin, &mut out)
        }
        Command::Serve { host, port, store, providers } => {
            override_with(&mut config, store, providers);
            if let Some(host) = host {
                config.host = host;
            }
            if let Some(port) = port {
                config.port = port;
            }
            serve(&config)
        }
    }
}

fn override_with(config: &mut Config, store: Option<PathBuf>, providers: Option<ProviderMode>) {
    if let Some(store) = store {
        config.store = store;
    }
    if let Some(providers) = providers {
        config.providers = providers;
    }
}

/// Validates the config and assembles engine, providers and store.
pub fn build_runtime(config: &Config) -> Result<Runtime, CliError> {
    config.validate()?;
    let lists = config.word_lists()?;
    let engine = config.engine()?;
    let providers = Providers::for_mode(config.providers, &config.audio_dir())?;
    let store = RegistryStore::open(&config.store)?;
    Ok(Runtime::new(
        engine,
        lists,
        config.thresholds.clone(),
        config.budget,
        providers,
        Some(store),
    ))
}

pub fn analyze(config: &Config, file: &Path, out: &mut impl Write) -> Result<(), CliError> {
    let text = std::fs::read_to_string(file).map_err(|source| CliError::Read {
        path: file.to_path_buf(),
        source,
    })?;
    let id = file
        .file_stem()
        .map_or_else(|| "transcript".into(), |s| s.to_string_lossy().into_owned());
    let transcript = Transcript::from_jsonl(id, &text).map_err(|source| CliError::Transcript {
        path: file.to_path_buf(),
        source,
    })?;
    let report = build_report(&transcript, &config.word_lists()?, &config.thresholds);
    writeln!(out, "{}", report.to_json_pretty())?;
    Ok(())
}

fn chat_input(line: &str) -> TurnInput {
    match line.strip_prefix('@') {
        Some(uri) => {
            let uri = uri.trim();
            TurnInput::Audio(AudioRef::new(uri, AudioFormat::from_path(uri), 0))
        }
        None => TurnInput::Text {
            text: line.to_string(),
            duration_ms: None,
        },
    }
}

/// Runs one conversation over line-oriented input. Each bot turn prints as
/// `[State] text`; at the end the state trace and the report follow.
pub fn chat(runtime: &Runtime, name: Option<&str>, input: impl BufRead, out: &mut impl Write) -> Result<(), CliError> {
    let id = uuid::Uuid::new_v4().simple().to_string();
    let (mut session, greeting) = Session::start(runtime, &id, name)?;
    writeln!(out, "[{}] {}", greeting.state, greeting.bot_text)?;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let outcome = session.turn(runtime, chat_input(&line))?;
        writeln!(out, "[{}] {}", outcome.state, outcome.bot_text)?;
        if outcome.done {
            break;
        }
    }
    if !session.is_ended() {
        return Err(CliError::Unfinished(session.state().to_string()));
    }
    let trace: Vec<String> = session.trace().iter().map(ToString::to_string).collect();
    writeln!(out, "trace: {}", trace.join(" -> "))?;
    if let Some(report) = session.report() {
        writeln!(out, "{}", report.to_json_pretty())?;
    }
    Ok(())
}

pub fn serve(config: &Config) -> Result<(), CliError> {
    let runtime = build_runtime(config)?;
    let state = AppState::new(runtime);
    let app = api::router(state, &config.cors_origins).map_err(|e| CliError::Server(e.to_string()))?;
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async {
        let addr = format!("{}:{}", config.host, config.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::Server(format!("cannot bind {addr}: {e}")))?;
        let bound: SocketAddr = listener.local_addr()?;
        println!("listening on http://{bound}");
        std::io::stdout().flush()?;
        tracing::info!(%bound, providers = ?config.providers, store = %config.store.display(), "serving");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
