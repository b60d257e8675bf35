use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use super::composer::{Composer, NoCall, VoiceOutlet};
use super::config::{AppConfig, SynthChoice, CONFIG_ENV};
use super::server::Server;
use super::{speak_once, ServiceError};
use crate::voipbridge::{CallSession, LoopbackOptions, LoopbackPeer, Pacer};

#[derive(Debug, Parser)]
#[command(name = "easyvoice", version, about = "Speak into a voice call by typing")]
struct Cli {
    #[command(flatten)]
    opts: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full system: composer session, UI server and call stream.
    Serve,
    /// Act as the far end: record an incoming RTP stream to received.wav.
    Loopback {
        /// Stop listening after this long.
        #[arg(long, value_name = "MS", default_value_t = 10_000)]
        duration_ms: u64,
        /// Stop this long after the last packet.
        #[arg(long, value_name = "MS")]
        idle_timeout_ms: Option<u64>,
        /// Where received.wav and stats.json are written.
        #[arg(long, value_name = "DIR", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Synthesize one message, stream it to the peer and exit.
    SpeakOnce {
        #[arg(long)]
        text: String,
    },
    /// Validate the configuration and the files it names.
    CheckConfig,
}

#[derive(Debug, Args)]
struct Overrides {
    /// JSON config file.
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Far end of the call.
    #[arg(long, global = true, value_name = "HOST:PORT")]
    peer: Option<String>,
    /// UDP port the loopback peer listens on.
    #[arg(long, global = true, value_name = "PORT", value_parser = clap::value_parser!(u16).range(1..))]
    listen: Option<u16>,
    /// HTTP/WebSocket port for the UI.
    #[arg(long, global = true, value_name = "PORT", value_parser = clap::value_parser!(u16).range(1..))]
    ui_port: Option<u16>,
    /// Word frequency list (`word<TAB>count`).
    #[arg(long, global = true, value_name = "PATH")]
    dict: Option<PathBuf>,
    /// Abbreviation table (`abbreviation<TAB>expansion`).
    #[arg(long, global = true, value_name = "PATH")]
    abbrev: Option<PathBuf>,
    /// Scanning keyboard layout (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    layout: Option<PathBuf>,
    /// Where recent messages are kept (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    archive: Option<PathBuf>,
    /// Scanning cursor step, in milliseconds.
    #[arg(long, global = true, value_name = "MS")]
    scan_period: Option<u64>,
    /// `tone`, or `cmd:<template>` with {text} and {out} placeholders.
    #[arg(long, global = true, value_name = "ENGINE")]
    synth: Option<SynthChoice>,
    /// Turn off the message archive.
    #[arg(long, global = true)]
    no_archive: bool,
    /// Turn off word completion.
    #[arg(long, global = true)]
    no_completion: bool,
    /// Turn off abbreviation expansion.
    #[arg(long, global = true)]
    no_abbrev: bool,
    /// Turn off the scanning keyboard.
    #[arg(long, global = true)]
    no_scankb: bool,
}

impl Overrides {
    fn resolve(&self) -> Result<AppConfig, ServiceError> {
        let mut cfg = match &self.config {
            Some(path) => AppConfig::load(path)?,
            None => AppConfig::default(),
        };
        if let Some(v) = &self.peer {
            cfg.peer = Some(v.clone());
        }
        if let Some(v) = self.listen {
            cfg.listen_port = v;
        }
        if let Some(v) = self.ui_port {
            cfg.ui_port = v;
        }
        for (slot, v) in [
            (&mut cfg.dict_path, &self.dict),
            (&mut cfg.abbrev_path, &self.abbrev),
            (&mut cfg.layout_path, &self.layout),
            (&mut cfg.archive_path, &self.archive),
        ] {
            if let Some(v) = v {
                *slot = Some(v.clone());
            }
        }
        if let Some(v) = self.scan_period {
            cfg.scan_period_ms = v;
        }
        if let Some(v) = &self.synth {
            cfg.synth = v.clone();
        }
        let f = &mut cfg.features;
        f.archive_on &= !self.no_archive;
        f.completion_on &= !self.no_completion;
        f.abbrev_on &= !self.no_abbrev;
        f.scankb_on &= !self.no_scankb;
        Ok(cfg)
    }
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 when startup or the command fails, 2 for usage errors.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cfg = match cli.opts.resolve() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let result = match cli.command {
        Command::CheckConfig => check_config(&cfg),
        Command::Serve => serve(cfg),
        Command::Loopback {
            duration_ms,
            idle_timeout_ms,
            out_dir,
        } => loopback(&cfg, duration_ms, idle_timeout_ms, out_dir),
        Command::SpeakOnce { text } => speak_once(&cfg, &text).map(|report| {
            println!("{}", serde_json::to_string(&report).expect("report serializes"));
        }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn check_config(cfg: &AppConfig) -> Result<(), ServiceError> {
    let problems = cfg.problems();
    if problems.is_empty() {
        println!("configuration OK");
        return Ok(());
    }
    for p in &problems {
        eprintln!("config: {p}");
    }
    Err(ServiceError::Config(format!("{} configuration problem(s)", problems.len())))
}

fn loopback(
    cfg: &AppConfig,
    duration_ms: u64,
    idle_timeout_ms: Option<u64>,
    out_dir: PathBuf,
) -> Result<(), ServiceError> {
    let peer = LoopbackPeer::bind(SocketAddr::from(([0, 0, 0, 0], cfg.listen_port)))?;
    eprintln!("loopback peer listening on {}", peer.local_addr()?);
    let report = peer.run(LoopbackOptions {
        duration: Duration::from_millis(duration_ms),
        idle_timeout: idle_timeout_ms.map(Duration::from_millis),
    })?;
    report.write_to_dir(&out_dir)?;
    println!("{}", serde_json::to_string(&report.stats).expect("stats serialize"));
    Ok(())
}

fn serve(cfg: AppConfig) -> Result<(), ServiceError> {
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(ServiceError::Config(problems.join("; ")));
    }
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .try_init();

    let outlet: Arc<dyn VoiceOutlet> = match cfg.peer_addr()? {
        Some(peer) => {
            tracing::info!("streaming to {peer}");
            Arc::new(Pacer::spawn_udp(CallSession::new(peer))?)
        }
        None => {
            tracing::warn!("no --peer given; speech will be refused");
            Arc::new(NoCall)
        }
    };
    let composer = Composer::from_config(&cfg, outlet)?;

    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async {
        let addr = SocketAddr::from(([0, 0, 0, 0], cfg.ui_port));
        let server = Server::bind(addr, composer, cfg.ui_dir.as_deref()).await?;
        tracing::info!("UI on http://{}", server.local_addr()?);
        server
            .run(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })
}
