use std::io::{self, BufReader};
use std::net::{Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::Ordering;
use std::sync::Arc;
use std::time::Duration;

use arc_swap::ArcSwap;
use clap::{Parser, Subcommand};
use log::error;

use vivo::engine::{
    analyze_file, run_stream, EngineConfig, InputSpec, MetricsSummary, PixelFormat, RawFrames, StreamOptions,
};
use vivo::osc::{proxy, Endpoint};
use vivo::Result;

#[derive(Parser)]
#[command(name = "vivo", version, about = "Video descriptors to OSC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze raw frames from stdin and stream OSC.
    Stream {
        /// rawvideo:WxH@fps
        #[arg(long)]
        input: Option<InputSpec>,
        #[arg(long)]
        pix: Option<PixelFormat>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// OSC target, repeatable; replaces the config's targets.
        #[arg(long = "osc", alias = "send")]
        osc: Vec<Endpoint>,
        /// Control API bind address.
        #[arg(long)]
        api: Option<SocketAddr>,
        /// Process frames as fast as they arrive instead of at the input rate.
        #[arg(long)]
        no_pace: bool,
        /// Only send mapped outputs, not the raw /vivo/* values.
        #[arg(long)]
        no_raw: bool,
    },
    /// Write a descriptor table for a raw or PPM frame file.
    Analyze {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        input: Option<InputSpec>,
        #[arg(long)]
        pix: Option<PixelFormat>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Rescale and route incoming OSC, forwarding to a target.
    Proxy {
        #[arg(long)]
        listen: u16,
        #[arg(long, alias = "send")]
        target: Endpoint,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: Option<&PathBuf>, input: Option<InputSpec>, pix: Option<PixelFormat>) -> Result<EngineConfig> {
    let mut cfg = match path {
        Some(p) => EngineConfig::load(p)?,
        None => EngineConfig::default(),
    };
    if let Some(i) = input {
        cfg.input.width = i.width;
        cfg.input.height = i.height;
        cfg.input.fps = i.fps;
    }
    if let Some(p) = pix {
        cfg.input.pix = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(m: &MetricsSummary) {
    eprintln!(
        "frames read {} processed {} dropped {} errors {}",
        m.frames_read, m.frames_processed, m.frames_dropped, m.frame_errors
    );
    eprintln!(
        "fps {:.1}  latency mean {:.2} ms  p50 {:.2} ms  p95 {:.2} ms  max {:.2} ms",
        m.achieved_fps, m.latency_mean_ms, m.latency_p50_ms, m.latency_p95_ms, m.latency_max_ms
    );
    for (i, s) in m.osc.iter().enumerate() {
        eprintln!("osc[{i}] sent {} dropped {} errors {}", s.sent, s.dropped, s.errors);
    }
}

fn ctrl_c_flag() -> Result<Arc<std::sync::atomic::AtomicBool>> {
    let flag = Arc::new(std::sync::atomic::AtomicBool::new(false));
    let f = Arc::clone(&flag);
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build()?;
    std::thread::spawn(move || {
        rt.block_on(async {
            if tokio::signal::ctrl_c().await.is_ok() {
                f.store(true, Ordering::SeqCst);
            }
        })
    });
    Ok(flag)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stream {
            input,
            pix,
            config,
            osc,
            api,
            no_pace,
            no_raw,
        } => {
            let mut cfg = load_config(config.as_ref(), input, pix)?;
            if !osc.is_empty() {
                cfg.osc.targets = osc;
            }
            if api.is_some() {
                cfg.api = api;
            }
            cfg.input.pace &= !no_pace;
            cfg.osc.raw &= !no_raw;
            let interrupted = ctrl_c_flag()?;
            let frames = RawFrames::new(BufReader::with_capacity(1 << 20, io::stdin()), cfg.input);
            let handle = run_stream(&cfg, frames, StreamOptions::default())?;
            while !handle.is_finished() && !interrupted.load(Ordering::SeqCst) {
                std::thread::sleep(Duration::from_millis(20));
            }
            let summary = handle.stop();
            print_summary(&summary);
            Ok(())
        }
        Command::Analyze {
            file,
            output,
            input,
            pix,
            config,
        } => {
            let cfg = load_config(config.as_ref(), input, pix)?;
            let table = analyze_file(&cfg, &file, &output)?;
            eprintln!("{} units written to {}", table.len(), output.display());
            Ok(())
        }
        Command::Proxy { listen, target, config } => {
            let cfg = load_config(config.as_ref(), None, None)?;
            let mapping = cfg.load_mapping()?.mapping;
            let interrupted = ctrl_c_flag()?;
            let handle = proxy(
                SocketAddr::from((Ipv4Addr::UNSPECIFIED, listen)),
                Arc::new(ArcSwap::from_pointee(mapping)),
                &target,
            )?;
            eprintln!("proxy {} -> {}", handle.local_addr(), target);
            while !interrupted.load(Ordering::SeqCst) {
                std::thread::sleep(Duration::from_millis(50));
            }
            let s = handle.stop();
            eprintln!(
                "received {} mapped {} forwarded {} malformed {}",
                s.receiver.messages, s.mapped, s.forwarded, s.receiver.malformed
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VIVO_LOG", "info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
