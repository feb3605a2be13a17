use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pocketvine::vine_sim::scenario::Scenario;
use pocketvine_gateway::calibrate::{self, write_error, Source};
use pocketvine_gateway::demo::{self, DemoOptions};
use pocketvine_gateway::server::{self, ServeOptions};

#[derive(Parser)]
#[command(name = "pocketvine", version, about = "Pocket-sensor vine robot toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit pocket sensitivities.
    Calibrate {
        /// Re-derive every row of the bundled sensitivity table.
        #[arg(long, conflicts_with_all = ["input", "synthetic"])]
        reproduce_paper: bool,
        /// Calibration CSV to fit.
        #[arg(long, conflicts_with = "synthetic")]
        input: Option<PathBuf>,
        /// Synthetic trials, e.g. `control,top,medium,0.4,noise=0.02,seed=7`.
        #[arg(long)]
        synthetic: Option<String>,
        /// Write records here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write plot series here.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Play a scenario, writing a snapshot trace.
    Demo {
        #[arg(long)]
        scenario: PathBuf,
        /// Run without pacing unless --speed is given.
        #[arg(long)]
        headless: bool,
        /// Simulated seconds per wall second.
        #[arg(long)]
        speed: Option<f64>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Trace file; defaults to `<scenario>.trace.jsonl`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Serve a live session over WebSocket.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8765")]
        bind: String,
        /// Scenario to serve; an empty world when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_scenario(path: &Path, seed: Option<u64>) -> Result<Scenario, ExitCode> {
    match Scenario::load(path) {
        Ok(mut sc) => {
            if let Some(s) = seed {
                sc.seed = s;
            }
            Ok(sc)
        }
        Err(e) => {
            let _ = write_error(&mut std::io::stderr(), "INVALID_SCENARIO", e);
            Err(ExitCode::from(2))
        }
    }
}

fn calibrate_cmd(
    reproduce_paper: bool,
    input: Option<PathBuf>,
    synthetic: Option<String>,
    output: Option<PathBuf>,
    plot: Option<PathBuf>,
) -> ExitCode {
    let mut err = std::io::stderr();
    let source = match (reproduce_paper, input, synthetic) {
        (true, _, _) => Source::ReproducePaper,
        (_, Some(p), _) => Source::Csv(p),
        (_, _, Some(s)) => Source::Synthetic(s),
        _ => {
            let _ = write_error(&mut err, "USAGE", "give --reproduce-paper, --input or --synthetic");
            return ExitCode::from(2);
        }
    };
    let create = |p: &PathBuf| File::create(p).map(BufWriter::new);
    let mut out: Box<dyn Write> = match &output {
        Some(p) => match create(p) {
            Ok(f) => Box::new(f),
            Err(e) => {
                let _ = write_error(&mut err, "IO", format!("{}: {e}", p.display()));
                return ExitCode::from(2);
            }
        },
        None => Box::new(std::io::stdout().lock()),
    };
    let mut plot_file = match plot.as_ref().map(create).transpose() {
        Ok(f) => f,
        Err(e) => {
            let _ = write_error(&mut err, "IO", e);
            return ExitCode::from(2);
        }
    };
    let code = calibrate::run(&source, &mut out, plot_file.as_mut().map(|f| f as &mut dyn Write), &mut err);
    let flushed = out.flush().and_then(|_| plot_file.map_or(Ok(()), |mut f| f.flush()));
    if let Err(e) = flushed {
        let _ = write_error(&mut err, "IO", e);
        return ExitCode::from(2);
    }
    ExitCode::from(code as u8)
}

fn demo_cmd(
    scenario: PathBuf,
    headless: bool,
    speed: Option<f64>,
    seed: Option<u64>,
    output: Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    let sc = match load_scenario(&scenario, seed) {
        Ok(sc) => sc,
        Err(code) => return Ok(code),
    };
    let speed = if headless { speed } else { Some(speed.unwrap_or(1.0)) };
    let trace_path = output.unwrap_or_else(|| PathBuf::from(format!("{}.trace.jsonl", sc.name)));
    let mut trace = BufWriter::new(File::create(&trace_path)?);
    let summary = demo::run(sc, DemoOptions { speed }, &mut trace, |tr| {
        println!("{}", serde_json::to_string(tr).expect("transition serializes"));
    })?;
    println!("{}", serde_json::to_string(&summary)?);
    log::info!("trace written to {}", trace_path.display());
    Ok(ExitCode::SUCCESS)
}

fn serve_cmd(bind: String, scenario: Option<PathBuf>, speed: f64, seed: Option<u64>) -> anyhow::Result<ExitCode> {
    let sc = match scenario {
        Some(p) => match load_scenario(&p, seed) {
            Ok(sc) => sc,
            Err(code) => return Ok(code),
        },
        None => Scenario { seed: seed.unwrap_or_default(), ..Scenario::default() },
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&bind).await?;
        eprintln!("serving on ws://{}", listener.local_addr()?);
        server::serve(listener, sc, ServeOptions { speed }).await
    })?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Calibrate { reproduce_paper, input, synthetic, output, plot } => {
            Ok(calibrate_cmd(reproduce_paper, input, synthetic, output, plot))
        }
        Cmd::Demo { scenario, headless, speed, seed, output } => demo_cmd(scenario, headless, speed, seed, output),
        Cmd::Serve { bind, scenario, speed, seed } => serve_cmd(bind, scenario, speed, seed),
    };
    result.unwrap_or_else(|e| {
        let _ = write_error(&mut std::io::stderr(), "FAILED", format!("{e:#}"));
        ExitCode::FAILURE
    })
}
