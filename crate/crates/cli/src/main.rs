use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exabrick::commands::{self, parse_slice, BenchPlan, CommandError, ImageSize, RenderOptions, Spacing};
use exabrick::render::SlicePlane;
use exabrick::synth::SynthParams;
use exabrick_service::Service;

/// Volume renderer for cell-centered AMR data.
#[derive(Parser)]
#[command(name = "exabrick", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print cell, brick and region counts, size and value range.
    Info { config: PathBuf },
    /// Render one frame to an image (PPM, or PNG by extension).
    Render {
        config: PathBuf,
        camera: PathBuf,
        tf: PathBuf,
        #[command(flatten)]
        view: ViewArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Sweep dt and write median frame times as CSV.
    Bench {
        config: PathBuf,
        camera: PathBuf,
        tf: PathBuf,
        #[command(flatten)]
        view: ViewArgs,
        #[arg(long, default_value_t = 0.1)]
        dt_min: f64,
        #[arg(long, default_value_t = 5.0)]
        dt_max: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value = "linear")]
        spacing: Spacing,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        #[arg(long, default_value_t = 1)]
        warmup: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate a synthetic dataset of Gaussian blobs.
    Synth {
        #[arg(long, default_value_t = 4)]
        blobs: usize,
        #[arg(long, default_value_t = 3)]
        levels: u32,
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Serve the HTTP and frame-stream interface for a dataset.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
    },
}

#[derive(Args)]
struct ViewArgs {
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    #[arg(long, default_value = "512x512")]
    size: ImageSize,
    /// Eye separation; renders left and right views side by side.
    #[arg(long)]
    stereo: Option<f64>,
    /// Iso-surface value.
    #[arg(long)]
    iso: Option<f32>,
    /// Slice plane as nx,ny,nz,offset.
    #[arg(long, value_parser = parse_slice)]
    slice: Option<SlicePlane>,
}

impl ViewArgs {
    fn options(&self) -> Result<RenderOptions, CommandError> {
        if !(self.dt > 0.0 && self.dt <= 100.0) {
            return Err(CommandError::Usage(format!("--dt must be in (0, 100], got {}", self.dt)));
        }
        Ok(RenderOptions {
            size: self.size,
            dt: self.dt,
            stereo: self.stereo,
            iso: self.iso,
            slice: self.slice,
        })
    }
}

fn run(command: Command) -> Result<(), CommandError> {
    match command {
        Command::Info { config } => print!("{}", commands::info(config)?),
        Command::Render {
            config,
            camera,
            tf,
            view,
            output,
        } => {
            let outcome = commands::render(config, camera, tf, &view.options()?, &output)?;
            for (k, s) in outcome.report.channels.iter().enumerate() {
                println!(
                    "channel {k}: {:.2} ms, {} rays, {} samples",
                    s.frame_time_ms, s.rays, s.samples
                );
            }
            println!("frame: {:.2} ms -> {}", outcome.report.frame_time_ms, output.display());
        }
        Command::Bench {
            config,
            camera,
            tf,
            view,
            dt_min,
            dt_max,
            samples,
            spacing,
            repetitions,
            warmup,
            output,
        } => {
            let plan = BenchPlan {
                dt_min,
                dt_max,
                samples,
                spacing,
                repetitions,
                warmup,
            };
            let rows = commands::bench(config, camera, tf, &plan, &view.options()?, &output)?;
            println!("{} rows -> {}", rows.len(), output.display());
        }
        Command::Synth {
            blobs,
            levels,
            threshold,
            seed,
            output,
        } => {
            let params = SynthParams {
                blobs,
                levels,
                threshold,
                seed,
            };
            print!("{}", commands::synth(&params, output)?);
        }
        Command::Serve { config, listen } => serve(config, listen)?,
    }
    Ok(())
}

fn serve(config: PathBuf, listen: SocketAddr) -> Result<(), CommandError> {
    let io_err = |e: std::io::Error, path: String| {
        CommandError::Io(exabrick::io::IoError::Io {
            path: path.into(),
            source: e,
        })
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| io_err(e, "tokio runtime".into()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(listen)
            .await
            .map_err(|e| io_err(e, listen.to_string()))?;
        let service = Service::new();
        let server = tokio::spawn(exabrick_service::serve(listener, service.clone()));
        eprintln!("listening on http://{listen}, loading {}", config.display());
        exabrick_service::load_config(&service, &config).await?;
        eprintln!("dataset loaded");
        match server.await {
            Ok(result) => result.map_err(|e| io_err(e, listen.to_string())),
            Err(e) => Err(io_err(std::io::Error::other(e), listen.to_string())),
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
