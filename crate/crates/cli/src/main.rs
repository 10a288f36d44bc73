use std::path::PathBuf;
use std::process::ExitCode;

use billboard_salience::pipeline::{
    cmd_calibrate, cmd_evaluate, cmd_saliency, cmd_synth, ErrorEntry, PipelineError, RunConfig, SaliencyMethod,
};
use billboard_salience::SpectralResidualParamsF64;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};

/// Billboard saliency: spectral-residual maps, significance calibration and
/// evaluation against fixations and annotated regions.
#[derive(Debug, Parser)]
#[command(name = "bbsal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one saliency map per manifest image.
    Saliency(RunArgs),
    /// Calibrate the significance threshold on the train split.
    Calibrate(RunArgs),
    /// Evaluate the test split and write a report.
    Evaluate(RunArgs),
    /// Generate a deterministic synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// "spectral-residual" or "external:<dir>".
    #[arg(long, default_value = "spectral-residual")]
    method: String,
    #[arg(long)]
    working_width: Option<usize>,
    #[arg(long)]
    mean_filter: Option<usize>,
    #[arg(long)]
    blur_sigma: Option<f64>,
    /// Fixed significance threshold in [0, 1] instead of calibrating.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write 8-bit .pgm previews of the maps.
    #[arg(long)]
    preview: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    size: usize,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, PipelineError> {
        let mut params = SpectralResidualParamsF64::default();
        if let Some(w) = self.working_width {
            params.working_width = w;
        }
        if let Some(m) = self.mean_filter {
            params.mean_filter_size = m;
        }
        if let Some(s) = self.blur_sigma {
            params.post_blur_sigma = s;
        }
        let config = RunConfig {
            method: SaliencyMethod::parse(&self.method)?,
            params,
            threshold: self.threshold,
            workers: self.workers,
            seed: self.seed,
            preview: self.preview,
            ..RunConfig::new(self.manifest, self.out)
        };
        config.validate()?;
        Ok(config)
    }
}

fn report_errors(errors: &[ErrorEntry]) -> ExitCode {
    for e in errors {
        error!("{}: {}", e.image_id.as_deref().unwrap_or("<run>"), e.message);
    }
    if errors.is_empty() {
        ExitCode::SUCCESS
    } else {
        warn!("{} image(s) failed", errors.len());
        ExitCode::from(2)
    }
}

fn run(command: Command) -> Result<ExitCode, PipelineError> {
    match command {
        Command::Saliency(args) => {
            let run = cmd_saliency(&args.into_config()?)?;
            info!("wrote {} map(s)", run.maps.len());
            Ok(report_errors(&run.errors))
        }
        Command::Calibrate(args) => {
            let config = args.into_config()?;
            let record = cmd_calibrate(&config)?;
            info!("threshold {} ({})", record.threshold.value(), record.threshold.source());
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate(args) => {
            let report = cmd_evaluate(&args.into_config()?)?;
            let s = &report.sections;
            info!(
                "saliency metrics: {}; detection metrics: {}; significance: {}",
                s.saliency_metrics, s.detection_metrics, s.significance
            );
            Ok(report_errors(&report.errors))
        }
        Command::Synth(args) => {
            let manifest = cmd_synth(&args.out, args.seed, args.size)?;
            info!("generated {} image(s) in {}", manifest.len(), args.out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
