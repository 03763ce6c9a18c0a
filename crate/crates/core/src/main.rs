use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nlss::bench::{
    average_partial, format_float, load_image, run_experiment, save_image, sigma_sweep, write_report,
    write_sweep, DatasetKind, Denoiser, ExperimentConfig,
};
use nlss::metrics::{evaluate, psnr_foreground};
use nlss::noise::{add_noise, NoiseKind, NoiseSpec};
use nlss::pipeline::{FilterConfig, FilterKind};
use nlss::{Error, Result};

#[derive(Parser)]
#[command(name = "nlss", version, about = "Nonlocal self-similarity denoising toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Add seeded Gaussian or Rician noise to an image.
    Simulate {
        #[arg(long, value_parser = parse_noise_kind)]
        kind: NoiseKind,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = parse_dataset)]
        dataset: Option<DatasetKind>,
        input: PathBuf,
        output: PathBuf,
    },
    /// Denoise one image.
    Denoise(DenoiseArgs),
    /// Per-pixel mean of repeated captures.
    Average {
        /// Also write means over the first N inputs, as OUT_meanN.
        #[arg(long, value_delimiter = ',')]
        partial: Vec<usize>,
        #[arg(long, value_parser = parse_dataset)]
        dataset: Option<DatasetKind>,
        output: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Print quality metrics of TEST against REFERENCE.
    Evaluate {
        #[arg(long, default_value_t = 255.0)]
        peak: f64,
        /// PSNR over the foreground mask (reference > 10/255 of peak).
        #[arg(long)]
        foreground: bool,
        #[arg(long, value_parser = parse_dataset)]
        dataset: Option<DatasetKind>,
        reference: PathBuf,
        test: PathBuf,
    },
    /// Run a configured experiment and write the CSV report.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Denoise the configured inputs across a list of working sigmas.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `sigma_sweep` from the config.
        #[arg(long, value_delimiter = ',')]
        sigmas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DenoiseArgs {
    #[arg(long, default_value = "msvd", value_parser = parse_filter)]
    filter: FilterKind,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    ps: Option<usize>,
    #[arg(long)]
    step: Option<usize>,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    temporal_radius: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    tau_factor: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    multirank: Vec<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    resize: Option<f64>,
    #[arg(long)]
    vst: bool,
    #[arg(long, value_parser = parse_dataset)]
    dataset: Option<DatasetKind>,
    input: PathBuf,
    output: PathBuf,
}

impl DenoiseArgs {
    fn denoiser(&self) -> Denoiser {
        let d = FilterConfig::default();
        let filter = FilterConfig {
            filter: self.filter,
            sigma: self.sigma,
            patch_size: self.ps.unwrap_or(d.patch_size),
            step: self.step.unwrap_or(d.step),
            search_radius: self.radius.unwrap_or(d.search_radius),
            temporal_radius: self.temporal_radius.unwrap_or(d.temporal_radius),
            k_similar: self.k.unwrap_or(d.k_similar),
            tau_factor: self.tau_factor.unwrap_or(d.tau_factor),
            multirank: self.multirank.clone(),
            lambda_addback: self.lambda.unwrap_or(d.lambda_addback),
            iterations: self.iters.unwrap_or(d.iterations),
        };
        Denoiser {
            filter,
            resize: self.resize,
            vst: self.vst,
        }
    }
}

fn parse_noise_kind(s: &str) -> std::result::Result<NoiseKind, String> {
    match s {
        "awgn" => Ok(NoiseKind::Awgn),
        "rician" => Ok(NoiseKind::Rician),
        _ => Err(format!("unknown noise kind '{s}' (awgn, rician)")),
    }
}

fn parse_dataset(s: &str) -> std::result::Result<DatasetKind, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown dataset '{s}' (color-image, color-video, msi, mri-volume)"))
}

fn parse_filter(s: &str) -> std::result::Result<FilterKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::from(e).in_file(path))
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn partial_path(out: &Path, n: usize) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_mean{n}.{}", ext.to_string_lossy()),
        None => format!("{stem}_mean{n}"),
    };
    out.with_file_name(name)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            kind,
            sigma,
            seed,
            dataset,
            input,
            output,
        } => {
            let x = load_image(&input, dataset)?;
            save_image(&add_noise(&x, &NoiseSpec { kind, sigma, seed })?, output)
        }
        Command::Denoise(args) => {
            let denoiser = args.denoiser();
            denoiser.filter.validate()?;
            let y = load_image(&args.input, args.dataset)?;
            save_image(&denoiser.run(&y)?, &args.output)
        }
        Command::Average {
            partial,
            dataset,
            output,
            inputs,
        } => {
            let (mean, partials) = average_partial(&inputs, &partial, dataset)?;
            for (n, img) in &partials {
                save_image(img, partial_path(&output, *n))?;
            }
            save_image(&mean, &output)
        }
        Command::Evaluate {
            peak,
            foreground,
            dataset,
            reference,
            test,
        } => {
            let r = load_image(&reference, dataset)?;
            let t = load_image(&test, dataset)?;
            let mut report = evaluate(&r, &t, peak)?;
            if foreground {
                report.psnr = psnr_foreground(&r, &t, peak)?;
            }
            let mut out = io::stdout().lock();
            writeln!(out, "psnr\t{}", format_float(report.psnr))?;
            writeln!(out, "ssim\t{}", format_float(report.ssim))?;
            if let (Some(sam), Some(ergas)) = (report.sam_degrees, report.ergas) {
                writeln!(out, "sam\t{}", format_float(sam))?;
                writeln!(out, "ergas\t{}", format_float(ergas))?;
            }
            if report.per_frame.len() > 1 {
                for (i, f) in report.per_frame.iter().enumerate() {
                    writeln!(out, "frame{i}\t{}\t{}", format_float(f.psnr), format_float(f.ssim))?;
                }
            }
            Ok(())
        }
        Command::Bench { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let rows = run_experiment(&cfg)?;
            write_report(&rows, sink(out.as_deref())?)
        }
        Command::Sweep { config, sigmas, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let sigmas = if sigmas.is_empty() {
                cfg.sigma_sweep
                    .clone()
                    .ok_or_else(|| Error::invalid("no sweep sigmas: pass --sigmas or set sigma_sweep"))?
            } else {
                sigmas
            };
            let rows = sigma_sweep(&cfg, &sigmas)?;
            write_sweep(&rows, sink(out.as_deref())?)
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("NLSS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("NLSS_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
