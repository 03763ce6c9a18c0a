//! Batch experiments and sigma sweeps with CSV reports.
//!
//! Report columns, in order:
//!
//! ```text
//! file,sigma,filter,params_hash,psnr,ssim,sam,ergas,wall_time_seconds,error
//! ```
//!
//! When noise is simulated, each input contributes a `noisy` baseline row
//! followed by the denoised row. Floats carry 6 significant digits, infinite
//! PSNR is written `inf`, and metrics that do not apply are left empty. SAM is
//! in degrees. Sweep curves use `file,sigma,psnr,ssim,error`, one row per
//! sigma, ready for `gnuplot` with `set datafile separator ","`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::metrics::{evaluate, psnr_foreground, ssim};
use crate::noise::{add_noise, NoiseKind, NoiseSpec};
use crate::pipeline::FilterConfig;

use super::io::{load_image, save_image, DatasetKind};
use super::Denoiser;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSettings {
    pub kind: NoiseKind,
    pub sigma: f64,
}

fn default_kind() -> DatasetKind {
    DatasetKind::ColorImage
}

fn default_peak() -> f64 {
    255.0
}

/// One experiment, usually read from a TOML key/value file.
///
/// Without `noise`, inputs are taken as already noisy and `references` (one
/// per input, same order) supply the clean images for scoring. When
/// `filter.sigma` is 0 the denoiser uses the simulated noise sigma.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub references: Vec<PathBuf>,
    #[serde(default = "default_kind")]
    pub kind: DatasetKind,
    #[serde(default)]
    pub noise: Option<NoiseSettings>,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub resize: Option<f64>,
    #[serde(default)]
    pub vst: bool,
    #[serde(default)]
    pub sigma_sweep: Option<Vec<f64>>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_peak")]
    pub peak: f64,
}

impl ExperimentConfig {
    pub fn new(inputs: Vec<PathBuf>) -> Self {
        ExperimentConfig {
            inputs,
            references: Vec::new(),
            kind: default_kind(),
            noise: None,
            filter: FilterConfig::default(),
            resize: None,
            vst: false,
            sigma_sweep: None,
            output_dir: None,
            seed: 0,
            peak: default_peak(),
        }
    }

    /// Parses a config file; relative paths resolve against its directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        let mut cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| {
            Error::Parse {
                offset: e.span().map_or(0, |s| s.start),
                message: e.message().to_string(),
            }
            .in_file(path)
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.inputs.iter_mut().for_each(fix);
        cfg.references.iter_mut().for_each(fix);
        if let Some(out) = cfg.output_dir.as_mut() {
            fix(out);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        if !self.references.is_empty() && self.references.len() != self.inputs.len() {
            return Err(Error::invalid(format!(
                "{} references for {} inputs",
                self.references.len(),
                self.inputs.len()
            )));
        }
        if let Some(n) = &self.noise {
            if n.sigma.is_nan() || n.sigma < 0.0 {
                return Err(Error::invalid(format!("noise sigma must be >= 0, got {}", n.sigma)));
            }
        }
        if let Some(s) = &self.sigma_sweep {
            validate_sweep(s)?;
        }
        if self.peak.is_nan() || self.peak <= 0.0 {
            return Err(Error::invalid("peak must be positive"));
        }
        Ok(())
    }

    fn noise_spec(&self, index: usize) -> Option<NoiseSpec> {
        self.noise.map(|n| NoiseSpec {
            kind: n.kind,
            sigma: n.sigma,
            seed: self.seed.wrapping_add(index as u64),
        })
    }

    /// The denoiser for this run, with the working sigma resolved.
    pub fn denoiser(&self, sigma_override: Option<f64>) -> Denoiser {
        let mut filter = self.filter.clone();
        if let Some(s) = sigma_override {
            filter.sigma = s;
        } else if filter.sigma == 0.0 {
            filter.sigma = self.noise.map_or(0.0, |n| n.sigma);
        }
        Denoiser {
            filter,
            resize: self.resize,
            vst: self.vst,
        }
    }

    fn row_sigma(&self, denoiser: &Denoiser) -> f64 {
        self.noise.map_or(denoiser.filter.sigma, |n| n.sigma)
    }
}

pub fn validate_sweep(sigmas: &[f64]) -> Result<()> {
    if sigmas.is_empty() {
        return Err(Error::invalid("sigma sweep is empty"));
    }
    if sigmas.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
        return Err(Error::invalid("sweep sigmas must be positive"));
    }
    if sigmas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("sweep {sigmas:?} is not strictly increasing")));
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scores {
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub sam: Option<f64>,
    pub ergas: Option<f64>,
}

/// Metrics for one dataset kind; MRI volumes use foreground PSNR.
pub fn score(clean: &Image, test: &Image, kind: DatasetKind, peak: f64) -> Result<Scores> {
    if kind == DatasetKind::MriVolume {
        return Ok(Scores {
            psnr: Some(psnr_foreground(clean, test, peak)?),
            ssim: Some(ssim(clean, test, peak)?),
            ..Scores::default()
        });
    }
    let r = evaluate(clean, test, peak)?;
    Ok(Scores {
        psnr: Some(r.psnr),
        ssim: Some(r.ssim),
        sam: r.sam_degrees,
        ergas: r.ergas,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub file: String,
    pub sigma: f64,
    pub filter: String,
    pub params_hash: String,
    pub scores: Scores,
    pub wall_time_seconds: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub file: String,
    pub sigma: f64,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub error: Option<String>,
}

/// Stable short digest of everything that affects the denoised output.
pub fn params_hash(d: &Denoiser) -> String {
    let json = serde_json::to_string(&(&d.filter, d.resize, d.vst)).expect("config serializes");
    Sha256::digest(json.as_bytes())[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

struct Prepared {
    clean: Option<Image>,
    noisy: Image,
}

fn prepare(cfg: &ExperimentConfig, index: usize) -> Result<Prepared> {
    let input = load_image(&cfg.inputs[index], Some(cfg.kind))?;
    let mut input = input;
    input.peak = cfg.peak;
    match cfg.noise_spec(index) {
        Some(spec) => Ok(Prepared {
            noisy: add_noise(&input, &spec)?,
            clean: Some(input),
        }),
        None => {
            let clean = match cfg.references.get(index) {
                Some(p) => {
                    let r = load_image(p, Some(cfg.kind))?;
                    r.same_shape(&input).map_err(|e| e.in_file(p))?;
                    Some(r)
                }
                None => None,
            };
            Ok(Prepared { clean, noisy: input })
        }
    }
}

fn file_label(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

fn output_path(dir: &Path, input: &Path, tag: &str) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = input.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "mdt".into());
    dir.join(format!("{stem}_{tag}.{ext}"))
}

fn process(cfg: &ExperimentConfig, index: usize) -> Vec<ReportRow> {
    let denoiser = cfg.denoiser(None);
    let base = ReportRow {
        file: file_label(&cfg.inputs[index]),
        sigma: cfg.row_sigma(&denoiser),
        filter: denoiser.filter.filter.name().to_string(),
        params_hash: params_hash(&denoiser),
        scores: Scores::default(),
        wall_time_seconds: None,
        error: None,
    };
    let fail = |e: Error| ReportRow {
        error: Some(e.to_string()),
        ..base.clone()
    };
    let prepared = match prepare(cfg, index) {
        Ok(p) => p,
        Err(e) => return vec![fail(e)],
    };
    let mut rows = Vec::new();
    if cfg.noise.is_some() {
        let clean = prepared.clean.as_ref().expect("simulated noise keeps the clean input");
        let noisy_row = ReportRow {
            filter: "noisy".into(),
            params_hash: String::new(),
            ..base.clone()
        };
        rows.push(match score(clean, &prepared.noisy, cfg.kind, cfg.peak) {
            Ok(scores) => ReportRow { scores, ..noisy_row },
            Err(e) => ReportRow {
                error: Some(e.to_string()),
                ..noisy_row
            },
        });
    }
    let started = Instant::now();
    let result = denoiser.run(&prepared.noisy);
    let elapsed = started.elapsed().as_secs_f64();
    let row = result.and_then(|out| {
        if let Some(dir) = &cfg.output_dir {
            save_image(&out, output_path(dir, &cfg.inputs[index], denoiser.filter.filter.name()))?;
        }
        let scores = match &prepared.clean {
            Some(clean) => score(clean, &out, cfg.kind, cfg.peak)?,
            None => Scores::default(),
        };
        Ok(ReportRow {
            scores,
            wall_time_seconds: Some(elapsed),
            ..base.clone()
        })
    });
    rows.push(row.unwrap_or_else(fail));
    rows
}

/// Simulate, denoise and score every input. Files run concurrently; rows
/// come back in input order. Per-file failures become rows with `error` set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    cfg.validate()?;
    if let Some(dir) = &cfg.output_dir {
        fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
    }
    let rows: Vec<Vec<ReportRow>> = (0..cfg.inputs.len())
        .into_par_iter()
        .map(|i| process(cfg, i))
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Denoise the same noisy inputs once per sigma in `sigmas`.
pub fn sigma_sweep(cfg: &ExperimentConfig, sigmas: &[f64]) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    validate_sweep(sigmas)?;
    if cfg.noise.is_none() && cfg.references.is_empty() {
        return Err(Error::invalid("a sweep needs simulated noise or clean references"));
    }
    let rows: Vec<Vec<SweepRow>> = (0..cfg.inputs.len())
        .into_par_iter()
        .map(|i| {
            let file = file_label(&cfg.inputs[i]);
            let prepared = match prepare(cfg, i) {
                Ok(p) => p,
                Err(e) => {
                    return sigmas
                        .iter()
                        .map(|&sigma| SweepRow {
                            file: file.clone(),
                            sigma,
                            psnr: None,
                            ssim: None,
                            error: Some(e.to_string()),
                        })
                        .collect()
                }
            };
            let clean = prepared.clean.as_ref().expect("checked above");
            sigmas
                .iter()
                .map(|&sigma| {
                    let result = cfg
                        .denoiser(Some(sigma))
                        .run(&prepared.noisy)
                        .and_then(|out| score(clean, &out, cfg.kind, cfg.peak));
                    match result {
                        Ok(s) => SweepRow { file: file.clone(), sigma, psnr: s.psnr, ssim: s.ssim, error: None },
                        Err(e) => SweepRow {
                            file: file.clone(),
                            sigma,
                            psnr: None,
                            ssim: None,
                            error: Some(e.to_string()),
                        },
                    }
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// `%.6g`-style formatting; `inf`/`-inf`/`nan` for non-finite values.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}", trim(mantissa), exp)
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub const REPORT_HEADER: [&str; 10] = [
    "file",
    "sigma",
    "filter",
    "params_hash",
    "psnr",
    "ssim",
    "sam",
    "ergas",
    "wall_time_seconds",
    "error",
];

pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.file.clone(),
            format_float(r.sigma),
            r.filter.clone(),
            r.params_hash.clone(),
            opt(r.scores.psnr),
            opt(r.scores.ssim),
            opt(r.scores.sam),
            opt(r.scores.ergas),
            opt(r.wall_time_seconds),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["file", "sigma", "psnr", "ssim", "error"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.file.clone(),
            format_float(r.sigma),
            opt(r.psnr),
            opt(r.ssim),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
