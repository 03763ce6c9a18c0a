//! Experiment harness: file I/O, ground truth by averaging, batch runs, sweeps.

mod average;
mod experiment;
pub mod io;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::image::Image;
use crate::pipeline::{denoise, resize_denoise, FilterConfig};
use crate::vst::vst_denoise;

pub use average::{average_images, average_partial, mean_image};
pub use experiment::{
    format_float, params_hash, run_experiment, score, sigma_sweep, validate_sweep, write_report,
    write_sweep, ExperimentConfig, NoiseSettings, ReportRow, Scores, SweepRow, REPORT_HEADER,
};
pub use io::{load_image, save_image, DatasetKind};

/// The pipeline plus the optional resize and variance-stabilization wrappers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Denoiser {
    pub filter: FilterConfig,
    pub resize: Option<f64>,
    pub vst: bool,
}

impl Denoiser {
    pub fn new(filter: FilterConfig) -> Self {
        Denoiser {
            filter,
            resize: None,
            vst: false,
        }
    }

    fn run_gaussian(&self, y: &Image, sigma: f64) -> Result<Image> {
        let cfg = FilterConfig {
            sigma,
            ..self.filter.clone()
        };
        match self.resize {
            Some(scale) => resize_denoise(y, scale, &cfg),
            None => denoise(y, &cfg),
        }
    }

    pub fn run(&self, y: &Image) -> Result<Image> {
        if self.vst {
            vst_denoise(y, self.filter.sigma, |img, s| self.run_gaussian(img, s))
        } else {
            self.run_gaussian(y, self.filter.sigma)
        }
    }
}
