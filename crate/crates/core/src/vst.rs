//! Variance-stabilization wrapper for running Gaussian denoisers on Rician data.

use crate::error::{Error, Result};
use crate::image::Image;

/// A forward/inverse pair around a Gaussian denoiser.
pub trait Stabilizer {
    /// Stabilized data and the noise level the denoiser should assume.
    fn forward(&self, y: &Image, sigma: f64) -> Result<(Image, f64)>;

    fn inverse(&self, denoised: &Image, sigma: f64) -> Result<Image>;
}

/// Identity forward map with `sigma_vst = sigma`; the inverse removes the
/// Rician second-moment bias, `x = sqrt(max(d^2 - 2 sigma^2, 0))`.
#[derive(Clone, Copy, Debug, Default)]
pub struct RicianMoment;

impl Stabilizer for RicianMoment {
    fn forward(&self, y: &Image, sigma: f64) -> Result<(Image, f64)> {
        Ok((y.clone(), sigma))
    }

    fn inverse(&self, denoised: &Image, sigma: f64) -> Result<Image> {
        let bias = 2.0 * sigma * sigma;
        Ok(denoised.map(|d| (d * d - bias).max(0.0).sqrt()))
    }
}

pub fn vst_denoise<F>(y: &Image, sigma: f64, denoiser: F) -> Result<Image>
where
    F: FnOnce(&Image, f64) -> Result<Image>,
{
    vst_denoise_with(&RicianMoment, y, sigma, denoiser)
}

pub fn vst_denoise_with<S, F>(stabilizer: &S, y: &Image, sigma: f64, denoiser: F) -> Result<Image>
where
    S: Stabilizer + ?Sized,
    F: FnOnce(&Image, f64) -> Result<Image>,
{
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::invalid(format!("VST needs sigma > 0, got {sigma}")));
    }
    let (stable, sigma_vst) = stabilizer.forward(y, sigma)?;
    let denoised = denoiser(&stable, sigma_vst)?;
    stabilizer.inverse(&denoised, sigma)
}
