//! Grouping, collaborative filtering and aggregation.
//!
//! One pass visits every reference patch on the grid, stacks its nearest
//! neighbours into a [`PatchGroup`], filters the group in a transform domain
//! and averages the filtered patches back onto the canvas. Reference patches
//! are processed in fixed-size chunks; groups inside a chunk are filtered in
//! parallel and written back in grid order, so the result does not depend on
//! the worker count.

mod aggregate;
mod config;
mod filters;
mod grouping;
mod resize;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::Image;

pub use aggregate::{aggregate, Aggregator};
pub use config::{FilterConfig, FilterKind};
pub use filters::{
    apply_filter, hard_threshold, hosvd_hard_filter, hosvd_truncate_filter, msvd_filter,
};
pub use grouping::{block_match, reference_grid, Coord, PatchGroup};
pub use resize::resize_bilinear;

use grouping::Matcher;

const REFERENCE_CHUNK: usize = 256;

/// `lambda * y + (1 - lambda) * xhat`.
pub fn addback(y: &Image, xhat: &Image, lambda: f64) -> Result<Image> {
    y.same_shape(xhat)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let data = y
        .data()
        .iter()
        .zip(xhat.data())
        .map(|(&a, &b)| lambda * a + (1.0 - lambda) * b)
        .collect();
    y.with_data(data)
}

fn denoise_pass(y: &Image, cfg: &FilterConfig) -> Result<Image> {
    let matcher = Matcher::new(y, cfg)?;
    let grid = reference_grid(y, cfg.patch_size, cfg.step)?;
    let mut agg = Aggregator::new(y.layout(), y.dims())?;
    for chunk in grid.chunks(REFERENCE_CHUNK) {
        let filtered: Vec<Result<PatchGroup>> = chunk
            .par_iter()
            .map(|&r| apply_filter(&matcher.group(r)?, cfg))
            .collect();
        for g in filtered {
            agg.add(&g?)?;
        }
    }
    let mut out = agg.finish()?;
    out.peak = y.peak;
    Ok(out)
}

/// Runs `cfg.iterations` passes; from the second pass on, the input is the
/// noisy image blended back into the previous estimate.
pub fn denoise(y: &Image, cfg: &FilterConfig) -> Result<Image> {
    cfg.validate()?;
    let mut estimate = denoise_pass(y, cfg)?;
    for _ in 1..cfg.iterations {
        let input = addback(y, &estimate, cfg.lambda_addback)?;
        estimate = denoise_pass(&input, cfg)?;
    }
    Ok(estimate)
}

/// Denoise a bilinearly downscaled copy, then scale the result back up.
/// The working sigma shrinks by the same factor.
pub fn resize_denoise(y: &Image, scale: f64, cfg: &FilterConfig) -> Result<Image> {
    if !(scale > 0.0 && scale < 1.0) {
        return Err(Error::invalid(format!("scale must lie in (0, 1), got {scale}")));
    }
    let new_h = ((y.height() as f64 * scale).round() as usize).max(1);
    let new_w = ((y.width() as f64 * scale).round() as usize).max(1);
    if new_h < cfg.patch_size || new_w < cfg.patch_size {
        return Err(Error::invalid(format!(
            "downscaled size {new_h}x{new_w} is smaller than patch size {}",
            cfg.patch_size
        )));
    }
    let small = resize_bilinear(y, new_h, new_w)?;
    let small_cfg = FilterConfig {
        sigma: cfg.sigma * scale,
        ..cfg.clone()
    };
    let denoised = denoise(&small, &small_cfg)?;
    resize_bilinear(&denoised, y.height(), y.width())
}
