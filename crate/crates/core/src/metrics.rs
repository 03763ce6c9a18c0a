//! Full-reference quality metrics: PSNR (plain and foreground-masked), SSIM,
//! spectral angle (SAM) and ERGAS.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{Image, Layout};

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameMetrics {
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub psnr: f64,
    pub ssim: f64,
    pub sam_degrees: Option<f64>,
    pub sam_radians: Option<f64>,
    pub ergas: Option<f64>,
    /// Video only; the image-level PSNR and SSIM are the means of these.
    pub per_frame: Vec<FrameMetrics>,
}

fn check_peak(peak: f64) -> Result<()> {
    if peak.is_nan() || peak <= 0.0 {
        return Err(Error::invalid(format!("peak must be positive, got {peak}")));
    }
    Ok(())
}

fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

/// `10 log10(peak^2 / MSE)`, `+inf` for identical inputs.
pub fn psnr(reference: &Image, test: &Image, peak: f64) -> Result<f64> {
    reference.same_shape(test)?;
    check_peak(peak)?;
    let n = reference.data().len() as f64;
    let sse: f64 = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(psnr_from_mse(sse / n, peak))
}

/// PSNR over voxels where the clean reference exceeds `10 * peak / 255`.
pub fn psnr_foreground(reference: &Image, test: &Image, peak: f64) -> Result<f64> {
    reference.same_shape(test)?;
    check_peak(peak)?;
    let threshold = 10.0 * peak / 255.0;
    let (mut sse, mut n) = (0.0, 0usize);
    for (&a, &b) in reference.data().iter().zip(test.data()) {
        if a > threshold {
            sse += (a - b) * (a - b);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyMask(format!(
            "no reference voxel exceeds foreground threshold {threshold}"
        )));
    }
    Ok(psnr_from_mse(sse / n as f64, peak))
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let w: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let x = i as f64 - half;
            (-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Valid-region separable filtering of an `h x w` column-major plane.
fn filter_valid(plane: &[f64], h: usize, w: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (oh, ow) = (h - n + 1, w - n + 1);
    let mut rows = vec![0.0; oh * w];
    for c in 0..w {
        let col = &plane[c * h..(c + 1) * h];
        for r in 0..oh {
            rows[r + oh * c] = k.iter().zip(&col[r..r + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for c in 0..ow {
        for r in 0..oh {
            out[r + oh * c] = k.iter().enumerate().map(|(j, a)| a * rows[r + oh * (c + j)]).sum();
        }
    }
    out
}

fn ssim_plane(x: &[f64], y: &[f64], h: usize, w: usize, peak: f64) -> f64 {
    let k = gaussian_window();
    let c1 = (0.01 * peak).powi(2);
    let c2 = (0.03 * peak).powi(2);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let mx = filter_valid(x, h, w, &k);
    let my = filter_valid(y, h, w, &k);
    let sxx = filter_valid(&xx, h, w, &k);
    let syy = filter_valid(&yy, h, w, &k);
    let sxy = filter_valid(&xy, h, w, &k);
    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    total / mx.len() as f64
}

/// Mean SSIM (11x11 Gaussian window, sigma 1.5, valid region), computed on
/// every 2-D plane (channel, frame or slice) and averaged over planes.
pub fn ssim(reference: &Image, test: &Image, peak: f64) -> Result<f64> {
    reference.same_shape(test)?;
    check_peak(peak)?;
    let (h, w) = (reference.height(), reference.width());
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, image is {h}x{w}"
        )));
    }
    let plane = h * w;
    let planes = reference.data().len() / plane;
    let total: f64 = (0..planes)
        .map(|p| {
            let r = p * plane..(p + 1) * plane;
            ssim_plane(&reference.data()[r.clone()], &test.data()[r], h, w, peak)
        })
        .sum();
    Ok(total / planes as f64)
}

fn check_multiband(reference: &Image, test: &Image) -> Result<usize> {
    reference.same_shape(test)?;
    let bands = reference.channels();
    if bands < 2 {
        return Err(Error::invalid(format!("need >= 2 bands, image has {bands}")));
    }
    Ok(bands)
}

/// Mean spectral angle in radians over pixels with non-degenerate spectra.
pub fn sam_radians(reference: &Image, test: &Image) -> Result<f64> {
    let bands = check_multiband(reference, test)?;
    let plane = reference.height() * reference.width();
    let (rd, td) = (reference.data(), test.data());
    let (mut sum, mut n) = (0.0, 0usize);
    for z in 0..reference.depth() {
        for p in 0..plane {
            let (mut dot, mut nr, mut nt) = (0.0, 0.0, 0.0);
            for b in 0..bands {
                let o = p + plane * (b + bands * z);
                dot += rd[o] * td[o];
                nr += rd[o] * rd[o];
                nt += td[o] * td[o];
            }
            let (nr, nt) = (nr.sqrt(), nt.sqrt());
            if nr < 1e-12 || nt < 1e-12 {
                continue;
            }
            sum += (dot / (nr * nt)).clamp(-1.0, 1.0).acos();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyMask("every pixel has a zero spectrum".into()));
    }
    Ok(sum / n as f64)
}

pub fn sam(reference: &Image, test: &Image) -> Result<f64> {
    Ok(sam_radians(reference, test)?.to_degrees())
}

/// `100 * ratio * sqrt(mean_b (RMSE_b / mean_b)^2)` with per-band reference means.
pub fn ergas(reference: &Image, test: &Image, scale_ratio: f64) -> Result<f64> {
    let bands = reference.channels();
    reference.same_shape(test)?;
    let plane = reference.height() * reference.width();
    let (rd, td) = (reference.data(), test.data());
    let mut acc = 0.0;
    for b in 0..bands {
        let (mut sse, mut sum, mut n) = (0.0, 0.0, 0usize);
        for z in 0..reference.depth() {
            let base = plane * (b + bands * z);
            for o in base..base + plane {
                sse += (rd[o] - td[o]).powi(2);
                sum += rd[o];
                n += 1;
            }
        }
        let mean = sum / n as f64;
        if mean == 0.0 {
            return Err(Error::ZeroBandMean { band: b });
        }
        acc += (sse / n as f64) / (mean * mean);
    }
    Ok(100.0 * scale_ratio * (acc / bands as f64).sqrt())
}

/// All metrics that apply to the image's layout. Video metrics are per-frame
/// means; SAM and ERGAS are filled in for multiband stills with >= 2 bands
/// when defined.
pub fn evaluate(reference: &Image, test: &Image, peak: f64) -> Result<MetricsReport> {
    reference.same_shape(test)?;
    let mut report = MetricsReport {
        psnr: 0.0,
        ssim: 0.0,
        sam_degrees: None,
        sam_radians: None,
        ergas: None,
        per_frame: Vec::new(),
    };
    if reference.layout() == Layout::Video {
        for f in 0..reference.depth() {
            let (r, t) = (reference.plane(f)?, test.plane(f)?);
            report.per_frame.push(FrameMetrics {
                psnr: psnr(&r, &t, peak)?,
                ssim: ssim(&r, &t, peak)?,
            });
        }
        let n = report.per_frame.len() as f64;
        report.psnr = report.per_frame.iter().map(|m| m.psnr).sum::<f64>() / n;
        report.ssim = report.per_frame.iter().map(|m| m.ssim).sum::<f64>() / n;
        return Ok(report);
    }
    report.psnr = psnr(reference, test, peak)?;
    report.ssim = ssim(reference, test, peak)?;
    if reference.layout() == Layout::Multiband && reference.channels() >= 2 {
        report.sam_radians = sam_radians(reference, test).ok();
        report.sam_degrees = report.sam_radians.map(f64::to_degrees);
        report.ergas = ergas(reference, test, 1.0).ok();
    }
    Ok(report)
}
