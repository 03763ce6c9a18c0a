//! Nonlocal self-similarity denoising for multi-dimensional images.
//!
//! Similar patches are grouped by block matching, each group is filtered in an
//! SVD or HOSVD transform domain, and the filtered patches are averaged back
//! into place. Around that pipeline sit seeded Gaussian and Rician noise
//! models, a variance-stabilization wrapper, the usual quality metrics
//! (PSNR, SSIM, SAM, ERGAS) and a batch harness that writes CSV reports.
//!
//! ```
//! use nlss::image::Image;
//! use nlss::noise::{add_noise, NoiseSpec};
//! use nlss::pipeline::{denoise, FilterConfig, FilterKind};
//! use nlss::metrics::psnr;
//!
//! let clean = Image::from_fn(24, 24, 1, |r, c, _| if (r / 8 + c / 8) % 2 == 0 { 60.0 } else { 190.0 })?;
//! let noisy = add_noise(&clean, &NoiseSpec::awgn(20.0, 1))?;
//! let cfg = FilterConfig {
//!     filter: FilterKind::HosvdHard,
//!     sigma: 20.0,
//!     search_radius: 8,
//!     k_similar: 16,
//!     ..FilterConfig::default()
//! };
//! let out = denoise(&noisy, &cfg)?;
//! assert!(psnr(&clean, &out, 255.0)? > psnr(&clean, &noisy, 255.0)?);
//! # Ok::<(), nlss::Error>(())
//! ```

pub mod bench;
pub mod error;
pub mod image;
pub mod metrics;
pub mod noise;
pub mod pipeline;
pub mod tensor;
pub mod vst;

pub use error::{Error, Result};
