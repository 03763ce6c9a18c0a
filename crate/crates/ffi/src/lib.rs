//! C ABI over the nlss denoiser.
//!
//! Images cross the boundary as opaque `NlssImage` handles created by
//! `nlss_image_new` / `nlss_image_load` and released with `nlss_image_free`.
//! Every fallible call returns an `NlssStatus`; on failure the message is
//! available from `nlss_last_error_message` on the same thread. Panics are
//! caught and reported as `NlssStatus_Panic`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use nlss::bench::{load_image, save_image};
use nlss::image::{Image, Layout};
use nlss::metrics;
use nlss::noise::{add_noise, NoiseKind, NoiseSpec};
use nlss::pipeline::{denoise, FilterConfig, FilterKind};
use nlss::tensor::Tensor;
use nlss::Error;

/// Opaque image handle.
pub struct NlssImage {
    inner: Image,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlssStatus {
    Ok = 0,
    InvalidArgument = 1,
    Parse = 2,
    Io = 3,
    CoverageGap = 4,
    EmptyMask = 5,
    ZeroBandMean = 6,
    NullPointer = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlssLayout {
    /// H x W
    Gray = 0,
    /// H x W x C
    Multiband = 1,
    /// H x W x C x F
    Video = 2,
    /// H x W x D
    Volume = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlssFilter {
    MSvd = 0,
    HosvdHard = 1,
    HosvdTruncate = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlssNoise {
    Awgn = 0,
    Rician = 1,
}

pub const NLSS_MAX_MULTIRANK: usize = 4;

/// Pipeline settings. Fill with `nlss_filter_config_default` first.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct NlssFilterConfig {
    pub patch_size: usize,
    pub step: usize,
    pub search_radius: usize,
    pub temporal_radius: usize,
    pub k_similar: usize,
    pub filter: NlssFilter,
    pub tau_factor: f64,
    /// Per-mode ranks for `NlssFilter_HosvdTruncate`; the first
    /// `multirank_len` entries are used.
    pub multirank: [usize; NLSS_MAX_MULTIRANK],
    pub multirank_len: usize,
    pub lambda_addback: f64,
    pub iterations: usize,
    pub sigma: f64,
}

/// `sam_degrees` and `ergas` are NaN unless `has_spectral` is nonzero.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NlssMetrics {
    pub psnr: f64,
    pub ssim: f64,
    pub sam_degrees: f64,
    pub ergas: f64,
    pub has_spectral: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(NlssStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        let mut root = &e;
        while let Error::File { source, .. } = root {
            root = source;
        }
        let status = match root {
            Error::InvalidArgument(_) => NlssStatus::InvalidArgument,
            Error::CoverageGap { .. } => NlssStatus::CoverageGap,
            Error::EmptyMask(_) => NlssStatus::EmptyMask,
            Error::ZeroBandMean { .. } => NlssStatus::ZeroBandMean,
            Error::Parse { .. } | Error::Codec(_) => NlssStatus::Parse,
            Error::Io(_) => NlssStatus::Io,
            Error::File { .. } => unreachable!("unwrapped above"),
        };
        Failure(status, msg)
    }
}

fn null(what: &str) -> Failure {
    Failure(NlssStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NlssStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlssStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            NlssStatus::Panic
        }
    }
}

unsafe fn image_ref<'a>(p: *const NlssImage, what: &str) -> Result<&'a Image, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null(what))
}

unsafe fn emit(out: *mut *mut NlssImage, img: Image) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(NlssImage { inner: img }));
    Ok(())
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(NlssStatus::InvalidArgument, "path is not UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

impl From<NlssLayout> for Layout {
    fn from(l: NlssLayout) -> Self {
        match l {
            NlssLayout::Gray => Layout::Gray,
            NlssLayout::Multiband => Layout::Multiband,
            NlssLayout::Video => Layout::Video,
            NlssLayout::Volume => Layout::Volume,
        }
    }
}

impl From<Layout> for NlssLayout {
    fn from(l: Layout) -> Self {
        match l {
            Layout::Gray => NlssLayout::Gray,
            Layout::Multiband => NlssLayout::Multiband,
            Layout::Video => NlssLayout::Video,
            Layout::Volume => NlssLayout::Volume,
        }
    }
}

impl From<&FilterConfig> for NlssFilterConfig {
    fn from(c: &FilterConfig) -> Self {
        let mut multirank = [0; NLSS_MAX_MULTIRANK];
        let n = c.multirank.len().min(NLSS_MAX_MULTIRANK);
        multirank[..n].copy_from_slice(&c.multirank[..n]);
        NlssFilterConfig {
            patch_size: c.patch_size,
            step: c.step,
            search_radius: c.search_radius,
            temporal_radius: c.temporal_radius,
            k_similar: c.k_similar,
            filter: match c.filter {
                FilterKind::MSvd => NlssFilter::MSvd,
                FilterKind::HosvdHard => NlssFilter::HosvdHard,
                FilterKind::HosvdTruncate => NlssFilter::HosvdTruncate,
            },
            tau_factor: c.tau_factor,
            multirank,
            multirank_len: n,
            lambda_addback: c.lambda_addback,
            iterations: c.iterations,
            sigma: c.sigma,
        }
    }
}

fn filter_config(c: &NlssFilterConfig) -> Result<FilterConfig, Failure> {
    if c.multirank_len > NLSS_MAX_MULTIRANK {
        return Err(Failure(
            NlssStatus::InvalidArgument,
            format!("multirank_len {} exceeds {NLSS_MAX_MULTIRANK}", c.multirank_len),
        ));
    }
    Ok(FilterConfig {
        patch_size: c.patch_size,
        step: c.step,
        search_radius: c.search_radius,
        temporal_radius: c.temporal_radius,
        k_similar: c.k_similar,
        filter: match c.filter {
            NlssFilter::MSvd => FilterKind::MSvd,
            NlssFilter::HosvdHard => FilterKind::HosvdHard,
            NlssFilter::HosvdTruncate => FilterKind::HosvdTruncate,
        },
        tau_factor: c.tau_factor,
        multirank: c.multirank[..c.multirank_len].to_vec(),
        lambda_addback: c.lambda_addback,
        iterations: c.iterations,
        sigma: c.sigma,
    })
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nlss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must point to writable memory for one `NlssFilterConfig`.
#[no_mangle]
pub unsafe extern "C" fn nlss_filter_config_default(out: *mut NlssFilterConfig) -> NlssStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("config"))?;
        *out = NlssFilterConfig::from(&FilterConfig::default());
        Ok(())
    })
}

/// Creates an image with `ndims` extents from `dims`. `data` holds the
/// product of the extents in row-fastest order, or is NULL for zeros.
///
/// # Safety
/// `dims` must point to `ndims` values, `data` (if non-null) to as many
/// doubles as the extents multiply to, and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn nlss_image_new(
    layout: NlssLayout,
    dims: *const usize,
    ndims: usize,
    data: *const f64,
    peak: f64,
    out: *mut *mut NlssImage,
) -> NlssStatus {
    guard(|| {
        if dims.is_null() {
            return Err(null("dims"));
        }
        let dims = std::slice::from_raw_parts(dims, ndims).to_vec();
        let len = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).ok_or_else(|| {
            Failure(NlssStatus::InvalidArgument, "image extents overflow".into())
        })?;
        let values = if data.is_null() {
            vec![0.0; len]
        } else {
            std::slice::from_raw_parts(data, len).to_vec()
        };
        let img = Image::new(Tensor::new(dims, values)?, layout.into(), peak)?;
        emit(out, img)
    })
}

/// # Safety
/// `img` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nlss_image_free(img: *mut NlssImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Number of extents, or 0 for a NULL handle.
///
/// # Safety
/// `img` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlss_image_ndims(img: *const NlssImage) -> usize {
    img.as_ref().map_or(0, |h| h.inner.dims().len())
}

/// Number of samples, or 0 for a NULL handle.
///
/// # Safety
/// `img` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlss_image_len(img: *const NlssImage) -> usize {
    img.as_ref().map_or(0, |h| h.inner.data().len())
}

/// Writes the extents and layout. `capacity` is the length of `dims`.
///
/// # Safety
/// `img` must be a live handle, `dims` must hold `capacity` values and
/// `layout` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn nlss_image_dims(
    img: *const NlssImage,
    dims: *mut usize,
    capacity: usize,
    layout: *mut NlssLayout,
) -> NlssStatus {
    guard(|| {
        let img = image_ref(img, "image")?;
        if dims.is_null() {
            return Err(null("dims"));
        }
        let d = img.dims();
        if capacity < d.len() {
            return Err(Failure(
                NlssStatus::InvalidArgument,
                format!("dims buffer holds {capacity}, image has {} extents", d.len()),
            ));
        }
        std::slice::from_raw_parts_mut(dims, d.len()).copy_from_slice(d);
        if let Some(l) = layout.as_mut() {
            *l = img.layout().into();
        }
        Ok(())
    })
}

/// Copies the samples into `out`, which must hold exactly `nlss_image_len`.
///
/// # Safety
/// `img` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nlss_image_copy_data(img: *const NlssImage, out: *mut f64, len: usize) -> NlssStatus {
    guard(|| {
        let img = image_ref(img, "image")?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        if len != img.data().len() {
            return Err(Failure(
                NlssStatus::InvalidArgument,
                format!("buffer length {len}, image has {} samples", img.data().len()),
            ));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(img.data());
        Ok(())
    })
}

/// Loads a PNG or MDT1 file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn nlss_image_load(path: *const c_char, out: *mut *mut NlssImage) -> NlssStatus {
    guard(|| {
        let img = load_image(path_arg(path)?, None)?;
        emit(out, img)
    })
}

/// Saves as PNG when the path ends in `.png`, MDT1 otherwise.
///
/// # Safety
/// `img` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nlss_image_save(img: *const NlssImage, path: *const c_char) -> NlssStatus {
    guard(|| {
        let img = image_ref(img, "image")?;
        save_image(img, path_arg(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `img` must be a live handle and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn nlss_add_noise(
    img: *const NlssImage,
    kind: NlssNoise,
    sigma: f64,
    seed: u64,
    out: *mut *mut NlssImage,
) -> NlssStatus {
    guard(|| {
        let img = image_ref(img, "image")?;
        let kind = match kind {
            NlssNoise::Awgn => NoiseKind::Awgn,
            NlssNoise::Rician => NoiseKind::Rician,
        };
        emit(out, add_noise(img, &NoiseSpec { kind, sigma, seed })?)
    })
}

/// # Safety
/// `img` must be a live handle, `config` must point to an initialized
/// config and `out` must be a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn nlss_denoise(
    img: *const NlssImage,
    config: *const NlssFilterConfig,
    out: *mut *mut NlssImage,
) -> NlssStatus {
    guard(|| {
        let img = image_ref(img, "image")?;
        let cfg = filter_config(config.as_ref().ok_or_else(|| null("config"))?)?;
        emit(out, denoise(img, &cfg)?)
    })
}

unsafe fn scalar_metric(
    reference: *const NlssImage,
    test: *const NlssImage,
    out: *mut f64,
    f: impl FnOnce(&Image, &Image) -> nlss::Result<f64>,
) -> NlssStatus {
    guard(|| {
        let r = image_ref(reference, "reference")?;
        let t = image_ref(test, "test image")?;
        let out = out.as_mut().ok_or_else(|| null("output"))?;
        *out = f(r, t)?;
        Ok(())
    })
}

/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlss_psnr(
    reference: *const NlssImage,
    test: *const NlssImage,
    peak: f64,
    out: *mut f64,
) -> NlssStatus {
    scalar_metric(reference, test, out, |r, t| metrics::psnr(r, t, peak))
}

/// PSNR over voxels where the reference exceeds 10/255 of `peak`.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlss_psnr_foreground(
    reference: *const NlssImage,
    test: *const NlssImage,
    peak: f64,
    out: *mut f64,
) -> NlssStatus {
    scalar_metric(reference, test, out, |r, t| metrics::psnr_foreground(r, t, peak))
}

/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlss_ssim(
    reference: *const NlssImage,
    test: *const NlssImage,
    peak: f64,
    out: *mut f64,
) -> NlssStatus {
    scalar_metric(reference, test, out, |r, t| metrics::ssim(r, t, peak))
}

/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlss_evaluate(
    reference: *const NlssImage,
    test: *const NlssImage,
    peak: f64,
    out: *mut NlssMetrics,
) -> NlssStatus {
    guard(|| {
        let r = image_ref(reference, "reference")?;
        let t = image_ref(test, "test image")?;
        let out = out.as_mut().ok_or_else(|| null("output"))?;
        let m = metrics::evaluate(r, t, peak)?;
        *out = NlssMetrics {
            psnr: m.psnr,
            ssim: m.ssim,
            sam_degrees: m.sam_degrees.unwrap_or(f64::NAN),
            ergas: m.ergas.unwrap_or(f64::NAN),
            has_spectral: i32::from(m.sam_degrees.is_some()),
        };
        Ok(())
    })
}
