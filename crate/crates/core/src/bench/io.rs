//! Image files: 8-bit PNG for gray/color stills, MDT1 for everything else.

use std::fs;
use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Image, Layout};
use crate::tensor::{mdt, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    ColorImage,
    ColorVideo,
    Msi,
    MriVolume,
}

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

fn is_png_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn layout_for(dims: usize, kind: Option<DatasetKind>) -> Result<Layout> {
    let layout = match (kind, dims) {
        (Some(DatasetKind::MriVolume), 3) => Layout::Volume,
        (Some(DatasetKind::MriVolume), _) => {
            return Err(Error::invalid(format!("MRI volumes need 3 modes, file has {dims}")))
        }
        (_, 2) => Layout::Gray,
        (_, 3) => Layout::Multiband,
        (_, 4) => Layout::Video,
        _ => return Err(Error::invalid(format!("no image layout has {dims} modes"))),
    };
    Ok(layout)
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if img.color().has_color() {
        let rgb = img.to_rgb8();
        Image::from_fn(h, w, 3, |r, c, k| rgb.get_pixel(c as u32, r as u32)[k] as f64)
    } else {
        let gray = img.to_luma8();
        let t = Tensor::from_fn(vec![h, w], |i| gray.get_pixel(i[1] as u32, i[0] as u32)[0] as f64)?;
        Image::new(t, Layout::Gray, 255.0)
    }
}

/// Reads a PNG or MDT1 file. `kind` disambiguates 3-mode MDT1 tensors
/// (volume vs. multiband); without it they load as multiband.
pub fn load_image(path: impl AsRef<Path>, kind: Option<DatasetKind>) -> Result<Image> {
    let path = path.as_ref();
    let load = || -> Result<Image> {
        let bytes = fs::read(path)?;
        if bytes.starts_with(PNG_SIGNATURE) {
            return decode_png(&bytes);
        }
        if bytes.starts_with(mdt::MAGIC) || !is_png_path(path) {
            let t = mdt::decode(&bytes)?;
            let layout = layout_for(t.order(), kind)?;
            return Image::new(t, layout, 255.0);
        }
        Err(Error::Parse {
            offset: 0,
            message: "missing PNG signature".into(),
        })
    };
    load().map_err(|e| e.in_file(path))
}

/// Clamp to `[0, 255]` and round half away from zero.
pub fn to_u8(v: f64) -> u8 {
    v.clamp(0.0, 255.0).round() as u8
}

/// PNG for `.png` paths (gray or 3-channel stills only), MDT1 otherwise.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let save = || -> Result<()> {
        if !is_png_path(path) {
            let mut buf = Vec::new();
            mdt::write(img.tensor(), &mut buf)?;
            fs::write(path, buf)?;
            return Ok(());
        }
        let (h, w) = (img.height() as u32, img.width() as u32);
        let dynamic = match (img.layout(), img.channels()) {
            (Layout::Gray, _) | (Layout::Multiband, 1) => DynamicImage::ImageLuma8(
                GrayImage::from_fn(w, h, |c, r| image::Luma([to_u8(img.at(r as usize, c as usize, 0, 0))])),
            ),
            (Layout::Multiband, 3) => DynamicImage::ImageRgb8(RgbImage::from_fn(w, h, |c, r| {
                let px = |k| to_u8(img.at(r as usize, c as usize, k, 0));
                image::Rgb([px(0), px(1), px(2)])
            })),
            (layout, ch) => {
                return Err(Error::invalid(format!(
                    "PNG holds gray or RGB stills, not {layout:?} with {ch} channels; use MDT1"
                )))
            }
        };
        dynamic.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    };
    save().map_err(|e| e.in_file(path))
}
