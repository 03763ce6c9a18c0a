//! Separable bilinear resampling of the row and column axes.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::tensor::Tensor;

/// Linear interpolation weights with pixel centers aligned: output `d` samples
/// input position `(d + 0.5) * n_in / n_out - 0.5`, clamped to the border.
fn taps(n_in: usize, n_out: usize) -> Vec<(usize, usize, f64)> {
    let ratio = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|d| {
            let x = ((d as f64 + 0.5) * ratio - 0.5).clamp(0.0, (n_in - 1) as f64);
            let i0 = x.floor() as usize;
            let i1 = (i0 + 1).min(n_in - 1);
            (i0, i1, x - i0 as f64)
        })
        .collect()
}

/// Resamples an image to `new_h x new_w`, leaving channels and depth alone.
pub fn resize_bilinear(img: &Image, new_h: usize, new_w: usize) -> Result<Image> {
    if new_h == 0 || new_w == 0 {
        return Err(Error::invalid("resize target must be non-empty"));
    }
    let (h, w) = (img.height(), img.width());
    let planes = img.data().len() / (h * w);
    let rows = taps(h, new_h);
    let cols = taps(w, new_w);
    let mut out = Vec::with_capacity(new_h * new_w * planes);
    let mut tmp = vec![0.0; new_h * w];
    for p in 0..planes {
        let src = &img.data()[p * h * w..(p + 1) * h * w];
        for c in 0..w {
            for (r, &(i0, i1, t)) in rows.iter().enumerate() {
                tmp[r + new_h * c] = (1.0 - t) * src[i0 + h * c] + t * src[i1 + h * c];
            }
        }
        for &(j0, j1, t) in &cols {
            for r in 0..new_h {
                out.push((1.0 - t) * tmp[r + new_h * j0] + t * tmp[r + new_h * j1]);
            }
        }
    }
    let mut dims = img.dims().to_vec();
    dims[0] = new_h;
    dims[1] = new_w;
    Image::new(Tensor::new(dims, out)?, img.layout(), img.peak)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_stays_constant() {
        let img = Image::from_fn(9, 7, 2, |_, _, k| 3.0 + k as f64).unwrap();
        let small = resize_bilinear(&img, 4, 3).unwrap();
        assert_eq!(small.dims(), &[4, 3, 2]);
        let big = resize_bilinear(&small, 9, 7).unwrap();
        for r in 0..9 {
            for c in 0..7 {
                assert!((big.at(r, c, 1, 0) - 4.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn halving_averages_pairs() {
        let img = Image::from_fn(4, 4, 1, |r, c, _| ((r + c) % 2) as f64).unwrap();
        let small = resize_bilinear(&img, 2, 2).unwrap();
        assert!(small.data().iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn linear_ramp_interior_is_linear() {
        let img = Image::from_fn(2, 1, 1, |r, _, _| r as f64 * 4.0).unwrap();
        let up = resize_bilinear(&img, 4, 1).unwrap();
        assert_eq!(up.data(), &[0.0, 1.0, 3.0, 4.0]);
    }
}
