//! Synthetic noise: additive white Gaussian and Rician magnitude noise.
//!
//! Normal draws come from a counter-based stream: voxel `i` always takes words
//! `4i..4i+4` of the ChaCha8 keystream for `seed`, so the noise at a voxel
//! does not depend on generation order or thread count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Awgn,
    Rician,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    pub fn awgn(sigma: f64, seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::Awgn, sigma, seed }
    }

    pub fn rician(sigma: f64, seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::Rician, sigma, seed }
    }

    fn validate(&self, expected: NoiseKind) -> Result<()> {
        if self.kind != expected {
            return Err(Error::invalid(format!(
                "expected {expected:?} noise spec, got {:?}",
                self.kind
            )));
        }
        if self.sigma < 0.0 || !self.sigma.is_finite() {
            return Err(Error::invalid(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        Ok(())
    }
}

/// Two independent standard normals per index, Box-Muller on the keyed stream.
pub fn normal_pairs(seed: u64, len: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); len];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos((c * CHUNK) as u128 * 4);
        for slot in chunk {
            // u1 in (0, 1], u2 in [0, 1)
            let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
            let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
            *slot = (r * c, r * s);
        }
    });
    out
}

/// `y = x + sigma * n`, unclipped.
pub fn add_awgn(x: &Image, spec: &NoiseSpec) -> Result<Image> {
    spec.validate(NoiseKind::Awgn)?;
    if spec.sigma == 0.0 {
        return Ok(x.clone());
    }
    let noise = normal_pairs(spec.seed, x.data().len());
    let data = x
        .data()
        .iter()
        .zip(&noise)
        .map(|(&v, &(n, _))| v + spec.sigma * n)
        .collect();
    x.with_data(data)
}

/// `y = sqrt((x + sigma n1)^2 + (sigma n2)^2)` per voxel.
pub fn add_rician(x: &Image, spec: &NoiseSpec) -> Result<Image> {
    spec.validate(NoiseKind::Rician)?;
    if let Some(i) = x.data().iter().position(|&v| v < 0.0) {
        return Err(Error::invalid(format!(
            "Rician noise needs non-negative input, voxel {i} is {}",
            x.data()[i]
        )));
    }
    if spec.sigma == 0.0 {
        return Ok(x.clone());
    }
    let noise = normal_pairs(spec.seed, x.data().len());
    let s = spec.sigma;
    let data = x
        .data()
        .iter()
        .zip(&noise)
        .map(|(&v, &(n1, n2))| ((v + s * n1).powi(2) + (s * n2).powi(2)).sqrt())
        .collect();
    x.with_data(data)
}

pub fn add_noise(x: &Image, spec: &NoiseSpec) -> Result<Image> {
    match spec.kind {
        NoiseKind::Awgn => add_awgn(x, spec),
        NoiseKind::Rician => add_rician(x, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Layout;

    fn flat(len: usize, value: f64) -> Image {
        Image::filled(Layout::Gray, vec![len, 1], value).unwrap()
    }

    #[test]
    fn stream_is_chunk_independent() {
        let a = normal_pairs(9, 3 * CHUNK + 17);
        let b = normal_pairs(9, CHUNK + 5);
        assert_eq!(&a[..CHUNK + 5], &b[..]);
        assert_ne!(normal_pairs(10, 4), normal_pairs(9, 4));
    }

    #[test]
    fn zero_sigma_is_identity() {
        let x = Image::from_fn(5, 4, 3, |r, c, k| (r * 7 + c * 3 + k) as f64).unwrap();
        assert_eq!(add_awgn(&x, &NoiseSpec::awgn(0.0, 3)).unwrap(), x);
        assert_eq!(add_rician(&x, &NoiseSpec::rician(0.0, 3)).unwrap(), x);
    }

    #[test]
    fn awgn_moments() {
        let n = 1 << 20;
        let x = flat(n, 100.0);
        let y = add_awgn(&x, &NoiseSpec::awgn(10.0, 42)).unwrap();
        let d: Vec<f64> = y.data().iter().map(|v| v - 100.0).collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        let std = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * 10.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((std - 10.0).abs() < 0.1, "std {std}");
    }

    #[test]
    fn rician_rejects_negative_and_stays_nonnegative() {
        let mut x = flat(8, 1.0);
        x.data_mut()[3] = -0.5;
        assert!(matches!(
            add_rician(&x, &NoiseSpec::rician(1.0, 0)),
            Err(Error::InvalidArgument(_))
        ));
        let y = add_rician(&flat(4096, 0.5), &NoiseSpec::rician(3.0, 1)).unwrap();
        assert!(y.data().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn kind_mismatch_and_negative_sigma() {
        let x = flat(4, 1.0);
        assert!(add_awgn(&x, &NoiseSpec::rician(1.0, 0)).is_err());
        assert!(add_awgn(&x, &NoiseSpec::awgn(-1.0, 0)).is_err());
    }
}
