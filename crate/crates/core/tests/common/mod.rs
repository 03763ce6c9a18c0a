//! Fixtures and reference implementations shared by the integration tests.
//! The oracles deliberately avoid the library's own numerics and follow the
//! textbook formulas as directly as possible.
#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::DMatrix;
use nlss::image::{Image, Layout};
use nlss::pipeline::Coord;
use nlss::tensor::Tensor;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn image(&mut self, layout: Layout, dims: Vec<usize>, lo: f64, hi: f64) -> Image {
        let n: usize = dims.iter().product();
        let data = (0..n).map(|_| self.uniform(lo, hi)).collect();
        Image::new(Tensor::new(dims, data).unwrap(), layout, 255.0).unwrap()
    }
}

/// Deterministic 128x128 RGB test scene: gradient background, a disk, a flat
/// rectangle, a sinusoidal texture patch and a checkerboard.
pub fn scene() -> Image {
    Image::from_fn(128, 128, 3, |r, c, k| {
        let (x, y) = (c as f64, r as f64);
        let mut v = 50.0 + 0.8 * x + 0.4 * y + 20.0 * k as f64;
        if (x - 44.0).powi(2) + (y - 40.0).powi(2) < 22.0f64.powi(2) {
            v = [210.0, 70.0, 50.0][k];
        }
        if (20..60).contains(&c) && (72..112).contains(&r) {
            v = [40.0, 160.0, 200.0][k];
        }
        if (76..120).contains(&c) && (70..120).contains(&r) {
            v = 128.0 + 70.0 * (x * 0.55 + 0.7 * k as f64).sin();
        }
        if (80..118).contains(&c) && (10..50).contains(&r) && (r / 6 + c / 6) % 2 == 0 {
            v = [230.0, 230.0, 30.0][k];
        }
        v
    })
    .unwrap()
}

/// The 3x3 patch of the worked truncation example, indexed `[row][col]`.
pub const WORKED_PATCH: [[f64; 3]; 3] = [[3.0, 6.0, 9.0], [1.0, 4.0, 2.0], [5.0, 8.0, 6.0]];

/// Three identical copies of `WORKED_PATCH` stacked along the third mode.
pub fn worked_group() -> Tensor {
    Tensor::from_fn(vec![3, 3, 3], |i| WORKED_PATCH[i[0]][i[1]]).unwrap()
}

/// Expected group after rank-(2, 2) truncation, as the vectorized patch.
pub const WORKED_TRUNCATED: [f64; 9] = [3.09, 1.92, 4.54, 5.95, 3.46, 8.26, 9.00, 2.03, 5.98];

/// Unfolding by explicit index arithmetic: rows follow `mode`, columns run
/// over the remaining indices with the lowest mode varying fastest.
pub fn unfold_oracle(t: &Tensor, mode: usize) -> DMatrix<f64> {
    let dims = t.dims();
    let rows = dims[mode];
    let cols = t.len() / rows;
    let mut m = DMatrix::zeros(rows, cols);
    let mut idx = vec![0usize; dims.len()];
    for flat in 0..t.len() {
        let mut rem = flat;
        for (d, i) in dims.iter().zip(idx.iter_mut()) {
            *i = rem % d;
            rem /= d;
        }
        let mut col = 0;
        let mut stride = 1;
        for (n, (&i, &d)) in idx.iter().zip(dims).enumerate() {
            if n != mode {
                col += i * stride;
                stride *= d;
            }
        }
        m[(idx[mode], col)] = t.data()[flat];
    }
    m
}

pub fn gaussian_kernel_2d() -> [[f64; 11]; 11] {
    let mut g = [[0.0; 11]; 11];
    let mut total = 0.0;
    for (i, row) in g.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (x, y) = (i as f64 - 5.0, j as f64 - 5.0);
            *v = (-(x * x + y * y) / (2.0 * 1.5 * 1.5)).exp();
            total += *v;
        }
    }
    for row in g.iter_mut() {
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    g
}

/// Windowed SSIM evaluated window by window, averaged per plane, then over
/// planes.
pub fn ssim_oracle(a: &Image, b: &Image, peak: f64) -> f64 {
    let g = gaussian_kernel_2d();
    let (h, w) = (a.height(), a.width());
    let (c1, c2) = ((0.01 * peak).powi(2), (0.03 * peak).powi(2));
    let planes: Vec<(usize, usize)> = (0..a.depth())
        .flat_map(|z| (0..a.channels()).map(move |ch| (ch, z)))
        .collect();
    let mut total = 0.0;
    for &(ch, z) in &planes {
        let mut plane_sum = 0.0;
        let mut count = 0;
        for r0 in 0..=h - 11 {
            for c0 in 0..=w - 11 {
                let (mut mx, mut my) = (0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        mx += g[i][j] * a.at(r0 + i, c0 + j, ch, z);
                        my += g[i][j] * b.at(r0 + i, c0 + j, ch, z);
                    }
                }
                let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        let dx = a.at(r0 + i, c0 + j, ch, z) - mx;
                        let dy = b.at(r0 + i, c0 + j, ch, z) - my;
                        vx += g[i][j] * dx * dx;
                        vy += g[i][j] * dy * dy;
                        cov += g[i][j] * dx * dy;
                    }
                }
                plane_sum += (2.0 * mx * my + c1) * (2.0 * cov + c2)
                    / ((mx * mx + my * my + c1) * (vx + vy + c2));
                count += 1;
            }
        }
        total += plane_sum / count as f64;
    }
    total / planes.len() as f64
}

/// Mean per-pixel spectral angle in degrees.
pub fn sam_oracle(a: &Image, b: &Image) -> f64 {
    let mut sum = 0.0;
    let mut n = 0;
    for z in 0..a.depth() {
        for r in 0..a.height() {
            for c in 0..a.width() {
                let x: Vec<f64> = (0..a.channels()).map(|k| a.at(r, c, k, z)).collect();
                let y: Vec<f64> = (0..a.channels()).map(|k| b.at(r, c, k, z)).collect();
                let dot: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
                let nx = x.iter().map(|p| p * p).sum::<f64>().sqrt();
                let ny = y.iter().map(|p| p * p).sum::<f64>().sqrt();
                if nx > 0.0 && ny > 0.0 {
                    sum += (dot / (nx * ny)).clamp(-1.0, 1.0).acos().to_degrees();
                    n += 1;
                }
            }
        }
    }
    sum / n as f64
}

pub fn ergas_oracle(a: &Image, b: &Image) -> f64 {
    let bands = a.channels();
    let mut acc = 0.0;
    for k in 0..bands {
        let mut ref_vals = Vec::new();
        let mut err = Vec::new();
        for z in 0..a.depth() {
            for c in 0..a.width() {
                for r in 0..a.height() {
                    ref_vals.push(a.at(r, c, k, z));
                    err.push(a.at(r, c, k, z) - b.at(r, c, k, z));
                }
            }
        }
        let n = ref_vals.len() as f64;
        let rmse = (err.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
        let mean = ref_vals.iter().sum::<f64>() / n;
        acc += (rmse / mean).powi(2);
    }
    100.0 * (acc / bands as f64).sqrt()
}

/// Mask on the reference, then an ordinary PSNR over the surviving values.
pub fn psnr_foreground_oracle(a: &Image, b: &Image, peak: f64) -> f64 {
    let keep: Vec<usize> = (0..a.data().len())
        .filter(|&i| a.data()[i] > 10.0 * peak / 255.0)
        .collect();
    let ra: Vec<f64> = keep.iter().map(|&i| a.data()[i]).collect();
    let rb: Vec<f64> = keep.iter().map(|&i| b.data()[i]).collect();
    let mse = ra.iter().zip(&rb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / ra.len() as f64;
    10.0 * (peak * peak / mse).log10()
}

/// Brute-force block matching for 2-D multichannel images: every candidate
/// corner in the window, squared distance on the channel sum, stable sort by
/// distance with scan order breaking ties, reference first.
pub fn block_match_oracle(img: &Image, reference: Coord, ps: usize, radius: usize, k: usize) -> Vec<(Coord, f64)> {
    let (h, w) = (img.height(), img.width());
    let sum_at = |r: usize, c: usize| (0..img.channels()).map(|ch| img.at(r, c, ch, 0)).sum::<f64>();
    let dist = |a: Coord, b: Coord| {
        let mut d = 0.0;
        for i in 0..ps {
            for j in 0..ps {
                let x = sum_at(a.row + i, a.col + j) - sum_at(b.row + i, b.col + j);
                d += x * x;
            }
        }
        d
    };
    let mut cands = Vec::new();
    for row in 0..=h - ps {
        for col in 0..=w - ps {
            let near = row.abs_diff(reference.row) <= radius && col.abs_diff(reference.col) <= radius;
            let at = Coord::new(row, col, 0);
            if near && at != reference {
                cands.push((at, dist(reference, at)));
            }
        }
    }
    cands.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut out = vec![(reference, 0.0)];
    out.extend(cands.into_iter().take(k - 1));
    out
}

/// Straight-line M-SVD on a `ps x ps x C x K` group using nalgebra's SVD.
pub fn msvd_oracle(group: &Tensor, tau: f64) -> Tensor {
    let d = group.dims().to_vec();
    let (ps1, ps2, ch, k) = (d[0], d[1], d[2], d[3]);
    let g4 = unfold_oracle(group, 3);
    let mut opp = DMatrix::zeros(k, ps1 * ps2);
    for kk in 0..k {
        for j in 0..ps2 {
            for i in 0..ps1 {
                let s: f64 = (0..ch).map(|c| group.get(&[i, j, c, kk])).sum();
                opp[(kk, i + ps1 * j)] = s;
            }
        }
    }
    let u = full_left_basis(&opp);
    let v = nalgebra::SVD::new(g4.transpose(), true, false).u.unwrap();
    let mut core = u.transpose() * &g4 * &v;
    core.apply(|c| {
        if c.abs() < tau {
            *c = 0.0
        }
    });
    let est = &u * core * v.transpose();
    let mut out = Tensor::zeros(d.clone()).unwrap();
    for kk in 0..k {
        for c in 0..ch {
            for j in 0..ps2 {
                for i in 0..ps1 {
                    out.set(&[i, j, c, kk], est[(kk, i + ps1 * (j + ps2 * c))]);
                }
            }
        }
    }
    out
}

/// All `m` left singular vectors of an `m x n` matrix (square `U`).
pub fn full_left_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if m <= n {
        return nalgebra::SVD::new(a.clone(), true, false).u.unwrap();
    }
    // pad with zero columns so the thin factor is square
    let mut padded = DMatrix::zeros(m, m);
    padded.columns_mut(0, n).copy_from(a);
    nalgebra::SVD::new(padded, true, false).u.unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
