mod common;

use nlss::bench::mean_image;
use nlss::image::{Image, Layout};
use nlss::metrics::psnr;
use nlss::noise::{add_awgn, add_noise, add_rician, normal_pairs, NoiseSpec};
use nlss::vst::vst_denoise;
use std::f64::consts::PI;

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

#[test]
fn awgn_psnr_matches_closed_form() {
    let x = Image::filled(Layout::Volume, vec![256, 256, 8], 128.0).unwrap();
    for (sigma, expect) in [(10.0, 28.13), (30.0, 18.59), (50.0, 14.15), (100.0, 8.13)] {
        let y = add_awgn(&x, &NoiseSpec::awgn(sigma, 11)).unwrap();
        let p = psnr(&x, &y, 255.0).unwrap();
        assert!((p - expect).abs() < 0.05, "sigma {sigma}: {p}");
        assert!((p - 20.0 * (255.0 / sigma).log10()).abs() < 0.05);
    }
}

#[test]
fn awgn_is_unclipped_and_keyed_by_seed() {
    let x = Image::filled(Layout::Gray, vec![64, 64], 0.0).unwrap();
    let a = add_awgn(&x, &NoiseSpec::awgn(20.0, 5)).unwrap();
    let b = add_awgn(&x, &NoiseSpec::awgn(20.0, 5)).unwrap();
    let c = add_awgn(&x, &NoiseSpec::awgn(20.0, 6)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.data().iter().any(|&v| v < 0.0));
    let zero = add_awgn(&x, &NoiseSpec::awgn(0.0, 5)).unwrap();
    assert_eq!(zero, x);
}

#[test]
fn noise_prefix_is_stable_across_lengths() {
    let short = normal_pairs(9, 5000);
    let long = normal_pairs(9, 20000);
    assert_eq!(&long[..5000], &short[..]);
}

#[test]
fn standard_normal_moments() {
    let pairs = normal_pairs(3, 500_000);
    let all: Vec<f64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let (m, s) = mean_std(&all);
    assert!(m.abs() < 0.005, "mean {m}");
    assert!((s - 1.0).abs() < 0.005, "std {s}");
    let corr = pairs.iter().map(|(a, b)| a * b).sum::<f64>() / pairs.len() as f64;
    assert!(corr.abs() < 0.01);
}

#[test]
fn rician_zero_signal_is_rayleigh() {
    let sigma = 7.0;
    let x = Image::filled(Layout::Volume, vec![128, 128, 64], 0.0).unwrap();
    let y = add_rician(&x, &NoiseSpec::rician(sigma, 21)).unwrap();
    let (m, _) = mean_std(y.data());
    let rayleigh = sigma * (PI / 2.0).sqrt();
    assert!((m - rayleigh).abs() / rayleigh < 0.01, "mean {m} vs {rayleigh}");
    assert!(y.data().iter().all(|&v| v >= 0.0));
}

#[test]
fn rician_large_signal_is_nearly_gaussian() {
    let sigma = 5.0;
    let x = Image::filled(Layout::Volume, vec![128, 128, 64], 1000.0).unwrap();
    let y = add_rician(&x, &NoiseSpec::rician(sigma, 22)).unwrap();
    let (m, s) = mean_std(y.data());
    assert!((s - sigma).abs() / sigma < 0.02, "std {s}");
    // E[y] ~ sqrt(A^2 + sigma^2) for A >> sigma
    assert!((m - (1000.0f64.powi(2) + sigma * sigma).sqrt()).abs() < 0.05);
}

#[test]
fn rician_rejects_negative_magnitudes() {
    let x = Image::filled(Layout::Gray, vec![4, 4], -1.0).unwrap();
    assert!(add_rician(&x, &NoiseSpec::rician(1.0, 0)).is_err());
    assert!(add_noise(&x, &NoiseSpec::awgn(-1.0, 0)).is_err());
}

#[test]
fn vst_constant_phantom_with_global_mean() {
    let x = Image::filled(Layout::Volume, vec![64, 64, 32], 50.0).unwrap();
    let y = add_rician(&x, &NoiseSpec::rician(5.0, 8)).unwrap();
    let out = vst_denoise(&y, 5.0, |img, _| {
        let m = img.data().iter().sum::<f64>() / img.data().len() as f64;
        Ok(img.map(|_| m))
    })
    .unwrap();
    let v = out.data()[0];
    assert!((v - 50.0).abs() / 50.0 < 0.01, "recovered {v}");
}

#[test]
fn averaging_repeated_captures_shrinks_noise() {
    let x = Image::filled(Layout::Gray, vec![256, 256], 100.0).unwrap();
    let caps: Vec<Image> = (0..100).map(|s| add_awgn(&x, &NoiseSpec::awgn(20.0, s)).unwrap()).collect();
    let mean = mean_image(&caps).unwrap();
    let residual: Vec<f64> = mean.data().iter().map(|v| v - 100.0).collect();
    let (_, s) = mean_std(&residual);
    let expect = 20.0 / 10.0;
    assert!((s - expect).abs() / expect < 0.05, "residual std {s}");
}
