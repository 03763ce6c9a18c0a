mod common;

use common::{worked_group, WORKED_PATCH, WORKED_TRUNCATED};
use nlss::pipeline::{hosvd_hard_filter, hosvd_truncate_filter, Coord, FilterConfig, FilterKind, PatchGroup};
use nlss::tensor::{frobenius_norm, hosvd, unfold, Tensor};

/// The worked group as a single-channel pipeline group, `3 x 3 x 1 x 3`.
fn as_group() -> PatchGroup {
    let t = worked_group();
    PatchGroup {
        data: Tensor::new(vec![3, 3, 1, 3], t.into_data()).unwrap(),
        origins: (0..3).map(|k| Coord::new(0, k, 0)).collect(),
        distances: vec![0.0; 3],
        reference_index: 0,
        channels: 1,
    }
}

fn loss(g: &PatchGroup) -> f64 {
    frobenius_norm(&g.data.sub(&as_group().data).unwrap()).powi(2)
}

#[test]
fn third_mode_unfolding_rows_are_the_patch() {
    let g3 = unfold(&worked_group(), 2).unwrap();
    let row = [3.0, 1.0, 5.0, 6.0, 4.0, 8.0, 9.0, 2.0, 6.0];
    for k in 0..3 {
        assert_eq!(g3.row(k).iter().copied().collect::<Vec<_>>(), row);
    }
    assert_eq!(WORKED_PATCH[1][2], 2.0);
}

#[test]
fn core_has_three_diagonal_entries() {
    let c3 = unfold(&hosvd(&worked_group()).unwrap().core, 2).unwrap();
    let expect = [(0, 27.98), (4, 5.38), (8, 2.07)];
    for (col, mag) in expect {
        assert!((c3[(0, col)].abs() - mag).abs() < 0.01, "column {col}: {}", c3[(0, col)]);
    }
    for col in [1, 2, 3, 5, 6, 7] {
        assert!(c3[(0, col)].abs() < 1e-10);
    }
    for r in 1..3 {
        assert!(c3.row(r).iter().all(|v| v.abs() < 1e-10));
    }
    // the three values are sqrt(3) times the patch's singular values
    let sv = nalgebra::DMatrix::from_fn(3, 3, |i, j| WORKED_PATCH[i][j]).singular_values();
    for (k, col) in [0, 4, 8].into_iter().enumerate() {
        assert!((c3[(0, col)].abs() - 3f64.sqrt() * sv[k]).abs() < 1e-10);
    }
}

#[test]
fn rank_two_truncation_matches_published_group() {
    let out = hosvd_truncate_filter(&as_group(), &[2, 2]).unwrap();
    for k in 0..3 {
        for (p, &expect) in WORKED_TRUNCATED.iter().enumerate() {
            let v = out.data.get(&[p % 3, p / 3, 0, k]);
            assert!((v - expect).abs() < 0.01, "patch {k} entry {p}: {v} vs {expect}");
        }
    }
    assert!((loss(&out) - 4.29).abs() < 0.01, "loss {}", loss(&out));
}

#[test]
fn hard_threshold_between_small_values_gives_same_loss() {
    let truncated = loss(&hosvd_truncate_filter(&as_group(), &[2, 2]).unwrap());
    for tau in [2.09, 3.0, 4.0, 5.0, 5.36] {
        let cfg = FilterConfig {
            filter: FilterKind::HosvdHard,
            sigma: 1.0,
            tau_factor: tau,
            ..FilterConfig::default()
        };
        let out = hosvd_hard_filter(&as_group(), &cfg).unwrap();
        assert!((loss(&out) - 4.29).abs() < 0.01, "tau {tau}: {}", loss(&out));
        assert!((loss(&out) - truncated).abs() < 0.01);
    }
}
