//! Collaborative filters: each maps a noisy group to an estimate of the clean
//! group with the same shape and origins.

use nalgebra::DMatrixView;

use crate::error::{Error, Result};
use crate::tensor::{
    hosvd, hosvd_reconstruct, left_singular_basis, mode_product, svd, HosvdDecomposition, Matrix,
    Tensor,
};

use super::{FilterConfig, FilterKind, PatchGroup};

/// Keeps `|c| >= tau`, zeroes the rest.
#[inline]
pub fn hard_threshold(c: f64, tau: f64) -> f64 {
    if c.abs() < tau {
        0.0
    } else {
        c
    }
}

pub fn apply_filter(g: &PatchGroup, cfg: &FilterConfig) -> Result<PatchGroup> {
    match cfg.filter {
        FilterKind::MSvd => msvd_filter(g, cfg),
        FilterKind::HosvdHard => hosvd_hard_filter(g, cfg),
        FilterKind::HosvdTruncate => hosvd_truncate_filter(g, &cfg.multirank),
    }
}

fn group_shape(g: &PatchGroup) -> Result<(usize, usize)> {
    let dims = g.data.dims();
    if dims.len() != 4 || dims[3] != g.origins.len() {
        return Err(Error::invalid(format!(
            "group dims {:?} do not match {} origins",
            dims,
            g.origins.len()
        )));
    }
    Ok((dims[0] * dims[1] * dims[2], dims[3]))
}

/// Group-mode unfolding of the channel-summed group (`K x ps*ps`), or of the
/// group itself when it has a single channel.
fn opponent_unfolding(g: &PatchGroup) -> Result<Matrix> {
    let dims = g.data.dims();
    let (ps2, slab, k) = (dims[0] * dims[1], dims[2], dims[3]);
    let data = g.data.data();
    if g.channels <= 1 {
        return Ok(DMatrixView::from_slice(data, ps2 * slab, k).transpose());
    }
    if slab != g.channels {
        return Err(Error::invalid(format!(
            "group third mode {} does not match {} channels",
            slab, g.channels
        )));
    }
    let mut m = Matrix::zeros(k, ps2);
    for kk in 0..k {
        for ch in 0..slab {
            let base = ps2 * (ch + slab * kk);
            for (p, v) in data[base..base + ps2].iter().enumerate() {
                m[(kk, p)] += v;
            }
        }
    }
    Ok(m)
}

/// Group transform from the channel-summed group, patch transform from the
/// group's own unfolding, hard threshold on the core matrix between them.
pub fn msvd_filter(g: &PatchGroup, cfg: &FilterConfig) -> Result<PatchGroup> {
    let (p, k) = group_shape(g)?;
    let tau = cfg.tau();
    if tau == 0.0 {
        return Ok(g.clone());
    }
    // the buffer is the transpose of the mode-4 unfolding: P x K
    let gt = DMatrixView::from_slice(g.data.data(), p, k);
    let u = left_singular_basis(&opponent_unfolding(g)?)?;
    let v = svd(&gt.clone_owned())?.u;
    let mut core = u.transpose() * gt.transpose() * &v;
    core.apply(|c| *c = hard_threshold(*c, tau));
    let estimate_t = v * core.transpose() * u.transpose();
    Ok(g.with_data(Tensor::new(g.data.dims().to_vec(), estimate_t.as_slice().to_vec())?))
}

/// Full HOSVD, hard threshold on the core, inverse transform.
pub fn hosvd_hard_filter(g: &PatchGroup, cfg: &FilterConfig) -> Result<PatchGroup> {
    group_shape(g)?;
    let tau = cfg.tau();
    if tau == 0.0 {
        return Ok(g.clone());
    }
    let HosvdDecomposition { core, factors } = hosvd(&g.data)?;
    let core = core.map(|c| hard_threshold(c, tau));
    let out = hosvd_reconstruct(&HosvdDecomposition { core, factors })?;
    Ok(g.with_data(out))
}

/// Truncated HOSVD: factor `i` keeps its first `multirank[i]` columns; modes
/// past the end of `multirank` keep full rank.
pub fn hosvd_truncate_filter(g: &PatchGroup, multirank: &[usize]) -> Result<PatchGroup> {
    group_shape(g)?;
    Ok(g.with_data(truncate_tensor(&g.data, multirank)?))
}

pub(crate) fn truncate_tensor(t: &Tensor, multirank: &[usize]) -> Result<Tensor> {
    if multirank.len() > t.order() {
        return Err(Error::invalid(format!(
            "{} ranks for an order-{} group",
            multirank.len(),
            t.order()
        )));
    }
    for (mode, (&r, &n)) in multirank.iter().zip(t.dims()).enumerate() {
        if r == 0 || r > n {
            return Err(Error::invalid(format!(
                "rank {r} for mode {mode} outside 1..={n}"
            )));
        }
    }
    let HosvdDecomposition { factors, .. } = hosvd(t)?;
    let factors: Vec<Matrix> = factors
        .into_iter()
        .enumerate()
        .map(|(mode, u)| match multirank.get(mode) {
            Some(&r) => u.columns(0, r).into_owned(),
            None => u,
        })
        .collect();
    let mut core = t.clone();
    for (mode, u) in factors.iter().enumerate() {
        core = mode_product(&core, &u.transpose(), mode)?;
    }
    hosvd_reconstruct(&HosvdDecomposition { core, factors })
}
