//! Reference grid and exhaustive block matching.

use crate::error::{Error, Result};
use crate::image::{Image, Layout};
use crate::tensor::Tensor;

use super::FilterConfig;

/// Top-left corner of a patch. `z` is the frame or slice, 0 for 2-D images.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub row: usize,
    pub col: usize,
    pub z: usize,
}

impl Coord {
    pub fn new(row: usize, col: usize, z: usize) -> Self {
        Coord { row, col, z }
    }
}

/// `K` similar patches stacked along the last mode.
///
/// `data` has dims `ps x ps x M x K`, where `M` is the channel count for 2-D
/// and video data, and the patch depth (`ps`) for volumes.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchGroup {
    pub data: Tensor,
    pub origins: Vec<Coord>,
    /// Squared distance of each member to the reference, on the matching signal.
    pub distances: Vec<f64>,
    /// Always 0: the reference is stacked first.
    pub reference_index: usize,
    pub channels: usize,
}

impl PatchGroup {
    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub(crate) fn with_data(&self, data: Tensor) -> PatchGroup {
        PatchGroup {
            data,
            origins: self.origins.clone(),
            distances: self.distances.clone(),
            reference_index: self.reference_index,
            channels: self.channels,
        }
    }
}

/// Patch and window extents for an image under a config.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Geometry {
    pub h: usize,
    pub w: usize,
    pub c: usize,
    /// Frames or slices.
    pub z: usize,
    pub ps: usize,
    /// Patch extent along `z`.
    pub pz: usize,
    pub radius: usize,
    pub z_radius: usize,
}

impl Geometry {
    pub fn new(img: &Image, cfg: &FilterConfig) -> Result<Self> {
        let (pz, z_radius) = match img.layout() {
            Layout::Volume => (cfg.patch_size, cfg.search_radius),
            Layout::Video => (1, cfg.temporal_radius),
            Layout::Gray | Layout::Multiband => (1, 0),
        };
        let g = Geometry {
            h: img.height(),
            w: img.width(),
            c: img.channels(),
            z: img.depth(),
            ps: cfg.patch_size,
            pz,
            radius: cfg.search_radius,
            z_radius,
        };
        if g.ps > g.h || g.ps > g.w || g.pz > g.z {
            return Err(Error::invalid(format!(
                "patch size {} exceeds image extents {:?}",
                g.ps,
                img.dims()
            )));
        }
        Ok(g)
    }

    /// Extent of the third group mode.
    pub fn slab(&self) -> usize {
        self.c * self.pz
    }

    pub fn patch_len(&self) -> usize {
        self.ps * self.ps * self.slab()
    }

    pub fn group_dims(&self, k: usize) -> Vec<usize> {
        vec![self.ps, self.ps, self.slab(), k]
    }

    fn contains(&self, at: Coord) -> bool {
        at.row + self.ps <= self.h && at.col + self.ps <= self.w && at.z + self.pz <= self.z
    }

    /// Image offset of patch element `(i, j, m)` where `m = channel + C * dz`.
    /// Image offsets are `row + H * (col + W * (channel + C * z))`, so `m` and
    /// `z` combine as `m + C * z`.
    #[inline]
    pub fn pixel(&self, at: Coord, i: usize, j: usize, m: usize) -> usize {
        (at.row + i) + self.h * ((at.col + j) + self.w * (m + self.c * at.z))
    }
}

/// Grid positions along one axis, always ending at the last valid position.
pub(crate) fn axis_positions(extent: usize, patch: usize, step: usize) -> Vec<usize> {
    let last = extent - patch;
    let mut v: Vec<usize> = (0..=last).step_by(step).collect();
    if *v.last().unwrap() != last {
        v.push(last);
    }
    v
}

/// Reference patch corners: stride `step` over rows and columns (and slices
/// for volumes), every frame for video, with the border positions forced in.
pub fn reference_grid(image: &Image, ps: usize, step: usize) -> Result<Vec<Coord>> {
    if step == 0 {
        return Err(Error::invalid("step must be >= 1"));
    }
    let cfg = FilterConfig {
        patch_size: ps,
        ..FilterConfig::default()
    };
    let g = Geometry::new(image, &cfg)?;
    let rows = axis_positions(g.h, ps, step);
    let cols = axis_positions(g.w, ps, step);
    let zs = match image.layout() {
        Layout::Volume => axis_positions(g.z, ps, step),
        _ => (0..g.z).collect(),
    };
    let mut out = Vec::with_capacity(rows.len() * cols.len() * zs.len());
    for &z in &zs {
        for &row in &rows {
            for &col in &cols {
                out.push(Coord { row, col, z });
            }
        }
    }
    Ok(out)
}

/// Precomputed matching signal for repeated searches over one image.
///
/// Multichannel images match on the channel sum.
pub(crate) struct Matcher<'a> {
    image: &'a Image,
    geom: Geometry,
    k: usize,
    /// `row + H * (col + W * z)`.
    signal: Vec<f64>,
}

impl<'a> Matcher<'a> {
    pub fn new(image: &'a Image, cfg: &FilterConfig) -> Result<Self> {
        let geom = Geometry::new(image, cfg)?;
        let plane = geom.h * geom.w;
        let mut signal = vec![0.0; plane * geom.z];
        let data = image.data();
        for z in 0..geom.z {
            let dst = &mut signal[z * plane..(z + 1) * plane];
            for ch in 0..geom.c {
                let src = &data[plane * (ch + geom.c * z)..plane * (ch + geom.c * z + 1)];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s;
                }
            }
        }
        Ok(Matcher {
            image,
            geom,
            k: cfg.k_similar,
            signal,
        })
    }

    fn distance(&self, a: Coord, b: Coord) -> f64 {
        let g = &self.geom;
        let mut acc = 0.0;
        for dz in 0..g.pz {
            for j in 0..g.ps {
                let oa = a.row + g.h * ((a.col + j) + g.w * (a.z + dz));
                let ob = b.row + g.h * ((b.col + j) + g.w * (b.z + dz));
                let ca = &self.signal[oa..oa + g.ps];
                let cb = &self.signal[ob..ob + g.ps];
                for (x, y) in ca.iter().zip(cb) {
                    let d = x - y;
                    acc += d * d;
                }
            }
        }
        acc
    }

    /// The `K` nearest candidates in scan order `(z, row, col)`, reference first.
    pub fn search(&self, reference: Coord) -> Result<Vec<(Coord, f64)>> {
        let g = &self.geom;
        if !g.contains(reference) {
            return Err(Error::invalid(format!("reference {reference:?} outside image")));
        }
        let span = |at: usize, radius: usize, extent: usize, patch: usize| {
            at.saturating_sub(radius)..=(at + radius).min(extent - patch)
        };
        let mut cands = Vec::new();
        for z in span(reference.z, g.z_radius, g.z, g.pz) {
            for row in span(reference.row, g.radius, g.h, g.ps) {
                for col in span(reference.col, g.radius, g.w, g.ps) {
                    let at = Coord { row, col, z };
                    if at != reference {
                        cands.push((at, self.distance(reference, at)));
                    }
                }
            }
        }
        let keep = self.k.saturating_sub(1).min(cands.len());
        if keep < cands.len() {
            // partition, then order the survivors; ties resolve by scan position
            let key = |i: usize, c: &(Coord, f64)| (c.1, i);
            let mut indexed: Vec<(f64, usize)> =
                cands.iter().enumerate().map(|(i, c)| key(i, c)).collect();
            indexed.select_nth_unstable_by(keep, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            indexed.truncate(keep);
            indexed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cands = indexed.into_iter().map(|(_, i)| cands[i]).collect();
        } else {
            cands.sort_by(|a, b| a.1.total_cmp(&b.1));
        }
        let mut out = Vec::with_capacity(keep + 1);
        out.push((reference, 0.0));
        out.extend(cands);
        Ok(out)
    }

    pub fn extract(&self, members: &[(Coord, f64)]) -> Result<PatchGroup> {
        let g = &self.geom;
        let data = self.image.data();
        let mut buf = Vec::with_capacity(g.patch_len() * members.len());
        for &(at, _) in members {
            for m in 0..g.slab() {
                for j in 0..g.ps {
                    let o = g.pixel(at, 0, j, m);
                    buf.extend_from_slice(&data[o..o + g.ps]);
                }
            }
        }
        Ok(PatchGroup {
            data: Tensor::new(g.group_dims(members.len()), buf)?,
            origins: members.iter().map(|m| m.0).collect(),
            distances: members.iter().map(|m| m.1).collect(),
            reference_index: 0,
            channels: g.c,
        })
    }

    pub fn group(&self, reference: Coord) -> Result<PatchGroup> {
        let members = self.search(reference)?;
        self.extract(&members)
    }
}

/// Groups the `K` patches nearest to `reference` within the search window.
pub fn block_match(image: &Image, reference: Coord, cfg: &FilterConfig) -> Result<PatchGroup> {
    Matcher::new(image, cfg)?.group(reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(h: usize, w: usize, f: impl Fn(usize, usize) -> f64) -> Image {
        Image::from_fn(h, w, 1, |r, c, _| f(r, c)).unwrap()
    }

    fn grid_set(img: &Image, ps: usize, step: usize) -> (Vec<usize>, Vec<usize>) {
        let g = reference_grid(img, ps, step).unwrap();
        let mut rows: Vec<usize> = g.iter().map(|c| c.row).collect();
        let mut cols: Vec<usize> = g.iter().map(|c| c.col).collect();
        rows.sort();
        rows.dedup();
        cols.sort();
        cols.dedup();
        (rows, cols)
    }

    #[test]
    fn grid_single_position() {
        let img = gray(8, 8, |_, _| 0.0);
        assert_eq!(reference_grid(&img, 8, 4).unwrap(), vec![Coord::new(0, 0, 0)]);
    }

    #[test]
    fn grid_snaps_last_position() {
        let img = gray(10, 10, |_, _| 0.0);
        assert_eq!(grid_set(&img, 8, 4), (vec![0, 2], vec![0, 2]));
    }

    #[test]
    fn grid_matches_enumeration() {
        // oracle: walk every valid corner and keep stride multiples plus the last
        let img = gray(64, 64, |_, _| 0.0);
        let mut oracle = Vec::new();
        for p in 0..=56 {
            if p % 5 == 0 || p == 56 {
                oracle.push(p);
            }
        }
        assert_eq!(oracle.len(), 13);
        let (rows, cols) = grid_set(&img, 8, 5);
        assert_eq!(rows, oracle);
        assert_eq!(cols, oracle);
        assert_eq!(reference_grid(&img, 8, 5).unwrap().len(), 13 * 13);
    }

    #[test]
    fn grid_rejects_oversized_patch() {
        let img = gray(6, 10, |_, _| 0.0);
        assert!(matches!(reference_grid(&img, 8, 2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn volume_grid_covers_slices() {
        let img = Image::filled(Layout::Volume, vec![6, 6, 7], 0.0).unwrap();
        let zs: std::collections::BTreeSet<usize> =
            reference_grid(&img, 4, 2).unwrap().iter().map(|c| c.z).collect();
        assert_eq!(zs.into_iter().collect::<Vec<_>>(), vec![0, 2, 3]);
    }

    #[test]
    fn k_one_is_reference_patch() {
        let img = gray(12, 12, |r, c| (r * 12 + c) as f64);
        let cfg = FilterConfig { patch_size: 4, k_similar: 1, ..Default::default() };
        let g = block_match(&img, Coord::new(3, 5, 0), &cfg).unwrap();
        assert_eq!(g.origins, vec![Coord::new(3, 5, 0)]);
        assert_eq!(g.data.dims(), &[4, 4, 1, 1]);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g.data.get(&[i, j, 0, 0]), img.at(3 + i, 5 + j, 0, 0));
            }
        }
    }

    #[test]
    fn duplicate_patch_ranks_second() {
        let mut img = gray(16, 16, |r, c| ((r * 16 + c) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) as f64 / 1e17);
        // copy the 4x4 patch at (2, 3) to (9, 10)
        for i in 0..4 {
            for j in 0..4 {
                let v = img.at(2 + i, 3 + j, 0, 0);
                let o = img.offset(9 + i, 10 + j, 0, 0);
                img.data_mut()[o] = v;
            }
        }
        let cfg = FilterConfig { patch_size: 4, search_radius: 8, k_similar: 4, ..Default::default() };
        let g = block_match(&img, Coord::new(2, 3, 0), &cfg).unwrap();
        assert_eq!(g.origins[0], Coord::new(2, 3, 0));
        assert_eq!(g.origins[1], Coord::new(9, 10, 0));
        assert_eq!(g.distances[1], 0.0);
    }

    #[test]
    fn color_matches_on_channel_sum() {
        let img = Image::from_fn(10, 10, 3, |r, c, k| ((r * 3 + c * 7 + k * 5) % 11) as f64).unwrap();
        let cfg = FilterConfig { patch_size: 3, search_radius: 3, k_similar: 5, ..Default::default() };
        let g = block_match(&img, Coord::new(4, 4, 0), &cfg).unwrap();
        assert_eq!(g.data.dims(), &[3, 3, 3, 5]);
        let sum = |at: Coord| -> Vec<f64> {
            let mut v = Vec::new();
            for j in 0..3 {
                for i in 0..3 {
                    v.push((0..3).map(|k| img.at(at.row + i, at.col + j, k, 0)).sum());
                }
            }
            v
        };
        let r = sum(g.origins[0]);
        for (at, d) in g.origins.iter().zip(&g.distances) {
            let dd: f64 = sum(*at).iter().zip(&r).map(|(a, b)| (a - b).powi(2)).sum();
            assert_eq!(dd, *d);
        }
        assert!(g.distances.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn video_search_spans_frames() {
        let mut img = Image::new(
            Tensor::from_fn(vec![8, 8, 1, 5], |i| ((i[0] * 5 + i[1] * 3 + i[3] * 7) % 13) as f64).unwrap(),
            Layout::Video,
            255.0,
        )
        .unwrap();
        // frame 3 repeats frame 1 exactly
        let plane = 64;
        let f1: Vec<f64> = img.data()[plane..2 * plane].to_vec();
        img.data_mut()[3 * plane..4 * plane].copy_from_slice(&f1);
        let cfg = FilterConfig {
            patch_size: 4,
            search_radius: 0,
            temporal_radius: 2,
            k_similar: 2,
            ..Default::default()
        };
        let g = block_match(&img, Coord::new(2, 2, 1), &cfg).unwrap();
        assert_eq!(g.origins[1], Coord::new(2, 2, 3));
        assert_eq!(g.distances[1], 0.0);
    }
}
