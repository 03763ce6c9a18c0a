use crate::error::{Error, Result};
use crate::image::{Image, Layout};
use crate::tensor::Tensor;

use super::grouping::Geometry;
use super::{FilterConfig, PatchGroup};

const GAP_REPORT_LIMIT: usize = 16;

/// Running sums for uniform-weight write-back of filtered patches.
///
/// Every covering patch pixel gets weight `1 / cover_count`, so the output is
/// the plain mean of all estimates landing on a pixel.
pub struct Aggregator {
    image_layout: Layout,
    dims: Vec<usize>,
    geom: Option<Geometry>,
    sums: Vec<f64>,
    counts: Vec<u32>,
}

impl Aggregator {
    pub fn new(layout: Layout, dims: &[usize]) -> Result<Self> {
        let canvas = Image::filled(layout, dims.to_vec(), 0.0)?;
        let len = canvas.data().len();
        Ok(Aggregator {
            image_layout: layout,
            dims: dims.to_vec(),
            geom: None,
            sums: vec![0.0; len],
            counts: vec![0; len],
        })
    }

    fn geometry_for(&mut self, g: &PatchGroup) -> Result<Geometry> {
        let d = g.data.dims();
        if d.len() != 4 || d[0] != d[1] {
            return Err(Error::invalid(format!("group dims {d:?} are not ps x ps x M x K")));
        }
        if let Some(geom) = self.geom {
            if geom.ps == d[0] && geom.slab() == d[2] {
                return Ok(geom);
            }
        }
        let canvas = Image::filled(self.image_layout, self.dims.clone(), 0.0)?;
        let cfg = FilterConfig {
            patch_size: d[0],
            ..FilterConfig::default()
        };
        let geom = Geometry::new(&canvas, &cfg)?;
        if geom.slab() != d[2] {
            return Err(Error::invalid(format!(
                "group third mode {} does not fit canvas {:?}",
                d[2], self.dims
            )));
        }
        self.geom = Some(geom);
        Ok(geom)
    }

    pub fn add(&mut self, g: &PatchGroup) -> Result<()> {
        let geom = self.geometry_for(g)?;
        let ps = geom.ps;
        let patch = geom.patch_len();
        for (k, &at) in g.origins.iter().enumerate() {
            if at.row + ps > geom.h || at.col + ps > geom.w || at.z + geom.pz > geom.z {
                return Err(Error::invalid(format!("patch origin {at:?} outside canvas")));
            }
            let src = &g.data.data()[k * patch..(k + 1) * patch];
            for m in 0..geom.slab() {
                for j in 0..ps {
                    let o = geom.pixel(at, 0, j, m);
                    let col = &src[ps * (j + ps * m)..ps * (j + ps * m + 1)];
                    for (i, &v) in col.iter().enumerate() {
                        self.sums[o + i] += v;
                        self.counts[o + i] += 1;
                    }
                }
            }
        }
        Ok(())
    }

    /// Per-pixel sum of the aggregation weights: 1 where covered, 0 elsewhere.
    pub fn weight_sums(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&n| {
                let w = if n == 0 { 0.0 } else { 1.0 / n as f64 };
                (0..n).map(|_| w).sum()
            })
            .collect()
    }

    pub fn finish(self) -> Result<Image> {
        let gaps: Vec<usize> = self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &n)| n == 0)
            .map(|(i, _)| i)
            .collect();
        if !gaps.is_empty() {
            let (h, w) = (self.dims[0], self.dims[1]);
            let first = gaps
                .iter()
                .take(GAP_REPORT_LIMIT)
                .map(|&i| [i % h, (i / h) % w, i / (h * w)])
                .collect();
            return Err(Error::CoverageGap {
                count: gaps.len(),
                first,
            });
        }
        let data = self
            .sums
            .iter()
            .zip(&self.counts)
            .map(|(&s, &n)| s / n as f64)
            .collect();
        Image::new(Tensor::new(self.dims, data)?, self.image_layout, 255.0)
    }
}

/// Writes every filtered patch back to its origin and averages overlaps.
pub fn aggregate(groups: &[PatchGroup], layout: Layout, dims: &[usize]) -> Result<Image> {
    let mut agg = Aggregator::new(layout, dims)?;
    for g in groups {
        agg.add(g)?;
    }
    agg.finish()
}
