//! Ground truth by averaging repeated captures of a static scene.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

use super::io::{load_image, DatasetKind};

/// Running per-pixel sum over a sequence of same-shaped images.
struct RunningMean {
    template: Image,
    sum: Vec<f64>,
    n: usize,
}

impl RunningMean {
    fn new(first: Image) -> Self {
        RunningMean {
            sum: first.data().to_vec(),
            template: first,
            n: 1,
        }
    }

    fn push(&mut self, img: &Image) -> Result<()> {
        self.template.same_shape(img)?;
        for (s, v) in self.sum.iter_mut().zip(img.data()) {
            *s += v;
        }
        self.n += 1;
        Ok(())
    }

    fn mean(&self) -> Result<Image> {
        let n = self.n as f64;
        self.template.with_data(self.sum.iter().map(|s| s / n).collect())
    }
}

/// Per-pixel mean of in-memory captures.
pub fn mean_image(images: &[Image]) -> Result<Image> {
    let (first, rest) = images
        .split_first()
        .ok_or_else(|| Error::invalid("averaging needs at least one image"))?;
    let mut acc = RunningMean::new(first.clone());
    for img in rest {
        acc.push(img)?;
    }
    acc.mean()
}

/// Means over the first `n` files for each requested `n`, plus the mean over
/// all of them. Counts larger than the file list are skipped.
pub fn average_partial<P: AsRef<Path>>(
    paths: &[P],
    counts: &[usize],
    kind: Option<DatasetKind>,
) -> Result<(Image, Vec<(usize, Image)>)> {
    let (first, rest) = paths
        .split_first()
        .ok_or_else(|| Error::invalid("averaging needs at least one image"))?;
    let mut acc = RunningMean::new(load_image(first, kind)?);
    let mut partial = Vec::new();
    let snapshot = |acc: &RunningMean, partial: &mut Vec<(usize, Image)>| -> Result<()> {
        if counts.contains(&acc.n) {
            partial.push((acc.n, acc.mean()?));
        }
        Ok(())
    };
    snapshot(&acc, &mut partial)?;
    for p in rest {
        let img = load_image(p, kind)?;
        acc.push(&img).map_err(|e| e.in_file(p.as_ref()))?;
        snapshot(&acc, &mut partial)?;
    }
    Ok((acc.mean()?, partial))
}

pub fn average_images<P: AsRef<Path>>(paths: &[P], kind: Option<DatasetKind>) -> Result<Image> {
    Ok(average_partial(paths, &[], kind)?.0)
}
