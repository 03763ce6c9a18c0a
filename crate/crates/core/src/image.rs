use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// How the modes of an image tensor are interpreted.
///
/// | layout      | dims             |
/// |-------------|------------------|
/// | `Gray`      | `H x W`          |
/// | `Multiband` | `H x W x C`      |
/// | `Video`     | `H x W x C x F`  |
/// | `Volume`    | `H x W x D`      |
///
/// In every case the flat offset of `(row, col, channel, z)` is
/// `row + H * (col + W * (channel + C * z))`, with `C = 1` for gray and volume
/// data and `z` the frame or slice index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    Gray,
    Multiband,
    Video,
    Volume,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisRole {
    Height,
    Width,
    Channel,
    Frame,
    Slice,
}

impl Layout {
    pub fn order(self) -> usize {
        match self {
            Layout::Gray => 2,
            Layout::Multiband | Layout::Volume => 3,
            Layout::Video => 4,
        }
    }

    pub fn axis_roles(self) -> &'static [AxisRole] {
        use AxisRole::*;
        match self {
            Layout::Gray => &[Height, Width],
            Layout::Multiband => &[Height, Width, Channel],
            Layout::Video => &[Height, Width, Channel, Frame],
            Layout::Volume => &[Height, Width, Slice],
        }
    }
}

/// A tensor with axis roles and the nominal intensity peak (255 for 8-bit data).
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    tensor: Tensor,
    layout: Layout,
    pub peak: f64,
}

impl Image {
    pub fn new(tensor: Tensor, layout: Layout, peak: f64) -> Result<Self> {
        if tensor.order() != layout.order() {
            return Err(Error::invalid(format!(
                "{:?} layout needs {} modes, tensor has dims {:?}",
                layout,
                layout.order(),
                tensor.dims()
            )));
        }
        if peak.is_nan() || peak <= 0.0 {
            return Err(Error::invalid(format!("peak must be positive, got {peak}")));
        }
        Ok(Image { tensor, layout, peak })
    }

    /// `H x W x C` image built from `f(row, col, channel)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let t = Tensor::from_fn(vec![height, width, channels], |i| f(i[0], i[1], i[2]))?;
        Image::new(t, Layout::Multiband, 255.0)
    }

    pub fn filled(layout: Layout, dims: Vec<usize>, value: f64) -> Result<Self> {
        let len = dims.iter().product();
        Image::new(Tensor::new(dims, vec![value; len])?, layout, 255.0)
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> Tensor {
        self.tensor
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dims(&self) -> &[usize] {
        self.tensor.dims()
    }

    pub fn data(&self) -> &[f64] {
        self.tensor.data()
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        self.tensor.data_mut()
    }

    pub fn height(&self) -> usize {
        self.dims()[0]
    }

    pub fn width(&self) -> usize {
        self.dims()[1]
    }

    pub fn channels(&self) -> usize {
        match self.layout {
            Layout::Multiband | Layout::Video => self.dims()[2],
            Layout::Gray | Layout::Volume => 1,
        }
    }

    /// Frames for video, slices for volumes, 1 otherwise.
    pub fn depth(&self) -> usize {
        match self.layout {
            Layout::Video => self.dims()[3],
            Layout::Volume => self.dims()[2],
            Layout::Gray | Layout::Multiband => 1,
        }
    }

    #[inline]
    pub fn offset(&self, row: usize, col: usize, channel: usize, z: usize) -> usize {
        row + self.height() * (col + self.width() * (channel + self.channels() * z))
    }

    pub fn at(&self, row: usize, col: usize, channel: usize, z: usize) -> f64 {
        self.data()[self.offset(row, col, channel, z)]
    }

    /// Same layout and peak, new values.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Image> {
        Image::new(Tensor::new(self.dims().to_vec(), data)?, self.layout, self.peak)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            tensor: self.tensor.map(f),
            layout: self.layout,
            peak: self.peak,
        }
    }

    pub fn same_shape(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::invalid(format!(
                "image dims {:?} and {:?} differ",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }

    /// One frame (video) or slice (volume) as its own image.
    pub fn plane(&self, z: usize) -> Result<Image> {
        let depth = self.depth();
        if z >= depth {
            return Err(Error::invalid(format!("plane {z} out of range 0..{depth}")));
        }
        let stride = self.height() * self.width() * self.channels();
        let data = self.data()[z * stride..(z + 1) * stride].to_vec();
        let (layout, dims) = match self.layout {
            Layout::Video => (
                Layout::Multiband,
                vec![self.height(), self.width(), self.channels()],
            ),
            _ => (Layout::Gray, vec![self.height(), self.width()]),
        };
        Image::new(Tensor::new(dims, data)?, layout, self.peak)
    }
}
