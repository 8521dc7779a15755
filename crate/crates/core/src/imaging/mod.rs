//! Raster types and the pixel-level primitives shared by every stage.
//!
//! All images hold `f64` samples internally; values are only quantized to
//! 8 bits when written to disk. Spatial filters replicate the border.

mod color;
mod components;
mod edges;
mod filter;
pub mod io;
mod morphology;
mod resize;
mod transform;

pub use color::rgb_to_ycbcr;
pub use components::{connected_components, largest_component, Component};
pub use edges::{canny, canny_stages, CannyParams, CannyStages, CannyThresholds};
pub use filter::{gaussian_blur, mean_filter, sobel_gradients, sobel_magnitude};
pub use morphology::{dilate_disk, disk_offsets, threshold};
pub use resize::{resize_bilinear, BilinearResize};
pub use transform::{jitter, Jitter};

use crate::error::{Error, Result};

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidInput(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    Ok(())
}

fn check_len(actual: usize, expected: usize) -> Result<()> {
    if actual != expected {
        return Err(Error::InvalidInput(format!(
            "pixel buffer has {actual} samples, expected {expected}"
        )));
    }
    Ok(())
}

/// Single-channel image of real samples, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGray {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageGray {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        check_len(data.len(), width * height)?;
        Ok(Self { width, height, data })
    }

    /// Image filled with a single value.
    ///
    /// # Panics
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// # Panics
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    /// Sample with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Copy of the inclusive rectangle `[left, right] x [top, bottom]`.
    pub fn crop(&self, left: usize, top: usize, right: usize, bottom: usize) -> Result<Self> {
        if left > right || top > bottom || right >= self.width || bottom >= self.height {
            return Err(Error::InvalidParameter(format!(
                "crop rectangle ({left}, {top}, {right}, {bottom}) outside {}x{} image",
                self.width, self.height
            )));
        }
        Ok(Self::from_fn(right - left + 1, bottom - top + 1, |x, y| {
            self.get(left + x, top + y)
        }))
    }

    pub fn flip_horizontal(&self) -> Self {
        Self::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// `{0, 255}` rendering of a mask, e.g. to run gradient filters on a
    /// silhouette.
    pub fn from_mask(mask: &BinaryMask) -> Self {
        Self {
            width: mask.width,
            height: mask.height,
            data: mask.data.iter().map(|&b| if b { 255.0 } else { 0.0 }).collect(),
        }
    }
}

/// Interleaved three-channel image (R, G, B), channel values nominally in
/// `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRgb {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageRgb {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        check_len(data.len(), width * height * 3)?;
        Ok(Self { width, height, data })
    }

    pub fn from_u8(width: usize, height: usize, data: &[u8]) -> Result<Self> {
        Self::new(width, height, data.iter().map(|&v| f64::from(v)).collect())
    }

    /// # Panics
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: rgb.repeat(width * height),
        }
    }

    /// # Panics
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self { width, height, data }
    }

    /// Reassemble from three equally sized planes.
    pub fn from_channels(r: &ImageGray, g: &ImageGray, b: &ImageGray) -> Result<Self> {
        if (r.width, r.height) != (g.width, g.height) || (r.width, r.height) != (b.width, b.height) {
            return Err(Error::InvalidInput("channel planes differ in size".into()));
        }
        let data = r
            .data
            .iter()
            .zip(&g.data)
            .zip(&b.data)
            .flat_map(|((&r, &g), &b)| [r, g, b])
            .collect();
        Ok(Self {
            width: r.width,
            height: r.height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, rgb: [f64; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn channel(&self, c: usize) -> ImageGray {
        assert!(c < 3, "channel index out of range");
        ImageGray {
            width: self.width,
            height: self.height,
            data: self.data.iter().skip(c).step_by(3).copied().collect(),
        }
    }

    pub fn crop(&self, left: usize, top: usize, right: usize, bottom: usize) -> Result<Self> {
        let planes = [
            self.channel(0).crop(left, top, right, bottom)?,
            self.channel(1).crop(left, top, right, bottom)?,
            self.channel(2).crop(left, top, right, bottom)?,
        ];
        Self::from_channels(&planes[0], &planes[1], &planes[2])
    }

    pub fn flip_horizontal(&self) -> Self {
        Self::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }

    /// Per-channel 8-bit quantization (round half away from zero, clamped).
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }
}

#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Identifies one channel of an [`ImageYCbCr`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YCbCrChannel {
    Y = 0,
    Cb = 1,
    Cr = 2,
}

/// Interleaved (Y, Cb, Cr) image with every sample clamped to `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageYCbCr {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageYCbCr {
    /// Builds an image from raw samples, clamping them into `[0, 255]`.
    pub fn new(width: usize, height: usize, mut data: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        check_len(data.len(), width * height * 3)?;
        for v in &mut data {
            *v = v.clamp(0.0, 255.0);
        }
        Ok(Self { width, height, data })
    }

    /// # Panics
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend(f(x, y).iter().map(|v| v.clamp(0.0, 255.0)));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn channel(&self, c: YCbCrChannel) -> ImageGray {
        ImageGray {
            width: self.width,
            height: self.height,
            data: self.data.iter().skip(c as usize).step_by(3).copied().collect(),
        }
    }

    pub fn flip_horizontal(&self) -> Self {
        Self::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }
}

/// Row-major boolean raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        check_len(data.len(), width * height)?;
        Ok(Self { width, height, data })
    }

    /// # Panics
    /// Panics if either dimension is zero.
    pub fn empty(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    /// # Panics
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Coordinates of every set pixel in raster order.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// True when every pixel set here is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    pub fn flip_horizontal(&self) -> Self {
        Self::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }
}
