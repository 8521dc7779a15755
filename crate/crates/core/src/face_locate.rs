//! From skin mask to a normalized 50x50 face chip.
//!
//! The largest skin component is taken as the face. Canny on its filled
//! silhouette gives the external edge; the horizontal extremes and the top
//! of that edge fix the box, and the bottom is placed 1.3 box-widths below
//! the top.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{
    canny_stages, connected_components, largest_component, mean_filter, rgb_to_ycbcr, BilinearResize, BinaryMask,
    CannyParams, Component, ImageGray, ImageRgb, YCbCrChannel,
};
use crate::skin::{skin_mask, FisConfig};

pub const CHIP_SIZE: usize = 50;
pub const HEIGHT_TO_WIDTH: f64 = 1.3;

/// Inclusive face rectangle in source-image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceBox {
    pub left: usize,
    pub top: usize,
    pub right: usize,
    pub bottom: usize,
    /// Set when the 1.3 rule pushed the bottom past the image and it was
    /// clipped to the last row.
    pub clipped: bool,
}

impl FaceBox {
    pub fn width(&self) -> usize {
        self.right - self.left
    }

    pub fn height(&self) -> usize {
        self.bottom - self.top
    }
}

/// Signal that Canny runs on to find the external edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSource {
    /// The face component's filled silhouette.
    #[default]
    Silhouette,
    /// Smoothed luminance restricted to the face component.
    MaskedLuminance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectConfig {
    /// Odd mean-filter window applied to each RGB channel before conversion.
    pub mean_filter: usize,
    pub edge_source: EdgeSource,
    pub canny: CannyParams,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            mean_filter: 3,
            edge_source: EdgeSource::Silhouette,
            canny: CannyParams::default(),
        }
    }
}

/// Everything produced while locating one face.
#[derive(Debug, Clone)]
pub struct Detection {
    pub face_box: FaceBox,
    /// 50x50 RGB crop of the (unfiltered) source image.
    pub chip: ImageRgb,
    pub skin: BinaryMask,
    pub edge: BinaryMask,
}

/// Largest component of the mask; ties go to the topmost, then leftmost.
pub fn largest_skin_component(mask: &BinaryMask) -> Result<Component> {
    largest_component(connected_components(mask)).ok_or(Error::NoFaceFound)
}

/// External boundary of a component, found by Canny on its silhouette.
///
/// A single-pixel component is too small to carry a gradient ring at the
/// default scale; the result is then whatever Canny reports (possibly the
/// pixel's neighborhood), never an error.
pub fn external_edge(component: &Component, width: usize, height: usize, params: &CannyParams) -> Result<BinaryMask> {
    let silhouette = ImageGray::from_mask(&component.to_mask(width, height));
    Ok(canny_stages(&silhouette, params)?.edges)
}

fn luminance_edge(component: &Component, luma: &ImageGray, params: &CannyParams) -> Result<BinaryMask> {
    let mask = component.to_mask(luma.width(), luma.height());
    let masked = ImageGray::from_fn(luma.width(), luma.height(), |x, y| {
        if mask.get(x, y) {
            luma.get(x, y)
        } else {
            0.0
        }
    });
    Ok(canny_stages(&masked, params)?.edges)
}

/// Box from the horizontal extremes and top of the edge pixels.
pub fn face_box(edge: &BinaryMask) -> Result<FaceBox> {
    if edge.count() < 3 {
        return Err(Error::NoFaceFound);
    }
    let (mut left, mut right, mut top) = (usize::MAX, 0, usize::MAX);
    for (x, y) in edge.points() {
        left = left.min(x);
        right = right.max(x);
        top = top.min(y);
    }
    let span = (HEIGHT_TO_WIDTH * (right - left) as f64).round() as usize;
    let mut bottom = top + span;
    let mut clipped = false;
    if bottom >= edge.height() {
        bottom = edge.height() - 1;
        clipped = true;
    }
    // A zero-width edge cannot define a box.
    if left >= right || top >= bottom {
        return Err(Error::NoFaceFound);
    }
    Ok(FaceBox {
        left,
        top,
        right,
        bottom,
        clipped,
    })
}

/// Crops the box (clipped to the image) and resizes it to 50x50.
pub fn crop_normalize(img: &ImageRgb, face: &FaceBox) -> Result<ImageRgb> {
    if face.left >= img.width() || face.top >= img.height() || face.left > face.right || face.top > face.bottom {
        return Err(Error::InvalidBox);
    }
    let right = face.right.min(img.width() - 1);
    let bottom = face.bottom.min(img.height() - 1);
    img.crop(face.left, face.top, right, bottom)?
        .resize_bilinear(CHIP_SIZE, CHIP_SIZE)
}

/// Smooths each RGB channel with the mean filter.
pub fn smooth_rgb(img: &ImageRgb, k: usize) -> Result<ImageRgb> {
    let planes = (0..3)
        .map(|c| mean_filter(&img.channel(c), k))
        .collect::<Result<Vec<_>>>()?;
    ImageRgb::from_channels(&planes[0], &planes[1], &planes[2])
}

/// Full detection chain: smoothing, YCbCr, fuzzy skin mask, largest
/// component, external edge, face box, and 50x50 normalization.
pub fn detect_face(img: &ImageRgb, fis: &FisConfig, cfg: &DetectConfig) -> Result<Detection> {
    let smoothed = smooth_rgb(img, cfg.mean_filter)?;
    let ycbcr = rgb_to_ycbcr(&smoothed);
    let skin = skin_mask(&ycbcr, fis);
    let face = largest_skin_component(&skin)?;
    let edge = match cfg.edge_source {
        EdgeSource::Silhouette => external_edge(&face, img.width(), img.height(), &cfg.canny)?,
        EdgeSource::MaskedLuminance => luminance_edge(&face, &ycbcr.channel(YCbCrChannel::Y), &cfg.canny)?,
    };
    let face_box = face_box(&edge)?;
    let chip = crop_normalize(img, &face_box)?;
    Ok(Detection {
        face_box,
        chip,
        skin,
        edge,
    })
}
