//! Canny edge detection: Gaussian smoothing, Sobel gradients, non-maximum
//! suppression along the quantized gradient direction, and double-threshold
//! hysteresis over 8-connected neighbors.

use serde::{Deserialize, Serialize};

use super::filter::{gaussian_blur, sobel_gradients};
use super::{BinaryMask, ImageGray};
use crate::error::{Error, Result};

/// How the hysteresis thresholds are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CannyThresholds {
    Fixed {
        low: f64,
        high: f64,
    },
    /// `high` is the given percentile of the nonzero gradient magnitudes and
    /// `low = low_ratio * high`.
    Percentile {
        percentile: f64,
        low_ratio: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyParams {
    pub sigma: f64,
    pub thresholds: CannyThresholds,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.4,
            thresholds: CannyThresholds::Percentile {
                percentile: 0.9,
                low_ratio: 0.4,
            },
        }
    }
}

/// Every intermediate product of one Canny run.
#[derive(Debug, Clone)]
pub struct CannyStages {
    pub magnitude: ImageGray,
    /// Magnitude with non-maxima zeroed.
    pub suppressed: ImageGray,
    pub low: f64,
    pub high: f64,
    /// Surviving maxima at or above the low threshold (strong and weak).
    pub candidates: BinaryMask,
    pub strong: BinaryMask,
    /// Candidates 8-connected to a strong pixel.
    pub edges: BinaryMask,
}

/// Canny with explicit hysteresis thresholds.
pub fn canny(img: &ImageGray, sigma: f64, low: f64, high: f64) -> Result<BinaryMask> {
    let params = CannyParams {
        sigma,
        thresholds: CannyThresholds::Fixed { low, high },
    };
    Ok(canny_stages(img, &params)?.edges)
}

pub fn canny_stages(img: &ImageGray, params: &CannyParams) -> Result<CannyStages> {
    if let CannyThresholds::Fixed { low, high } = params.thresholds {
        if !(low > 0.0) || low >= high {
            return Err(Error::InvalidParameter(format!(
                "canny thresholds need 0 < low < high, got low={low}, high={high}"
            )));
        }
    }
    if let CannyThresholds::Percentile { percentile, low_ratio } = params.thresholds {
        if !(0.0..=1.0).contains(&percentile) || !(low_ratio > 0.0 && low_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "canny percentile must be in [0, 1] and low ratio in (0, 1), got {percentile}, {low_ratio}"
            )));
        }
    }

    let blurred = gaussian_blur(img, params.sigma)?;
    let (w, h) = (img.width(), img.height());
    // Sobel needs 3x3; smaller images cannot carry an edge anyway.
    if w < 3 || h < 3 {
        let zero = ImageGray::filled(w, h, 0.0);
        let empty = BinaryMask::empty(w, h);
        return Ok(CannyStages {
            magnitude: zero.clone(),
            suppressed: zero,
            low: 0.0,
            high: 0.0,
            candidates: empty.clone(),
            strong: empty.clone(),
            edges: empty,
        });
    }
    let (gx, gy) = sobel_gradients(&blurred)?;
    let magnitude = ImageGray::from_fn(w, h, |x, y| gx.get(x, y).hypot(gy.get(x, y)));
    let suppressed = non_maximum_suppression(&magnitude, &gx, &gy);

    let (low, high) = match params.thresholds {
        CannyThresholds::Fixed { low, high } => (low, high),
        CannyThresholds::Percentile { percentile, low_ratio } => {
            let high = nonzero_percentile(&magnitude, percentile);
            (low_ratio * high, high)
        }
    };

    let usable = high > 0.0;
    let candidates = BinaryMask::from_fn(w, h, |x, y| {
        let v = suppressed.get(x, y);
        usable && v > 0.0 && v >= low
    });
    let strong = BinaryMask::from_fn(w, h, |x, y| {
        let v = suppressed.get(x, y);
        usable && v > 0.0 && v >= high
    });
    let edges = hysteresis(&candidates, &strong);
    Ok(CannyStages {
        magnitude,
        suppressed,
        low,
        high,
        candidates,
        strong,
        edges,
    })
}

/// Nearest-rank percentile over strictly positive samples; 0 if none.
fn nonzero_percentile(img: &ImageGray, p: f64) -> f64 {
    let mut values: Vec<f64> = img.data().iter().copied().filter(|&v| v > 1e-9).collect();
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let rank = ((p * values.len() as f64).ceil() as usize).clamp(1, values.len());
    values[rank - 1]
}

const DIRECTIONS: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Keeps a pixel when it beats its uphill neighbor strictly and its
/// downhill neighbor weakly, so a symmetric step keeps only the pixel on
/// the bright side.
fn non_maximum_suppression(mag: &ImageGray, gx: &ImageGray, gy: &ImageGray) -> ImageGray {
    let (w, h) = (mag.width() as isize, mag.height() as isize);
    let at = |x: isize, y: isize| {
        if x < 0 || y < 0 || x >= w || y >= h {
            f64::NEG_INFINITY
        } else {
            mag.get(x as usize, y as usize)
        }
    };
    ImageGray::from_fn(mag.width(), mag.height(), |x, y| {
        let m = mag.get(x, y);
        if m <= 0.0 {
            return 0.0;
        }
        let angle = gy.get(x, y).atan2(gx.get(x, y));
        let sector = ((angle / std::f64::consts::FRAC_PI_4).round() as isize).rem_euclid(8);
        let (dx, dy) = DIRECTIONS[sector as usize];
        let (xi, yi) = (x as isize, y as isize);
        let uphill = at(xi + dx, yi + dy);
        let downhill = at(xi - dx, yi - dy);
        if m > uphill && m >= downhill {
            m
        } else {
            0.0
        }
    })
}

fn hysteresis(candidates: &BinaryMask, strong: &BinaryMask) -> BinaryMask {
    let (w, h) = (candidates.width(), candidates.height());
    let mut out = BinaryMask::empty(w, h);
    let mut stack: Vec<(usize, usize)> = strong.points().collect();
    for &(x, y) in &stack {
        out.set(x, y, true);
    }
    while let Some((x, y)) = stack.pop() {
        for (nx, ny) in neighbors8(x, y, w, h) {
            if candidates.get(nx, ny) && !out.get(nx, ny) {
                out.set(nx, ny, true);
                stack.push((nx, ny));
            }
        }
    }
    out
}

pub(crate) fn neighbors8(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
    DIRECTIONS.iter().filter_map(move |&(dx, dy)| {
        let nx = x as isize + dx;
        let ny = y as isize + dy;
        (nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h).then_some((nx as usize, ny as usize))
    })
}
