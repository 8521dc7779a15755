use serde::{Deserialize, Serialize};

use super::resize::sample_bilinear;
use super::{ImageGray, ImageRgb};

/// Small rigid motion plus a brightness gain, used for synthetic sample
/// variation and optional training-set augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jitter {
    /// Rotation about the image center, degrees, counter-clockwise on screen.
    pub angle_deg: f64,
    pub dx: f64,
    pub dy: f64,
    /// Multiplicative brightness factor.
    pub gain: f64,
}

impl Jitter {
    pub const IDENTITY: Jitter = Jitter {
        angle_deg: 0.0,
        dx: 0.0,
        dy: 0.0,
        gain: 1.0,
    };
}

fn warp_plane(plane: &ImageGray, j: &Jitter) -> ImageGray {
    let (w, h) = (plane.width(), plane.height());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    // Screen coordinates have y pointing down, so a counter-clockwise
    // rotation on screen is a clockwise one in (x, y).
    let (s, c) = (-j.angle_deg.to_radians()).sin_cos();
    ImageGray::from_fn(w, h, |x, y| {
        let u = x as f64 - cx - j.dx;
        let v = y as f64 - cy - j.dy;
        // Inverse rotation maps the output pixel back into the source.
        let sx = c * u + s * v + cx;
        let sy = -s * u + c * v + cy;
        (sample_bilinear(plane, sx, sy) * j.gain).clamp(0.0, 255.0)
    })
}

/// Applies `j` with bilinear resampling and replicated borders.
pub fn jitter(img: &ImageRgb, j: &Jitter) -> ImageRgb {
    let planes: Vec<ImageGray> = (0..3).map(|c| warp_plane(&img.channel(c), j)).collect();
    ImageRgb::from_channels(&planes[0], &planes[1], &planes[2]).expect("warped planes share dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_jitter_is_identity() {
        let img = ImageRgb::from_fn(9, 7, |x, y| [x as f64 * 10.0, y as f64 * 5.0, 3.0]);
        let out = jitter(&img, &Jitter::IDENTITY);
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn integer_translation_shifts_content() {
        let img = ImageRgb::from_fn(9, 9, |x, y| if (x, y) == (4, 4) { [200.0; 3] } else { [0.0; 3] });
        let j = Jitter {
            dx: 2.0,
            dy: -1.0,
            ..Jitter::IDENTITY
        };
        let out = jitter(&img, &j);
        assert!((out.get(6, 3)[0] - 200.0).abs() < 1e-9);
        assert!(out.get(4, 4)[0].abs() < 1e-9);
    }
}
