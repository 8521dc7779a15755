use super::{ImageRgb, ImageYCbCr};

/// Full-range BT.601 (JPEG) transform of one pixel, without clamping.
#[inline]
pub(crate) fn ycbcr_pixel([r, g, b]: [f64; 3]) -> [f64; 3] {
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    // The 0.5 coefficients are split across the differences so that
    // achromatic pixels land on exactly 128.
    let cb = 128.0 + 0.168736 * (b - r) + 0.331264 * (b - g);
    let cr = 128.0 + 0.418688 * (r - g) + 0.081312 * (r - b);
    [y, cb, cr]
}

/// Converts RGB to full-range YCbCr; results are clamped to `[0, 255]`.
pub fn rgb_to_ycbcr(img: &ImageRgb) -> ImageYCbCr {
    ImageYCbCr::from_fn(img.width(), img.height(), |x, y| ycbcr_pixel(img.get(x, y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn convert(rgb: [f64; 3]) -> [f64; 3] {
        rgb_to_ycbcr(&ImageRgb::filled(1, 1, rgb)).get(0, 0)
    }

    #[test]
    fn achromatic_extremes() {
        let white = convert([255.0; 3]);
        assert!((white[0] - 255.0).abs() < 1e-9);
        assert!((white[1] - 128.0).abs() < 1e-9);
        assert!((white[2] - 128.0).abs() < 1e-9);
        assert_eq!(convert([0.0; 3]), [0.0, 128.0, 128.0]);
    }

    #[test]
    fn pure_red() {
        let [y, cb, cr] = convert([255.0, 0.0, 0.0]);
        assert!((y - 76.245).abs() < 1e-9);
        assert!((cb - (128.0 - 0.168736 * 255.0)).abs() < 1e-9);
        assert!((cb - 84.97).abs() < 1e-2);
        // 128 + 127.5 = 255.5 before clamping.
        assert_eq!(cr, 255.0);
    }

    #[test]
    fn gray_levels_have_neutral_chroma() {
        for v in 0..=255 {
            let [_, cb, cr] = ycbcr_pixel([f64::from(v); 3]);
            assert_eq!(cb, 128.0, "cb at {v}");
            assert_eq!(cr, 128.0, "cr at {v}");
        }
    }
}
