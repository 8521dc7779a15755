use super::{ImageGray, ImageRgb};
use crate::error::{Error, Result};

/// Rasters that can be resampled bilinearly.
pub trait BilinearResize: Sized {
    fn resize_bilinear(&self, width: usize, height: usize) -> Result<Self>;
}

/// Corner-aligned source coordinate of output index `i`: the first and last
/// output samples land exactly on the first and last input samples.
fn source_coord(i: usize, out_len: usize, in_len: usize) -> f64 {
    if out_len == 1 {
        (in_len - 1) as f64 / 2.0
    } else {
        i as f64 * (in_len - 1) as f64 / (out_len - 1) as f64
    }
}

/// Bilinear sample at a real position inside the image.
pub(crate) fn sample_bilinear(img: &ImageGray, sx: f64, sy: f64) -> f64 {
    let x0 = (sx.floor() as isize).clamp(0, img.width() as isize - 1) as usize;
    let y0 = (sy.floor() as isize).clamp(0, img.height() as isize - 1) as usize;
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let fx = (sx - x0 as f64).clamp(0.0, 1.0);
    let fy = (sy - y0 as f64).clamp(0.0, 1.0);
    let top = img.get(x0, y0) * (1.0 - fx) + img.get(x1, y0) * fx;
    let bottom = img.get(x0, y1) * (1.0 - fx) + img.get(x1, y1) * fx;
    top * (1.0 - fy) + bottom * fy
}

impl BilinearResize for ImageGray {
    fn resize_bilinear(&self, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "resize target must be positive, got {width}x{height}"
            )));
        }
        if (width, height) == (self.width(), self.height()) {
            return Ok(self.clone());
        }
        Ok(ImageGray::from_fn(width, height, |x, y| {
            sample_bilinear(
                self,
                source_coord(x, width, self.width()),
                source_coord(y, height, self.height()),
            )
        }))
    }
}

impl BilinearResize for ImageRgb {
    fn resize_bilinear(&self, width: usize, height: usize) -> Result<Self> {
        let r = self.channel(0).resize_bilinear(width, height)?;
        let g = self.channel(1).resize_bilinear(width, height)?;
        let b = self.channel(2).resize_bilinear(width, height)?;
        ImageRgb::from_channels(&r, &g, &b)
    }
}

pub fn resize_bilinear<I: BilinearResize>(img: &I, width: usize, height: usize) -> Result<I> {
    img.resize_bilinear(width, height)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_to_three_samples() {
        let img = ImageGray::new(2, 1, vec![0.0, 255.0]).unwrap();
        let out = resize_bilinear(&img, 3, 1).unwrap();
        assert_eq!(out.data(), &[0.0, 127.5, 255.0]);
    }

    #[test]
    fn same_size_is_identity() {
        let img = ImageRgb::from_fn(5, 4, |x, y| [x as f64, y as f64, (x * y) as f64]);
        assert_eq!(resize_bilinear(&img, 5, 4).unwrap(), img);
    }

    #[test]
    fn constant_stays_constant() {
        let img = ImageGray::filled(7, 3, 19.0);
        for (w, h) in [(1, 1), (13, 2), (50, 50)] {
            let out = resize_bilinear(&img, w, h).unwrap();
            assert!(out.data().iter().all(|&v| (v - 19.0).abs() < 1e-12));
        }
    }

    #[test]
    fn zero_target_is_rejected() {
        let img = ImageGray::filled(3, 3, 0.0);
        assert!(matches!(resize_bilinear(&img, 0, 3), Err(Error::InvalidParameter(_))));
    }
}
