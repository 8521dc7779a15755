use super::ImageGray;
use crate::error::{Error, Result};

/// Horizontal then vertical pass of a 1-D kernel centered on each pixel,
/// with replicated borders.
fn separable(img: &ImageGray, kernel: &[f64]) -> ImageGray {
    let r = (kernel.len() / 2) as isize;
    let (w, h) = (img.width(), img.height());
    let horizontal = ImageGray::from_fn(w, h, |x, y| {
        kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * img.get_clamped(x as isize + i as isize - r, y as isize))
            .sum()
    });
    ImageGray::from_fn(w, h, |x, y| {
        kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * horizontal.get_clamped(x as isize, y as isize + i as isize - r))
            .sum()
    })
}

/// Arithmetic mean over each `k x k` neighborhood.
pub fn mean_filter(img: &ImageGray, k: usize) -> Result<ImageGray> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "mean filter window must be odd and positive, got {k}"
        )));
    }
    if k == 1 {
        return Ok(img.clone());
    }
    Ok(separable(img, &vec![1.0 / k as f64; k]))
}

/// Normalized Gaussian blur truncated at `ceil(3 sigma)`.
pub fn gaussian_blur(img: &ImageGray, sigma: f64) -> Result<ImageGray> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gaussian sigma must be positive, got {sigma}"
        )));
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);
    Ok(separable(img, &kernel))
}

/// Horizontal and vertical responses of the 3x3 Sobel pair.
pub fn sobel_gradients(img: &ImageGray) -> Result<(ImageGray, ImageGray)> {
    if img.width() < 3 || img.height() < 3 {
        return Err(Error::InvalidInput(format!(
            "sobel needs at least a 3x3 image, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let (w, h) = (img.width(), img.height());
    let mut gx = ImageGray::filled(w, h, 0.0);
    let mut gy = ImageGray::filled(w, h, 0.0);
    for y in 0..h {
        for x in 0..w {
            let p = |dx: isize, dy: isize| img.get_clamped(x as isize + dx, y as isize + dy);
            let sx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let sy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            gx.set(x, y, sx);
            gy.set(x, y, sy);
        }
    }
    Ok((gx, gy))
}

/// Gradient magnitude `sqrt(gx^2 + gy^2)` of the Sobel pair.
pub fn sobel_magnitude(img: &ImageGray) -> Result<ImageGray> {
    let (gx, gy) = sobel_gradients(img)?;
    let data = gx.data().iter().zip(gy.data()).map(|(a, b)| a.hypot(*b)).collect();
    ImageGray::new(img.width(), img.height(), data)
}
