use super::{BinaryMask, ImageGray};

/// `true` where the sample is at least `t`.
pub fn threshold(img: &ImageGray, t: f64) -> BinaryMask {
    BinaryMask::from_fn(img.width(), img.height(), |x, y| img.get(x, y) >= t)
}

/// Lattice points of the flat disk `dx^2 + dy^2 <= radius^2`.
pub fn disk_offsets(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let r2 = r * r;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r2 {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Binary dilation by a flat disk structuring element.
pub fn dilate_disk(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let offsets = disk_offsets(radius);
    let mut out = BinaryMask::empty(mask.width(), mask.height());
    for (x, y) in mask.points() {
        for &(dx, dy) in &offsets {
            let nx = x as isize + dx;
            let ny = y as isize + dy;
            if nx >= 0 && ny >= 0 && nx < w && ny < h {
                out.set(nx as usize, ny as usize, true);
            }
        }
    }
    out
}
