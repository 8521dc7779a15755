use super::edges::neighbors8;
use super::BinaryMask;

/// An 8-connected region of set pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub area: usize,
    /// Mean pixel position `(x, y)`.
    pub centroid: (f64, f64),
    /// Inclusive `(left, top, right, bottom)`.
    pub bbox: (usize, usize, usize, usize),
    /// Member pixels in discovery order.
    pub pixels: Vec<(usize, usize)>,
}

impl Component {
    pub(crate) fn from_pixels(pixels: Vec<(usize, usize)>) -> Self {
        let area = pixels.len();
        let (mut sx, mut sy) = (0.0, 0.0);
        let (mut left, mut top) = (usize::MAX, usize::MAX);
        let (mut right, mut bottom) = (0, 0);
        for &(x, y) in &pixels {
            sx += x as f64;
            sy += y as f64;
            left = left.min(x);
            right = right.max(x);
            top = top.min(y);
            bottom = bottom.max(y);
        }
        Self {
            area,
            centroid: (sx / area as f64, sy / area as f64),
            bbox: (left, top, right, bottom),
            pixels,
        }
    }

    /// Renders the component alone into a mask of the given size.
    pub fn to_mask(&self, width: usize, height: usize) -> BinaryMask {
        let mut mask = BinaryMask::empty(width, height);
        for &(x, y) in &self.pixels {
            mask.set(x, y, true);
        }
        mask
    }

    /// Mean row of the member pixels in the leftmost column, and that column.
    pub fn leftmost(&self) -> (f64, f64) {
        extreme_column(&self.pixels, self.bbox.0)
    }

    /// Mean row of the member pixels in the rightmost column, and that column.
    pub fn rightmost(&self) -> (f64, f64) {
        extreme_column(&self.pixels, self.bbox.2)
    }
}

fn extreme_column(pixels: &[(usize, usize)], column: usize) -> (f64, f64) {
    let (sum, n) = pixels
        .iter()
        .filter(|(x, _)| *x == column)
        .fold((0.0, 0usize), |(s, n), &(_, y)| (s + y as f64, n + 1));
    (column as f64, sum / n as f64)
}

/// Labels 8-connected components, ordered by their first pixel in raster
/// order.
pub fn connected_components(mask: &BinaryMask) -> Vec<Component> {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) || seen[y * w + x] {
                continue;
            }
            seen[y * w + x] = true;
            let mut pixels = vec![(x, y)];
            let mut head = 0;
            while head < pixels.len() {
                let (px, py) = pixels[head];
                head += 1;
                for (nx, ny) in neighbors8(px, py, w, h) {
                    if mask.get(nx, ny) && !seen[ny * w + nx] {
                        seen[ny * w + nx] = true;
                        pixels.push((nx, ny));
                    }
                }
            }
            out.push(Component::from_pixels(pixels));
        }
    }
    out
}

/// Largest component; equal areas go to the topmost, then leftmost, bbox
/// corner.
pub fn largest_component(components: Vec<Component>) -> Option<Component> {
    components.into_iter().reduce(|best, c| {
        let better = c.area > best.area || (c.area == best.area && (c.bbox.1, c.bbox.0) < (best.bbox.1, best.bbox.0));
        if better {
            c
        } else {
            best
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_mask_has_no_components() {
        assert!(connected_components(&BinaryMask::empty(5, 5)).is_empty());
    }

    #[test]
    fn diagonal_pixels_join() {
        let mut m = BinaryMask::empty(4, 4);
        m.set(1, 1, true);
        m.set(2, 2, true);
        let c = connected_components(&m);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].area, 2);
        assert_eq!(c[0].centroid, (1.5, 1.5));
        assert_eq!(c[0].bbox, (1, 1, 2, 2));
    }

    #[test]
    fn corners_of_three_by_three_are_separate() {
        // Brute force on the 9-pixel grid: corners (0,0),(2,0),(0,2),(2,2)
        // differ by 2 in at least one axis, so no pair is 8-adjacent.
        let m = BinaryMask::from_fn(3, 3, |x, y| x != 1 && y != 1);
        let c = connected_components(&m);
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|c| c.area == 1));
    }

    #[test]
    fn largest_prefers_area_then_top_left() {
        let m = BinaryMask::from_fn(12, 12, |x, y| {
            (x < 3 && (6..9).contains(&y)) || ((8..11).contains(&x) && (1..4).contains(&y))
        });
        let best = largest_component(connected_components(&m)).unwrap();
        assert_eq!(best.bbox, (8, 1, 10, 3));
    }

    #[test]
    fn extreme_columns_average_rows() {
        let m = BinaryMask::from_fn(6, 6, |x, y| (1..=4).contains(&x) && (2..=3).contains(&y));
        let c = &connected_components(&m)[0];
        assert_eq!(c.leftmost(), (1.0, 2.5));
        assert_eq!(c.rightmost(), (4.0, 2.5));
    }
}
