//! Seven inter-landmark distances.

use crate::fiducial::{LandmarkSet, Role};

pub const GEOMETRIC_NAMES: [&str; 7] = [
    "d_center_eye",
    "d_eye",
    "d_interior_eye",
    "d_nose",
    "d_eye_nose",
    "d_mouth",
    "d_nose_mouth",
];

/// Distances in the order of [`GEOMETRIC_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricVector(pub [f64; 7]);

impl GeometricVector {
    pub fn center_eye(&self) -> f64 {
        self.0[0]
    }

    pub fn eye(&self) -> f64 {
        self.0[1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// * center eye: `|P5 P6|`
/// * eye: mean of `|P1 P2|` and `|P3 P4|`
/// * interior eye: `|P2 P3|`
/// * nose: `|P9 P10|`
/// * eye to nose: vertical gap between the midpoints of P5P6 and P9P10
/// * mouth: `|P7 P8|`
/// * nose to mouth: vertical gap between the midpoints of P9P10 and P7P8
pub fn geometric_vector(lms: &LandmarkSet) -> GeometricVector {
    let p = |r: Role| lms.get(r);
    let d = |a: Role, b: Role| p(a).distance(p(b));
    let mid_y = |a: Role, b: Role| (p(a).y + p(b).y) / 2.0;
    GeometricVector([
        d(Role::P5, Role::P6),
        (d(Role::P1, Role::P2) + d(Role::P3, Role::P4)) / 2.0,
        d(Role::P2, Role::P3),
        d(Role::P9, Role::P10),
        (mid_y(Role::P9, Role::P10) - mid_y(Role::P5, Role::P6)).abs(),
        d(Role::P7, Role::P8),
        (mid_y(Role::P7, Role::P8) - mid_y(Role::P9, Role::P10)).abs(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_set() -> LandmarkSet {
        LandmarkSet::from_positions([
            (10.0, 17.0),
            (16.0, 17.0),
            (30.0, 17.0),
            (36.0, 17.0),
            (13.0, 17.0),
            (33.0, 17.0),
            (17.0, 40.0),
            (33.0, 40.0),
            (20.0, 29.0),
            (26.0, 29.0),
        ])
    }

    #[test]
    fn hand_example() {
        let g = geometric_vector(&hand_set());
        assert_eq!(g.0, [20.0, 6.0, 14.0, 6.0, 12.0, 16.0, 11.0]);
    }

    #[test]
    fn translation_and_scale() {
        let base = geometric_vector(&hand_set());
        let moved = geometric_vector(&hand_set().map(|x, y| (x + 3.5, y - 2.25)));
        let scaled = geometric_vector(&hand_set().map(|x, y| (2.0 * x, 2.0 * y)));
        for i in 0..7 {
            assert!((moved.0[i] - base.0[i]).abs() < 1e-12);
            assert!((scaled.0[i] - 2.0 * base.0[i]).abs() < 1e-12);
        }
    }
}
