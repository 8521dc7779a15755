use std::f64::consts::{FRAC_PI_2, PI};

use gaborface::features::{
    build_bank_with, gabor_kernel, geometric_vector, jet_at, orientation_angle, GaborParams, WAVELENGTHS,
};
use gaborface::fiducial::LandmarkSet;
use gaborface::ImageGray;
use proptest::prelude::*;

/// Zero-mean sinusoid of wavelength `lambda` running along direction `theta`.
fn grating(theta: f64, lambda: f64, phase: f64) -> ImageGray {
    let (s, c) = theta.sin_cos();
    ImageGray::from_fn(81, 81, |x, y| {
        let (dx, dy) = (x as f64 - 40.0, y as f64 - 40.0);
        100.0 * (2.0 * PI * (dx * c + dy * s) / lambda + phase).cos()
    })
}

fn landmarks() -> impl Strategy<Value = LandmarkSet> {
    prop::array::uniform10((0.0..50.0f64, 0.0..50.0f64)).prop_map(LandmarkSet::from_positions)
}

proptest! {
    #[test]
    fn kernel_parity(theta in 0.0..PI, wl in 0usize..5) {
        let lambda = WAVELENGTHS[wl];
        let even = gabor_kernel(&GaborParams::with_tied_sigma(theta, lambda, 0.0), 16).unwrap();
        let odd = gabor_kernel(&GaborParams::with_tied_sigma(theta, lambda, FRAC_PI_2), 16).unwrap();
        for dy in -16..=16isize {
            for dx in -16..=16isize {
                prop_assert!((even.at(dx, dy) - even.at(-dx, -dy)).abs() < 1e-12);
                prop_assert!((odd.at(dx, dy) + odd.at(-dx, -dy)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_rotates_with_its_orientation(theta in 0.0..PI, alpha in 0.0..PI, x in -10.0..10.0f64, y in -10.0..10.0f64) {
        let base = GaborParams::with_tied_sigma(theta, 8.0, 0.3);
        let turned = GaborParams { theta: theta + alpha, ..base };
        let (s, c) = alpha.sin_cos();
        let v = turned.value(x * c - y * s, x * s + y * c);
        prop_assert!((v - base.value(x, y)).abs() < 1e-12);
    }

    #[test]
    fn matched_grating_magnitude_ignores_phase(k in 0usize..8, phase in 0.0..(2.0 * PI)) {
        let theta = orientation_angle(k);
        let bank = build_bank_with(&[k], 1.0).unwrap();
        let reference = jet_at(&grating(theta, 8.0, 0.0), (40.0, 40.0), &bank).unwrap().0[2];
        let shifted = jet_at(&grating(theta, 8.0, phase), (40.0, 40.0), &bank).unwrap().0[2];
        prop_assert!((shifted - reference).abs() <= 0.02 * reference);
    }

    #[test]
    fn matched_orientation_dominates_orthogonal(k in 0usize..4, phase in 0.0..(2.0 * PI)) {
        let img = grating(orientation_angle(k), 8.0, phase);
        let bank = build_bank_with(&[k, k + 4], 1.0).unwrap();
        let jet = jet_at(&img, (40.0, 40.0), &bank).unwrap().0;
        // channels are orientation-major: [k x 5 wavelengths, k+4 x 5]
        prop_assert!(jet[2] > 10.0 * jet[7]);
    }

    #[test]
    fn geometric_vector_translation_and_scale(
        set in landmarks(),
        tx in -100.0..100.0f64,
        ty in -100.0..100.0f64,
        scale in 0.1..10.0f64,
    ) {
        let base = geometric_vector(&set);
        let moved = geometric_vector(&set.map(|x, y| (x + tx, y + ty)));
        let scaled = geometric_vector(&set.map(|x, y| (x * scale, y * scale)));
        for i in 0..7 {
            let b = base.0[i];
            let tol = 1e-9 * b.max(1e-3);
            prop_assert!((moved.0[i] - b).abs() <= tol);
            prop_assert!((scaled.0[i] - scale * b).abs() <= tol * scale);
        }
    }
}
