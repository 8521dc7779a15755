//! Overlays for the annotated PNG outputs.

use gaborface::face_locate::{FaceBox, CHIP_SIZE};
use gaborface::fiducial::{LandmarkSet, Role};
use gaborface::ImageRgb;

const EYE: [f64; 3] = [255.0, 40.0, 40.0];
const MOUTH: [f64; 3] = [40.0, 220.0, 40.0];
const NOSE: [f64; 3] = [40.0, 120.0, 255.0];
const BOX: [f64; 3] = [255.0, 255.0, 0.0];

fn role_color(role: Role) -> [f64; 3] {
    match role {
        Role::P7 | Role::P8 => MOUTH,
        Role::P9 | Role::P10 => NOSE,
        _ => EYE,
    }
}

fn put(img: &mut ImageRgb, x: i64, y: i64, c: [f64; 3]) {
    if x >= 0 && y >= 0 && (x as usize) < img.width() && (y as usize) < img.height() {
        img.set(x as usize, y as usize, c);
    }
}

fn cross(img: &mut ImageRgb, x: f64, y: f64, arm: i64, c: [f64; 3]) {
    let (cx, cy) = (x.round() as i64, y.round() as i64);
    for d in -arm..=arm {
        put(img, cx + d, cy, c);
        put(img, cx, cy + d, c);
    }
}

/// Nearest-neighbor enlargement.
pub fn upscale(img: &ImageRgb, factor: usize) -> ImageRgb {
    ImageRgb::from_fn(img.width() * factor, img.height() * factor, |x, y| {
        img.get(x / factor, y / factor)
    })
}

/// Chip enlarged `factor` times with a cross on every landmark.
pub fn annotate_chip(chip: &ImageRgb, lms: &LandmarkSet, factor: usize) -> ImageRgb {
    let mut out = upscale(chip, factor);
    let f = factor as f64;
    for lm in lms.iter() {
        cross(
            &mut out,
            lm.x * f + f / 2.0,
            lm.y * f + f / 2.0,
            factor as i64,
            role_color(lm.role),
        );
    }
    out
}

/// Chip coordinates mapped back into the source image.
pub fn chip_to_scene(face: &FaceBox, img_height: usize, x: f64, y: f64) -> (f64, f64) {
    let span = CHIP_SIZE as f64 - 1.0;
    let bottom = face.bottom.min(img_height - 1);
    (
        face.left as f64 + x * (face.right - face.left) as f64 / span,
        face.top as f64 + y * (bottom - face.top) as f64 / span,
    )
}

/// Source image with the face box outline and landmarks.
pub fn annotate_scene(img: &ImageRgb, face: &FaceBox, lms: Option<&LandmarkSet>) -> ImageRgb {
    let mut out = img.clone();
    let bottom = face.bottom.min(img.height() - 1);
    for x in face.left..=face.right {
        put(&mut out, x as i64, face.top as i64, BOX);
        put(&mut out, x as i64, bottom as i64, BOX);
    }
    for y in face.top..=bottom {
        put(&mut out, face.left as i64, y as i64, BOX);
        put(&mut out, face.right as i64, y as i64, BOX);
    }
    if let Some(lms) = lms {
        for lm in lms.iter() {
            let (x, y) = chip_to_scene(face, img.height(), lm.x, lm.y);
            cross(&mut out, x, y, 2, role_color(lm.role));
        }
    }
    out
}
