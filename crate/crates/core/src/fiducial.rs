//! Ten characteristic points on the normalized face chip.
//!
//! * Eyes: the map `max(0, Cb - Cr)` over the eye band is thresholded, the
//!   band is split into equal left/right halves, and the largest stain of
//!   each half is dilated by a disk. Its horizontal extremes give P1/P2 and
//!   P3/P4, its centroid P5/P6.
//! * Mouth: Cr is thresholded over the mouth band; the contour of the
//!   largest stain (Sobel of its silhouette) gives P7/P8.
//! * Nose: luminance Sobel over the band between the eye centers and the
//!   mouth; the extremes of the largest response give P9/P10.
//!
//! Thresholds are fractions of each map's range over its band, so they do
//! not depend on absolute chrominance levels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FacialFeature, Result};
use crate::imaging::{
    connected_components, dilate_disk, largest_component, sobel_magnitude, BinaryMask, Component, ImageGray,
    ImageYCbCr, YCbCrChannel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    P9,
    P10,
}

impl Role {
    pub const ALL: [Role; 10] = [
        Role::P1,
        Role::P2,
        Role::P3,
        Role::P4,
        Role::P5,
        Role::P6,
        Role::P7,
        Role::P8,
        Role::P9,
        Role::P10,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Counterpart under a horizontal mirror of the face.
    pub fn mirrored(self) -> Role {
        match self {
            Role::P1 => Role::P4,
            Role::P2 => Role::P3,
            Role::P3 => Role::P2,
            Role::P4 => Role::P1,
            Role::P5 => Role::P6,
            Role::P6 => Role::P5,
            Role::P7 => Role::P8,
            Role::P8 => Role::P7,
            Role::P9 => Role::P10,
            Role::P10 => Role::P9,
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.to_string() == s)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.index() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub role: Role,
    pub x: f64,
    pub y: f64,
}

impl Landmark {
    pub fn new(role: Role, (x, y): (f64, f64)) -> Self {
        Self { role, x, y }
    }

    pub fn distance(&self, other: &Landmark) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Nearest pixel, clamped at 0.
    pub fn pixel(&self) -> (usize, usize) {
        (self.x.round().max(0.0) as usize, self.y.round().max(0.0) as usize)
    }
}

/// One landmark per role, stored in role order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSet {
    points: [Landmark; 10],
}

impl LandmarkSet {
    /// Builds a set from positions in role order, without validation.
    pub fn from_positions(positions: [(f64, f64); 10]) -> Self {
        let points = std::array::from_fn(|i| Landmark::new(Role::ALL[i], positions[i]));
        Self { points }
    }

    pub fn get(&self, role: Role) -> &Landmark {
        &self.points[role.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Landmark> {
        self.points.iter()
    }

    pub fn positions(&self) -> [(f64, f64); 10] {
        std::array::from_fn(|i| (self.points[i].x, self.points[i].y))
    }

    /// The set a horizontally mirrored chip of the given width should
    /// produce: `x -> width - 1 - x` with left/right roles swapped.
    pub fn mirrored(&self, width: usize) -> Self {
        let mut positions = [(0.0, 0.0); 10];
        for p in &self.points {
            positions[p.role.mirrored().index()] = (width as f64 - 1.0 - p.x, p.y);
        }
        Self::from_positions(positions)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let positions = std::array::from_fn(|i| f(self.points[i].x, self.points[i].y));
        Self::from_positions(positions)
    }

    /// `role x y` lines.
    pub fn to_text(&self) -> String {
        self.points
            .iter()
            .map(|p| format!("{} {:.4} {:.4}\n", p.role, p.x, p.y))
            .collect()
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut positions: [Option<(f64, f64)>; 10] = [None; 10];
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut parts = line.split_whitespace();
            let bad = || Error::InvalidInput(format!("malformed landmark line `{line}`"));
            let role = parts.next().and_then(Role::parse).ok_or_else(bad)?;
            let x: f64 = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let y: f64 = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            positions[role.index()] = Some((x, y));
        }
        let mut out = [(0.0, 0.0); 10];
        for (i, p) in positions.iter().enumerate() {
            out[i] = p.ok_or_else(|| Error::InvalidInput(format!("landmark {} missing", Role::ALL[i])))?;
        }
        Ok(Self::from_positions(out))
    }
}

/// Search bands (inclusive chip rows) and relative thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FiducialConfig {
    pub eye_rows: (usize, usize),
    pub mouth_rows: (usize, usize),
    pub tau_eye: f64,
    pub tau_mouth: f64,
    pub tau_nose: f64,
    pub eye_dilation: usize,
    /// Rows kept clear between the nose band and the eye/mouth points.
    pub nose_margin: usize,
}

impl Default for FiducialConfig {
    fn default() -> Self {
        Self {
            eye_rows: (10, 25),
            mouth_rows: (32, 48),
            tau_eye: 0.8,
            tau_mouth: 0.85,
            tau_nose: 0.5,
            eye_dilation: 1,
            nose_margin: 2,
        }
    }
}

impl FiducialConfig {
    pub fn validate(&self) -> Result<()> {
        let band_ok = |(a, b): (usize, usize)| a <= b;
        if !band_ok(self.eye_rows) || !band_ok(self.mouth_rows) {
            return Err(Error::Config("search bands must have first row <= last row".into()));
        }
        for (name, tau) in [
            ("tau_eye", self.tau_eye),
            ("tau_mouth", self.tau_mouth),
            ("tau_nose", self.tau_nose),
        ] {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {tau}")));
            }
        }
        Ok(())
    }
}

fn clamp_band((a, b): (usize, usize), height: usize) -> (usize, usize) {
    (a.min(height - 1), b.min(height - 1))
}

/// Band pixels at or above `lo + tau (hi - lo)` of the band's range.
/// `None` when the band is flat.
fn relative_threshold(map: &ImageGray, rows: (usize, usize), cols: (usize, usize), tau: f64) -> Option<BinaryMask> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for y in rows.0..=rows.1 {
        for x in cols.0..=cols.1 {
            let v = map.get(x, y);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !(hi > lo) {
        return None;
    }
    let t = lo + tau * (hi - lo);
    Some(BinaryMask::from_fn(map.width(), map.height(), |x, y| {
        (rows.0..=rows.1).contains(&y) && (cols.0..=cols.1).contains(&x) && map.get(x, y) >= t
    }))
}

fn restrict(mask: &BinaryMask, keep: impl Fn(usize, usize) -> bool) -> BinaryMask {
    BinaryMask::from_fn(mask.width(), mask.height(), |x, y| mask.get(x, y) && keep(x, y))
}

fn mask_component(mask: &BinaryMask) -> Option<Component> {
    // Statistics over all set pixels as one region.
    let pixels: Vec<_> = mask.points().collect();
    if pixels.is_empty() {
        return None;
    }
    Some(Component::from_pixels(pixels))
}

fn not_found(feature: FacialFeature, reason: impl Into<String>) -> Error {
    Error::FeatureNotFound {
        feature,
        reason: reason.into(),
    }
}

/// P1..P6 in role order.
pub fn locate_eyes(chip: &ImageYCbCr, cfg: &FiducialConfig) -> Result<[Landmark; 6]> {
    let (w, h) = (chip.width(), chip.height());
    let rows = clamp_band(cfg.eye_rows, h);
    let eye_map = ImageGray::from_fn(w, h, |x, y| {
        let [_, cb, cr] = chip.get(x, y);
        (cb - cr).max(0.0)
    });
    let candidates = relative_threshold(&eye_map, rows, (0, w - 1), cfg.tau_eye)
        .map(|m| restrict(&m, |x, y| eye_map.get(x, y) > 0.0))
        .ok_or_else(|| not_found(FacialFeature::LeftEye, "eye map is flat over the eye band"))?;

    let mid = w / 2;
    let halves = [
        (FacialFeature::LeftEye, 0, mid - 1),
        (FacialFeature::RightEye, mid, w - 1),
    ];
    let mut out = Vec::with_capacity(6);
    let mut centers = Vec::with_capacity(2);
    for (feature, c0, c1) in halves {
        let in_half = |x: usize, y: usize| (c0..=c1).contains(&x) && (rows.0..=rows.1).contains(&y);
        let half = restrict(&candidates, in_half);
        let stain = largest_component(connected_components(&half))
            .ok_or_else(|| not_found(feature, "no stain above threshold in its half"))?;
        let dilated = restrict(&dilate_disk(&stain.to_mask(w, h), cfg.eye_dilation), in_half);
        let stain = mask_component(&dilated).expect("dilation keeps the stain");
        out.push(stain.leftmost());
        out.push(stain.rightmost());
        centers.push(stain.centroid);
    }
    out.extend(centers);
    Ok(std::array::from_fn(|i| Landmark::new(Role::ALL[i], out[i])))
}

/// P7, P8.
pub fn locate_mouth(chip: &ImageYCbCr, cfg: &FiducialConfig) -> Result<[Landmark; 2]> {
    let (w, h) = (chip.width(), chip.height());
    let rows = clamp_band(cfg.mouth_rows, h);
    let cr = chip.channel(YCbCrChannel::Cr);
    let candidates = relative_threshold(&cr, rows, (0, w - 1), cfg.tau_mouth)
        .ok_or_else(|| not_found(FacialFeature::Mouth, "Cr is flat over the mouth band"))?;
    let stain = largest_component(connected_components(&candidates))
        .ok_or_else(|| not_found(FacialFeature::Mouth, "no stain above threshold"))?;
    let edges = sobel_magnitude(&ImageGray::from_mask(&stain.to_mask(w, h)))?;
    let (_, peak) = edges.min_max();
    let contour = BinaryMask::from_fn(w, h, |x, y| {
        (rows.0..=rows.1).contains(&y) && edges.get(x, y) > 0.0 && edges.get(x, y) >= 0.5 * peak
    });
    let contour = mask_component(&contour).ok_or_else(|| not_found(FacialFeature::Mouth, "empty contour"))?;
    Ok([
        Landmark::new(Role::P7, contour.leftmost()),
        Landmark::new(Role::P8, contour.rightmost()),
    ])
}

/// P9, P10 from the band between the eye centers and the mouth points.
pub fn locate_nose(
    chip: &ImageYCbCr,
    eyes: &[Landmark; 6],
    mouth: &[Landmark; 2],
    cfg: &FiducialConfig,
) -> Result<[Landmark; 2]> {
    let (p5, p6) = (&eyes[4], &eyes[5]);
    let top = p5.y.max(p6.y).ceil() + cfg.nose_margin as f64;
    let bottom = mouth[0].y.min(mouth[1].y).floor() - cfg.nose_margin as f64;
    let left = p5.x.min(p6.x).ceil().max(0.0);
    let right = p5.x.max(p6.x).floor().min(chip.width() as f64 - 1.0);
    if bottom - top + 1.0 < 3.0 || right - left + 1.0 < 3.0 || top < 0.0 {
        return Err(not_found(
            FacialFeature::Nose,
            format!("degenerate nose band rows {top}..{bottom}, columns {left}..{right}"),
        ));
    }
    let (top, bottom, left, right) = (top as usize, bottom as usize, left as usize, right as usize);
    let band = chip.channel(YCbCrChannel::Y).crop(left, top, right, bottom)?;
    let edges = sobel_magnitude(&band)?;
    let (bw, bh) = (band.width(), band.height());
    let candidates = relative_threshold(&edges, (0, bh - 1), (0, bw - 1), cfg.tau_nose)
        .ok_or_else(|| not_found(FacialFeature::Nose, "no luminance structure in the nose band"))?;
    let stain = largest_component(connected_components(&candidates))
        .ok_or_else(|| not_found(FacialFeature::Nose, "no edge above threshold"))?;
    let shift = |(x, y): (f64, f64)| (x + left as f64, y + top as f64);
    Ok([
        Landmark::new(Role::P9, shift(stain.leftmost())),
        Landmark::new(Role::P10, shift(stain.rightmost())),
    ])
}

/// Runs the three locators and checks the ordering invariants.
pub fn landmarks(chip: &ImageYCbCr, cfg: &FiducialConfig) -> Result<LandmarkSet> {
    let eyes = locate_eyes(chip, cfg)?;
    let mouth = locate_mouth(chip, cfg)?;
    let nose = locate_nose(chip, &eyes, &mouth, cfg)?;
    let mut positions = [(0.0, 0.0); 10];
    for lm in eyes.iter().chain(&mouth).chain(&nose) {
        positions[lm.role.index()] = (lm.x, lm.y);
    }
    let set = LandmarkSet::from_positions(positions);
    validate(&set, chip.width(), chip.height(), cfg)?;
    Ok(set)
}

/// Ordering and band invariants of a landmark set.
pub fn validate(set: &LandmarkSet, width: usize, height: usize, cfg: &FiducialConfig) -> Result<()> {
    let mut bad = Vec::new();
    let p = |r: Role| set.get(r);
    for (a, b) in [
        (Role::P1, Role::P2),
        (Role::P3, Role::P4),
        (Role::P7, Role::P8),
        (Role::P9, Role::P10),
    ] {
        if p(a).x > p(b).x {
            bad.extend([a, b]);
        }
    }
    for lm in set.iter() {
        if !(lm.x >= 0.0 && lm.y >= 0.0 && lm.x < width as f64 && lm.y < height as f64) {
            bad.push(lm.role);
        }
    }
    let in_band = |y: f64, (a, b): (usize, usize)| y >= a as f64 && y <= b as f64;
    for r in [Role::P1, Role::P2, Role::P3, Role::P4, Role::P5, Role::P6] {
        if !in_band(p(r).y, cfg.eye_rows) {
            bad.push(r);
        }
    }
    for r in [Role::P7, Role::P8] {
        if !in_band(p(r).y, cfg.mouth_rows) {
            bad.push(r);
        }
    }
    let eye_y = (p(Role::P5).y + p(Role::P6).y) / 2.0;
    let nose_y = (p(Role::P9).y + p(Role::P10).y) / 2.0;
    let mouth_y = (p(Role::P7).y + p(Role::P8).y) / 2.0;
    if !(eye_y < nose_y && nose_y < mouth_y) {
        bad.extend([Role::P9, Role::P10]);
    }
    if bad.is_empty() {
        Ok(())
    } else {
        bad.sort();
        bad.dedup();
        Err(Error::LandmarkInconsistency { roles: bad })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toyset::{ChipSpec, SKIN_YCBCR};

    fn blank() -> Vec<[f64; 3]> {
        vec![SKIN_YCBCR; 50 * 50]
    }

    fn chip(pixels: &[[f64; 3]]) -> ImageYCbCr {
        ImageYCbCr::from_fn(50, 50, |x, y| pixels[y * 50 + x])
    }

    fn paint(
        px: &mut [[f64; 3]],
        xs: std::ops::RangeInclusive<usize>,
        ys: std::ops::RangeInclusive<usize>,
        v: [f64; 3],
    ) {
        for y in ys {
            for x in xs.clone() {
                px[y * 50 + x] = v;
            }
        }
    }

    const EYE: [f64; 3] = [70.0, 150.0, 118.0];
    const LIP: [f64; 3] = [100.0, 114.0, 196.0];

    #[test]
    fn eye_centroids_of_symmetric_blobs() {
        let mut px = blank();
        paint(&mut px, 14..=16, 16..=18, EYE);
        paint(&mut px, 34..=36, 16..=18, EYE);
        let eyes = locate_eyes(&chip(&px), &FiducialConfig::default()).unwrap();
        assert!((eyes[4].x - 15.0).abs() <= 1.0 && (eyes[4].y - 17.0).abs() <= 1.0);
        assert!((eyes[5].x - 35.0).abs() <= 1.0 && (eyes[5].y - 17.0).abs() <= 1.0);
        // Dilation by radius 1 extends the 3x3 blob one pixel sideways.
        assert_eq!((eyes[0].x, eyes[1].x), (13.0, 17.0));

        let mirrored = locate_eyes(&chip(&px).flip_horizontal(), &FiducialConfig::default()).unwrap();
        assert!((mirrored[4].x - (49.0 - eyes[5].x)).abs() < 1e-9);
        assert!((mirrored[5].x - (49.0 - eyes[4].x)).abs() < 1e-9);
    }

    #[test]
    fn blob_touching_midline_stays_in_its_half() {
        let mut px = blank();
        paint(&mut px, 20..=24, 15..=17, EYE);
        paint(&mut px, 33..=35, 15..=17, EYE);
        let eyes = locate_eyes(&chip(&px), &FiducialConfig::default()).unwrap();
        assert!(eyes[1].x <= 24.0, "left eye leaked over the midline: {}", eyes[1].x);
        assert!(eyes[2].x >= 25.0);
    }

    #[test]
    fn missing_eye_names_the_side() {
        let mut px = blank();
        paint(&mut px, 14..=16, 16..=18, EYE);
        let err = locate_eyes(&chip(&px), &FiducialConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::FeatureNotFound {
                feature: FacialFeature::RightEye,
                ..
            }
        ));
    }

    #[test]
    fn mouth_bar_extremes() {
        let mut px = blank();
        paint(&mut px, 18..=32, 40..=40, LIP);
        let m = locate_mouth(&chip(&px), &FiducialConfig::default()).unwrap();
        assert!((m[0].x - 18.0).abs() <= 1.0 && (m[0].y - 40.0).abs() <= 1.0);
        assert!((m[1].x - 32.0).abs() <= 1.0 && (m[1].y - 40.0).abs() <= 1.0);

        let mm = locate_mouth(&chip(&px).flip_horizontal(), &FiducialConfig::default()).unwrap();
        assert!((mm[0].x - (49.0 - m[1].x)).abs() < 1e-9);
        assert!((mm[1].x - (49.0 - m[0].x)).abs() < 1e-9);
    }

    #[test]
    fn mouth_uses_largest_blob() {
        let mut px = blank();
        paint(&mut px, 15..=29, 38..=39, LIP); // 30 pixels
        paint(&mut px, 40..=42, 45..=46, LIP); // 6 pixels
        let m = locate_mouth(&chip(&px), &FiducialConfig::default()).unwrap();
        assert!((m[0].x - 15.0).abs() <= 1.0);
        assert!((m[1].x - 29.0).abs() <= 1.0);
        let empty = locate_mouth(&chip(&blank()), &FiducialConfig::default()).unwrap_err();
        assert!(matches!(
            empty,
            Error::FeatureNotFound {
                feature: FacialFeature::Mouth,
                ..
            }
        ));
    }

    #[test]
    fn nose_between_eyes_and_mouth() {
        let spec = ChipSpec::default();
        let c = spec.render();
        let cfg = FiducialConfig::default();
        let eyes = locate_eyes(&c, &cfg).unwrap();
        let mouth = locate_mouth(&c, &cfg).unwrap();
        let nose = locate_nose(&c, &eyes, &mouth, &cfg).unwrap();
        let (l, r) = spec.nose_extent();
        assert!((nose[0].x - l).abs() <= 1.0, "P9 {:?} vs {l}", nose[0]);
        assert!((nose[1].x - r).abs() <= 1.0, "P10 {:?} vs {r}", nose[1]);

        let m = c.flip_horizontal();
        let mn = locate_nose(
            &m,
            &locate_eyes(&m, &cfg).unwrap(),
            &locate_mouth(&m, &cfg).unwrap(),
            &cfg,
        )
        .unwrap();
        assert!((mn[0].x - (49.0 - nose[1].x)).abs() <= 1.0);
        assert!((mn[1].x - (49.0 - nose[0].x)).abs() <= 1.0);
    }

    #[test]
    fn inverted_bands_fail_on_the_nose() {
        let c = ChipSpec::default().render();
        let cfg = FiducialConfig::default();
        let eyes = locate_eyes(&c, &cfg).unwrap();
        // Mouth points placed above the eyes.
        let mouth = [
            Landmark::new(Role::P7, (18.0, 5.0)),
            Landmark::new(Role::P8, (32.0, 5.0)),
        ];
        let err = locate_nose(&c, &eyes, &mouth, &cfg).unwrap_err();
        assert!(matches!(
            err,
            Error::FeatureNotFound {
                feature: FacialFeature::Nose,
                ..
            }
        ));
    }

    #[test]
    fn full_synthetic_face() {
        let spec = ChipSpec::default();
        let c = spec.render();
        let set = landmarks(&c, &FiducialConfig::default()).unwrap();
        let expected = spec.expected_landmarks().unwrap();
        for (got, want) in set.iter().zip(expected.iter()) {
            let d = got.distance(want);
            assert!(
                d <= 1.5,
                "{}: got ({}, {}), want ({}, {})",
                got.role,
                got.x,
                got.y,
                want.x,
                want.y
            );
        }
        assert_eq!(landmarks(&c, &FiducialConfig::default()).unwrap(), set);
    }

    #[test]
    fn chip_without_mouth_fails() {
        let spec = ChipSpec {
            mouth: None,
            ..ChipSpec::default()
        };
        let err = landmarks(&spec.render(), &FiducialConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::FeatureNotFound {
                feature: FacialFeature::Mouth,
                ..
            }
        ));
    }

    #[test]
    fn text_round_trip() {
        let set = ChipSpec::default().expected_landmarks().unwrap();
        assert_eq!(
            LandmarkSet::parse_text(&set.to_text()).unwrap().to_text(),
            set.to_text()
        );
        assert!(LandmarkSet::parse_text("P1 1 2\n").is_err());
    }

    #[test]
    fn mirrored_set_swaps_roles() {
        let set = ChipSpec::default().expected_landmarks().unwrap();
        let m = set.mirrored(50);
        assert_eq!(m.get(Role::P4).x, 49.0 - set.get(Role::P1).x);
        assert_eq!(m.mirrored(50), set);
    }
}
