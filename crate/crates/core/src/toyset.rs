//! Deterministic synthetic faces.
//!
//! Two generators live here:
//!
//! * [`generate`] renders full RGB scenes: a skin-colored ellipse head on a
//!   green-gray background with eyes, eyebrows, a darker nose and lips.
//!   Each person has its own facial geometry; each sample adds a small
//!   rotation, translation, brightness change and pixel noise.
//! * [`ChipSpec`] paints axis-aligned rectangles directly into a 50x50
//!   YCbCr chip, with landmark positions known in closed form. It drives
//!   the fiducial tests.
//!
//! Facial geometry is expressed in chip coordinates, so the layout a person
//! is rendered with is (up to jitter) the layout the normalized chip shows.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::face_locate::{CHIP_SIZE, HEIGHT_TO_WIDTH};
use crate::fiducial::LandmarkSet;
use crate::imaging::{io, ImageRgb, ImageYCbCr, Jitter};
use crate::rng::seeded_rng;

pub const BACKGROUND_RGB: [f64; 3] = [70.0, 110.0, 60.0];
pub const SKIN_RGB: [f64; 3] = [200.0, 150.0, 120.0];
pub const EYE_RGB: [f64; 3] = [60.0, 70.0, 110.0];
pub const BROW_RGB: [f64; 3] = [70.0, 50.0, 40.0];
pub const NOSE_RGB: [f64; 3] = [120.0, 80.0, 65.0];
pub const LIP_RGB: [f64; 3] = [200.0, 60.0, 80.0];

pub const SKIN_YCBCR: [f64; 3] = [160.0, 105.0, 155.0];
pub const EYE_YCBCR: [f64; 3] = [70.0, 150.0, 118.0];
pub const NOSE_YCBCR: [f64; 3] = [90.0, 112.0, 150.0];
pub const LIP_YCBCR: [f64; 3] = [100.0, 114.0, 196.0];

/// Ellipse in chip coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64) -> bool {
        let u = (x - self.cx) / self.rx;
        let v = (y - self.cy) / self.ry;
        u * u + v * v <= 1.0
    }
}

/// Per-person face layout. Feature positions are chip coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonGeometry {
    /// Horizontal semi-axis of the head in scene pixels; the vertical one
    /// is 1.3 times larger.
    pub head_half_width: f64,
    /// Multiplier on the skin color.
    pub skin_tone: f64,
    pub left_eye: Ellipse,
    pub right_eye: Ellipse,
    pub left_brow: Ellipse,
    pub right_brow: Ellipse,
    pub nose: Ellipse,
    pub mouth: Ellipse,
}

/// Ranges the per-person parameters are spread over.
const PARAM_RANGES: [(f64, f64); 13] = [
    (36.0, 44.0), // head half width
    (0.92, 1.04), // skin tone
    (15.5, 19.0), // eye row
    (8.0, 12.0),  // eye half spacing
    (2.2, 3.8),   // eye half width
    (1.1, 1.5),   // eye half height
    (3.8, 5.2),   // brow height above eye
    (27.0, 31.0), // nose row
    (2.5, 5.0),   // nose half width
    (1.3, 2.0),   // nose half height
    (38.0, 42.0), // mouth row
    (5.0, 9.0),   // mouth half width
    (1.2, 2.0),   // mouth half height
];

impl PersonGeometry {
    fn from_params(p: &[f64; 13]) -> Self {
        let mid = (CHIP_SIZE as f64 - 1.0) / 2.0;
        let [head, tone, eye_y, eye_dx, eye_rx, eye_ry, brow_up, nose_y, nose_rx, nose_ry, mouth_y, mouth_rx, mouth_ry] =
            *p;
        let eye = |cx| Ellipse {
            cx,
            cy: eye_y,
            rx: eye_rx,
            ry: eye_ry,
        };
        let brow = |cx| Ellipse {
            cx,
            cy: eye_y - brow_up,
            rx: eye_rx + 1.0,
            ry: 0.8,
        };
        Self {
            head_half_width: head,
            skin_tone: tone,
            left_eye: eye(mid - eye_dx),
            right_eye: eye(mid + eye_dx),
            left_brow: brow(mid - eye_dx),
            right_brow: brow(mid + eye_dx),
            nose: Ellipse {
                cx: mid,
                cy: nose_y,
                rx: nose_rx,
                ry: nose_ry,
            },
            mouth: Ellipse {
                cx: mid,
                cy: mouth_y,
                rx: mouth_rx,
                ry: mouth_ry,
            },
        }
    }

    /// Color of the face at chip coordinates `(x, y)`.
    fn color_at(&self, x: f64, y: f64) -> [f64; 3] {
        if self.left_eye.contains(x, y) || self.right_eye.contains(x, y) {
            EYE_RGB
        } else if self.left_brow.contains(x, y) || self.right_brow.contains(x, y) {
            BROW_RGB
        } else if self.nose.contains(x, y) {
            NOSE_RGB
        } else if self.mouth.contains(x, y) {
            LIP_RGB
        } else {
            SKIN_RGB.map(|c| c * self.skin_tone)
        }
    }
}

/// Geometry of every person. Each parameter is spread over its range by a
/// seeded Latin-hypercube layout, so no two persons coincide in any single
/// parameter's stratum.
pub fn person_geometries(persons: usize, seed: u64) -> Vec<PersonGeometry> {
    let mut strata: Vec<Vec<usize>> = Vec::with_capacity(PARAM_RANGES.len());
    let mut rng = seeded_rng(seed, u64::MAX);
    for _ in PARAM_RANGES {
        let mut order: Vec<usize> = (0..persons).collect();
        order.shuffle(&mut rng);
        strata.push(order);
    }
    (0..persons)
        .map(|p| {
            let params = std::array::from_fn(|j| {
                let (lo, hi) = PARAM_RANGES[j];
                let offset: f64 = rng.random_range(0.25..0.75);
                lo + (hi - lo) * (strata[j][p] as f64 + offset) / persons as f64
            });
            PersonGeometry::from_params(&params)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToysetConfig {
    pub persons: usize,
    pub samples: usize,
    pub seed: u64,
    /// Square scene side in pixels.
    pub size: usize,
    pub max_angle_deg: f64,
    pub max_shift: f64,
    /// Brightness gain is drawn from `1 +- max_gain`.
    pub max_gain: f64,
    /// Per-channel uniform noise amplitude.
    pub noise: f64,
}

impl Default for ToysetConfig {
    fn default() -> Self {
        Self {
            persons: 5,
            samples: 20,
            seed: 7,
            size: 160,
            max_angle_deg: 5.0,
            max_shift: 4.0,
            max_gain: 0.1,
            noise: 3.0,
        }
    }
}

impl ToysetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.persons == 0 || self.samples == 0 {
            return Err(Error::InvalidParameter(
                "toyset needs at least one person and one sample".into(),
            ));
        }
        if self.persons > 99 || self.samples > 99 {
            return Err(Error::InvalidParameter(
                "toyset supports at most 99 persons and 99 samples".into(),
            ));
        }
        if self.size < 130 {
            return Err(Error::InvalidParameter(format!(
                "scene size {} is too small for the head",
                self.size
            )));
        }
        Ok(())
    }
}

/// Renders one person under a pose. Noise is drawn from `rng`.
pub fn render_scene(geometry: &PersonGeometry, pose: &Jitter, size: usize, noise: f64, rng: &mut impl Rng) -> ImageRgb {
    let a = geometry.head_half_width;
    let b = HEIGHT_TO_WIDTH * a;
    let center = (size as f64 / 2.0 + pose.dx, size as f64 / 2.0 + pose.dy);
    let (sin, cos) = pose.angle_deg.to_radians().sin_cos();
    let span = CHIP_SIZE as f64 - 1.0;
    let sample = |x: f64, y: f64| -> [f64; 3] {
        // Undo the head rotation about its center.
        let (ox, oy) = (x - center.0, y - center.1);
        let (hx, hy) = (cos * ox + sin * oy, -sin * ox + cos * oy);
        let (u, v) = (hx / a, hy / b);
        if u * u + v * v > 1.0 {
            return BACKGROUND_RGB;
        }
        geometry.color_at((u + 1.0) / 2.0 * span, (v + 1.0) / 2.0 * span)
    };
    let mut img = ImageRgb::filled(size, size, [0.0; 3]);
    for y in 0..size {
        for x in 0..size {
            let mut acc = [0.0; 3];
            for (sx, sy) in [(-0.25, -0.25), (0.25, -0.25), (-0.25, 0.25), (0.25, 0.25)] {
                let c = sample(x as f64 + sx, y as f64 + sy);
                for k in 0..3 {
                    acc[k] += c[k] / 4.0;
                }
            }
            let px = acc.map(|c| {
                let n = if noise > 0.0 {
                    rng.random_range(-noise..=noise)
                } else {
                    0.0
                };
                (c * pose.gain + n).clamp(0.0, 255.0)
            });
            img.set(x, y, px);
        }
    }
    img
}

#[derive(Debug, Clone)]
pub struct ToySample {
    pub person: usize,
    pub sample: usize,
    pub pose: Jitter,
    pub image: ImageRgb,
}

impl ToySample {
    pub fn relative_path(&self) -> PathBuf {
        Path::new(&person_dir_name(self.person)).join(format!("sample_{:02}.png", self.sample))
    }
}

pub fn person_dir_name(person: usize) -> String {
    format!("person_{person:02}")
}

fn sample_pose(cfg: &ToysetConfig, rng: &mut impl Rng) -> Jitter {
    let sym = |rng: &mut dyn rand::RngCore, m: f64| if m > 0.0 { rng.random_range(-m..=m) } else { 0.0 };
    Jitter {
        angle_deg: sym(rng, cfg.max_angle_deg),
        dx: sym(rng, cfg.max_shift),
        dy: sym(rng, cfg.max_shift),
        gain: 1.0 + sym(rng, cfg.max_gain),
    }
}

/// Renders one sample. Independent of every other sample.
pub fn render_sample(cfg: &ToysetConfig, geometry: &PersonGeometry, person: usize, sample: usize) -> ToySample {
    let mut rng = seeded_rng(cfg.seed, (person as u64) << 32 | sample as u64);
    let pose = sample_pose(cfg, &mut rng);
    let image = render_scene(geometry, &pose, cfg.size, cfg.noise, &mut rng);
    ToySample {
        person,
        sample,
        pose,
        image,
    }
}

/// All `persons x samples` scenes, person-major.
pub fn generate(cfg: &ToysetConfig) -> Result<Vec<ToySample>> {
    cfg.validate()?;
    let geometries = person_geometries(cfg.persons, cfg.seed);
    Ok((0..cfg.persons * cfg.samples)
        .into_par_iter()
        .map(|i| {
            let (p, s) = (i / cfg.samples, i % cfg.samples);
            render_sample(cfg, &geometries[p], p, s)
        })
        .collect())
}

/// Writes `person_XX/sample_YY.png` under `root` and returns the paths.
pub fn write_toyset(cfg: &ToysetConfig, root: &Path) -> Result<Vec<PathBuf>> {
    let samples = generate(cfg)?;
    for p in 0..cfg.persons {
        let dir = root.join(person_dir_name(p));
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    samples
        .par_iter()
        .map(|s| {
            let path = root.join(s.relative_path());
            io::write_rgb(&s.image, &path)?;
            Ok(path)
        })
        .collect()
}

/// Noise-free frontal face of the first person of the default set.
pub fn sample_scene() -> ImageRgb {
    let cfg = ToysetConfig::default();
    let geometry = &person_geometries(cfg.persons, cfg.seed)[0];
    render_scene(geometry, &Jitter::IDENTITY, cfg.size, 0.0, &mut seeded_rng(0, 0))
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
}

impl Rect {
    fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..=self.x1).contains(&x) && (self.y0..=self.y1).contains(&y)
    }

    fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) as f64 / 2.0, (self.y0 + self.y1) as f64 / 2.0)
    }
}

/// A 50x50 YCbCr chip made of flat rectangles.
///
/// Eye rectangles are three rows tall and are expected to be located with
/// the default radius-1 dilation; landmark expectations assume that.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipSpec {
    pub skin: [f64; 3],
    pub left_eye: Option<Rect>,
    pub right_eye: Option<Rect>,
    pub nose: Option<Rect>,
    pub mouth: Option<Rect>,
}

impl Default for ChipSpec {
    fn default() -> Self {
        Self {
            skin: SKIN_YCBCR,
            left_eye: Some(Rect {
                x0: 13,
                x1: 17,
                y0: 16,
                y1: 18,
            }),
            right_eye: Some(Rect {
                x0: 32,
                x1: 36,
                y0: 16,
                y1: 18,
            }),
            nose: Some(Rect {
                x0: 22,
                x1: 28,
                y0: 28,
                y1: 30,
            }),
            mouth: Some(Rect {
                x0: 18,
                x1: 32,
                y0: 39,
                y1: 41,
            }),
        }
    }
}

impl ChipSpec {
    /// Random layout that keeps every feature clear of the band limits, the
    /// eye-half midline and the nose band borders.
    pub fn random(rng: &mut impl Rng) -> Self {
        let eye = |rng: &mut dyn rand::RngCore, cx_lo: usize, cx_hi: usize| {
            let cx = rng.random_range(cx_lo..=cx_hi);
            let cy = rng.random_range(14..=19);
            let hw = rng.random_range(1..=3);
            Rect {
                x0: cx - hw,
                x1: cx + hw,
                y0: cy - 1,
                y1: cy + 1,
            }
        };
        let left_eye = eye(rng, 8, 16);
        let right_eye = eye(rng, 33, 41);
        let ncx = rng.random_range(22..=27);
        let nhw = rng.random_range(2..=4);
        let ncy = rng.random_range(27..=31);
        let mcx = rng.random_range(22..=27);
        let mhw = rng.random_range(4..=9);
        let mcy = rng.random_range(38..=43);
        let mhh = rng.random_range(0..=1);
        Self {
            skin: SKIN_YCBCR,
            left_eye: Some(left_eye),
            right_eye: Some(right_eye),
            nose: Some(Rect {
                x0: ncx - nhw,
                x1: ncx + nhw,
                y0: ncy - 1,
                y1: ncy + 1,
            }),
            mouth: Some(Rect {
                x0: mcx - mhw,
                x1: mcx + mhw,
                y0: mcy - mhh,
                y1: mcy + mhh,
            }),
        }
    }

    pub fn render(&self) -> ImageYCbCr {
        let paint = [
            (self.left_eye, EYE_YCBCR),
            (self.right_eye, EYE_YCBCR),
            (self.nose, NOSE_YCBCR),
            (self.mouth, LIP_YCBCR),
        ];
        ImageYCbCr::from_fn(CHIP_SIZE, CHIP_SIZE, |x, y| {
            paint
                .iter()
                .find_map(|(r, c)| r.filter(|r| r.contains(x, y)).map(|_| *c))
                .unwrap_or(self.skin)
        })
    }

    /// Columns of the nose's outer Sobel ring.
    ///
    /// # Panics
    /// Panics if the spec has no nose.
    pub fn nose_extent(&self) -> (f64, f64) {
        let n = self.nose.expect("spec has a nose");
        (n.x0 as f64 - 1.0, n.x1 as f64 + 1.0)
    }

    /// Closed-form landmark positions, or `None` if a feature is missing.
    pub fn expected_landmarks(&self) -> Option<LandmarkSet> {
        let (le, re, n, m) = (self.left_eye?, self.right_eye?, self.nose?, self.mouth?);
        // Dilated eyes and Sobel rings both reach one pixel past the
        // rectangle on each side.
        let outer = |r: Rect| {
            let (_, cy) = r.center();
            [(r.x0 as f64 - 1.0, cy), (r.x1 as f64 + 1.0, cy)]
        };
        let [p1, p2] = outer(le);
        let [p3, p4] = outer(re);
        let [p7, p8] = outer(m);
        let [p9, p10] = outer(n);
        Some(LandmarkSet::from_positions([
            p1,
            p2,
            p3,
            p4,
            le.center(),
            re.center(),
            p7,
            p8,
            p9,
            p10,
        ]))
    }
}
