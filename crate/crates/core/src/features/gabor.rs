//! Gabor kernels, banks and jets.
//!
//! A kernel is a cosine carrier under a Gaussian envelope,
//!
//! ```text
//! W(x, y) = exp(-(x'^2 + gamma^2 y'^2) / (2 sigma^2)) cos(2 pi x' / lambda + phi)
//! x' =  x cos(theta) + y sin(theta)
//! y' = -x sin(theta) + y cos(theta)
//! ```
//!
//! The bank uses eight orientations `k pi / 8`, five wavelengths
//! `{4, 4 sqrt 2, 8, 8 sqrt 2, 16}`, `sigma = lambda` and `gamma = 1`. Each
//! (orientation, wavelength) channel holds the quadrature pair `phi = 0`
//! and `phi = pi / 2`; a jet coefficient is the magnitude of the pair's
//! responses.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiducial::LandmarkSet;
use crate::imaging::ImageGray;

pub const WAVELENGTHS: [f64; 5] = [4.0, 4.0 * SQRT_2, 8.0, 8.0 * SQRT_2, 16.0];
pub const ORIENTATIONS: usize = 8;

/// Allowed orientation counts.
pub const ORIENTATION_COUNTS: [usize; 6] = [1, 2, 3, 4, 5, 8];

/// Orientation `k` is `theta = k pi / 8`.
pub fn orientation_angle(k: usize) -> f64 {
    k as f64 * PI / ORIENTATIONS as f64
}

/// Default orientation subsets (indices `k` of `k pi / 8`) for each
/// allowed count.
pub fn default_orientation_subset(count: usize) -> Result<&'static [usize]> {
    Ok(match count {
        1 => &[0],
        2 => &[0, 4],
        3 => &[0, 2, 4],
        4 => &[0, 2, 4, 6],
        5 => &[0, 1, 2, 4, 6],
        8 => &[0, 1, 2, 3, 4, 5, 6, 7],
        _ => {
            return Err(Error::InvalidParameter(format!(
                "orientation count must be one of {ORIENTATION_COUNTS:?}, got {count}"
            )))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaborParams {
    /// Orientation in radians.
    pub theta: f64,
    /// Wavelength in pixels.
    pub lambda: f64,
    /// Phase offset in radians.
    pub phi: f64,
    /// Gaussian radius in pixels.
    pub sigma: f64,
    /// Envelope aspect ratio.
    pub gamma: f64,
}

impl GaborParams {
    /// Parameters with `sigma = lambda` and `gamma = 1`.
    pub fn with_tied_sigma(theta: f64, lambda: f64, phi: f64) -> Self {
        Self {
            theta,
            lambda,
            phi,
            sigma: lambda,
            gamma: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.sigma > 0.0 && self.gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gabor lambda, sigma and gamma must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    /// Kernel value at lattice offset `(x, y)`.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (s, c) = self.theta.sin_cos();
        let xr = x * c + y * s;
        let yr = -x * s + y * c;
        let envelope = (-(xr * xr + self.gamma * self.gamma * yr * yr) / (2.0 * self.sigma * self.sigma)).exp();
        envelope * (2.0 * PI * xr / self.lambda + self.phi).cos()
    }
}

/// Square kernel sampled on the integer lattice `[-h, h]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    half_extent: usize,
    data: Vec<f64>,
}

impl Kernel {
    pub fn half_extent(&self) -> usize {
        self.half_extent
    }

    pub fn side(&self) -> usize {
        2 * self.half_extent + 1
    }

    /// Value at offset `(dx, dy)` from the center.
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let h = self.half_extent as isize;
        let side = self.side() as isize;
        self.data[((dy + h) * side + dx + h) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn to_image(&self) -> ImageGray {
        ImageGray::new(self.side(), self.side(), self.data.clone()).expect("kernel is square")
    }
}

pub fn gabor_kernel(p: &GaborParams, half_extent: usize) -> Result<Kernel> {
    p.validate()?;
    if half_extent == 0 {
        return Err(Error::InvalidParameter("kernel half extent must be >= 1".into()));
    }
    let h = half_extent as isize;
    let mut data = Vec::with_capacity((2 * half_extent + 1).pow(2));
    for y in -h..=h {
        for x in -h..=h {
            data.push(p.value(x as f64, y as f64));
        }
    }
    Ok(Kernel { half_extent, data })
}

/// One (orientation, wavelength) channel and its quadrature kernels.
#[derive(Debug, Clone)]
pub struct GaborChannel {
    /// Index `k` of `theta = k pi / 8`.
    pub orientation: usize,
    /// Index into [`WAVELENGTHS`].
    pub wavelength: usize,
    pub theta: f64,
    pub lambda: f64,
    pub even: Kernel,
    pub odd: Kernel,
}

/// How a channel's quadrature responses become jet coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JetMode {
    /// `sqrt(r0^2 + r1^2)`: one coefficient per channel.
    #[default]
    Magnitude,
    /// Raw `(r0, r1)`: two coefficients per channel.
    Quadrature,
}

/// Ordered channels: orientation-major, then wavelength.
#[derive(Debug, Clone)]
pub struct GaborBank {
    channels: Vec<GaborChannel>,
    mode: JetMode,
}

impl GaborBank {
    pub fn channels(&self) -> &[GaborChannel] {
        &self.channels
    }

    /// Channel count `C`.
    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn mode(&self) -> JetMode {
        self.mode
    }

    pub fn with_mode(mut self, mode: JetMode) -> Self {
        self.mode = mode;
        self
    }

    /// Coefficients per landmark.
    pub fn jet_len(&self) -> usize {
        match self.mode {
            JetMode::Magnitude => self.len(),
            JetMode::Quadrature => 2 * self.len(),
        }
    }

    pub fn orientations(&self) -> Vec<usize> {
        let mut o: Vec<usize> = self.channels.iter().map(|c| c.orientation).collect();
        o.dedup();
        o
    }

    /// Position of each of this bank's channels inside `superset`.
    pub fn indices_in(&self, superset: &GaborBank) -> Result<Vec<usize>> {
        self.channels
            .iter()
            .map(|c| {
                superset
                    .channels
                    .iter()
                    .position(|s| s.orientation == c.orientation && s.wavelength == c.wavelength)
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "channel (orientation {}, wavelength {}) missing from superset",
                            c.orientation, c.wavelength
                        ))
                    })
            })
            .collect()
    }
}

/// Bank for one of the allowed orientation counts with the default subsets.
pub fn build_bank(num_orientations: usize) -> Result<GaborBank> {
    build_bank_with(default_orientation_subset(num_orientations)?, 1.0)
}

/// Bank over explicit orientation indices; wavelengths are multiplied by
/// `wavelength_scale`. Kernels extend to `ceil(3 sigma)`.
pub fn build_bank_with(orientations: &[usize], wavelength_scale: f64) -> Result<GaborBank> {
    if orientations.is_empty() || orientations.iter().any(|&k| k >= ORIENTATIONS) {
        return Err(Error::InvalidParameter(format!(
            "orientation indices must be in 0..{ORIENTATIONS}, got {orientations:?}"
        )));
    }
    if !(wavelength_scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "wavelength scale must be positive, got {wavelength_scale}"
        )));
    }
    let mut channels = Vec::with_capacity(orientations.len() * WAVELENGTHS.len());
    for &k in orientations {
        let theta = orientation_angle(k);
        for (j, &base) in WAVELENGTHS.iter().enumerate() {
            let lambda = base * wavelength_scale;
            let even = GaborParams::with_tied_sigma(theta, lambda, 0.0);
            let odd = GaborParams::with_tied_sigma(theta, lambda, FRAC_PI_2);
            let half = ((3.0 * even.sigma).ceil() as usize).max(1);
            channels.push(GaborChannel {
                orientation: k,
                wavelength: j,
                theta,
                lambda,
                even: gabor_kernel(&even, half)?,
                odd: gabor_kernel(&odd, half)?,
            });
        }
    }
    Ok(GaborBank {
        channels,
        mode: JetMode::Magnitude,
    })
}

/// Responses of all bank channels at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<f64>);

fn correlate(img: &ImageGray, kernel: &Kernel, px: isize, py: isize) -> f64 {
    let h = kernel.half_extent as isize;
    let side = kernel.side();
    let mut acc = 0.0;
    for dy in -h..=h {
        let row = &kernel.data[((dy + h) as usize) * side..((dy + h) as usize + 1) * side];
        for (i, k) in row.iter().enumerate() {
            acc += k * img.get_clamped(px + i as isize - h, py + dy);
        }
    }
    acc
}

/// Jet at the pixel nearest `point`; off-image kernel support replicates
/// the border.
pub fn jet_at(gray: &ImageGray, point: (f64, f64), bank: &GaborBank) -> Result<Jet> {
    let (x, y) = point;
    let (w, h) = (gray.width(), gray.height());
    if !(x >= 0.0 && y >= 0.0 && x <= (w - 1) as f64 && y <= (h - 1) as f64) {
        return Err(Error::InvalidPoint {
            x,
            y,
            width: w,
            height: h,
        });
    }
    let (px, py) = (x.round() as isize, y.round() as isize);
    let mut out = Vec::with_capacity(bank.jet_len());
    for ch in &bank.channels {
        let r0 = correlate(gray, &ch.even, px, py);
        let r1 = correlate(gray, &ch.odd, px, py);
        match bank.mode {
            JetMode::Magnitude => out.push(r0.hypot(r1)),
            JetMode::Quadrature => out.extend([r0, r1]),
        }
    }
    Ok(Jet(out))
}

/// Concatenated jets of P1..P10, length `10 x C`.
pub fn jets(gray: &ImageGray, lms: &LandmarkSet, bank: &GaborBank) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(10 * bank.jet_len());
    for lm in lms.iter() {
        out.extend(jet_at(gray, (lm.x, lm.y), bank)?.0);
    }
    Ok(out)
}

/// Picks the coefficients of `subset`'s channels out of a jets vector
/// computed with `superset`.
pub fn select_jets(full: &[f64], superset: &GaborBank, subset: &GaborBank) -> Result<Vec<f64>> {
    let c = superset.jet_len();
    if full.len() != 10 * c {
        return Err(Error::InvalidInput(format!(
            "jets vector has {} values, expected {}",
            full.len(),
            10 * c
        )));
    }
    if subset.mode != superset.mode {
        return Err(Error::InvalidParameter("banks use different jet modes".into()));
    }
    let per = c / superset.len();
    let idx = subset.indices_in(superset)?;
    Ok(full
        .chunks(c)
        .flat_map(|jet| {
            idx.iter()
                .flat_map(move |&i| jet[i * per..(i + 1) * per].iter().copied())
        })
        .collect())
}
