//! Pixel-level skin classification in the Cb/Cr chrominance plane.
//!
//! Two classifiers are provided: the crisp box rule `Cb in [77, 127]`,
//! `Cr in [133, 173]`, and a zero-order Takagi-Sugeno fuzzy system with
//! three trapezoidal labels per channel and nine rules. The fuzzy output is
//! the firing-degree weighted average of the rule outputs; a pixel is skin
//! when that average reaches the decision threshold.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, ImageYCbCr};

pub const CRISP_CB: (f64, f64) = (77.0, 127.0);
pub const CRISP_CR: (f64, f64) = (133.0, 173.0);

/// Crisp chrominance box, bounds inclusive.
pub fn crisp_skin(cb: f64, cr: f64) -> bool {
    (CRISP_CB.0..=CRISP_CB.1).contains(&cb) && (CRISP_CR.0..=CRISP_CR.1).contains(&cr)
}

pub fn crisp_mask(img: &ImageYCbCr) -> BinaryMask {
    BinaryMask::from_fn(img.width(), img.height(), |x, y| {
        let [_, cb, cr] = img.get(x, y);
        crisp_skin(cb, cr)
    })
}

/// Linguistic label of a fuzzy set. `Light` covers low channel values and
/// `Dark` high ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Light,
    Medium,
    Dark,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Light, Label::Medium, Label::Dark];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Light => "light",
            Label::Medium => "medium",
            Label::Dark => "dark",
        })
    }
}

/// Trapezoid `(a, b, c, d)`: 0 outside `[a, d]`, 1 on `[b, c]`, linear on the
/// skirts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Trapezoid {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl From<[f64; 4]> for Trapezoid {
    fn from([a, b, c, d]: [f64; 4]) -> Self {
        Self { a, b, c, d }
    }
}

impl From<Trapezoid> for [f64; 4] {
    fn from(t: Trapezoid) -> Self {
        [t.a, t.b, t.c, t.d]
    }
}

impl Trapezoid {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn degree(&self, x: f64) -> f64 {
        if x < self.a || x > self.d {
            0.0
        } else if x >= self.b && x <= self.c {
            1.0
        } else if x < self.b {
            (x - self.a) / (self.b - self.a)
        } else {
            (self.d - x) / (self.d - self.c)
        }
    }

    /// Largest skirt slope; `degree` is Lipschitz with this constant.
    pub fn max_slope(&self) -> f64 {
        let left = if self.b > self.a { 1.0 / (self.b - self.a) } else { 0.0 };
        let right = if self.d > self.c { 1.0 / (self.d - self.c) } else { 0.0 };
        left.max(right)
    }

    fn validate(&self, what: &str) -> Result<()> {
        let ordered = self.a <= self.b && self.b <= self.c && self.c <= self.d;
        let in_range = self.a >= 0.0 && self.d <= 255.0;
        if !(ordered && in_range) {
            return Err(Error::Config(format!(
                "{what}: breakpoints {:?} must satisfy 0 <= a <= b <= c <= d <= 255",
                <[f64; 4]>::from(*self)
            )));
        }
        Ok(())
    }

    /// Open/closed interval on which the degree is positive.
    fn support(&self) -> (f64, bool, f64, bool) {
        (self.a, self.a == self.b, self.d, self.c == self.d)
    }
}

/// The three fuzzy sets of one input channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelMemberships {
    pub light: Trapezoid,
    pub medium: Trapezoid,
    pub dark: Trapezoid,
}

impl ChannelMemberships {
    pub fn get(&self, label: Label) -> &Trapezoid {
        match label {
            Label::Light => &self.light,
            Label::Medium => &self.medium,
            Label::Dark => &self.dark,
        }
    }

    /// Degrees indexed by [`Label`] order (light, medium, dark).
    pub fn fuzzify(&self, x: f64) -> [f64; 3] {
        [self.light.degree(x), self.medium.degree(x), self.dark.degree(x)]
    }

    fn validate(&self, channel: &str) -> Result<()> {
        for label in Label::ALL {
            self.get(label).validate(&format!("{channel}.{label}"))?;
        }
        // The union of the positive supports must cover [0, 255].
        let mut supports: Vec<_> = Label::ALL.iter().map(|&l| self.get(l).support()).collect();
        supports.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut reach = 0.0;
        let mut reach_closed = true;
        let mut started = false;
        for (lo, lo_closed, hi, hi_closed) in supports {
            let connects = if !started {
                lo < 0.0 || (lo == 0.0 && lo_closed)
            } else {
                lo < reach || (lo == reach && (lo_closed || reach_closed))
            };
            if !connects {
                return Err(Error::Config(format!(
                    "{channel}: memberships leave a gap near {}",
                    if started { reach } else { 0.0 }
                )));
            }
            started = true;
            if hi > reach || (hi == reach && hi_closed) {
                reach = hi;
                reach_closed = hi_closed;
            }
        }
        if reach < 255.0 || (reach == 255.0 && !reach_closed) {
            return Err(Error::Config(format!("{channel}: memberships do not reach 255")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub cb: Label,
    pub cr: Label,
    /// Constant consequent (0 = non-skin, 1 = skin).
    pub output: u8,
}

/// Membership shapes, rule table, and decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisConfig {
    pub decision_threshold: f64,
    pub cb: ChannelMemberships,
    pub cr: ChannelMemberships,
    pub rules: Vec<FuzzyRule>,
}

/// The nine-rule table: only (Medium, Medium), (Medium, Dark) and
/// (Dark, Medium) are skin.
pub fn default_rules() -> Vec<FuzzyRule> {
    let mut rules = Vec::with_capacity(9);
    for cb in Label::ALL {
        for cr in Label::ALL {
            let skin = matches!(
                (cb, cr),
                (Label::Medium, Label::Medium) | (Label::Medium, Label::Dark) | (Label::Dark, Label::Medium)
            );
            rules.push(FuzzyRule {
                cb,
                cr,
                output: u8::from(skin),
            });
        }
    }
    rules
}

impl Default for FisConfig {
    fn default() -> Self {
        Self {
            decision_threshold: 0.5,
            cb: ChannelMemberships {
                light: Trapezoid::new(0.0, 0.0, 67.0, 87.0),
                medium: Trapezoid::new(67.0, 87.0, 117.0, 137.0),
                dark: Trapezoid::new(117.0, 137.0, 255.0, 255.0),
            },
            cr: ChannelMemberships {
                light: Trapezoid::new(0.0, 0.0, 123.0, 143.0),
                medium: Trapezoid::new(123.0, 143.0, 163.0, 183.0),
                dark: Trapezoid::new(163.0, 183.0, 255.0, 255.0),
            },
            rules: default_rules(),
        }
    }
}

impl FisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.decision_threshold > 0.0 && self.decision_threshold < 1.0) {
            return Err(Error::Config(format!(
                "decision_threshold must lie in (0, 1), got {}",
                self.decision_threshold
            )));
        }
        self.cb.validate("cb")?;
        self.cr.validate("cr")?;
        if self.rules.len() != 9 {
            return Err(Error::Config(format!("expected 9 rules, found {}", self.rules.len())));
        }
        let mut seen = [[false; 3]; 3];
        for rule in &self.rules {
            if rule.output > 1 {
                return Err(Error::Config(format!(
                    "rule ({}, {}) output must be 0 or 1",
                    rule.cb, rule.cr
                )));
            }
            let slot = &mut seen[rule.cb.index()][rule.cr.index()];
            if *slot {
                return Err(Error::Config(format!("duplicate rule for ({}, {})", rule.cb, rule.cr)));
            }
            *slot = true;
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: FisConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("fuzzy config serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Firing degree of every rule, in rule-table order.
    pub fn firing_degrees(&self, cb: f64, cr: f64) -> Vec<f64> {
        let dcb = self.cb.fuzzify(cb);
        let dcr = self.cr.fuzzify(cr);
        self.rules
            .iter()
            .map(|r| dcb[r.cb.index()].min(dcr[r.cr.index()]))
            .collect()
    }

    /// Skin score used for masks: degenerate inputs score 0.
    pub fn skin_score(&self, cb: f64, cr: f64) -> f64 {
        match fis_evaluate(cb, cr, self) {
            Ok(v) => v,
            Err(_) => {
                log::warn!("no fuzzy rule fires at (cb={cb}, cr={cr}); scoring as non-skin");
                0.0
            }
        }
    }
}

/// Degree of `x` in each of the three sets, ordered light, medium, dark.
pub fn fuzzify(x: f64, memberships: &ChannelMemberships) -> [f64; 3] {
    memberships.fuzzify(x)
}

/// Weighted-average defuzzification `sum(p_i z_i) / sum(p_i)`.
pub fn defuzzify(degrees: &[f64], outputs: impl IntoIterator<Item = f64>) -> Result<f64> {
    let (num, den) = degrees
        .iter()
        .zip(outputs)
        .fold((0.0, 0.0), |(n, d), (&p, z)| (n + p * z, d + p));
    if den <= 0.0 {
        return Err(Error::DegenerateFiring);
    }
    Ok(num / den)
}

/// Defuzzified skin likelihood in `[0, 1]`.
pub fn fis_evaluate(cb: f64, cr: f64, config: &FisConfig) -> Result<f64> {
    let degrees = config.firing_degrees(cb, cr);
    defuzzify(&degrees, config.rules.iter().map(|r| f64::from(r.output)))
}

pub fn skin_mask(img: &ImageYCbCr, config: &FisConfig) -> BinaryMask {
    BinaryMask::from_fn(img.width(), img.height(), |x, y| {
        let [_, cb, cr] = img.get(x, y);
        config.skin_score(cb, cr) >= config.decision_threshold
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(cb: f64, cr: f64) -> ImageYCbCr {
        ImageYCbCr::from_fn(4, 3, |_, _| [120.0, cb, cr])
    }

    #[test]
    fn crisp_bounds_are_inclusive() {
        assert!(crisp_skin(100.0, 150.0));
        assert!(!crisp_skin(76.0, 150.0));
        assert!(crisp_skin(127.0, 173.0));
        assert!(crisp_skin(77.0, 133.0));
        assert!(!crisp_skin(127.5, 150.0));
        assert!(!crisp_skin(100.0, 173.5));
    }

    #[test]
    fn crisp_mask_matches_pointwise_rule() {
        assert_eq!(crisp_mask(&uniform(100.0, 150.0)).count(), 12);
        assert_eq!(crisp_mask(&uniform(128.0, 128.0)).count(), 0);
        let mixed = ImageYCbCr::from_fn(6, 6, |x, y| [0.0, 60.0 + 15.0 * x as f64, 120.0 + 10.0 * y as f64]);
        let mask = crisp_mask(&mixed);
        for y in 0..6 {
            for x in 0..6 {
                let [_, cb, cr] = mixed.get(x, y);
                assert_eq!(mask.get(x, y), crisp_skin(cb, cr));
            }
        }
    }

    #[test]
    fn default_cb_crossover_at_77() {
        let d = fuzzify(77.0, &FisConfig::default().cb);
        assert_eq!(d, [0.5, 0.5, 0.0]);
    }

    #[test]
    fn plateau_and_crossover_degrees() {
        let cfg = FisConfig::default();
        assert_eq!(cfg.cr.fuzzify(150.0)[1], 1.0);
        // Medium and Dark skirts of Cb cross at 127.
        let d = cfg.cb.fuzzify(127.0);
        assert_eq!(d[1], d[2]);
    }

    #[test]
    fn evaluation_examples() {
        let cfg = FisConfig::default();
        assert_eq!(fis_evaluate(100.0, 150.0, &cfg).unwrap(), 1.0);
        assert_eq!(fis_evaluate(30.0, 60.0, &cfg).unwrap(), 0.0);
        // Cb = 127 fires Medium and Dark at 0.5 each; rules 5 and 8 both give 1.
        let firing = cfg.firing_degrees(127.0, 150.0);
        assert_eq!(firing.iter().filter(|&&p| p > 0.0).count(), 2);
        assert_eq!(fis_evaluate(127.0, 150.0, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn masks_follow_threshold() {
        let cfg = FisConfig::default();
        assert_eq!(skin_mask(&uniform(100.0, 150.0), &cfg).count(), 12);
        assert_eq!(skin_mask(&uniform(0.0, 0.0), &cfg).count(), 0);
        let neutral = uniform(128.0, 128.0);
        assert_eq!(skin_mask(&neutral, &cfg), skin_mask(&neutral, &cfg));
    }

    #[test]
    fn degenerate_firing_is_reported() {
        let mut cfg = FisConfig::default();
        cfg.cb.light = Trapezoid::new(0.0, 0.0, 10.0, 20.0);
        cfg.cb.medium = Trapezoid::new(30.0, 40.0, 50.0, 60.0);
        cfg.cb.dark = Trapezoid::new(200.0, 210.0, 255.0, 255.0);
        assert!(cfg.validate().is_err());
        assert!(matches!(fis_evaluate(100.0, 150.0, &cfg), Err(Error::DegenerateFiring)));
        assert_eq!(cfg.skin_score(100.0, 150.0), 0.0);
    }

    #[test]
    fn validation_rejects_bad_tables() {
        let mut cfg = FisConfig::default();
        cfg.rules.pop();
        assert!(cfg.validate().is_err());
        let mut cfg = FisConfig::default();
        cfg.rules[0] = cfg.rules[1];
        assert!(cfg.validate().is_err());
        let cfg = FisConfig {
            decision_threshold: 1.0,
            ..FisConfig::default()
        };
        assert!(cfg.validate().is_err());
        let mut cfg = FisConfig::default();
        cfg.cr.medium = Trapezoid::new(150.0, 140.0, 160.0, 170.0);
        assert!(cfg.validate().is_err());
        assert!(FisConfig::default().validate().is_ok());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = FisConfig::default();
        let text = cfg.to_toml_string();
        assert_eq!(FisConfig::from_toml_str(&text).unwrap(), cfg);
        assert!(FisConfig::from_toml_str("decision_threshold = 0.5").is_err());
    }
}
