//! Plain-text model files.
//!
//! ```text
//! gaborface-model
//! version 1
//! kind fused
//! orientations 5
//! jet_mode magnitude
//! wavelength_scale 1
//! input_dim 257
//! hidden_dim 16
//! persons 2
//! label alice
//! label bob
//! norm_min
//! <input_dim values>
//! norm_max
//! <input_dim values>
//! net 0
//! <hidden_dim * input_dim + 2 * hidden_dim + 1 values: w1, b1, w2, b2>
//! net 1
//! ...
//! ```
//!
//! Values are one per line in Rust's shortest round-trip notation, so
//! loading reproduces every weight bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::ensemble::Ensemble;
use super::mlp::MlpNet;
use super::normalize::Normalizer;
use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureSpec, JetMode};

pub const MAGIC: &str = "gaborface-model";
pub const VERSION: u32 = 1;

pub fn model_to_string(e: &Ensemble) -> String {
    let mut out = String::new();
    let spec = e.features();
    let mode = match spec.jet_mode {
        JetMode::Magnitude => "magnitude",
        JetMode::Quadrature => "quadrature",
    };
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "version {VERSION}").unwrap();
    writeln!(out, "kind {}", spec.kind).unwrap();
    writeln!(out, "orientations {}", spec.orientations).unwrap();
    writeln!(out, "jet_mode {mode}").unwrap();
    writeln!(out, "wavelength_scale {}", spec.wavelength_scale).unwrap();
    writeln!(out, "input_dim {}", e.input_dim()).unwrap();
    writeln!(out, "hidden_dim {}", e.hidden_dim()).unwrap();
    writeln!(out, "persons {}", e.labels().len()).unwrap();
    for l in e.labels() {
        writeln!(out, "label {l}").unwrap();
    }
    let mut values = |name: &str, vs: &[f64]| {
        writeln!(out, "{name}").unwrap();
        for v in vs {
            writeln!(out, "{v}").unwrap();
        }
    };
    values("norm_min", &e.normalizer().min);
    values("norm_max", &e.normalizer().max);
    for (i, net) in e.nets().iter().enumerate() {
        values(&format!("net {i}"), &net.parameters());
    }
    out
}

pub fn save_model(e: &Ensemble, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_string(e)).map_err(|err| Error::io(path, err))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Ensemble> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|err| Error::io(path, err))?;
    model_from_str(&text)
}

fn format_error(field: &str, reason: impl Into<String>) -> Error {
    Error::ModelFormat {
        field: field.to_string(),
        reason: reason.into(),
    }
}

struct Lines<'a> {
    inner: std::str::Lines<'a>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, field: &str) -> Result<&'a str> {
        self.inner.next().ok_or_else(|| format_error(field, "file ends early"))
    }

    /// `key value` line; returns the value.
    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next(key)?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| format_error(key, format!("expected `{key} <value>`, found `{line}`")))
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.keyed(key)?;
        v.parse().map_err(|_| format_error(key, format!("cannot parse `{v}`")))
    }

    fn marker(&mut self, name: &str) -> Result<()> {
        let line = self.next(name)?;
        if line != name {
            return Err(format_error(name, format!("expected `{name}`, found `{line}`")));
        }
        Ok(())
    }

    fn values(&mut self, field: &str, n: usize) -> Result<Vec<f64>> {
        (0..n)
            .map(|i| {
                let line = self.next(field)?;
                line.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format_error(field, format!("value {i} `{line}` is not a finite number")))
            })
            .collect()
    }
}

pub fn model_from_str(text: &str) -> Result<Ensemble> {
    let mut lines = Lines { inner: text.lines() };
    if lines.next("header")? != MAGIC {
        return Err(format_error("header", format!("missing `{MAGIC}` magic line")));
    }
    let version: u32 = lines.parsed("version")?;
    if version != VERSION {
        return Err(format_error(
            "version",
            format!("unsupported version {version}, expected {VERSION}"),
        ));
    }
    let kind: FeatureKind = lines
        .keyed("kind")?
        .parse()
        .map_err(|e: Error| format_error("kind", e.to_string()))?;
    let orientations: usize = lines.parsed("orientations")?;
    let jet_mode = match lines.keyed("jet_mode")? {
        "magnitude" => JetMode::Magnitude,
        "quadrature" => JetMode::Quadrature,
        other => return Err(format_error("jet_mode", format!("unknown mode `{other}`"))),
    };
    let wavelength_scale: f64 = lines.parsed("wavelength_scale")?;
    let spec = FeatureSpec {
        kind,
        orientations,
        jet_mode,
        wavelength_scale,
    };
    spec.validate()
        .map_err(|e| format_error("orientations", e.to_string()))?;
    let input_dim: usize = lines.parsed("input_dim")?;
    let hidden_dim: usize = lines.parsed("hidden_dim")?;
    let persons: usize = lines.parsed("persons")?;
    if input_dim == 0 || hidden_dim == 0 || persons < 2 {
        return Err(format_error(
            "persons",
            "need input_dim, hidden_dim >= 1 and persons >= 2",
        ));
    }
    let labels = (0..persons)
        .map(|_| lines.keyed("label").map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    lines.marker("norm_min")?;
    let min = lines.values("norm_min", input_dim)?;
    lines.marker("norm_max")?;
    let max = lines.values("norm_max", input_dim)?;
    let per_net = hidden_dim * input_dim + 2 * hidden_dim + 1;
    let mut nets = Vec::with_capacity(persons);
    for i in 0..persons {
        let field = format!("net {i}");
        lines.marker(&field)?;
        let p = lines.values(&field, per_net)?;
        let (w1, rest) = p.split_at(hidden_dim * input_dim);
        let (b1, rest) = rest.split_at(hidden_dim);
        let (w2, b2) = rest.split_at(hidden_dim);
        nets.push(
            MlpNet::from_parts(input_dim, hidden_dim, w1.to_vec(), b1.to_vec(), w2.to_vec(), b2[0])
                .map_err(|e| format_error(&field, e.to_string()))?,
        );
    }
    if let Some(extra) = lines.inner.find(|l| !l.trim().is_empty()) {
        return Err(format_error(
            "trailer",
            format!("unexpected line `{extra}` after the last network"),
        ));
    }
    Ensemble::from_parts(spec, labels, Normalizer { min, max }, nets)
        .map_err(|e| format_error("persons", e.to_string()))
}
