use std::fmt;
use std::path::PathBuf;

use crate::fiducial::Role;

/// Facial feature searched for by the fiducial locators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacialFeature {
    LeftEye,
    RightEye,
    Mouth,
    Nose,
}

impl fmt::Display for FacialFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FacialFeature::LeftEye => "left eye",
            FacialFeature::RightEye => "right eye",
            FacialFeature::Mouth => "mouth",
            FacialFeature::Nose => "nose",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no face found")]
    NoFaceFound,

    #[error("{feature} not found: {reason}")]
    FeatureNotFound { feature: FacialFeature, reason: String },

    #[error("inconsistent landmarks: {}", format_roles(.roles))]
    LandmarkInconsistency { roles: Vec<Role> },

    #[error("all fuzzy rules have zero firing degree")]
    DegenerateFiring,

    #[error("face box lies outside the image")]
    InvalidBox,

    #[error("point ({x}, {y}) lies outside the {width}x{height} image")]
    InvalidPoint {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("degenerate training task: {0}")]
    DegenerateTask(String),

    #[error("model format error in `{field}`: {reason}")]
    ModelFormat { field: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    /// True for detection and fiducial failures, which the CLI reports
    /// with their own exit code.
    pub fn is_detection_failure(&self) -> bool {
        matches!(
            self,
            Error::NoFaceFound | Error::FeatureNotFound { .. } | Error::LandmarkInconsistency { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn format_roles(roles: &[Role]) -> String {
    roles.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
