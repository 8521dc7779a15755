//! Face detection and recognition from color images.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`skin`]: fuzzy (zero-order Takagi-Sugeno) classification of each
//!    pixel's Cb/Cr chrominance into skin / non-skin.
//! 2. [`face_locate`]: the largest skin region's external edge gives a face
//!    box whose height is 1.3 times its width; the crop is normalized to a
//!    50x50 chip.
//! 3. [`fiducial`]: eyes (Cb - Cr), mouth (Cr + Sobel) and nose (luminance
//!    Sobel between them) yield ten characteristic points.
//! 4. [`features`]: seven geometric distances and Gabor jets sampled at the
//!    ten points, alone or fused.
//! 5. [`recognizer`]: one small sigmoid MLP per enrolled person; the
//!    identity is the network with the highest output.
//!
//! [`dataset`] and [`toyset`] provide directory-layout datasets and a
//! deterministic synthetic face generator for running the evaluation
//! protocol without a licensed face database.

// Negated comparisons reject NaN parameters along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
mod error;
pub mod face_locate;
pub mod features;
pub mod fiducial;
pub mod imaging;
pub mod pipeline;
pub mod recognizer;
mod rng;
pub mod skin;
pub mod toyset;

pub use error::{Error, FacialFeature, Result};
pub use imaging::{BinaryMask, ImageGray, ImageRgb, ImageYCbCr};
