//! Keyframe detection over per-frame feature sequences.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! 1. [`labeler`] derives per-frame training labels from a class-versus-rest
//!    Fisher discriminant over fused frame features.
//! 2. [`regressor`] trains a one-hidden-layer regression head on those labels.
//! 3. [`smoother`] fits a natural cubic smoothing spline to a video's
//!    predicted scores.
//! 4. [`selector`] reports the interior extrema of the fitted curve as
//!    keyframes.
//! 5. [`metrics`] compares detected keyframes with ground truth by count and
//!    by location.
//!
//! [`dataset`] holds the binary feature format, JSON manifests and the
//! synthetic generator; [`pipeline`] wires the stages into the `kfd` CLI.

pub mod dataset;
pub mod error;
pub mod labeler;
pub mod metrics;
pub mod pipeline;
pub mod regressor;
pub mod rng;
pub mod selector;
pub mod smoother;

pub use error::{Error, Result};
