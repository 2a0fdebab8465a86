//! Feature files, manifests and synthetic data.

pub mod features;
pub mod manifest;
pub mod synth;

pub use features::{read_features, write_features, FeatureSequence};
pub use manifest::{load_manifest, Manifest, VideoRecord};
pub use synth::{generate_synthetic, SynthSpec};
